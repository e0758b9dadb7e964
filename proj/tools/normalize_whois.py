#!/usr/bin/env python3
"""Turn raw WHOIS responses into the fixture format bitscan reads.

Input is JSON lines, one per domain:
    {"domain": "example.com", "raw": "<whois text>", "resolved_at": 1380585600, "alive": true}

Output is JSON lines with epoch-second dates (UTC):
    {"domain": ..., "created_at": ..., "updated_at": ..., "expires_at": ..., "resolved_at": ..., "alive": ...}

Dates that cannot be found or parsed are written as null. Timestamps with no
zone are read as UTC.
"""

import argparse
import json
import re
import sys
from datetime import datetime, timezone

FIELDS = {
    "created_at": ("creation date", "created on", "created", "registered on", "registration date", "domain registration date"),
    "updated_at": ("updated date", "last updated on", "last updated", "last modified", "changed", "modified"),
    "expires_at": ("registry expiry date", "registrar registration expiration date", "expiration date",
                   "expiry date", "expires on", "expires", "paid-till"),
}

FORMATS = (
    "%Y-%m-%dT%H:%M:%S%z",
    "%Y-%m-%dT%H:%M:%S.%f%z",
    "%Y-%m-%dT%H:%M:%S",
    "%Y-%m-%d %H:%M:%S%z",
    "%Y-%m-%d %H:%M:%S",
    "%Y-%m-%d",
    "%Y.%m.%d",
    "%Y/%m/%d",
    "%d-%b-%Y",
    "%d-%b-%Y %H:%M:%S",
    "%d.%m.%Y",
)

LINE = re.compile(r"^\s*([A-Za-z][A-Za-z \-/]*?)\s*:\s*(.+?)\s*$")


def parse_date(text):
    text = text.strip()
    # "Z" suffix and "+00:00" style offsets
    cleaned = re.sub(r"\s+(UTC|GMT)$", "", text)
    cleaned = re.sub(r"Z$", "+0000", cleaned)
    cleaned = re.sub(r"([+-]\d\d):(\d\d)$", r"\1\2", cleaned)
    for fmt in FORMATS:
        try:
            dt = datetime.strptime(cleaned, fmt)
        except ValueError:
            continue
        if dt.tzinfo is None:
            dt = dt.replace(tzinfo=timezone.utc)
        return int(dt.timestamp())
    return None


def extract(raw):
    found = {}
    for line in raw.splitlines():
        m = LINE.match(line)
        if not m:
            continue
        key = m.group(1).strip().lower()
        for field, labels in FIELDS.items():
            # first occurrence wins; registries repeat fields for sub-records
            if field not in found and key in labels:
                value = parse_date(m.group(2))
                if value is not None:
                    found[field] = value
    return found


def normalize(record):
    dates = extract(record.get("raw", ""))
    return {
        "domain": record["domain"].strip().lower(),
        "created_at": dates.get("created_at"),
        "updated_at": dates.get("updated_at"),
        "expires_at": dates.get("expires_at"),
        "resolved_at": int(record["resolved_at"]),
        "alive": bool(record.get("alive", False)),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("input", help="raw WHOIS JSONL, '-' for stdin")
    ap.add_argument("-o", "--output", default="-", help="fixture JSONL, '-' for stdout")
    args = ap.parse_args(argv)

    src = sys.stdin if args.input == "-" else open(args.input, encoding="utf-8")
    dst = sys.stdout if args.output == "-" else open(args.output, "w", encoding="utf-8")
    bad = 0
    with src, dst:
        for n, line in enumerate(src, 1):
            if not line.strip():
                continue
            try:
                out = normalize(json.loads(line))
            except (ValueError, KeyError, TypeError) as e:
                print(f"line {n}: skipped ({e})", file=sys.stderr)
                bad += 1
                continue
            dst.write(json.dumps(out, sort_keys=False) + "\n")
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
