#pragma once

// Core domain types (short links, encoder accounts, clicks), the immutable
// Dataset container with its JSONL reader/writer, and registrable-domain
// extraction.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "common.hpp"
#include "public_suffix.hpp"

namespace bitscan {

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Registrable domain
// ---------------------------------------------------------------------------

namespace detail {

inline bool is_ipv4(std::string_view host) {
    int parts = 0;
    std::size_t i = 0;
    while (i <= host.size()) {
        std::size_t j = host.find('.', i);
        if (j == std::string_view::npos) j = host.size();
        auto part = host.substr(i, j - i);
        if (part.empty() || part.size() > 3) return false;
        int v = 0;
        for (char c : part) {
            if (c < '0' || c > '9') return false;
            v = v * 10 + (c - '0');
        }
        if (v > 255) return false;
        ++parts;
        i = j + 1;
    }
    return parts == 4;
}

inline bool valid_hostname(std::string_view host) {
    if (host.empty() || host.front() == '.' || host.find("..") != std::string_view::npos) return false;
    for (unsigned char c : host) {
        if (!(std::isalnum(c) || c == '-' || c == '.' || c == '_')) return false;
    }
    return true;
}

}  // namespace detail

/// Host component of an absolute URL, lowercased, without userinfo, port or
/// trailing dot. Throws invalid_input when the URL has no scheme or host.
inline std::string url_host(std::string_view url) {
    auto sep = url.find("://");
    if (sep == std::string_view::npos || sep == 0) {
        throw invalid_input("not an absolute URL: '" + std::string(url) + "'");
    }
    for (std::size_t i = 0; i < sep; ++i) {
        unsigned char c = static_cast<unsigned char>(url[i]);
        bool ok = std::isalpha(c) || (i > 0 && (std::isdigit(c) || c == '+' || c == '-' || c == '.'));
        if (!ok) throw invalid_input("bad URL scheme: '" + std::string(url) + "'");
    }
    auto rest = url.substr(sep + 3);
    auto authority = rest.substr(0, rest.find_first_of("/?#"));
    if (auto at = authority.rfind('@'); at != std::string_view::npos) authority = authority.substr(at + 1);

    std::string host;
    if (authority.starts_with("[")) {
        auto close = authority.find(']');
        if (close == std::string_view::npos || close == 1) {
            throw invalid_input("bad IPv6 host in URL: '" + std::string(url) + "'");
        }
        return to_lower(authority.substr(0, close + 1));
    }
    host = to_lower(authority.substr(0, authority.find(':')));
    if (!host.empty() && host.back() == '.') host.pop_back();
    if (!detail::valid_hostname(host)) throw invalid_input("URL has no valid host: '" + std::string(url) + "'");
    return host;
}

/// Public suffix plus one label, lowercased. IP-address hosts are returned
/// verbatim; suffixes missing from the bundled list fall back to the last
/// two labels.
inline std::string registrable_domain(std::string_view url) {
    std::string host = url_host(url);
    if (host.starts_with("[") || detail::is_ipv4(host)) return host;

    std::vector<std::size_t> dots;
    for (std::size_t i = 0; i < host.size(); ++i) {
        if (host[i] == '.') dots.push_back(i);
    }
    const std::size_t labels = dots.size() + 1;
    std::size_t suffix = psl::SuffixTable::instance().suffix_labels(host);
    if (suffix == 0) suffix = 1;
    const std::size_t keep = suffix + 1;
    if (keep >= labels) return host;
    return host.substr(dots[labels - keep - 1] + 1);
}

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

struct ShortLink {
    std::string global_hash;
    std::string long_url;
    std::string domain;  // registrable_domain(long_url)
    std::int64_t created_at = 0;
    std::vector<std::string> encoder_ids;
    std::optional<std::int64_t> warning_page_count;
    std::optional<Label> label;

    bool operator==(const ShortLink&) const = default;
};

enum class EncoderKind { regular, anonymous, third_party_app };

inline std::string_view to_string(EncoderKind k) {
    switch (k) {
        case EncoderKind::regular: return "regular";
        case EncoderKind::anonymous: return "anonymous";
        case EncoderKind::third_party_app: return "third_party_app";
    }
    return "regular";
}

inline std::optional<EncoderKind> parse_encoder_kind(std::string_view s) {
    if (s == "regular") return EncoderKind::regular;
    if (s == "anonymous") return EncoderKind::anonymous;
    if (s == "third_party_app") return EncoderKind::third_party_app;
    return std::nullopt;
}

struct ConnectedAccount {
    std::string network;
    std::string account_id;

    bool operator==(const ConnectedAccount&) const = default;
};

struct HistoryEntry {
    std::string global_hash;
    bool warning_flagged = false;

    bool operator==(const HistoryEntry&) const = default;
};

struct EncoderProfile {
    std::string encoder_id;
    EncoderKind kind = EncoderKind::regular;
    std::optional<std::int64_t> account_created_at;
    std::vector<ConnectedAccount> connected_networks;
    std::vector<HistoryEntry> link_history;

    bool operator==(const EncoderProfile&) const = default;
};

struct ClickEvent {
    std::string global_hash;
    std::int64_t clicked_at = 0;
    std::string referrer_domain;  // empty means a direct click

    bool operator==(const ClickEvent&) const = default;
};

/// One record dropped while assembling a Dataset.
struct DropNote {
    std::size_t line = 0;  // 1-based source line, 0 when not file-backed
    std::string record_type;
    std::string id;
    std::string reason;
};

struct LoadReport {
    std::size_t lines = 0;  // non-blank lines seen
    std::size_t malformed = 0;
    std::vector<DropNote> drops;  // malformed records and invariant violations

    std::size_t violations() const { return drops.size() - malformed; }
};

/// Immutable collection of links, encoders and clicks that satisfies the
/// cross-record invariants. Build it with Dataset::assemble or load_dataset.
class Dataset {
public:
    Dataset() = default;

    /// Validates the records and keeps those that satisfy every invariant,
    /// preserving input order. Dropped records are appended to `report`.
    /// `lines` optionally gives the source line of each record.
    static Dataset assemble(std::vector<ShortLink> links, std::vector<EncoderProfile> encoders,
                            std::vector<ClickEvent> clicks, LoadReport& report,
                            const std::vector<std::size_t>& link_lines = {},
                            const std::vector<std::size_t>& encoder_lines = {},
                            const std::vector<std::size_t>& click_lines = {}) {
        auto line_of = [](const std::vector<std::size_t>& v, std::size_t i) -> std::size_t {
            return i < v.size() ? v[i] : 0;
        };
        auto drop = [&report](std::size_t line, const char* type, const std::string& id, std::string reason) {
            report.drops.push_back({line, type, id, std::move(reason)});
        };

        Dataset ds;
        for (std::size_t i = 0; i < encoders.size(); ++i) {
            auto& e = encoders[i];
            if (e.encoder_id.empty()) {
                drop(line_of(encoder_lines, i), "encoder", e.encoder_id, "empty encoder_id");
            } else if (ds.encoder_index_.contains(e.encoder_id)) {
                drop(line_of(encoder_lines, i), "encoder", e.encoder_id, "duplicate encoder_id");
            } else {
                ds.encoder_index_.emplace(e.encoder_id, ds.encoders_.size());
                ds.encoders_.push_back(std::move(e));
            }
        }

        for (std::size_t i = 0; i < links.size(); ++i) {
            auto& l = links[i];
            const std::size_t line = line_of(link_lines, i);
            if (l.global_hash.empty()) {
                drop(line, "link", l.global_hash, "empty global_hash");
                continue;
            }
            if (ds.link_index_.contains(l.global_hash)) {
                drop(line, "link", l.global_hash, "duplicate global_hash");
                continue;
            }
            if (l.warning_page_count && *l.warning_page_count < 0) {
                drop(line, "link", l.global_hash, "negative warning_page_count");
                continue;
            }
            if (l.encoder_ids.empty()) {
                drop(line, "link", l.global_hash, "no encoders");
                continue;
            }
            std::string missing;
            for (const auto& id : l.encoder_ids) {
                if (!ds.encoder_index_.contains(id)) {
                    missing = id;
                    break;
                }
            }
            if (!missing.empty()) {
                drop(line, "link", l.global_hash, "unknown encoder '" + missing + "'");
                continue;
            }
            try {
                l.domain = registrable_domain(l.long_url);
            } catch (const invalid_input& ex) {
                drop(line, "link", l.global_hash, ex.what());
                continue;
            }
            ds.link_index_.emplace(l.global_hash, ds.links_.size());
            ds.links_.push_back(std::move(l));
        }

        for (std::size_t i = 0; i < clicks.size(); ++i) {
            auto& c = clicks[i];
            const std::size_t line = line_of(click_lines, i);
            const ShortLink* link = ds.find_link(c.global_hash);
            if (link == nullptr) {
                drop(line, "click", c.global_hash, "click for unknown link");
            } else if (c.clicked_at < 0) {
                drop(line, "click", c.global_hash, "negative clicked_at");
            } else if (c.referrer_domain.find_first_of("/:?#") != std::string::npos) {
                drop(line, "click", c.global_hash, "referrer_domain contains scheme or path");
            } else if (c.clicked_at < link->created_at) {
                drop(line, "click", c.global_hash, "clicked_at precedes link creation");
            } else {
                ds.clicks_[c.global_hash].push_back(std::move(c));
                ++ds.click_count_;
            }
        }
        return ds;
    }

    const std::vector<ShortLink>& links() const { return links_; }
    const std::vector<EncoderProfile>& encoders() const { return encoders_; }
    std::size_t click_count() const { return click_count_; }

    const ShortLink* find_link(const std::string& hash) const {
        auto it = link_index_.find(hash);
        return it == link_index_.end() ? nullptr : &links_[it->second];
    }

    const EncoderProfile* find_encoder(const std::string& id) const {
        auto it = encoder_index_.find(id);
        return it == encoder_index_.end() ? nullptr : &encoders_[it->second];
    }

    std::span<const ClickEvent> clicks_of(const std::string& hash) const {
        auto it = clicks_.find(hash);
        if (it == clicks_.end()) return {};
        return it->second;
    }

    /// Copy with every link's label replaced; `labels` is parallel to links().
    Dataset with_labels(const std::vector<std::optional<Label>>& labels) const {
        if (labels.size() != links_.size()) throw invalid_input("label count does not match link count");
        Dataset out = *this;
        for (std::size_t i = 0; i < labels.size(); ++i) out.links_[i].label = labels[i];
        return out;
    }

    bool operator==(const Dataset& o) const {
        return links_ == o.links_ && encoders_ == o.encoders_ && clicks_ == o.clicks_;
    }

private:
    std::vector<ShortLink> links_;
    std::vector<EncoderProfile> encoders_;
    std::map<std::string, std::vector<ClickEvent>> clicks_;
    std::unordered_map<std::string, std::size_t> link_index_;
    std::unordered_map<std::string, std::size_t> encoder_index_;
    std::size_t click_count_ = 0;
};

// ---------------------------------------------------------------------------
// JSONL serialization
// ---------------------------------------------------------------------------

inline json to_json(const ShortLink& l) {
    json j;
    j["type"] = "link";
    j["global_hash"] = l.global_hash;
    j["long_url"] = l.long_url;
    j["domain"] = l.domain;
    j["created_at"] = l.created_at;
    j["encoder_ids"] = l.encoder_ids;
    if (l.warning_page_count) j["warning_page_count"] = *l.warning_page_count;
    if (l.label) j["label"] = std::string(to_string(*l.label));
    return j;
}

inline json to_json(const EncoderProfile& e) {
    json j;
    j["type"] = "encoder";
    j["encoder_id"] = e.encoder_id;
    j["kind"] = std::string(to_string(e.kind));
    if (e.account_created_at) j["account_created_at"] = *e.account_created_at;
    j["connected_networks"] = json::array();
    for (const auto& n : e.connected_networks) {
        j["connected_networks"].push_back(json{{"network", n.network}, {"account_id", n.account_id}});
    }
    j["link_history"] = json::array();
    for (const auto& h : e.link_history) {
        j["link_history"].push_back(json{{"global_hash", h.global_hash}, {"warning_flagged", h.warning_flagged}});
    }
    return j;
}

inline json to_json(const ClickEvent& c) {
    json j;
    j["type"] = "click";
    j["global_hash"] = c.global_hash;
    j["clicked_at"] = c.clicked_at;
    j["referrer_domain"] = c.referrer_domain;
    return j;
}

/// Writes encoders, then links, then each link's clicks in link order. Keys
/// are emitted in a fixed order so equal datasets serialize to equal bytes.
inline void write_dataset(const Dataset& ds, std::ostream& out) {
    for (const auto& e : ds.encoders()) out << to_json(e).dump() << '\n';
    for (const auto& l : ds.links()) out << to_json(l).dump() << '\n';
    for (const auto& l : ds.links()) {
        for (const auto& c : ds.clicks_of(l.global_hash)) out << to_json(c).dump() << '\n';
    }
}

inline void write_dataset(const Dataset& ds, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot write dataset file '" + path + "'");
    write_dataset(ds, out);
}

namespace detail {

inline const json& require(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) throw format_error(std::string("missing field '") + key + "'");
    return *it;
}

inline std::string require_string(const json& j, const char* key) {
    const auto& v = require(j, key);
    if (!v.is_string()) throw format_error(std::string("field '") + key + "' must be a string");
    return v.get<std::string>();
}

inline std::int64_t require_int(const json& j, const char* key) {
    const auto& v = require(j, key);
    if (!v.is_number_integer()) throw format_error(std::string("field '") + key + "' must be an integer");
    return v.get<std::int64_t>();
}

inline std::optional<std::int64_t> optional_int(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    if (!it->is_number_integer()) throw format_error(std::string("field '") + key + "' must be an integer");
    return it->get<std::int64_t>();
}

inline bool require_bool(const json& j, const char* key) {
    const auto& v = require(j, key);
    if (!v.is_boolean()) throw format_error(std::string("field '") + key + "' must be a boolean");
    return v.get<bool>();
}

inline ShortLink parse_link(const json& j) {
    ShortLink l;
    l.global_hash = require_string(j, "global_hash");
    l.long_url = require_string(j, "long_url");
    l.created_at = require_int(j, "created_at");
    const auto& ids = require(j, "encoder_ids");
    if (!ids.is_array()) throw format_error("field 'encoder_ids' must be an array");
    for (const auto& id : ids) {
        if (!id.is_string()) throw format_error("encoder_ids entries must be strings");
        l.encoder_ids.push_back(id.get<std::string>());
    }
    l.warning_page_count = optional_int(j, "warning_page_count");
    if (auto it = j.find("label"); it != j.end() && !it->is_null()) {
        if (!it->is_string()) throw format_error("field 'label' must be a string");
        l.label = parse_label(it->get<std::string>());
        if (!l.label) throw format_error("unknown label '" + it->get<std::string>() + "'");
    }
    return l;
}

inline EncoderProfile parse_encoder(const json& j) {
    EncoderProfile e;
    e.encoder_id = require_string(j, "encoder_id");
    auto kind = parse_encoder_kind(require_string(j, "kind"));
    if (!kind) throw format_error("unknown encoder kind");
    e.kind = *kind;
    e.account_created_at = optional_int(j, "account_created_at");
    if (auto it = j.find("connected_networks"); it != j.end()) {
        if (!it->is_array()) throw format_error("field 'connected_networks' must be an array");
        for (const auto& n : *it) {
            e.connected_networks.push_back({require_string(n, "network"), require_string(n, "account_id")});
        }
    }
    if (auto it = j.find("link_history"); it != j.end()) {
        if (!it->is_array()) throw format_error("field 'link_history' must be an array");
        for (const auto& h : *it) {
            e.link_history.push_back({require_string(h, "global_hash"), require_bool(h, "warning_flagged")});
        }
    }
    return e;
}

inline ClickEvent parse_click(const json& j) {
    ClickEvent c;
    c.global_hash = require_string(j, "global_hash");
    c.clicked_at = require_int(j, "clicked_at");
    if (auto it = j.find("referrer_domain"); it != j.end() && !it->is_null()) {
        if (!it->is_string()) throw format_error("field 'referrer_domain' must be a string");
        c.referrer_domain = it->get<std::string>();
    }
    return c;
}

}  // namespace detail

/// Fraction of malformed lines above which loading fails outright.
inline constexpr double kMalformedTolerance = 0.10;

/// Reads a JSONL dataset stream. Malformed lines and invariant violations are
/// dropped and listed in `report`; more than 10% malformed lines is an error.
inline Dataset load_dataset(std::istream& in, LoadReport& report) {
    std::vector<ShortLink> links;
    std::vector<EncoderProfile> encoders;
    std::vector<ClickEvent> clicks;
    std::vector<std::size_t> link_lines, encoder_lines, click_lines;

    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        ++report.lines;
        std::string type;
        try {
            auto j = json::parse(line);
            if (!j.is_object()) throw format_error("record is not an object");
            type = detail::require_string(j, "type");
            if (type == "link") {
                links.push_back(detail::parse_link(j));
                link_lines.push_back(lineno);
            } else if (type == "encoder") {
                encoders.push_back(detail::parse_encoder(j));
                encoder_lines.push_back(lineno);
            } else if (type == "click") {
                clicks.push_back(detail::parse_click(j));
                click_lines.push_back(lineno);
            } else {
                throw format_error("unknown record type '" + type + "'");
            }
        } catch (const std::exception& ex) {
            ++report.malformed;
            report.drops.push_back({lineno, type, "", std::string("malformed: ") + ex.what()});
        }
    }
    if (in.bad()) throw io_error("error while reading dataset stream");
    if (report.lines > 0 &&
        static_cast<double>(report.malformed) > kMalformedTolerance * static_cast<double>(report.lines)) {
        throw format_error("dataset has " + std::to_string(report.malformed) + " malformed lines out of " +
                           std::to_string(report.lines) + " (tolerance 10%)");
    }
    return Dataset::assemble(std::move(links), std::move(encoders), std::move(clicks), report, link_lines,
                             encoder_lines, click_lines);
}

inline Dataset load_dataset(const std::string& path, LoadReport& report) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open dataset file '" + path + "'");
    return load_dataset(in, report);
}

inline Dataset load_dataset(const std::string& path) {
    LoadReport report;
    return load_dataset(path, report);
}

}  // namespace bitscan
