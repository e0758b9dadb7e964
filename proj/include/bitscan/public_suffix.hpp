#pragma once

// Bundled public-suffix snapshot used for offline registrable-domain
// extraction.
//
// Source: ICANN section of the Mozilla Public Suffix List
// (https://publicsuffix.org/list/public_suffix_list.dat), snapshot taken
// 2024-01-15, trimmed to the generic TLDs, every two-letter country-code TLD
// and the second-level registries of the ccTLDs most common in URL feeds.
// Hosts under a suffix that is not listed fall back to the last two labels.
// Rule syntax follows the list: "*." wildcards and "!" exceptions.

#include <array>
#include <string_view>
#include <unordered_set>

namespace bitscan::psl {

inline constexpr std::string_view kSnapshotVersion = "psl-icann-2024-01-15-trimmed";

inline constexpr std::string_view kRules[] = {
    // generic
    "com", "net", "org", "edu", "gov", "mil", "int", "info", "biz", "name", "pro",
    "mobi", "asia", "tel", "travel", "jobs", "aero", "coop", "museum", "cat", "xxx", "post",
    "online", "site", "xyz", "top", "club", "shop", "store", "app", "dev", "io", "me", "co", "tv",
    "cc", "ws", "live", "link", "click", "win", "bid", "loan", "work", "party", "review", "stream",
    "download", "racing", "date", "faith", "science", "men", "trade", "webcam", "accountant",
    "cricket", "space", "website", "tech", "news", "blog", "email", "today", "world", "life",
    "icu", "vip", "buzz", "fun", "guru", "ninja", "rocks", "agency", "company", "solutions",
    "services", "support", "center", "network", "systems", "media", "digital", "cloud", "host",
    "page", "ly", "gl", "gd", "to", "fm", "am", "it", "im",
    // country codes
    "ac", "ad", "ae", "af", "ag", "ai", "al", "ao", "aq", "ar", "as", "at", "au", "aw", "ax",
    "az", "ba", "bb", "bd", "be", "bf", "bg", "bh", "bi", "bj", "bm", "bn", "bo", "br", "bs",
    "bt", "bw", "by", "bz", "ca", "cd", "cf", "cg", "ch", "ci", "cl", "cm", "cn", "cr", "cu",
    "cv", "cw", "cx", "cy", "cz", "de", "dj", "dk", "dm", "do", "dz", "ec", "ee", "eg", "er",
    "es", "et", "eu", "fi", "fj", "fo", "fr", "ga", "gb", "ge", "gf", "gg", "gh", "gi", "gm",
    "gn", "gp", "gq", "gr", "gs", "gt", "gu", "gw", "gy", "hk", "hm", "hn", "hr", "ht", "hu",
    "id", "ie", "il", "in", "iq", "ir", "is", "je", "jm", "jo", "jp", "ke", "kg", "ki", "km",
    "kn", "kp", "kr", "kw", "ky", "kz", "la", "lb", "lc", "li", "lk", "lr", "ls", "lt", "lu",
    "lv", "ma", "mc", "md", "mg", "mh", "mk", "ml", "mm", "mn", "mo", "mp", "mq", "mr", "ms",
    "mt", "mu", "mv", "mw", "mx", "my", "mz", "na", "nc", "ne", "nf", "ng", "ni", "nl", "no",
    "np", "nr", "nu", "nz", "om", "pa", "pe", "pf", "pg", "ph", "pk", "pl", "pm", "pn", "pr",
    "ps", "pt", "pw", "py", "qa", "re", "ro", "rs", "ru", "rw", "sa", "sb", "sc", "sd", "se",
    "sg", "sh", "si", "sk", "sl", "sm", "sn", "so", "sr", "ss", "st", "su", "sv", "sx", "sy",
    "sz", "tc", "td", "tf", "tg", "th", "tj", "tk", "tl", "tm", "tn", "tr", "tt", "tw", "tz",
    "ua", "ug", "uk", "us", "uy", "uz", "va", "vc", "ve", "vg", "vi", "vn", "vu", "wf", "ye",
    "yt", "za", "zm", "zw",
    // second-level registries
    "co.uk", "org.uk", "me.uk", "ltd.uk", "plc.uk", "net.uk", "ac.uk", "gov.uk", "nhs.uk",
    "police.uk", "sch.uk",
    "co.in", "firm.in", "net.in", "org.in", "gen.in", "ind.in", "ac.in", "edu.in", "res.in",
    "gov.in", "mil.in", "nic.in",
    "com.au", "net.au", "org.au", "edu.au", "gov.au", "asn.au", "id.au",
    "co.nz", "net.nz", "org.nz", "ac.nz", "govt.nz", "geek.nz",
    "co.jp", "ne.jp", "or.jp", "ac.jp", "ad.jp", "ed.jp", "go.jp", "gr.jp", "lg.jp",
    "com.br", "net.br", "org.br", "gov.br", "edu.br", "blog.br",
    "com.cn", "net.cn", "org.cn", "gov.cn", "edu.cn", "ac.cn",
    "com.mx", "org.mx", "gob.mx", "edu.mx", "net.mx",
    "co.za", "org.za", "gov.za", "ac.za", "net.za", "web.za",
    "com.tr", "net.tr", "org.tr", "gen.tr", "biz.tr", "info.tr",
    "com.ar", "net.ar", "org.ar", "gob.ar",
    "com.sg", "net.sg", "org.sg", "edu.sg", "gov.sg",
    "com.hk", "net.hk", "org.hk", "edu.hk", "gov.hk",
    "com.tw", "net.tw", "org.tw", "idv.tw",
    "co.kr", "or.kr", "ne.kr", "go.kr", "ac.kr",
    "com.my", "net.my", "org.my", "gov.my",
    "com.pk", "net.pk", "org.pk", "edu.pk",
    "com.ng", "org.ng", "gov.ng",
    "co.id", "or.id", "web.id", "ac.id", "go.id",
    "com.ph", "net.ph", "org.ph",
    "com.vn", "net.vn", "org.vn",
    "co.il", "org.il", "ac.il", "gov.il",
    "com.ua", "net.ua", "org.ua", "kiev.ua",
    "com.ru", "net.ru", "org.ru", "msk.ru", "spb.ru",
    "com.pl", "net.pl", "org.pl", "waw.pl",
    "co.ke", "or.ke",
    "com.eg", "edu.eg", "gov.eg",
    "com.sa", "net.sa", "org.sa",
    "com.co", "net.co", "nom.co",
    "com.pe", "org.pe",
    "com.ve", "co.ve",
    "com.es", "nom.es", "org.es",
    "co.at", "or.at",
    "com.bd", "net.bd", "org.bd",
    "com.lk", "org.lk",
    "co.th", "in.th", "or.th", "ac.th", "go.th",
    // wildcard and exception rules
    "*.ck", "!www.ck",
    "*.er", "*.fk", "*.kh", "*.np", "*.pg",
    "*.kawasaki.jp", "!city.kawasaki.jp",
    "*.kitakyushu.jp", "!city.kitakyushu.jp",
};

/// Rule lookup over the bundled snapshot.
class SuffixTable {
public:
    SuffixTable() {
        for (auto r : kRules) {
            if (r.starts_with("!")) {
                exceptions_.insert(r.substr(1));
            } else if (r.starts_with("*.")) {
                wildcards_.insert(r.substr(2));
            } else {
                exact_.insert(r);
            }
        }
    }

    static const SuffixTable& instance() {
        static const SuffixTable table;
        return table;
    }

    /// Length in labels of the public suffix of `host` (lowercase, no
    /// trailing dot), or 0 if no rule matches.
    std::size_t suffix_labels(std::string_view host) const {
        // Walk candidate suffixes from the longest to the shortest.
        std::size_t labels = 1;
        for (char c : host) labels += (c == '.');
        std::string_view rest = host;
        for (std::size_t n = labels; n >= 1; --n) {
            if (exceptions_.contains(rest)) return n - 1;
            if (exact_.contains(rest)) return n;
            auto dot = rest.find('.');
            if (dot != std::string_view::npos && wildcards_.contains(rest.substr(dot + 1))) return n;
            if (dot == std::string_view::npos) break;
            rest = rest.substr(dot + 1);
        }
        return 0;
    }

private:
    std::unordered_set<std::string_view> exact_;
    std::unordered_set<std::string_view> wildcards_;
    std::unordered_set<std::string_view> exceptions_;
};

}  // namespace bitscan::psl
