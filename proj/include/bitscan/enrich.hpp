#pragma once

// WHOIS fixture lookup, blacklist verdict aggregation and link labeling.
// A link is malicious when any queried source flags its long URL or its
// registrable domain; the shortener's own warning page counts as a source.

#include <array>
#include <filesystem>
#include <map>
#include <set>

#include "model.hpp"

namespace bitscan {

// ---------------------------------------------------------------------------
// WHOIS
// ---------------------------------------------------------------------------

struct WhoisRecord {
    std::string domain;
    std::optional<std::int64_t> created_at;
    std::optional<std::int64_t> updated_at;
    std::optional<std::int64_t> expires_at;
    std::int64_t resolved_at = 0;
    bool alive = false;

    bool operator==(const WhoisRecord&) const = default;
};

struct WhoisLoadReport {
    std::size_t records = 0;
    std::size_t malformed = 0;
    std::size_t inconsistent = 0;  // date ordering violated; record dropped
};

/// Immutable domain -> WhoisRecord map backed by a JSONL fixture.
class WhoisStore {
public:
    WhoisStore() = default;

    explicit WhoisStore(std::vector<WhoisRecord> records) {
        WhoisLoadReport ignored;
        for (auto& r : records) add(std::move(r), ignored);
    }

    static WhoisStore load(std::istream& in, WhoisLoadReport& report) {
        WhoisStore store;
        std::string line;
        while (std::getline(in, line)) {
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            ++report.records;
            try {
                store.add(parse(json::parse(line)), report);
            } catch (const std::exception&) {
                ++report.malformed;
            }
        }
        return store;
    }

    static WhoisStore load(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw io_error("cannot open WHOIS fixture '" + path + "'");
        WhoisLoadReport report;
        return load(in, report);
    }

    /// Record for `domain`; unknown domains yield a record with every
    /// optional date absent and alive=false.
    WhoisRecord lookup(std::string_view domain) const {
        auto key = to_lower(domain);
        auto it = records_.find(key);
        if (it != records_.end()) return it->second;
        WhoisRecord miss;
        miss.domain = key;
        return miss;
    }

    std::size_t size() const { return records_.size(); }

    const std::map<std::string, WhoisRecord>& records() const { return records_; }

    static json to_json(const WhoisRecord& r) {
        json j;
        j["domain"] = r.domain;
        j["created_at"] = r.created_at ? json(*r.created_at) : json(nullptr);
        j["updated_at"] = r.updated_at ? json(*r.updated_at) : json(nullptr);
        j["expires_at"] = r.expires_at ? json(*r.expires_at) : json(nullptr);
        j["resolved_at"] = r.resolved_at;
        j["alive"] = r.alive;
        return j;
    }

private:
    // Dates are accepted as integer epoch seconds only; anything else is
    // treated as absent.
    static std::optional<std::int64_t> epoch_or_absent(const json& j, const char* key) {
        auto it = j.find(key);
        if (it == j.end() || !it->is_number_integer()) return std::nullopt;
        return it->get<std::int64_t>();
    }

    static WhoisRecord parse(const json& j) {
        if (!j.is_object()) throw format_error("WHOIS record is not an object");
        WhoisRecord r;
        r.domain = to_lower(detail::require_string(j, "domain"));
        if (r.domain.empty()) throw format_error("empty WHOIS domain");
        r.created_at = epoch_or_absent(j, "created_at");
        r.updated_at = epoch_or_absent(j, "updated_at");
        r.expires_at = epoch_or_absent(j, "expires_at");
        r.resolved_at = detail::require_int(j, "resolved_at");
        r.alive = detail::require_bool(j, "alive");
        return r;
    }

    void add(WhoisRecord r, WhoisLoadReport& report) {
        r.domain = to_lower(r.domain);
        const bool bad_update = r.created_at && r.updated_at && *r.created_at > *r.updated_at;
        const bool bad_resolve = r.created_at && *r.created_at > r.resolved_at;
        if (bad_update || bad_resolve) {
            ++report.inconsistent;
            return;
        }
        records_.insert_or_assign(r.domain, std::move(r));
    }

    std::map<std::string, WhoisRecord> records_;
};

inline WhoisRecord lookup_whois(std::string_view domain, const WhoisStore& store) { return store.lookup(domain); }

// ---------------------------------------------------------------------------
// Blacklist verdicts
// ---------------------------------------------------------------------------

enum class VerdictSource { safebrowsing, surbl, phishtank, virustotal, warning_page };

inline constexpr std::array kAllSources = {VerdictSource::safebrowsing, VerdictSource::surbl,
                                           VerdictSource::phishtank, VerdictSource::virustotal,
                                           VerdictSource::warning_page};

inline std::string_view to_string(VerdictSource s) {
    switch (s) {
        case VerdictSource::safebrowsing: return "safebrowsing";
        case VerdictSource::surbl: return "surbl";
        case VerdictSource::phishtank: return "phishtank";
        case VerdictSource::virustotal: return "virustotal";
        case VerdictSource::warning_page: return "warning_page";
    }
    return "";
}

inline std::optional<VerdictSource> parse_source(std::string_view s) {
    for (auto src : kAllSources) {
        if (to_string(src) == s) return src;
    }
    return std::nullopt;
}

struct BlacklistVerdict {
    VerdictSource source = VerdictSource::safebrowsing;
    std::string subject;
    bool flagged = false;
    std::string detail;

    bool operator==(const BlacklistVerdict&) const = default;
};

/// Lowercases; URL subjects additionally lose a trailing slash.
inline std::string normalize_subject(std::string_view subject) {
    std::string s = to_lower(subject);
    if (s.find("://") != std::string::npos) {
        while (!s.empty() && s.back() == '/') s.pop_back();
    }
    return s;
}

/// One provider's subject -> (flagged, detail) table.
class VerdictFixture {
public:
    struct Entry {
        bool flagged = false;
        std::string detail;
    };

    VerdictFixture() = default;

    void add(std::string_view subject, bool flagged, std::string detail) {
        auto& e = entries_[normalize_subject(subject)];
        if (flagged && !e.flagged) e.detail = std::move(detail);
        else if (e.detail.empty()) e.detail = std::move(detail);
        e.flagged = e.flagged || flagged;
    }

    const Entry* find(std::string_view subject) const {
        auto it = entries_.find(normalize_subject(subject));
        return it == entries_.end() ? nullptr : &it->second;
    }

    std::size_t size() const { return entries_.size(); }

    static VerdictFixture load(std::istream& in) {
        VerdictFixture f;
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            try {
                auto j = json::parse(line);
                std::string detail;
                if (auto it = j.find("detail"); it != j.end() && it->is_string()) detail = it->get<std::string>();
                f.add(detail::require_string(j, "subject"), detail::require_bool(j, "flagged"), detail);
            } catch (const std::exception& ex) {
                throw format_error("verdict fixture line " + std::to_string(lineno) + ": " + ex.what());
            }
        }
        return f;
    }

    void write(std::ostream& out) const {
        for (const auto& [subject, e] : entries_) {
            json j;
            j["subject"] = subject;
            j["flagged"] = e.flagged;
            j["detail"] = e.detail;
            out << j.dump() << '\n';
        }
    }

private:
    std::map<std::string, Entry> entries_;
};

/// Fixture per provider.
using VerdictStores = std::map<VerdictSource, VerdictFixture>;

/// Loads `<dir>/<provider>.jsonl` for every requested provider.
inline VerdictStores load_verdict_stores(const std::filesystem::path& dir, const std::set<VerdictSource>& providers) {
    VerdictStores stores;
    for (auto p : providers) {
        auto path = dir / (std::string(to_string(p)) + ".jsonl");
        std::ifstream in(path, std::ios::binary);
        if (!in) throw io_error("missing verdict fixture for provider '" + std::string(to_string(p)) + "' at " +
                                path.string());
        stores.emplace(p, VerdictFixture::load(in));
    }
    return stores;
}

/// One verdict per provider, in provider enumeration order. The long URL and
/// the registrable domain are both checked; warning-page fixtures are also
/// keyed by global hash.
inline std::vector<BlacklistVerdict> query_blacklists(const ShortLink& link, const std::set<VerdictSource>& providers,
                                                      const VerdictStores& stores) {
    if (providers.empty()) throw invalid_input("no blacklist providers requested");
    std::vector<BlacklistVerdict> out;
    out.reserve(providers.size());
    for (auto p : providers) {
        auto it = stores.find(p);
        if (it == stores.end()) {
            throw invalid_input("verdict fixture missing for provider '" + std::string(to_string(p)) + "'");
        }
        const auto& fixture = it->second;
        BlacklistVerdict v{p, link.long_url, false, "ok"};
        std::vector<std::string_view> subjects{link.long_url, link.domain};
        if (p == VerdictSource::warning_page) subjects.push_back(link.global_hash);
        for (auto subject : subjects) {
            if (subject.empty()) continue;
            if (const auto* e = fixture.find(subject); e != nullptr && e->flagged) {
                v.subject = std::string(subject);
                v.flagged = true;
                v.detail = e->detail;
                break;
            }
        }
        out.push_back(std::move(v));
    }
    return out;
}

/// Malicious iff at least one verdict is flagged.
inline Label label_link(std::span<const BlacklistVerdict> verdicts) {
    if (verdicts.empty()) throw invalid_input("label_link needs at least one verdict");
    for (const auto& v : verdicts) {
        if (v.flagged) return Label::malicious;
    }
    return Label::benign;
}

struct LabelReport {
    std::size_t malicious = 0;
    std::size_t benign = 0;
    std::size_t overwritten = 0;  // links that already carried a label
    std::map<VerdictSource, std::size_t> flagged_by;
};

struct LabeledDataset {
    Dataset dataset;
    LabelReport report;
};

inline LabeledDataset label_dataset(const Dataset& ds, const std::set<VerdictSource>& providers,
                                    const VerdictStores& stores) {
    LabelReport report;
    std::vector<std::optional<Label>> labels;
    labels.reserve(ds.links().size());
    for (const auto& link : ds.links()) {
        auto verdicts = query_blacklists(link, providers, stores);
        for (const auto& v : verdicts) {
            if (v.flagged) ++report.flagged_by[v.source];
        }
        Label l = label_link(verdicts);
        if (link.label) ++report.overwritten;
        (l == Label::malicious ? report.malicious : report.benign)++;
        labels.push_back(l);
    }
    return {ds.with_labels(labels), report};
}

}  // namespace bitscan
