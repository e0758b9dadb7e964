#pragma once

// Account- and domain-level analyses: per-encoder suspicion factor and its
// cumulative distribution, cross-account community detection over Jaccard
// similarity, domain liveness and warning-page persistence.

#include <iomanip>
#include <map>
#include <numeric>
#include <set>

#include "enrich.hpp"

namespace bitscan {

// ---------------------------------------------------------------------------
// Suspicion factor
// ---------------------------------------------------------------------------

struct SuspicionReport {
    std::string encoder_id;
    double sus_fac = 0.0;  // flagged_total / link_total
    std::size_t link_total = 0;
    std::size_t flagged_total = 0;
    bool highly_suspicious = false;  // sus_fac == 1
};

/// Share of an encoder's collected links that lead to a warning page.
inline SuspicionReport suspicion_factor(const EncoderProfile& e) {
    if (e.link_history.empty()) {
        throw invalid_input("encoder '" + e.encoder_id + "' has no link history; suspicion factor undefined");
    }
    SuspicionReport r;
    r.encoder_id = e.encoder_id;
    r.link_total = e.link_history.size();
    for (const auto& h : e.link_history) r.flagged_total += h.warning_flagged ? 1 : 0;
    r.sus_fac = static_cast<double>(r.flagged_total) / static_cast<double>(r.link_total);
    r.highly_suspicious = r.flagged_total == r.link_total;
    return r;
}

struct DistributionPoint {
    double threshold = 0.0;
    std::size_t count = 0;  // encoders with sus_fac <= threshold
};

/// Cumulative count of encoders by suspicion factor at thresholds
/// 0, 1/steps, ..., 1. Encoders without link history are skipped; an empty
/// encoder set gives an empty table.
inline std::vector<DistributionPoint> susfac_distribution(const Dataset& ds, std::size_t steps = 100) {
    if (steps == 0) throw invalid_input("steps must be >= 1");
    std::vector<double> values;
    for (const auto& e : ds.encoders()) {
        if (!e.link_history.empty()) values.push_back(suspicion_factor(e).sus_fac);
    }
    std::vector<DistributionPoint> table;
    if (values.empty()) return table;
    std::sort(values.begin(), values.end());
    for (std::size_t i = 0; i <= steps; ++i) {
        // i/steps equals the quotient flagged/total exactly when the rationals
        // coincide, since both are correctly rounded divisions.
        const double t = static_cast<double>(i) / static_cast<double>(steps);
        auto n = static_cast<std::size_t>(std::upper_bound(values.begin(), values.end(), t) - values.begin());
        table.push_back({t, n});
    }
    return table;
}

// ---------------------------------------------------------------------------
// Communities
// ---------------------------------------------------------------------------

using ItemSet = std::set<std::string>;

/// |a ∩ b| / |a ∪ b|; 0 when both sets are empty.
inline double jaccard(const ItemSet& a, const ItemSet& b) {
    if (a.empty() && b.empty()) return 0.0;
    std::size_t common = 0;
    auto ia = a.begin();
    auto ib = b.begin();
    while (ia != a.end() && ib != b.end()) {
        if (*ia < *ib) ++ia;
        else if (*ib < *ia) ++ib;
        else {
            ++common;
            ++ia;
            ++ib;
        }
    }
    return static_cast<double>(common) / static_cast<double>(a.size() + b.size() - common);
}

enum class ItemMode { domain, url };

/// Items posted by each encoder: every link that lists the encoder, plus any
/// link-history entries that resolve in the dataset.
inline std::map<std::string, ItemSet> account_items(const Dataset& ds, ItemMode mode = ItemMode::domain) {
    std::map<std::string, ItemSet> items;
    auto item_of = [mode](const ShortLink& l) { return mode == ItemMode::domain ? l.domain : l.long_url; };
    for (const auto& e : ds.encoders()) items[e.encoder_id];
    for (const auto& l : ds.links()) {
        for (const auto& id : l.encoder_ids) items[id].insert(item_of(l));
    }
    for (const auto& e : ds.encoders()) {
        for (const auto& h : e.link_history) {
            if (const auto* l = ds.find_link(h.global_hash)) items[e.encoder_id].insert(item_of(*l));
        }
    }
    return items;
}

struct CommunityReport {
    std::vector<std::vector<std::string>> groups;  // sorted ids; groups ordered by first id
    std::map<std::pair<std::string, std::string>, double> pairwise_scores;  // key.first < key.second
    double score_variance = 0.0;  // population variance over all pairs
};

inline constexpr double kDefaultCommunityThreshold = 0.5;

/// Connected components of the graph linking accounts whose item sets have
/// Jaccard similarity >= threshold; components smaller than min_size are
/// discarded.
inline CommunityReport detect_communities(const std::map<std::string, ItemSet>& accounts,
                                          double threshold = kDefaultCommunityThreshold, std::size_t min_size = 2,
                                          unsigned workers = 1) {
    if (!(threshold > 0.0 && threshold <= 1.0)) throw invalid_input("threshold must lie in (0, 1]");
    if (min_size < 2) throw invalid_input("min_size must be >= 2");

    std::vector<const std::string*> ids;
    std::vector<const ItemSet*> sets;
    for (const auto& [id, s] : accounts) {
        ids.push_back(&id);
        sets.push_back(&s);
    }
    const std::size_t n = ids.size();
    // Row i holds scores for pairs (i, j), j > i.
    std::vector<std::vector<double>> scores(n);
    parallel_for(n, workers, [&](std::size_t i) {
        scores[i].resize(n - i - 1);
        for (std::size_t j = i + 1; j < n; ++j) scores[i][j - i - 1] = jaccard(*sets[i], *sets[j]);
    });

    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&parent](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };

    CommunityReport report;
    double sum = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double s = scores[i][j - i - 1];
            report.pairwise_scores[{*ids[i], *ids[j]}] = s;
            sum += s;
            ++pairs;
            if (s >= threshold) {
                auto a = find(i), b = find(j);
                if (a != b) parent[std::max(a, b)] = std::min(a, b);
            }
        }
    }
    if (pairs > 0) {
        const double mean = sum / static_cast<double>(pairs);
        double sq = 0.0;
        for (const auto& row : scores) {
            for (double s : row) sq += (s - mean) * (s - mean);
        }
        report.score_variance = sq / static_cast<double>(pairs);
    }

    std::map<std::size_t, std::vector<std::string>> components;
    for (std::size_t i = 0; i < n; ++i) components[find(i)].push_back(*ids[i]);
    for (auto& [_, members] : components) {
        if (members.size() >= min_size) report.groups.push_back(std::move(members));
    }
    return report;
}

// ---------------------------------------------------------------------------
// Domain liveness
// ---------------------------------------------------------------------------

struct DomainStatus {
    std::string domain;
    bool alive = false;
    std::size_t links = 0;
    std::int64_t warning_pages = 0;  // summed over the domain's links (absent counts as 0)
};

struct LivenessReport {
    std::vector<DomainStatus> domains;  // sorted by domain
    std::size_t dead_domains = 0;
    double dead_fraction = 0.0;
    std::int64_t dead_warning_total = 0;
};

inline LivenessReport domain_liveness(const Dataset& ds, const WhoisStore& whois) {
    std::map<std::string, DomainStatus> by_domain;
    for (const auto& l : ds.links()) {
        auto& d = by_domain[l.domain];
        d.domain = l.domain;
        ++d.links;
        d.warning_pages += l.warning_page_count.value_or(0);
    }
    LivenessReport report;
    for (auto& [domain, status] : by_domain) {
        status.alive = whois.lookup(domain).alive;
        if (!status.alive) {
            ++report.dead_domains;
            report.dead_warning_total += status.warning_pages;
        }
        report.domains.push_back(status);
    }
    if (!report.domains.empty()) {
        report.dead_fraction = static_cast<double>(report.dead_domains) / static_cast<double>(report.domains.size());
    }
    return report;
}

// ---------------------------------------------------------------------------
// Warning-page persistence
// ---------------------------------------------------------------------------

struct PersistenceReport {
    std::size_t requested = 0;
    std::size_t examined = 0;  // < requested when the dataset is short
    std::size_t clicked_after_cutoff = 0;
    double fraction = 0.0;
    bool shortfall = false;
    std::vector<std::string> examined_hashes;
};

/// Of the top_n links by warning-page count (ties by global hash), how many
/// were clicked at or after `cutoff`. Links without a warning count are not
/// ranked.
inline PersistenceReport persistence(const Dataset& ds, std::size_t top_n, std::int64_t cutoff) {
    if (top_n < 1) throw invalid_input("top_n must be >= 1");
    std::vector<const ShortLink*> ranked;
    for (const auto& l : ds.links()) {
        if (l.warning_page_count) ranked.push_back(&l);
    }
    std::sort(ranked.begin(), ranked.end(), [](const ShortLink* a, const ShortLink* b) {
        if (*a->warning_page_count != *b->warning_page_count) return *a->warning_page_count > *b->warning_page_count;
        return a->global_hash < b->global_hash;
    });
    PersistenceReport r;
    r.requested = top_n;
    r.examined = std::min(top_n, ranked.size());
    r.shortfall = r.examined < top_n;
    for (std::size_t i = 0; i < r.examined; ++i) {
        const auto& l = *ranked[i];
        r.examined_hashes.push_back(l.global_hash);
        auto clicks = ds.clicks_of(l.global_hash);
        if (std::any_of(clicks.begin(), clicks.end(), [cutoff](const ClickEvent& c) { return c.clicked_at >= cutoff; })) {
            ++r.clicked_after_cutoff;
        }
    }
    if (r.examined > 0) r.fraction = static_cast<double>(r.clicked_after_cutoff) / static_cast<double>(r.examined);
    return r;
}

// ---------------------------------------------------------------------------
// Per-month activity of one encoder
// ---------------------------------------------------------------------------

/// "YYYY-MM" of a UTC epoch timestamp.
inline std::string utc_month(std::int64_t epoch) {
    std::int64_t days = epoch / 86400;
    if (epoch % 86400 < 0) --days;
    // civil_from_days (H. Hinnant)
    days += 719468;
    const std::int64_t era = (days >= 0 ? days : days - 146096) / 146097;
    const std::int64_t doe = days - era * 146097;
    const std::int64_t yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    std::int64_t y = yoe + era * 400;
    const std::int64_t doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const std::int64_t mp = (5 * doy + 2) / 153;
    const std::int64_t m = mp < 10 ? mp + 3 : mp - 9;
    if (m <= 2) ++y;
    std::ostringstream os;
    os << std::setfill('0') << std::setw(4) << y << '-' << std::setw(2) << m;
    return os.str();
}

struct MonthActivity {
    std::string month;
    std::size_t links = 0;
    std::size_t clicks = 0;
};

inline std::vector<MonthActivity> encoder_timeline(const Dataset& ds, const std::string& encoder_id) {
    std::map<std::string, MonthActivity> months;
    for (const auto& l : ds.links()) {
        if (std::find(l.encoder_ids.begin(), l.encoder_ids.end(), encoder_id) == l.encoder_ids.end()) continue;
        auto& m = months[utc_month(l.created_at)];
        ++m.links;
        for (const auto& c : ds.clicks_of(l.global_hash)) {
            auto& cm = months[utc_month(c.clicked_at)];
            ++cm.clicks;
        }
    }
    std::vector<MonthActivity> out;
    for (auto& [month, a] : months) {
        a.month = month;
        out.push_back(a);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Writers
// ---------------------------------------------------------------------------

inline json to_json(const SuspicionReport& r) {
    return json{{"encoder_id", r.encoder_id},       {"sus_fac", r.sus_fac},
                {"link_total", r.link_total},       {"flagged_total", r.flagged_total},
                {"highly_suspicious", r.highly_suspicious}};
}

inline json to_json(const CommunityReport& r) {
    json j;
    j["groups"] = r.groups;
    j["pairwise_scores"] = json::array();
    for (const auto& [k, v] : r.pairwise_scores) {
        j["pairwise_scores"].push_back(json{{"a", k.first}, {"b", k.second}, {"jaccard", v}});
    }
    j["score_variance"] = r.score_variance;
    return j;
}

inline json to_json(const LivenessReport& r) {
    json j;
    j["domain_count"] = r.domains.size();
    j["dead_domains"] = r.dead_domains;
    j["dead_fraction"] = r.dead_fraction;
    j["dead_warning_total"] = r.dead_warning_total;
    j["domains"] = json::array();
    for (const auto& d : r.domains) {
        j["domains"].push_back(
            json{{"domain", d.domain}, {"alive", d.alive}, {"links", d.links}, {"warning_pages", d.warning_pages}});
    }
    return j;
}

inline json to_json(const PersistenceReport& r) {
    return json{{"requested", r.requested},
                {"examined", r.examined},
                {"clicked_after_cutoff", r.clicked_after_cutoff},
                {"fraction", r.fraction},
                {"shortfall", r.shortfall}};
}

inline void write_distribution_csv(std::ostream& out, const std::vector<DistributionPoint>& table) {
    out << "threshold,count\n";
    for (const auto& p : table) out << format_double(p.threshold) << ',' << p.count << '\n';
}

}  // namespace bitscan
