#pragma once

// The seven per-link features: two WHOIS-based (domain age, link/domain
// creation gap), three available without click history (creation hour,
// encoder count, non-regular encoder fraction) and two click-based
// (creation-to-first-click lag, direct click fraction).

#include <set>

#include "enrich.hpp"
#include "table.hpp"

namespace bitscan {

enum class FeatureMode { full, non_click };

inline std::string_view to_string(FeatureMode m) { return m == FeatureMode::full ? "full" : "non_click"; }

inline std::optional<FeatureMode> parse_mode(std::string_view s) {
    if (s == "full") return FeatureMode::full;
    if (s == "non_click") return FeatureMode::non_click;
    return std::nullopt;
}

/// Column order of extracted matrices. The first five are the non-click set.
inline const std::vector<std::string>& feature_names(FeatureMode mode) {
    static const std::vector<std::string> full = {
        "domain_age_days",  "creation_gap_days",       "creation_hour",        "encoder_count",
        "nonregular_encoder_fraction", "creation_click_lag_secs", "direct_click_fraction"};
    static const std::vector<std::string> non_click(full.begin(), full.begin() + 5);
    return mode == FeatureMode::full ? full : non_click;
}

inline constexpr double kSecondsPerDay = 86400.0;

struct FeatureVector {
    std::string global_hash;
    FeatureMode mode = FeatureMode::full;
    std::optional<double> domain_age_days;
    std::optional<double> creation_gap_days;
    int creation_hour = 0;
    int encoder_count = 1;
    double nonregular_encoder_fraction = 0.0;
    std::optional<double> creation_click_lag_secs;  // always absent in non_click mode
    std::optional<double> direct_click_fraction;    // always absent in non_click mode
    std::optional<Label> label;

    /// Active feature values in feature_names(mode) order.
    std::vector<std::optional<double>> values() const {
        std::vector<std::optional<double>> v = {domain_age_days, creation_gap_days, double(creation_hour),
                                                double(encoder_count), nonregular_encoder_fraction};
        if (mode == FeatureMode::full) {
            v.push_back(creation_click_lag_secs);
            v.push_back(direct_click_fraction);
        }
        return v;
    }

    /// Value by feature name; nullopt when missing. Throws if the name is not
    /// active in this vector's mode.
    std::optional<double> value(std::string_view name) const {
        const auto& names = feature_names(mode);
        for (std::size_t i = 0; i < names.size(); ++i) {
            if (names[i] == name) return values()[i];
        }
        throw invalid_input("feature '" + std::string(name) + "' is not available in " +
                            std::string(to_string(mode)) + " mode");
    }

    bool operator==(const FeatureVector&) const = default;
};

struct FeatureMatrix {
    FeatureMode mode = FeatureMode::full;
    std::vector<std::string> feature_names;
    std::vector<FeatureVector> rows;

    Table to_table() const {
        Table t(feature_names);
        for (const auto& r : rows) t.add_row(r.values(), r.label, r.global_hash);
        return t;
    }
};

// ---------------------------------------------------------------------------
// Individual features
// ---------------------------------------------------------------------------

/// Days between WHOIS domain creation and the time the record was resolved.
inline std::optional<double> f_domain_age(const ShortLink&, const WhoisRecord& whois) {
    if (!whois.created_at) return std::nullopt;
    return static_cast<double>(whois.resolved_at - *whois.created_at) / kSecondsPerDay;
}

/// Days between the latest known domain change (creation or update) and the
/// link's creation. Negative when the domain record changed after the link.
inline std::optional<double> f_creation_gap(const ShortLink& link, const WhoisRecord& whois) {
    std::optional<std::int64_t> ref;
    if (whois.created_at) ref = whois.created_at;
    if (whois.updated_at) ref = ref ? std::max(*ref, *whois.updated_at) : *whois.updated_at;
    if (!ref) return std::nullopt;
    return static_cast<double>(link.created_at - *ref) / kSecondsPerDay;
}

/// UTC hour of link creation.
inline int f_creation_hour(const ShortLink& link) {
    std::int64_t secs = link.created_at % 86400;
    if (secs < 0) secs += 86400;
    return static_cast<int>(secs / 3600);
}

inline int f_encoder_count(const ShortLink& link) {
    if (link.encoder_ids.empty()) throw invalid_input("link '" + link.global_hash + "' has no encoders");
    std::set<std::string> distinct(link.encoder_ids.begin(), link.encoder_ids.end());
    return static_cast<int>(distinct.size());
}

/// Fraction of distinct encoders that are anonymous or third-party apps.
inline double f_nonregular_fraction(const ShortLink& link, const Dataset& ds) {
    std::set<std::string> distinct(link.encoder_ids.begin(), link.encoder_ids.end());
    if (distinct.empty()) throw invalid_input("link '" + link.global_hash + "' has no encoders");
    std::size_t nonregular = 0;
    for (const auto& id : distinct) {
        const auto* e = ds.find_encoder(id);
        if (e == nullptr) throw invalid_input("encoder '" + id + "' not found in dataset");
        if (e->kind != EncoderKind::regular) ++nonregular;
    }
    return static_cast<double>(nonregular) / static_cast<double>(distinct.size());
}

/// Seconds from link creation to its earliest click.
inline std::optional<double> f_click_lag(const ShortLink& link, std::span<const ClickEvent> clicks) {
    if (clicks.empty()) return std::nullopt;
    std::int64_t first = clicks.front().clicked_at;
    for (const auto& c : clicks) first = std::min(first, c.clicked_at);
    return static_cast<double>(first - link.created_at);
}

/// Share of clicks that arrived without a referring domain.
inline std::optional<double> f_direct_fraction(std::span<const ClickEvent> clicks) {
    if (clicks.empty()) return std::nullopt;
    std::size_t direct = 0;
    for (const auto& c : clicks) direct += c.referrer_domain.empty() ? 1 : 0;
    return static_cast<double>(direct) / static_cast<double>(clicks.size());
}

inline FeatureVector extract_one(const ShortLink& link, const Dataset& ds, const WhoisStore& whois, FeatureMode mode) {
    FeatureVector v;
    v.global_hash = link.global_hash;
    v.mode = mode;
    v.label = link.label;
    const WhoisRecord rec = whois.lookup(link.domain);
    v.domain_age_days = f_domain_age(link, rec);
    v.creation_gap_days = f_creation_gap(link, rec);
    v.creation_hour = f_creation_hour(link);
    v.encoder_count = f_encoder_count(link);
    v.nonregular_encoder_fraction = f_nonregular_fraction(link, ds);
    if (mode == FeatureMode::full) {
        auto clicks = ds.clicks_of(link.global_hash);
        v.creation_click_lag_secs = f_click_lag(link, clicks);
        v.direct_click_fraction = f_direct_fraction(clicks);
    }
    return v;
}

/// One row per link, in dataset order. Links are independent, so the work
/// may be spread over `workers` threads without changing the result.
inline FeatureMatrix extract(const Dataset& ds, const WhoisStore& whois, FeatureMode mode, unsigned workers = 1) {
    FeatureMatrix m;
    m.mode = mode;
    m.feature_names = feature_names(mode);
    m.rows.resize(ds.links().size());
    parallel_for(ds.links().size(), workers,
                 [&](std::size_t i) { m.rows[i] = extract_one(ds.links()[i], ds, whois, mode); });
    return m;
}

inline void write_csv(const FeatureMatrix& m, std::ostream& out) { write_csv(m.to_table(), out); }

/// Restricts a table to the columns of `mode`.
inline Table project(const Table& t, FeatureMode mode) { return t.project(feature_names(mode)); }

}  // namespace bitscan
