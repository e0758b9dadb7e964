#pragma once

// Seeded generator of labeled spam/benign short-link populations together
// with matching WHOIS and blacklist fixtures. Class-conditional
// distributions are simple piecewise-uniform or geometric draws; every
// parameter is written into the generation manifest.

#include <cstdio>
#include <filesystem>

#include "enrich.hpp"

namespace bitscan {

enum class Separation { easy, hard };

inline std::string_view to_string(Separation s) { return s == Separation::easy ? "easy" : "hard"; }

inline std::optional<Separation> parse_separation(std::string_view s) {
    if (s == "easy") return Separation::easy;
    if (s == "hard") return Separation::hard;
    return std::nullopt;
}

struct SynthParams {
    std::size_t n_links = 2000;
    double malicious_fraction = 0.5;
    double zero_click_fraction_malicious = 0.4616;
    double zero_click_fraction_benign = 0.30;
    std::uint64_t seed = 7;
    Separation separation = Separation::easy;

    void validate() const {
        if (n_links < 2) throw invalid_input("n_links must be >= 2");
        if (!(malicious_fraction > 0.0 && malicious_fraction < 1.0)) {
            throw invalid_input("malicious_fraction must lie in (0, 1)");
        }
        for (double f : {zero_click_fraction_malicious, zero_click_fraction_benign}) {
            if (!(f >= 0.0 && f <= 1.0)) throw invalid_input("zero-click fractions must lie in [0, 1]");
        }
    }
};

struct SynthOutput {
    Dataset dataset;
    std::vector<WhoisRecord> whois;
    VerdictStores verdicts;
    std::vector<Label> truth;  // parallel to dataset.links()
    json manifest;
};

namespace detail {

inline constexpr std::int64_t kSynthEpoch = 1380585600;  // 2013-10-01T00:00:00Z
inline constexpr std::int64_t kDay = 86400;

/// Class-conditional generation settings. Index 0 = benign, 1 = malicious.
struct ClassProfile {
    double gap_days_lo, gap_days_hi;       // link creation minus domain creation
    double update_prob;                    // WHOIS updated_at present
    double alive_prob;
    double offhour_prob;                   // hour drawn from the class's preferred window
    int hour_lo, hour_hi;                  // preferred creation-hour window [lo, hi]
    double extra_encoder_p;                // geometric success prob for extra encoders
    int max_encoders;
    std::array<double, 3> kind_mix;        // regular, anonymous, third_party_app
    double lag_lo, lag_hi;                 // first click lag, seconds
    double direct_prob;                    // per click
    double click_count_p;                  // geometric success prob for extra clicks
};

inline const std::array<ClassProfile, 2>& class_profiles() {
    static const std::array<ClassProfile, 2> profiles = {{
        // benign
        {60.0, 2000.0, 0.5, 0.95, 0.85, 8, 19, 0.5, 8, {0.90, 0.05, 0.05}, 3600.0, 3.0 * kDay, 0.2, 0.3},
        // malicious
        {0.0, 30.0, 0.0, 0.17, 0.80, 0, 5, 0.8, 5, {0.20, 0.50, 0.30}, 0.0, 3600.0, 0.8, 0.3},
    }};
    return profiles;
}

/// Probability that a single feature draw of one class is taken from the
/// other class's distribution.
inline double cross_class_mixing(Separation s) { return s == Separation::easy ? 0.02 : 0.35; }

inline json profile_to_json(const ClassProfile& p) {
    return json{{"creation_gap_days", {{"distribution", "uniform"}, {"lo", p.gap_days_lo}, {"hi", p.gap_days_hi}}},
                {"whois_update_probability", p.update_prob},
                {"domain_alive_probability", p.alive_prob},
                {"creation_hour", {{"window", {p.hour_lo, p.hour_hi}}, {"window_probability", p.offhour_prob},
                                   {"otherwise", "uniform 0-23"}}},
                {"encoder_count", {{"distribution", "1 + geometric"}, {"p", p.extra_encoder_p}, {"max", p.max_encoders}}},
                {"encoder_kind_mix", {{"regular", p.kind_mix[0]}, {"anonymous", p.kind_mix[1]},
                                      {"third_party_app", p.kind_mix[2]}}},
                {"first_click_lag_secs", {{"distribution", "uniform"}, {"lo", p.lag_lo}, {"hi", p.lag_hi}}},
                {"direct_click_probability", p.direct_prob},
                {"click_count", {{"distribution", "1 + geometric"}, {"p", p.click_count_p}, {"max", 50}}}};
}

}  // namespace detail

inline SynthOutput generate(const SynthParams& p) {
    p.validate();
    using detail::kDay;
    const auto& profiles = detail::class_profiles();
    const double mixing = detail::cross_class_mixing(p.separation);
    Rng rng(p.seed);

    std::size_t n_mal = static_cast<std::size_t>(std::llround(static_cast<double>(p.n_links) * p.malicious_fraction));
    n_mal = std::clamp<std::size_t>(n_mal, 1, p.n_links - 1);
    const std::size_t n_ben = p.n_links - n_mal;

    std::vector<Label> truth(p.n_links, Label::benign);
    std::fill(truth.begin(), truth.begin() + static_cast<std::ptrdiff_t>(n_mal), Label::malicious);
    rng.shuffle(truth);

    // Exactly round(fraction * class size) zero-click links per class.
    std::vector<std::uint8_t> zero_click(p.n_links, 0);
    std::array<std::size_t, 2> zero_counts{};
    for (std::size_t k = 0; k < 2; ++k) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < p.n_links; ++i) {
            if (detail::label_index(truth[i]) == k) members.push_back(i);
        }
        const double frac = k == 1 ? p.zero_click_fraction_malicious : p.zero_click_fraction_benign;
        const auto count = static_cast<std::size_t>(std::llround(static_cast<double>(members.size()) * frac));
        rng.shuffle(members);
        for (std::size_t j = 0; j < count; ++j) zero_click[members[j]] = 1;
        zero_counts[k] = count;
    }

    // Encoder pools.
    std::array<std::vector<EncoderProfile>, 2> pools;
    const std::array<std::size_t, 2> pool_sizes = {std::max<std::size_t>(8, n_ben / 4),
                                                   std::max<std::size_t>(5, n_mal / 10)};
    for (std::size_t k = 0; k < 2; ++k) {
        const auto& prof = profiles[k];
        for (std::size_t i = 0; i < pool_sizes[k]; ++i) {
            EncoderProfile e;
            e.encoder_id = (k == 1 ? "m" : "b") + std::to_string(i);
            const double u = rng.unit();
            e.kind = u < prof.kind_mix[0]                       ? EncoderKind::regular
                     : u < prof.kind_mix[0] + prof.kind_mix[1] ? EncoderKind::anonymous
                                                                : EncoderKind::third_party_app;
            const std::int64_t age_days = k == 1 ? rng.between(0, 60) : rng.between(30, 3 * 365);
            e.account_created_at = detail::kSynthEpoch - age_days * kDay;
            if (rng.chance(0.8)) e.connected_networks.push_back({"twitter", "tw_" + e.encoder_id});
            if (rng.chance(0.3)) e.connected_networks.push_back({"facebook", "fb_" + e.encoder_id});
            pools[k].push_back(std::move(e));
        }
    }

    static const std::array<std::string_view, 5> kBenignTlds = {"com", "org", "net", "co.uk", "com.au"};
    static const std::array<std::string_view, 5> kMaliciousTlds = {"in", "info", "tk", "xyz", "co.in"};
    static const std::array<std::string_view, 5> kReferrers = {"twitter.com", "facebook.com", "t.co", "reddit.com",
                                                               "news.google.com"};

    std::vector<ShortLink> links;
    std::vector<ClickEvent> clicks;
    std::vector<WhoisRecord> whois;
    VerdictStores verdicts;
    for (auto src : kAllSources) verdicts[src];

    // Picks the class whose distribution a feature is drawn from.
    auto draw_class = [&](std::size_t k) { return rng.chance(mixing) ? 1 - k : k; };

    for (std::size_t i = 0; i < p.n_links; ++i) {
        const std::size_t k = detail::label_index(truth[i]);
        ShortLink l;
        char hash[24];
        std::snprintf(hash, sizeof(hash), "s%07zx", i);
        l.global_hash = hash;
        const auto& tlds = k == 1 ? kMaliciousTlds : kBenignTlds;
        l.domain = (k == 1 ? "promo" : "site") + std::to_string(i) + "." + std::string(tlds[rng.below(tlds.size())]);
        l.long_url = "http://" + l.domain + "/p/" + std::to_string(rng.below(100000));

        // Creation time: day within the collection month plus an hour.
        const auto& hp = profiles[draw_class(k)];
        const int hour = rng.chance(hp.offhour_prob) ? static_cast<int>(rng.between(hp.hour_lo, hp.hour_hi))
                                                     : static_cast<int>(rng.between(0, 23));
        l.created_at = detail::kSynthEpoch + rng.between(0, 29) * kDay + hour * 3600 + rng.between(0, 3599);

        // WHOIS.
        const auto& gp = profiles[draw_class(k)];
        WhoisRecord w;
        w.domain = l.domain;
        const double gap_days = rng.uniform(gp.gap_days_lo, gp.gap_days_hi);
        const std::int64_t created = l.created_at - static_cast<std::int64_t>(gap_days * kDay);
        w.created_at = created;
        if (rng.chance(gp.update_prob)) {
            // Updates stay in the first half of the gap so the creation gap
            // keeps the class's scale.
            w.updated_at = created + static_cast<std::int64_t>(rng.uniform(0.0, 0.5) * gap_days * kDay);
        }
        w.expires_at = created + (k == 1 ? 365 : 5 * 365) * kDay;
        w.resolved_at = l.created_at + rng.between(0, 10 * kDay);
        w.alive = rng.chance(profiles[k].alive_prob);
        whois.push_back(w);

        // Encoders.
        const auto& ep = profiles[draw_class(k)];
        auto& pool = pools[draw_class(k)];
        const std::size_t n_enc = std::min<std::size_t>(
            {static_cast<std::size_t>(1 + std::min<std::int64_t>(rng.geometric(ep.extra_encoder_p), ep.max_encoders - 1)),
             pool.size()});
        std::vector<std::size_t> chosen;
        while (chosen.size() < n_enc) {
            auto e = static_cast<std::size_t>(rng.below(pool.size()));
            if (std::find(chosen.begin(), chosen.end(), e) == chosen.end()) chosen.push_back(e);
        }
        std::sort(chosen.begin(), chosen.end());

        l.warning_page_count = k == 1 ? 1 + rng.geometric(0.05) : 0;
        for (auto e : chosen) {
            l.encoder_ids.push_back(pool[e].encoder_id);
            pool[e].link_history.push_back({l.global_hash, *l.warning_page_count > 0});
        }

        // Clicks.
        if (!zero_click[i]) {
            const auto& cp = profiles[draw_class(k)];
            const auto& dp = profiles[draw_class(k)];
            const std::int64_t n_clicks = 1 + std::min<std::int64_t>(rng.geometric(cp.click_count_p), 49);
            const std::int64_t first = l.created_at + static_cast<std::int64_t>(rng.uniform(cp.lag_lo, cp.lag_hi));
            for (std::int64_t c = 0; c < n_clicks; ++c) {
                ClickEvent ev;
                ev.global_hash = l.global_hash;
                ev.clicked_at = c == 0 ? first : first + rng.between(0, 30 * kDay);
                ev.referrer_domain = rng.chance(dp.direct_prob) ? "" : std::string(kReferrers[rng.below(kReferrers.size())]);
                clicks.push_back(std::move(ev));
            }
        }

        // Ground truth goes into exactly one blacklist fixture; benign links
        // are occasionally present with a clean verdict.
        if (k == 1) {
            const auto src = kAllSources[rng.below(kAllSources.size())];
            std::string subject = src == VerdictSource::surbl          ? l.domain
                                  : src == VerdictSource::warning_page ? l.global_hash
                                                                       : l.long_url;
            static const std::array<std::string_view, 3> kDetails = {"phishing", "malware", "spam"};
            verdicts[src].add(subject, true, std::string(kDetails[rng.below(kDetails.size())]));
        } else if (rng.chance(0.1)) {
            verdicts[VerdictSource::virustotal].add(l.long_url, false, "ok");
        }
        links.push_back(std::move(l));
    }

    std::vector<EncoderProfile> encoders;
    for (auto& pool : pools) {
        for (auto& e : pool) encoders.push_back(std::move(e));
    }

    LoadReport report;
    SynthOutput out;
    out.dataset = Dataset::assemble(std::move(links), std::move(encoders), std::move(clicks), report);
    if (!report.drops.empty()) throw error("synthetic generator produced an invalid record: " + report.drops.front().reason);
    out.whois = std::move(whois);
    out.verdicts = std::move(verdicts);
    out.truth = std::move(truth);

    json m;
    m["generator"] = "bitscan-synth";
    m["version"] = kVersion;
    m["params"] = json{{"n_links", p.n_links},
                       {"malicious_fraction", p.malicious_fraction},
                       {"zero_click_fraction_malicious", p.zero_click_fraction_malicious},
                       {"zero_click_fraction_benign", p.zero_click_fraction_benign},
                       {"seed", p.seed},
                       {"separation", std::string(to_string(p.separation))}};
    m["rng"] = "mt19937_64, rejection-sampled integers, 53-bit uniform reals";
    m["epoch_origin"] = detail::kSynthEpoch;
    m["cross_class_mixing"] = mixing;
    m["overlap_note"] =
        "each feature draw of a link uses the other class's distribution with probability cross_class_mixing";
    m["classes"] = json{{"benign", detail::profile_to_json(profiles[0])},
                        {"malicious", detail::profile_to_json(profiles[1])}};
    m["warning_page_count"] = json{{"malicious", "1 + geometric(p=0.05)"}, {"benign", 0}};
    m["counts"] = json{{"links", p.n_links},
                       {"malicious", n_mal},
                       {"benign", n_ben},
                       {"zero_click_malicious", zero_counts[1]},
                       {"zero_click_benign", zero_counts[0]},
                       {"encoders", out.dataset.encoders().size()},
                       {"clicks", out.dataset.click_count()}};
    out.manifest = std::move(m);
    return out;
}

/// Writes dataset.jsonl, whois.jsonl, verdicts/<provider>.jsonl and
/// manifest.json under `dir`.
inline void write_synth(const SynthOutput& s, const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir / "verdicts");
    write_dataset(s.dataset, (dir / "dataset.jsonl").string());
    {
        std::ofstream out(dir / "whois.jsonl", std::ios::binary);
        if (!out) throw io_error("cannot write " + (dir / "whois.jsonl").string());
        for (const auto& w : s.whois) out << WhoisStore::to_json(w).dump() << '\n';
    }
    for (const auto& [src, fixture] : s.verdicts) {
        auto path = dir / "verdicts" / (std::string(to_string(src)) + ".jsonl");
        std::ofstream out(path, std::ios::binary);
        if (!out) throw io_error("cannot write " + path.string());
        fixture.write(out);
    }
    std::ofstream out(dir / "manifest.json", std::ios::binary);
    if (!out) throw io_error("cannot write " + (dir / "manifest.json").string());
    out << s.manifest.dump(2) << '\n';
}

}  // namespace bitscan
