#pragma once

// Small builders shared by the unit tests.

#include <bitscan/eval.hpp>
#include <bitscan/forensics.hpp>
#include <bitscan/synth.hpp>

#include <unistd.h>

#include <filesystem>
#include <random>
#include <string>

namespace fixtures {

using namespace bitscan;

inline ShortLink link(std::string hash, std::string url, std::int64_t created, std::vector<std::string> encoders,
                      std::optional<std::int64_t> warnings = std::nullopt) {
    ShortLink l;
    l.global_hash = std::move(hash);
    l.long_url = std::move(url);
    l.created_at = created;
    l.encoder_ids = std::move(encoders);
    l.warning_page_count = warnings;
    return l;
}

inline EncoderProfile encoder(std::string id, EncoderKind kind = EncoderKind::regular) {
    EncoderProfile e;
    e.encoder_id = std::move(id);
    e.kind = kind;
    return e;
}

inline Dataset build(std::vector<ShortLink> links, std::vector<EncoderProfile> encoders,
                     std::vector<ClickEvent> clicks = {}) {
    LoadReport report;
    auto ds = Dataset::assemble(std::move(links), std::move(encoders), std::move(clicks), report);
    if (!report.drops.empty()) throw std::logic_error("fixture dropped records: " + report.drops.front().reason);
    return ds;
}

/// Table with one row per label; values[r][c].
inline Table table(const std::vector<std::vector<std::optional<double>>>& values, const std::vector<Label>& labels,
                   std::vector<std::string> names = {}) {
    if (names.empty()) {
        for (std::size_t c = 0; c < (values.empty() ? 0 : values[0].size()); ++c) names.push_back("f" + std::to_string(c));
    }
    Table t(names);
    for (std::size_t r = 0; r < values.size(); ++r) t.add_row(values[r], labels[r], "r" + std::to_string(r));
    return t;
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
    // pid suffix: ctest -j runs each case in its own process
    auto dir = std::filesystem::temp_directory_path() / ("bitscan_test_" + name + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

/// Labeled feature table built from the synthetic generator.
inline Table synth_table(const SynthParams& p, FeatureMode mode) {
    auto s = generate(p);
    std::vector<std::optional<Label>> labels(s.truth.begin(), s.truth.end());
    auto ds = s.dataset.with_labels(labels);
    return extract(ds, WhoisStore(s.whois), mode).to_table();
}

}  // namespace fixtures
