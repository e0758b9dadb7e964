#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "fixtures.hpp"

using namespace bitscan;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::size_t zero_click_of(const SynthOutput& s, Label k) {
    std::size_t n = 0;
    for (std::size_t i = 0; i < s.truth.size(); ++i) {
        if (s.truth[i] == k && s.dataset.clicks_of(s.dataset.links()[i].global_hash).empty()) ++n;
    }
    return n;
}

}  // namespace

TEST(Synth, ClassAndZeroClickCountsAreExact) {
    auto s = generate({});
    ASSERT_EQ(s.dataset.links().size(), 2000u);
    EXPECT_EQ(std::count(s.truth.begin(), s.truth.end(), Label::malicious), 1000);
    EXPECT_EQ(zero_click_of(s, Label::malicious), 462u);  // round(1000 * 0.4616)
    EXPECT_EQ(zero_click_of(s, Label::benign), 300u);
    EXPECT_EQ(s.manifest["counts"]["zero_click_malicious"], 462);
    EXPECT_EQ(s.manifest["counts"]["malicious"], 1000);
}

TEST(Synth, OddSizesRoundPerClass) {
    auto s = generate({.n_links = 333, .malicious_fraction = 0.3, .zero_click_fraction_malicious = 0.5,
                       .zero_click_fraction_benign = 0.0, .seed = 2});
    const auto mal = static_cast<std::size_t>(std::count(s.truth.begin(), s.truth.end(), Label::malicious));
    EXPECT_EQ(mal, 100u);
    EXPECT_EQ(zero_click_of(s, Label::malicious), 50u);
    EXPECT_EQ(zero_click_of(s, Label::benign), 0u);
}

TEST(Synth, EveryLinkHasWhoisAndGroundTruthVerdict) {
    auto s = generate({.n_links = 400, .seed = 5});
    WhoisStore whois(s.whois);
    for (const auto& l : s.dataset.links()) EXPECT_TRUE(whois.lookup(l.domain).created_at.has_value());
    const std::set<VerdictSource> all(kAllSources.begin(), kAllSources.end());
    auto labeled = label_dataset(s.dataset, all, s.verdicts);
    for (std::size_t i = 0; i < s.truth.size(); ++i) EXPECT_EQ(labeled.dataset.links()[i].label, s.truth[i]);
}

TEST(Synth, ByteIdenticalAcrossRuns) {
    auto a = fixtures::temp_dir("synth_a");
    auto b = fixtures::temp_dir("synth_b");
    write_synth(generate({.n_links = 500, .seed = 11}), a);
    write_synth(generate({.n_links = 500, .seed = 11}), b);
    for (const char* f : {"dataset.jsonl", "whois.jsonl", "manifest.json", "verdicts/surbl.jsonl",
                          "verdicts/warning_page.jsonl"}) {
        const auto x = slurp(a / f);
        EXPECT_FALSE(x.empty()) << f;
        EXPECT_EQ(x, slurp(b / f)) << f;
    }
    auto c = fixtures::temp_dir("synth_c");
    write_synth(generate({.n_links = 500, .seed = 12}), c);
    EXPECT_NE(slurp(a / "dataset.jsonl"), slurp(c / "dataset.jsonl"));
}

TEST(Synth, WrittenDatasetLoadsWithoutDrops) {
    auto dir = fixtures::temp_dir("synth_load");
    auto s = generate({.n_links = 300, .seed = 4, .separation = Separation::hard});
    write_synth(s, dir);
    LoadReport report;
    std::ifstream in(dir / "dataset.jsonl");
    auto back = load_dataset(in, report);
    EXPECT_TRUE(report.drops.empty());
    EXPECT_EQ(report.malformed, 0u);
    EXPECT_EQ(back, s.dataset);
}

TEST(Synth, EasyIsLearnableByShallowTree) {
    auto t = fixtures::synth_table({}, FeatureMode::full);
    TrainParams p;
    p.max_depth = 4;
    auto r = cross_validate(model_trainer(ModelKind::decision_tree, p), t, 10, 1);
    EXPECT_GE(r.accuracy, 0.95);
}

TEST(Synth, HardOverlapsClasses) {
    auto t = fixtures::synth_table({.separation = Separation::hard}, FeatureMode::full);
    TrainParams p;
    p.tree_count = 30;
    auto r = cross_validate(model_trainer(ModelKind::random_forest, p), t, 5, 1, 4);
    EXPECT_GT(r.accuracy, 0.55);
    EXPECT_LT(r.accuracy, 0.85);
}

TEST(Synth, ManifestDescribesTheGenerator) {
    auto s = generate({.seed = 99, .separation = Separation::hard});
    const auto& m = s.manifest;
    EXPECT_EQ(m["params"]["seed"], 99);
    EXPECT_EQ(m["params"]["separation"], "hard");
    EXPECT_EQ(m["cross_class_mixing"], 0.35);
    EXPECT_TRUE(m["classes"].contains("malicious"));
    EXPECT_TRUE(m["classes"].contains("benign"));
    EXPECT_EQ(m["counts"]["links"], 2000);
    EXPECT_EQ(m["counts"]["clicks"], s.dataset.click_count());
}

TEST(Synth, RejectsBadParameters) {
    EXPECT_THROW(generate({.n_links = 1}), invalid_input);
    EXPECT_THROW(generate({.malicious_fraction = 0.0}), invalid_input);
    EXPECT_THROW(generate({.malicious_fraction = 1.0}), invalid_input);
    EXPECT_THROW(generate({.zero_click_fraction_malicious = 1.2}), invalid_input);
    EXPECT_THROW(generate({.zero_click_fraction_benign = -0.1}), invalid_input);
}
