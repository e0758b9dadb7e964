#include <gtest/gtest.h>

#include <sstream>

#include "fixtures.hpp"
#include "oracles.hpp"

using namespace bitscan;

namespace {

constexpr Label M = Label::malicious;
constexpr Label B = Label::benign;

Table one_feature(const std::vector<double>& x, const std::vector<Label>& y) {
    std::vector<std::vector<std::optional<double>>> rows;
    for (double v : x) rows.push_back({v});
    return fixtures::table(rows, y, {"x"});
}

std::vector<std::optional<double>> vec(std::initializer_list<std::optional<double>> v) { return v; }

std::string serialized(const Model& m) {
    std::ostringstream out;
    save_model(m, out);
    return out.str();
}

Model reload(const std::string& text) {
    std::istringstream in(text);
    return load_model(in);
}

const DecisionTree& tree_of(const Model& m) { return std::get<DecisionTree>(m.body); }

double training_accuracy(const Model& m, const Table& t) {
    auto preds = predict_all(m, t);
    std::size_t ok = 0;
    for (std::size_t r = 0; r < t.rows(); ++r) ok += preds[r].label == *t.label(r) ? 1 : 0;
    return static_cast<double>(ok) / static_cast<double>(t.rows());
}

}  // namespace

TEST(TrainParams, Validation) {
    TrainParams p;
    EXPECT_NO_THROW(p.validate());
    p.tree_count = 0;
    EXPECT_THROW(p.validate(), invalid_input);
    p = {};
    p.min_leaf = 0;
    EXPECT_THROW(p.validate(), invalid_input);
    p = {};
    p.features_per_split = 0;
    EXPECT_THROW(p.validate(), invalid_input);
    p = {};
    EXPECT_EQ(p.tree_count, 100);
    EXPECT_EQ(p.min_leaf, 1);
    EXPECT_FALSE(p.max_depth.has_value());
    EXPECT_EQ(p.seed, kDefaultSeed);
}

TEST(NaiveBayes, SymmetricClusters) {
    auto t = one_feature({0, 0, 10, 10}, {B, B, M, M});
    auto m = train_naive_bayes(t);
    const double eps = 1e-6;
    EXPECT_EQ(predict_values(m, vec({5.0 - eps})).label, B);
    EXPECT_EQ(predict_values(m, vec({5.0 + eps})).label, M);
    auto at_zero = predict_values(m, vec({0.0}));
    EXPECT_EQ(at_zero.label, B);
    EXPECT_LT(at_zero.score, 0.5);
}

TEST(NaiveBayes, VarianceFloor) {
    auto t = one_feature({3, 3, 7, 7}, {B, B, M, M});
    auto m = train_naive_bayes(t);
    const auto& nb = std::get<NaiveBayesParams>(m.body);
    EXPECT_EQ(nb.stats[0][0].variance, kVarianceFloor);
    EXPECT_EQ(nb.stats[1][0].mean, 7.0);
}

TEST(NaiveBayes, ConstantFeatureLeavesPriorsToDecide) {
    std::vector<double> x(10, 3.0);
    std::vector<Label> y(9, B);
    y.push_back(M);
    auto m = train_naive_bayes(one_feature(x, y));
    auto p = predict_values(m, vec({3.0}));
    EXPECT_EQ(p.label, B);
    EXPECT_NEAR(p.score, 0.1, 1e-12);
    EXPECT_EQ(predict_values(m, vec({-100.0})).label, B);
}

TEST(NaiveBayes, HandComputedPosterior) {
    // benign {0, 2}: mean 1, var 1; malicious {4, 6}: mean 5, var 1; equal priors.
    // At x = 2 the log-likelihood gap is (9 - 1) / 2 = 4, so P(M|x) = 1 / (1 + e^4).
    auto m = train_naive_bayes(one_feature({0, 2, 4, 6}, {B, B, M, M}));
    EXPECT_NEAR(predict_values(m, vec({2.0})).score, 1.0 / (1.0 + std::exp(4.0)), 1e-12);
}

TEST(NaiveBayes, MissingValuesSkipped) {
    auto t = fixtures::table({{1.0, std::nullopt}, {1.2, 5.0}, {9.0, std::nullopt}, {9.4, std::nullopt}},
                             {B, B, M, M});
    auto m = train_naive_bayes(t);
    const auto& nb = std::get<NaiveBayesParams>(m.body);
    EXPECT_EQ(nb.stats[0][1].count, 1u);
    EXPECT_EQ(nb.stats[1][1].count, 0u);
    // Feature 1 has no malicious values, so it carries no evidence.
    EXPECT_EQ(predict_values(m, vec({9.2, 5.0})).label, M);
    auto all_missing = predict_values(m, vec({std::nullopt, std::nullopt}));
    EXPECT_DOUBLE_EQ(all_missing.score, 0.5);
    EXPECT_EQ(all_missing.label, M);
}

TEST(NaiveBayes, ReorderedFeaturesGiveSamePredictions) {
    auto t = fixtures::synth_table({.n_links = 400, .seed = 3}, FeatureMode::full);
    auto names = t.feature_names();
    std::reverse(names.begin(), names.end());
    auto reordered = t.project(names);
    auto a = train_naive_bayes(t);
    auto b = train_naive_bayes(reordered);
    auto pa = predict_all(a, t);
    auto pb = predict_all(b, t);
    for (std::size_t r = 0; r < t.rows(); ++r) {
        EXPECT_EQ(pa[r].label, pb[r].label);
        EXPECT_NEAR(pa[r].score, pb[r].score, 1e-9);
    }
}

TEST(NaiveBayes, RequiresBothClasses) {
    EXPECT_THROW(train_naive_bayes(one_feature({1, 2}, {B, B})), invalid_input);
    Table unlabeled({"x"});
    unlabeled.add_row(vec({1.0}), std::nullopt);
    EXPECT_THROW(train_naive_bayes(unlabeled), invalid_input);
}

TEST(DecisionTree, ThresholdRuleLearnedAtDepthOne) {
    std::vector<double> age = {1, 5, 12, 29, 31, 45, 100, 400};
    std::vector<Label> y;
    for (double a : age) y.push_back(a < 30 ? M : B);
    auto t = one_feature(age, y);
    auto m = train_decision_tree(t);
    const auto& tree = tree_of(m);
    EXPECT_EQ(tree.depth(), 1u);
    EXPECT_EQ(tree.nodes[0].feature, 0);
    EXPECT_GT(tree.nodes[0].threshold, 29.0);
    EXPECT_LT(tree.nodes[0].threshold, 31.0);
    EXPECT_EQ(training_accuracy(m, t), 1.0);

    // Brute force: no midpoint does better than the chosen one.
    auto best = oracle::best_threshold_split({age}, {1, 1, 1, 1, 0, 0, 0, 0});
    EXPECT_NEAR(best.gain, find_best_split(t).gain, 1e-12);
    EXPECT_EQ(best.threshold, tree.nodes[0].threshold);
}

TEST(DecisionTree, PureDataGivesSingleLeaf) {
    auto t = one_feature({1, 2, 3, 4}, {M, M, M, M});
    TrainParams p;
    detail::TreeBuilder builder(t, p, t.cols(), nullptr);
    auto tree = builder.build({0, 1, 2, 3});
    ASSERT_EQ(tree.nodes.size(), 1u);
    EXPECT_TRUE(tree.nodes[0].is_leaf());
    EXPECT_EQ(tree.nodes[0].counts[1], 4.0);
    // Training proper requires both classes.
    EXPECT_THROW(train_decision_tree(t), invalid_input);
}

TEST(DecisionTree, XorNeedsTwoLevels) {
    auto t = fixtures::table({{0.0, 0.0}, {0.0, 1.0}, {1.0, 0.0}, {1.0, 1.0}}, {B, M, M, B});
    auto m = train_decision_tree(t);
    const auto& tree = tree_of(m);
    EXPECT_EQ(tree.depth(), 2u);
    EXPECT_EQ(tree.nodes[0].feature, 0);  // marginal gains tie at 0; lower index wins
    EXPECT_EQ(tree.nodes[0].threshold, 0.5);
    EXPECT_EQ(training_accuracy(m, t), 1.0);
}

TEST(DecisionTree, MaxDepthAndMinLeaf) {
    auto t = fixtures::table({{0.0, 0.0}, {0.0, 1.0}, {1.0, 0.0}, {1.0, 1.0}}, {B, M, M, B});
    TrainParams p;
    p.max_depth = 1;
    EXPECT_EQ(tree_of(train_decision_tree(t, p)).depth(), 1u);
    p.max_depth = 0;
    EXPECT_EQ(tree_of(train_decision_tree(t, p)).nodes.size(), 1u);
    p = {};
    p.min_leaf = 3;
    EXPECT_EQ(tree_of(train_decision_tree(t, p)).nodes.size(), 1u);
    p.min_leaf = 2;
    const auto m = train_decision_tree(t, p);
    const auto& tree = tree_of(m);
    for (const auto& n : tree.nodes) {
        if (n.is_leaf()) {
            EXPECT_GE(n.counts[0] + n.counts[1], 2.0);
        }
    }
}

TEST(DecisionTree, MissingValuesRoutedToLargerChild) {
    // Known: 1,2,3 -> B ; 10 -> M. Split at 6.5 puts 3 rows left, so missing goes left.
    auto t = fixtures::table({{1.0}, {2.0}, {3.0}, {10.0}, {std::nullopt}}, {B, B, B, M, B}, {"x"});
    auto m = train_decision_tree(t);
    const auto& root = tree_of(m).nodes[0];
    EXPECT_EQ(root.threshold, 6.5);
    EXPECT_TRUE(root.missing_left);
    EXPECT_EQ(predict_values(m, vec({std::nullopt})).label, B);
}

TEST(DecisionTree, AllMissingVectorUsesRootMajority) {
    auto t = fixtures::table({{1.0, 0.0}, {2.0, 0.0}, {3.0, 1.0}, {10.0, 1.0}, {11.0, 1.0}}, {B, B, M, M, M});
    auto m = train_decision_tree(t);
    auto p = predict_values(m, vec({std::nullopt, std::nullopt}));
    EXPECT_EQ(p.label, M);
    EXPECT_DOUBLE_EQ(p.score, 0.6);
}

TEST(DecisionTree, LeafTieGoesMalicious) {
    // Identical vectors with conflicting labels cannot be split.
    auto t = one_feature({1, 1}, {B, M});
    auto m = train_decision_tree(t);
    auto p = predict_values(m, vec({1.0}));
    EXPECT_EQ(p.label, M);
    EXPECT_EQ(p.score, 0.5);
}

TEST(DecisionTree, RootSplitMatchesOracleOnRandomMatrices) {
    Rng rng(2024);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 4 + rng.below(27);
        const std::size_t f = 1 + rng.below(4);
        const auto distinct = 2 + rng.below(19);
        std::vector<std::vector<double>> cols(f, std::vector<double>(n));
        std::vector<int> y(n);
        std::vector<Label> labels(n);
        std::vector<std::vector<std::optional<double>>> rows(n, std::vector<std::optional<double>>(f));
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t c = 0; c < f; ++c) {
                cols[c][r] = static_cast<double>(rng.below(distinct)) * 0.5;
                rows[r][c] = cols[c][r];
            }
            y[r] = rng.chance(0.5) ? 1 : 0;
            labels[r] = y[r] ? M : B;
        }
        y[0] = 1, labels[0] = M;
        y[1] = 0, labels[1] = B;
        auto t = fixtures::table(rows, labels);
        auto split = find_best_split(t);
        auto best = oracle::best_threshold_split(cols, y);
        if (best.gain < 0) {
            EXPECT_FALSE(split.valid());
            continue;
        }
        ASSERT_TRUE(split.valid());
        EXPECT_NEAR(split.gain, best.gain, 1e-12);
        EXPECT_NEAR(oracle::threshold_gain(cols[static_cast<std::size_t>(split.feature)], y, split.threshold),
                    best.gain, 1e-12);
    }
}

TEST(DecisionTree, ConsistentDataReachesFullTrainingAccuracy) {
    Rng rng(99);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 5 + rng.below(40);
        std::map<std::vector<double>, Label> seen;
        std::vector<std::vector<std::optional<double>>> rows;
        std::vector<Label> labels;
        while (rows.size() < n) {
            std::vector<double> x = {double(rng.below(6)), double(rng.below(6)), double(rng.below(3))};
            Label l = rng.chance(0.5) ? M : B;
            auto [it, inserted] = seen.emplace(x, l);
            l = it->second;
            rows.push_back({x[0], x[1], x[2]});
            labels.push_back(l);
        }
        if (std::count(labels.begin(), labels.end(), M) == 0 || std::count(labels.begin(), labels.end(), B) == 0) {
            continue;
        }
        auto t = fixtures::table(rows, labels);
        EXPECT_EQ(training_accuracy(train_decision_tree(t), t), 1.0);
    }
}

TEST(RandomForest, DegenerateForestMatchesTree) {
    auto t = fixtures::synth_table({.n_links = 600, .seed = 5, .separation = Separation::hard}, FeatureMode::full);
    TrainParams p;
    p.tree_count = 1;
    p.features_per_split = static_cast<int>(t.cols());
    p.bootstrap = false;
    auto forest = train_random_forest(t, p);
    auto tree = train_decision_tree(t, p);
    EXPECT_EQ(std::get<ForestParams>(forest.body).trees[0], tree_of(tree));
    auto pf = predict_all(forest, t);
    auto pt = predict_all(tree, t);
    for (std::size_t r = 0; r < t.rows(); ++r) EXPECT_EQ(pf[r].label, pt[r].label);
}

TEST(RandomForest, DeterministicAcrossRunsAndWorkers) {
    auto t = fixtures::synth_table({.n_links = 400, .seed = 9}, FeatureMode::full);
    TrainParams p;
    p.tree_count = 20;
    p.workers = 1;
    const auto a = serialized(train_random_forest(t, p));
    EXPECT_EQ(serialized(train_random_forest(t, p)), a);
    p.workers = 6;
    EXPECT_EQ(serialized(train_random_forest(t, p)), a);
    p.seed = 43;
    EXPECT_NE(serialized(train_random_forest(t, p)), a);
}

TEST(RandomForest, OutOfBagAccuracyOnSeparableSynthData) {
    auto t = fixtures::synth_table(SynthParams{}, FeatureMode::full);
    TrainParams p;
    p.workers = default_workers();
    auto m = train_random_forest(t, p);
    const auto& forest = std::get<ForestParams>(m.body);
    ASSERT_TRUE(forest.oob_accuracy.has_value());
    // Measured 0.9895 with these defaults.
    EXPECT_GE(*forest.oob_accuracy, 0.90);
    EXPECT_EQ(forest.trees.size(), 100u);
    for (std::size_t i = 0; i < forest.trees.size(); ++i) EXPECT_EQ(forest.tree_seeds[i], tree_seed(kDefaultSeed, i));
}

TEST(RandomForest, VoteFractionScore) {
    Model m;
    m.kind = ModelKind::random_forest;
    m.feature_names = {"x"};
    ForestParams f;
    for (int i = 0; i < 100; ++i) {
        DecisionTree leaf;
        TreeNode n;
        n.counts = i < 73 ? std::array<double, 2>{0.0, 1.0} : std::array<double, 2>{1.0, 0.0};
        leaf.nodes.push_back(n);
        f.trees.push_back(leaf);
        f.tree_seeds.push_back(static_cast<std::uint64_t>(i));
    }
    m.body = f;
    auto p = predict_values(m, vec({1.0}));
    EXPECT_EQ(p.label, M);
    EXPECT_DOUBLE_EQ(p.score, 0.73);

    // Even split of votes is a tie; ties go to malicious.
    auto& trees = std::get<ForestParams>(m.body).trees;
    trees.resize(2);
    trees[1].nodes[0].counts = {1.0, 0.0};
    EXPECT_EQ(predict_values(m, vec({1.0})).label, M);
    EXPECT_EQ(predict_values(m, vec({1.0})).score, 0.5);
}

TEST(RandomForest, ScoresOnVoteGrid) {
    auto t = fixtures::synth_table({.n_links = 300, .seed = 4, .separation = Separation::hard}, FeatureMode::full);
    TrainParams p;
    p.tree_count = 8;
    auto m = train_random_forest(t, p);
    for (const auto& pr : predict_all(m, t)) {
        const double votes = pr.score * 8.0;
        EXPECT_DOUBLE_EQ(votes, std::round(votes));
        EXPECT_EQ(pr.label == M, votes >= 4.0);
    }
}

TEST(Predict, FeatureNameMismatch) {
    auto t = fixtures::table({{1.0, 2.0}, {3.0, 4.0}}, {B, M}, {"domain_age_days", "creation_hour"});
    auto m = train_naive_bayes(t);
    EXPECT_THROW(predict_values(m, vec({1.0})), invalid_input);
    Table other({"domain_age_days"});
    other.add_row(vec({1.0}), B);
    EXPECT_THROW(predict_all(m, other), invalid_input);

    FeatureVector v;
    v.mode = FeatureMode::non_click;
    v.domain_age_days = 1.0;
    v.creation_hour = 2;
    EXPECT_NO_THROW(predict(m, v));
    auto full = train_naive_bayes(fixtures::table({{1.0}, {3.0}}, {B, M}, {"direct_click_fraction"}));
    EXPECT_THROW(predict(full, v), invalid_input);
}

TEST(Serialization, RoundTripPredictionsForEveryKind) {
    auto t = fixtures::synth_table({.n_links = 400, .seed = 12, .separation = Separation::hard}, FeatureMode::full);
    Rng rng(1);
    std::vector<std::vector<std::optional<double>>> probes;
    for (int i = 0; i < 100; ++i) {
        std::vector<std::optional<double>> x;
        for (std::size_t c = 0; c < t.cols(); ++c) {
            if (rng.chance(0.1)) x.push_back(std::nullopt);
            else x.push_back(t.raw(rng.below(t.rows()), c) * rng.uniform(0.5, 1.5));
        }
        probes.push_back(x);
    }
    TrainParams p;
    p.tree_count = 15;
    for (auto kind : {ModelKind::naive_bayes, ModelKind::decision_tree, ModelKind::random_forest}) {
        auto m = train(kind, t, p);
        const auto text = serialized(m);
        auto back = reload(text);
        EXPECT_EQ(serialized(back), text);
        EXPECT_EQ(back.kind, kind);
        for (const auto& x : probes) EXPECT_EQ(predict_values(back, x), predict_values(m, x));
    }
}

TEST(Serialization, FileRoundTrip) {
    auto dir = fixtures::temp_dir("model_file");
    auto t = one_feature({0, 1, 2, 3}, {B, B, M, M});
    auto m = train_decision_tree(t);
    const auto path = (dir / "model.bin").string();
    save_model(m, path);
    EXPECT_EQ(serialized(load_model(path)), serialized(m));
    EXPECT_THROW(load_model((dir / "absent.bin").string()), io_error);
}

TEST(Serialization, TruncatedFileIsCorrupt) {
    const auto text = serialized(train_decision_tree(one_feature({0, 1, 2, 3}, {B, B, M, M})));
    EXPECT_THROW(reload(text.substr(0, text.size() / 2)), format_error);
    EXPECT_THROW(reload(""), format_error);
    EXPECT_THROW(reload("{\"format\":\"something-else\"}"), format_error);
}

TEST(Serialization, VersionBumpIsMismatch) {
    auto j = model_to_json(train_naive_bayes(one_feature({0, 1, 2, 3}, {B, B, M, M})));
    j["format_version"] = kModelFormatVersion + 1;
    EXPECT_THROW(model_from_json(j), version_mismatch);
}

TEST(Serialization, StructuralDamageIsCorrupt) {
    auto j = model_to_json(train_decision_tree(one_feature({0, 1, 2, 3}, {B, B, M, M})));
    auto bad_child = j;
    bad_child["tree"][0][3] = 99;
    EXPECT_THROW(model_from_json(bad_child), format_error);
    auto bad_feature = j;
    bad_feature["tree"][0][0] = 5;
    EXPECT_THROW(model_from_json(bad_feature), format_error);
    auto no_kind = j;
    no_kind.erase("kind");
    EXPECT_THROW(model_from_json(no_kind), format_error);
}
