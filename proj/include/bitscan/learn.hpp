#pragma once

// Gaussian naive Bayes, an entropy-split binary decision tree and a bagged
// random forest over Table data, plus a versioned JSON model format.
//
// Conventions shared by all three learners:
//  * missing values are skipped by naive Bayes and routed to the child that
//    received more training rows by the trees;
//  * ties resolve deterministically: equal gain -> lower feature index, then
//    lower threshold; equal class mass or votes -> malicious.

#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <numeric>
#include <variant>

#include "features.hpp"

namespace bitscan {

enum class ModelKind { naive_bayes, decision_tree, random_forest };

inline std::string_view to_string(ModelKind k) {
    switch (k) {
        case ModelKind::naive_bayes: return "naive_bayes";
        case ModelKind::decision_tree: return "decision_tree";
        case ModelKind::random_forest: return "random_forest";
    }
    return "";
}

inline std::optional<ModelKind> parse_model_kind(std::string_view s) {
    if (s == "naive_bayes") return ModelKind::naive_bayes;
    if (s == "decision_tree") return ModelKind::decision_tree;
    if (s == "random_forest") return ModelKind::random_forest;
    return std::nullopt;
}

inline constexpr std::uint64_t kDefaultSeed = 42;

struct TrainParams {
    int tree_count = 100;
    std::optional<int> max_depth;           // unlimited when absent
    int min_leaf = 1;
    std::optional<int> features_per_split;  // forest; ceil(sqrt(F)) when absent
    std::uint64_t seed = kDefaultSeed;
    bool bootstrap = true;                  // forest only
    unsigned workers = 1;                   // does not affect the result

    void validate() const {
        if (tree_count < 1) throw invalid_input("tree_count must be >= 1");
        if (min_leaf < 1) throw invalid_input("min_leaf must be >= 1");
        if (max_depth && *max_depth < 0) throw invalid_input("max_depth must be >= 0");
        if (features_per_split && *features_per_split < 1) throw invalid_input("features_per_split must be >= 1");
    }
};

struct GaussianStat {
    double mean = 0.0;
    double variance = 0.0;
    std::size_t count = 0;  // non-missing training values

    bool operator==(const GaussianStat&) const = default;
};

inline constexpr double kVarianceFloor = 1e-9;

struct NaiveBayesParams {
    // stats[label][feature]
    std::array<std::vector<GaussianStat>, 2> stats;

    bool operator==(const NaiveBayesParams&) const = default;
};

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;  // value <= threshold goes left
    bool missing_left = true;
    int left = -1;
    int right = -1;
    std::array<double, 2> counts{};  // training mass per label reaching the node

    bool is_leaf() const { return feature < 0; }
    bool operator==(const TreeNode&) const = default;
};

struct DecisionTree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root

    std::size_t depth() const {
        std::size_t best = 0;
        std::vector<std::pair<int, std::size_t>> stack{{0, 0}};
        while (!stack.empty()) {
            auto [n, d] = stack.back();
            stack.pop_back();
            best = std::max(best, d);
            if (!nodes[n].is_leaf()) {
                stack.push_back({nodes[n].left, d + 1});
                stack.push_back({nodes[n].right, d + 1});
            }
        }
        return best;
    }

    bool operator==(const DecisionTree&) const = default;
};

struct ForestParams {
    std::vector<DecisionTree> trees;
    std::vector<std::uint64_t> tree_seeds;
    std::optional<double> oob_accuracy;

    bool operator==(const ForestParams&) const = default;
};

struct Model {
    ModelKind kind = ModelKind::naive_bayes;
    std::vector<std::string> feature_names;
    std::uint64_t train_seed = kDefaultSeed;
    std::array<double, 2> class_prior{};  // [benign, malicious]
    TrainParams params;
    std::variant<NaiveBayesParams, DecisionTree, ForestParams> body;
};

struct Prediction {
    Label label = Label::benign;
    double score = 0.0;  // probability-like malicious score in [0, 1]

    bool operator==(const Prediction&) const = default;
};

namespace detail {

inline void require_both_classes(const Table& t) {
    if (!t.fully_labeled()) throw invalid_input("training table has unlabeled rows");
    if (t.count(Label::malicious) == 0 || t.count(Label::benign) == 0) {
        throw invalid_input("training data must contain both classes");
    }
}

inline std::array<double, 2> priors(const Table& t) {
    const double n = static_cast<double>(t.rows());
    return {static_cast<double>(t.count(Label::benign)) / n, static_cast<double>(t.count(Label::malicious)) / n};
}

inline Label majority(const std::array<double, 2>& counts) {
    return counts[1] >= counts[0] ? Label::malicious : Label::benign;
}

inline double malicious_share(const std::array<double, 2>& counts) {
    const double n = counts[0] + counts[1];
    return n > 0.0 ? counts[1] / n : 0.0;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Naive Bayes
// ---------------------------------------------------------------------------

inline Model train_naive_bayes(const Table& t) {
    detail::require_both_classes(t);
    Model m;
    m.kind = ModelKind::naive_bayes;
    m.feature_names = t.feature_names();
    m.class_prior = detail::priors(t);
    NaiveBayesParams nb;
    for (auto& s : nb.stats) s.resize(t.cols());
    for (std::size_t c = 0; c < t.cols(); ++c) {
        std::array<double, 2> sum{}, n{};
        for (std::size_t r = 0; r < t.rows(); ++r) {
            if (!t.has(r, c)) continue;
            auto k = detail::label_index(*t.label(r));
            sum[k] += t.raw(r, c);
            n[k] += 1.0;
        }
        std::array<double, 2> sq{};
        for (std::size_t r = 0; r < t.rows(); ++r) {
            if (!t.has(r, c)) continue;
            auto k = detail::label_index(*t.label(r));
            const double d = t.raw(r, c) - sum[k] / n[k];
            sq[k] += d * d;
        }
        for (std::size_t k = 0; k < 2; ++k) {
            auto& s = nb.stats[k][c];
            s.count = static_cast<std::size_t>(n[k]);
            if (s.count == 0) continue;
            s.mean = sum[k] / n[k];
            s.variance = std::max(sq[k] / n[k], kVarianceFloor);
        }
    }
    m.body = std::move(nb);
    return m;
}

namespace detail {

inline double log_gaussian(double x, const GaussianStat& s) {
    constexpr double kLog2Pi = 1.8378770664093453;
    const double d = x - s.mean;
    return -0.5 * (kLog2Pi + std::log(s.variance) + d * d / s.variance);
}

inline Prediction predict_nb(const Model& m, const NaiveBayesParams& nb, std::span<const std::optional<double>> x) {
    std::array<double, 2> logp{};
    for (std::size_t k = 0; k < 2; ++k) {
        logp[k] = m.class_prior[k] > 0.0 ? std::log(m.class_prior[k]) : -std::numeric_limits<double>::infinity();
    }
    for (std::size_t c = 0; c < x.size(); ++c) {
        // A feature with no training values in one class carries no evidence.
        if (!x[c] || nb.stats[0][c].count == 0 || nb.stats[1][c].count == 0) continue;
        for (std::size_t k = 0; k < 2; ++k) logp[k] += log_gaussian(*x[c], nb.stats[k][c]);
    }
    // posterior(malicious) = 1 / (1 + exp(logp_benign - logp_malicious))
    const double diff = logp[0] - logp[1];
    double score;
    if (std::isnan(diff)) score = 0.5;
    else if (diff > 700.0) score = 0.0;
    else if (diff < -700.0) score = 1.0;
    else score = 1.0 / (1.0 + std::exp(diff));
    return {score >= 0.5 ? Label::malicious : Label::benign, score};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Decision tree
// ---------------------------------------------------------------------------

struct SplitChoice {
    int feature = -1;
    double threshold = 0.0;
    double gain = -std::numeric_limits<double>::infinity();
    bool missing_left = true;

    bool valid() const { return feature >= 0; }
};

namespace detail {

// Gains closer than this are treated as equal so that the deterministic
// tie-break, not rounding noise, decides.
inline constexpr double kGainTieEpsilon = 1e-12;

/// Best split of `rows` on the given candidate columns (ascending order).
inline SplitChoice best_split(const Table& t, std::span<const std::size_t> rows, std::span<const std::size_t> columns,
                              int min_leaf) {
    std::array<double, 2> total{};
    for (auto r : rows) total[label_index(*t.label(r))] += 1.0;
    const double n = total[0] + total[1];
    const double parent_h = entropy2(total[0], total[1]);

    SplitChoice best;
    std::vector<std::pair<double, std::size_t>> known;
    known.reserve(rows.size());
    for (auto c : columns) {
        known.clear();
        std::array<double, 2> missing{};
        for (auto r : rows) {
            const std::size_t k = label_index(*t.label(r));
            if (t.has(r, c)) known.emplace_back(t.raw(r, c), k);
            else missing[k] += 1.0;
        }
        if (known.size() < 2) continue;
        std::sort(known.begin(), known.end());
        std::array<double, 2> left{};
        std::array<double, 2> known_total{};
        for (const auto& kv : known) known_total[kv.second] += 1.0;
        for (std::size_t i = 0; i + 1 < known.size(); ++i) {
            left[known[i].second] += 1.0;
            const double a = known[i].first;
            const double b = known[i + 1].first;
            if (!(a < b)) continue;
            double thr = a + (b - a) / 2.0;
            if (!(thr < b)) thr = a;
            std::array<double, 2> l = left;
            std::array<double, 2> rgt{known_total[0] - left[0], known_total[1] - left[1]};
            const bool miss_left = (l[0] + l[1]) >= (rgt[0] + rgt[1]);
            auto& target = miss_left ? l : rgt;
            target[0] += missing[0];
            target[1] += missing[1];
            const double nl = l[0] + l[1];
            const double nr = rgt[0] + rgt[1];
            if (nl < min_leaf || nr < min_leaf) continue;
            const double gain = parent_h - (nl / n) * entropy2(l[0], l[1]) - (nr / n) * entropy2(rgt[0], rgt[1]);
            if (gain > best.gain + kGainTieEpsilon) {
                best = {static_cast<int>(c), thr, gain, miss_left};
            }
        }
    }
    return best;
}

class TreeBuilder {
public:
    TreeBuilder(const Table& t, const TrainParams& p, std::size_t features_per_split, Rng* rng)
        : table_(t), params_(p), per_split_(features_per_split), rng_(rng) {}

    DecisionTree build(std::vector<std::size_t> rows) {
        DecisionTree tree;
        grow(tree, std::move(rows), 0);
        return tree;
    }

private:
    std::vector<std::size_t> candidate_columns() {
        const std::size_t f = table_.cols();
        std::vector<std::size_t> cols(f);
        std::iota(cols.begin(), cols.end(), 0);
        if (rng_ == nullptr || per_split_ >= f) return cols;
        for (std::size_t i = 0; i < per_split_; ++i) {
            std::swap(cols[i], cols[i + rng_->below(f - i)]);
        }
        cols.resize(per_split_);
        std::sort(cols.begin(), cols.end());
        return cols;
    }

    int grow(DecisionTree& tree, std::vector<std::size_t> rows, int depth) {
        const int id = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        std::array<double, 2> counts{};
        for (auto r : rows) counts[label_index(*table_.label(r))] += 1.0;
        tree.nodes[id].counts = counts;

        const bool pure = counts[0] == 0.0 || counts[1] == 0.0;
        const bool depth_capped = params_.max_depth && depth >= *params_.max_depth;
        if (pure || depth_capped || rows.size() < 2 * static_cast<std::size_t>(params_.min_leaf)) return id;

        auto cols = candidate_columns();
        SplitChoice split = best_split(table_, rows, cols, params_.min_leaf);
        if (!split.valid()) return id;

        std::vector<std::size_t> left, right;
        const auto c = static_cast<std::size_t>(split.feature);
        for (auto r : rows) {
            const bool go_left = table_.has(r, c) ? table_.raw(r, c) <= split.threshold : split.missing_left;
            (go_left ? left : right).push_back(r);
        }
        rows.clear();
        rows.shrink_to_fit();

        tree.nodes[id].feature = split.feature;
        tree.nodes[id].threshold = split.threshold;
        tree.nodes[id].missing_left = split.missing_left;
        const int l = grow(tree, std::move(left), depth + 1);
        tree.nodes[id].left = l;
        const int r = grow(tree, std::move(right), depth + 1);
        tree.nodes[id].right = r;
        return id;
    }

    const Table& table_;
    const TrainParams& params_;
    std::size_t per_split_;
    Rng* rng_;
};

inline const TreeNode& leaf_for(const DecisionTree& tree, std::span<const std::optional<double>> x) {
    const bool all_missing = std::none_of(x.begin(), x.end(), [](const auto& v) { return v.has_value(); });
    // No usable evidence at all: answer with the root distribution.
    if (all_missing) return tree.nodes.front();
    const TreeNode* node = &tree.nodes.front();
    while (!node->is_leaf()) {
        const auto& v = x[static_cast<std::size_t>(node->feature)];
        const bool go_left = v ? *v <= node->threshold : node->missing_left;
        node = &tree.nodes[static_cast<std::size_t>(go_left ? node->left : node->right)];
    }
    return *node;
}

inline Prediction predict_tree(const DecisionTree& tree, std::span<const std::optional<double>> x) {
    const auto& leaf = leaf_for(tree, x);
    return {majority(leaf.counts), malicious_share(leaf.counts)};
}

inline Prediction predict_forest(const ForestParams& forest, std::span<const std::optional<double>> x) {
    std::size_t votes = 0;
    for (const auto& tree : forest.trees) {
        if (predict_tree(tree, x).label == Label::malicious) ++votes;
    }
    const std::size_t total = forest.trees.size();
    const double score = static_cast<double>(votes) / static_cast<double>(total);
    return {2 * votes >= total ? Label::malicious : Label::benign, score};
}

inline std::size_t default_features_per_split(std::size_t f) {
    return static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(f))));
}

}  // namespace detail

/// Exhaustive-sweep split search over all columns; exposed for inspection.
inline SplitChoice find_best_split(const Table& t, int min_leaf = 1) {
    std::vector<std::size_t> rows(t.rows()), cols(t.cols());
    std::iota(rows.begin(), rows.end(), 0);
    std::iota(cols.begin(), cols.end(), 0);
    return detail::best_split(t, rows, cols, min_leaf);
}

inline Model train_decision_tree(const Table& t, const TrainParams& p = {}) {
    p.validate();
    detail::require_both_classes(t);
    Model m;
    m.kind = ModelKind::decision_tree;
    m.feature_names = t.feature_names();
    m.class_prior = detail::priors(t);
    m.params = p;
    m.train_seed = p.seed;
    std::vector<std::size_t> rows(t.rows());
    std::iota(rows.begin(), rows.end(), 0);
    detail::TreeBuilder builder(t, p, t.cols(), nullptr);
    m.body = builder.build(std::move(rows));
    return m;
}

/// Per-tree RNG seed derived from the master seed and the tree index.
inline std::uint64_t tree_seed(std::uint64_t seed, std::size_t tree_index) { return mix_seed(seed, tree_index); }

inline Model train_random_forest(const Table& t, const TrainParams& p = {}) {
    p.validate();
    detail::require_both_classes(t);
    const std::size_t n = t.rows();
    const std::size_t f = t.cols();
    const std::size_t per_split =
        std::min<std::size_t>(f, p.features_per_split ? static_cast<std::size_t>(*p.features_per_split)
                                                      : detail::default_features_per_split(f));
    const auto trees = static_cast<std::size_t>(p.tree_count);

    ForestParams forest;
    forest.trees.resize(trees);
    forest.tree_seeds.resize(trees);
    // oob_votes[tree][row]: -1 in-bag, 0 benign vote, 1 malicious vote.
    std::vector<std::vector<std::int8_t>> oob_votes(trees);

    parallel_for(trees, p.workers, [&](std::size_t i) {
        const std::uint64_t s = tree_seed(p.seed, i);
        forest.tree_seeds[i] = s;
        Rng rng(s);
        std::vector<std::size_t> rows;
        rows.reserve(n);
        std::vector<std::uint8_t> in_bag(n, 0);
        if (p.bootstrap) {
            for (std::size_t k = 0; k < n; ++k) {
                auto r = static_cast<std::size_t>(rng.below(n));
                rows.push_back(r);
                in_bag[r] = 1;
            }
            std::sort(rows.begin(), rows.end());
        } else {
            rows.resize(n);
            std::iota(rows.begin(), rows.end(), 0);
            std::fill(in_bag.begin(), in_bag.end(), 1);
        }
        detail::TreeBuilder builder(t, p, per_split, &rng);
        forest.trees[i] = builder.build(std::move(rows));

        auto& votes = oob_votes[i];
        votes.assign(n, -1);
        for (std::size_t r = 0; r < n; ++r) {
            if (in_bag[r]) continue;
            auto x = t.row(r);
            votes[r] = detail::predict_tree(forest.trees[i], x).label == Label::malicious ? 1 : 0;
        }
    });

    std::size_t scored = 0, correct = 0;
    for (std::size_t r = 0; r < n; ++r) {
        std::size_t mal = 0, cast = 0;
        for (std::size_t i = 0; i < trees; ++i) {
            if (oob_votes[i][r] < 0) continue;
            ++cast;
            mal += static_cast<std::size_t>(oob_votes[i][r]);
        }
        if (cast == 0) continue;
        ++scored;
        const Label vote = 2 * mal >= cast ? Label::malicious : Label::benign;
        if (vote == *t.label(r)) ++correct;
    }
    if (scored > 0) forest.oob_accuracy = static_cast<double>(correct) / static_cast<double>(scored);

    Model m;
    m.kind = ModelKind::random_forest;
    m.feature_names = t.feature_names();
    m.class_prior = detail::priors(t);
    m.params = p;
    m.train_seed = p.seed;
    m.body = std::move(forest);
    return m;
}

inline Model train(ModelKind kind, const Table& t, const TrainParams& p = {}) {
    switch (kind) {
        case ModelKind::naive_bayes: {
            Model m = train_naive_bayes(t);
            m.params = p;
            m.train_seed = p.seed;
            return m;
        }
        case ModelKind::decision_tree: return train_decision_tree(t, p);
        case ModelKind::random_forest: return train_random_forest(t, p);
    }
    throw invalid_input("unknown model kind");
}

// ---------------------------------------------------------------------------
// Prediction
// ---------------------------------------------------------------------------

/// Prediction for values given in model.feature_names order.
inline Prediction predict_values(const Model& m, std::span<const std::optional<double>> x) {
    if (x.size() != m.feature_names.size()) {
        throw invalid_input("expected " + std::to_string(m.feature_names.size()) + " feature values, got " +
                            std::to_string(x.size()));
    }
    return std::visit(
        [&](const auto& body) -> Prediction {
            using T = std::decay_t<decltype(body)>;
            if constexpr (std::is_same_v<T, NaiveBayesParams>) return detail::predict_nb(m, body, x);
            else if constexpr (std::is_same_v<T, DecisionTree>) return detail::predict_tree(body, x);
            else return detail::predict_forest(body, x);
        },
        m.body);
}

/// Feature values are looked up by name, so a full-mode vector can feed a
/// model trained on the non-click subset.
inline Prediction predict(const Model& m, const FeatureVector& v) {
    std::vector<std::optional<double>> x;
    x.reserve(m.feature_names.size());
    for (const auto& name : m.feature_names) x.push_back(v.value(name));
    return predict_values(m, x);
}

/// Predictions for every row; table columns are matched to the model by name.
inline std::vector<Prediction> predict_all(const Model& m, const Table& t) {
    std::vector<std::size_t> cols;
    for (const auto& name : m.feature_names) {
        auto c = t.column(name);
        if (!c) throw invalid_input("feature '" + name + "' required by the model is missing from the input");
        cols.push_back(*c);
    }
    std::vector<Prediction> out(t.rows());
    std::vector<std::optional<double>> x(cols.size());
    for (std::size_t r = 0; r < t.rows(); ++r) {
        for (std::size_t i = 0; i < cols.size(); ++i) x[i] = t.at(r, cols[i]);
        out[r] = predict_values(m, x);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

inline constexpr int kModelFormatVersion = 1;
inline constexpr const char* kModelFormatName = "bitscan-model";

namespace detail {

inline json tree_to_json(const DecisionTree& tree) {
    json nodes = json::array();
    for (const auto& n : tree.nodes) {
        nodes.push_back(json::array({n.feature, n.threshold, n.missing_left, n.left, n.right, n.counts[0], n.counts[1]}));
    }
    return nodes;
}

inline DecisionTree tree_from_json(const json& j) {
    DecisionTree tree;
    if (!j.is_array() || j.empty()) throw format_error("tree has no nodes");
    for (const auto& a : j) {
        if (!a.is_array() || a.size() != 7) throw format_error("bad tree node");
        TreeNode n;
        n.feature = a[0].get<int>();
        n.threshold = a[1].get<double>();
        n.missing_left = a[2].get<bool>();
        n.left = a[3].get<int>();
        n.right = a[4].get<int>();
        n.counts = {a[5].get<double>(), a[6].get<double>()};
        tree.nodes.push_back(n);
    }
    const int size = static_cast<int>(tree.nodes.size());
    for (const auto& n : tree.nodes) {
        if (!n.is_leaf() && (n.left <= 0 || n.left >= size || n.right <= 0 || n.right >= size)) {
            throw format_error("tree node child index out of range");
        }
    }
    return tree;
}

inline json params_to_json(const TrainParams& p) {
    json j;
    j["tree_count"] = p.tree_count;
    j["max_depth"] = p.max_depth ? json(*p.max_depth) : json(nullptr);
    j["min_leaf"] = p.min_leaf;
    j["features_per_split"] = p.features_per_split ? json(*p.features_per_split) : json(nullptr);
    j["seed"] = p.seed;
    j["bootstrap"] = p.bootstrap;
    return j;
}

inline TrainParams params_from_json(const json& j) {
    TrainParams p;
    p.tree_count = j.at("tree_count").get<int>();
    if (!j.at("max_depth").is_null()) p.max_depth = j.at("max_depth").get<int>();
    p.min_leaf = j.at("min_leaf").get<int>();
    if (!j.at("features_per_split").is_null()) p.features_per_split = j.at("features_per_split").get<int>();
    p.seed = j.at("seed").get<std::uint64_t>();
    p.bootstrap = j.at("bootstrap").get<bool>();
    return p;
}

}  // namespace detail

inline json model_to_json(const Model& m) {
    json j;
    j["format"] = kModelFormatName;
    j["format_version"] = kModelFormatVersion;
    j["kind"] = std::string(to_string(m.kind));
    j["feature_names"] = m.feature_names;
    j["train_seed"] = m.train_seed;
    j["class_prior"] = json::array({m.class_prior[0], m.class_prior[1]});
    j["params"] = detail::params_to_json(m.params);
    std::visit(
        [&](const auto& body) {
            using T = std::decay_t<decltype(body)>;
            if constexpr (std::is_same_v<T, NaiveBayesParams>) {
                json nb;
                for (std::size_t k = 0; k < 2; ++k) {
                    json cls = json::array();
                    for (const auto& s : body.stats[k]) cls.push_back(json::array({s.mean, s.variance, s.count}));
                    nb[k == 0 ? "benign" : "malicious"] = cls;
                }
                j["naive_bayes"] = nb;
            } else if constexpr (std::is_same_v<T, DecisionTree>) {
                j["tree"] = detail::tree_to_json(body);
            } else {
                json f;
                f["oob_accuracy"] = body.oob_accuracy ? json(*body.oob_accuracy) : json(nullptr);
                f["trees"] = json::array();
                for (std::size_t i = 0; i < body.trees.size(); ++i) {
                    json tj;
                    tj["seed"] = body.tree_seeds[i];
                    tj["nodes"] = detail::tree_to_json(body.trees[i]);
                    f["trees"].push_back(tj);
                }
                j["forest"] = f;
            }
        },
        m.body);
    return j;
}

inline Model model_from_json(const json& j) {
    if (!j.is_object() || j.value("format", "") != kModelFormatName) throw format_error("corrupt model file: not a model");
    if (!j.contains("format_version") || !j["format_version"].is_number_integer()) {
        throw format_error("corrupt model file: missing format_version");
    }
    const int version = j["format_version"].get<int>();
    if (version != kModelFormatVersion) {
        throw version_mismatch("model format version " + std::to_string(version) + " is not supported (expected " +
                               std::to_string(kModelFormatVersion) + ")");
    }
    try {
        Model m;
        auto kind = parse_model_kind(j.at("kind").get<std::string>());
        if (!kind) throw format_error("unknown model kind");
        m.kind = *kind;
        m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
        m.train_seed = j.at("train_seed").get<std::uint64_t>();
        m.class_prior = {j.at("class_prior").at(0).get<double>(), j.at("class_prior").at(1).get<double>()};
        m.params = detail::params_from_json(j.at("params"));
        const std::size_t f = m.feature_names.size();
        switch (m.kind) {
            case ModelKind::naive_bayes: {
                NaiveBayesParams nb;
                for (std::size_t k = 0; k < 2; ++k) {
                    const auto& cls = j.at("naive_bayes").at(k == 0 ? "benign" : "malicious");
                    for (const auto& s : cls) {
                        nb.stats[k].push_back({s.at(0).get<double>(), s.at(1).get<double>(), s.at(2).get<std::size_t>()});
                    }
                    if (nb.stats[k].size() != f) throw format_error("naive Bayes stats do not match feature count");
                }
                m.body = std::move(nb);
                break;
            }
            case ModelKind::decision_tree: m.body = detail::tree_from_json(j.at("tree")); break;
            case ModelKind::random_forest: {
                ForestParams forest;
                const auto& fj = j.at("forest");
                if (!fj.at("oob_accuracy").is_null()) forest.oob_accuracy = fj.at("oob_accuracy").get<double>();
                for (const auto& tj : fj.at("trees")) {
                    forest.tree_seeds.push_back(tj.at("seed").get<std::uint64_t>());
                    forest.trees.push_back(detail::tree_from_json(tj.at("nodes")));
                }
                if (forest.trees.empty()) throw format_error("forest has no trees");
                m.body = std::move(forest);
                break;
            }
        }
        if (m.kind != ModelKind::naive_bayes) {
            const auto check = [f](const DecisionTree& t) {
                for (const auto& n : t.nodes) {
                    if (n.feature >= static_cast<int>(f)) throw format_error("tree references unknown feature");
                }
            };
            if (auto* t = std::get_if<DecisionTree>(&m.body)) check(*t);
            if (auto* fp = std::get_if<ForestParams>(&m.body)) {
                for (const auto& t : fp->trees) check(t);
            }
        }
        return m;
    } catch (const json::exception& ex) {
        throw format_error(std::string("corrupt model file: ") + ex.what());
    }
}

inline void save_model(const Model& m, std::ostream& out) { out << model_to_json(m).dump() << '\n'; }

inline void save_model(const Model& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot write model file '" + path + "'");
    save_model(m, out);
}

inline Model load_model(std::istream& in) {
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& ex) {
        throw format_error(std::string("corrupt model file: ") + ex.what());
    }
    return model_from_json(j);
}

inline Model load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open model file '" + path + "'");
    return load_model(in);
}

}  // namespace bitscan
