#pragma once

// Evaluation protocol: confusion matrices and the P/R/FM/A metrics, stratified
// holdout and k-fold cross-validation, and information-gain feature ranking.

#include <iomanip>
#include <map>

#include "learn.hpp"

namespace bitscan {

/// Malicious is the positive class.
struct ConfusionMatrix {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t tn = 0;
    std::uint64_t fn = 0;

    void add(Label actual, Label predicted) {
        if (actual == Label::malicious) (predicted == Label::malicious ? tp : fn)++;
        else (predicted == Label::malicious ? fp : tn)++;
    }

    std::uint64_t total() const { return tp + fp + tn + fn; }

    /// The same matrix seen with benign as the positive class.
    ConfusionMatrix transposed() const { return {tn, fn, tp, fp}; }

    ConfusionMatrix& operator+=(const ConfusionMatrix& o) {
        tp += o.tp;
        fp += o.fp;
        tn += o.tn;
        fn += o.fn;
        return *this;
    }

    bool operator==(const ConfusionMatrix&) const = default;
};

/// Precision, recall and F-measure for one class. A metric whose denominator
/// is zero is reported as 0 with its `*_undefined` flag set.
struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f_measure = 0.0;
    bool precision_undefined = false;
    bool recall_undefined = false;
    bool f_measure_undefined = false;
};

struct EvalReport {
    ConfusionMatrix confusion;
    double accuracy = 0.0;
    ClassMetrics malicious;
    ClassMetrics benign;
    double weighted_f_measure = 0.0;
    std::vector<EvalReport> folds;            // filled by cross_validate
    std::optional<double> mean_fold_accuracy; // filled by cross_validate
};

/// Harmonic mean of precision and recall; 0 when both are 0.
inline double f_measure(double precision, double recall) {
    if (precision + recall <= 0.0) return 0.0;
    return 2.0 * (precision * recall) / (precision + recall);
}

namespace detail {

inline ClassMetrics class_metrics(const ConfusionMatrix& c) {
    ClassMetrics m;
    const auto pd = c.tp + c.fp;
    const auto rd = c.tp + c.fn;
    if (pd == 0) m.precision_undefined = true;
    else m.precision = static_cast<double>(c.tp) / static_cast<double>(pd);
    if (rd == 0) m.recall_undefined = true;
    else m.recall = static_cast<double>(c.tp) / static_cast<double>(rd);
    if (m.precision + m.recall <= 0.0) m.f_measure_undefined = true;
    else m.f_measure = f_measure(m.precision, m.recall);
    return m;
}

}  // namespace detail

inline EvalReport metrics(const ConfusionMatrix& c) {
    EvalReport r;
    r.confusion = c;
    const auto n = c.total();
    r.accuracy = n == 0 ? 0.0 : static_cast<double>(c.tp + c.tn) / static_cast<double>(n);
    r.malicious = detail::class_metrics(c);
    r.benign = detail::class_metrics(c.transposed());
    const auto support_m = c.tp + c.fn;
    const auto support_b = c.tn + c.fp;
    if (n > 0) {
        r.weighted_f_measure = (static_cast<double>(support_m) * r.malicious.f_measure +
                                static_cast<double>(support_b) * r.benign.f_measure) /
                               static_cast<double>(n);
    }
    return r;
}

/// Confusion matrix of predictions against the table's labels.
inline ConfusionMatrix confusion_of(const Table& t, std::span<const Prediction> predictions) {
    if (predictions.size() != t.rows()) throw invalid_input("prediction count does not match row count");
    ConfusionMatrix c;
    for (std::size_t r = 0; r < t.rows(); ++r) c.add(t.require_label(r), predictions[r].label);
    return c;
}

inline EvalReport evaluate(const Model& m, const Table& t) { return metrics(confusion_of(t, predict_all(m, t))); }

// ---------------------------------------------------------------------------
// Partitioning
// ---------------------------------------------------------------------------

struct HoldoutSplit {
    std::vector<std::size_t> train;  // ascending row indices
    std::vector<std::size_t> test;
};

namespace detail {

/// Row indices per class ({benign, malicious}), each shuffled by its own
/// seed-derived stream.
inline std::array<std::vector<std::size_t>, 2> shuffled_by_class(const Table& t, std::uint64_t seed) {
    std::array<std::vector<std::size_t>, 2> by_class;
    for (std::size_t r = 0; r < t.rows(); ++r) by_class[label_index(t.require_label(r))].push_back(r);
    for (std::size_t k = 0; k < 2; ++k) {
        Rng rng(mix_seed(seed, 1000 + k));
        rng.shuffle(by_class[k]);
    }
    return by_class;
}

}  // namespace detail

/// Stratified train/test split: each class contributes round(n_c * fraction)
/// test rows (kept within [1, n_c - 1]).
inline HoldoutSplit split_holdout(const Table& t, double test_fraction, std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw invalid_input("test_fraction must lie in (0, 1)");
    auto by_class = detail::shuffled_by_class(t, seed);
    HoldoutSplit split;
    for (std::size_t k = 0; k < 2; ++k) {
        const auto& rows = by_class[k];
        const std::size_t n = rows.size();
        if (n < 2) {
            throw invalid_input("class '" + std::string(to_string(static_cast<Label>(k))) +
                                "' needs at least 2 rows for a holdout split");
        }
        auto n_test = static_cast<std::size_t>(std::llround(static_cast<double>(n) * test_fraction));
        n_test = std::clamp<std::size_t>(n_test, 1, n - 1);
        split.test.insert(split.test.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n_test));
        split.train.insert(split.train.end(), rows.begin() + static_cast<std::ptrdiff_t>(n_test), rows.end());
    }
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.test.begin(), split.test.end());
    return split;
}

/// Fold index of every row for stratified k-fold CV. Within each class,
/// shuffled rows are dealt round-robin; the second class continues where the
/// first stopped, so per-class and overall fold sizes differ by at most one.
inline std::vector<std::size_t> stratified_folds(const Table& t, std::size_t k, std::uint64_t seed) {
    if (k < 2) throw invalid_input("k must be >= 2");
    auto by_class = detail::shuffled_by_class(t, seed);
    for (std::size_t c = 0; c < 2; ++c) {
        if (by_class[c].size() < k) {
            throw invalid_input("class '" + std::string(to_string(static_cast<Label>(c))) + "' has fewer than k=" +
                                std::to_string(k) + " rows");
        }
    }
    std::vector<std::size_t> fold(t.rows(), 0);
    std::size_t offset = 0;
    for (const auto& rows : by_class) {
        for (std::size_t j = 0; j < rows.size(); ++j) fold[rows[j]] = (offset + j) % k;
        offset = (offset + rows.size()) % k;
    }
    return fold;
}

/// A trained classifier: label for row `r` of table `t`.
using Classifier = std::function<Label(const Table& t, std::size_t r)>;
/// Produces a classifier from training rows. Must be safe to call from
/// several threads at once.
using Trainer = std::function<Classifier(const Table& train)>;

/// Trainer that fits a Model of the given kind. The model sees only the
/// training table's columns; test tables are matched by name.
inline Trainer model_trainer(ModelKind kind, TrainParams params) {
    return [kind, params](const Table& train_rows) -> Classifier {
        auto model = std::make_shared<const Model>(train(kind, train_rows, params));
        return [model](const Table& t, std::size_t r) {
            return predict_values(*model, t.row(r)).label;
        };
    };
}

/// Stratified k-fold cross-validation. Every row is tested exactly once; the
/// aggregate confusion is the sum of the fold confusions. Folds run on up to
/// `workers` threads; the report does not depend on the thread count.
inline EvalReport cross_validate(const Trainer& trainer, const Table& t, std::size_t k, std::uint64_t seed,
                                 unsigned workers = 1) {
    const auto fold = stratified_folds(t, k, seed);
    std::vector<EvalReport> fold_reports(k);
    parallel_for(k, workers, [&](std::size_t f) {
        std::vector<std::size_t> train_idx, test_idx;
        for (std::size_t r = 0; r < t.rows(); ++r) (fold[r] == f ? test_idx : train_idx).push_back(r);
        const Table train_rows = t.subset(train_idx);
        const Table test_rows = t.subset(test_idx);
        auto classify = trainer(train_rows);
        ConfusionMatrix c;
        for (std::size_t r = 0; r < test_rows.rows(); ++r) c.add(test_rows.require_label(r), classify(test_rows, r));
        fold_reports[f] = metrics(c);
    });
    ConfusionMatrix total;
    double acc_sum = 0.0;
    for (const auto& fr : fold_reports) {
        total += fr.confusion;
        acc_sum += fr.accuracy;
    }
    EvalReport report = metrics(total);
    report.mean_fold_accuracy = acc_sum / static_cast<double>(k);
    report.folds = std::move(fold_reports);
    return report;
}

// ---------------------------------------------------------------------------
// Information gain ranking
// ---------------------------------------------------------------------------

struct FeatureRank {
    std::string feature;
    double info_gain = 0.0;
};

using FeatureRanking = std::vector<FeatureRank>;

inline constexpr std::size_t kDefaultBins = 10;

inline double label_entropy(const Table& t) {
    return entropy2(static_cast<double>(t.count(Label::benign)), static_cast<double>(t.count(Label::malicious)));
}

/// H(label) - H(label | binned feature). The feature is cut into `bins`
/// equal-width bins over its observed range; missing values form one more bin.
inline double information_gain(const Table& t, std::size_t column, std::size_t bins = kDefaultBins) {
    if (bins < 2) throw invalid_input("bins must be >= 2");
    const std::size_t n = t.rows();
    if (n == 0) return 0.0;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < n; ++r) {
        if (!t.has(r, column)) continue;
        lo = std::min(lo, t.raw(r, column));
        hi = std::max(hi, t.raw(r, column));
    }
    // counts[bin][label]; the final bin holds missing values.
    std::vector<std::array<double, 2>> counts(bins + 1, {0.0, 0.0});
    const double width = (hi - lo) / static_cast<double>(bins);
    for (std::size_t r = 0; r < n; ++r) {
        std::size_t b = bins;
        if (t.has(r, column)) {
            b = 0;
            if (width > 0.0) {
                auto idx = static_cast<std::size_t>(std::floor((t.raw(r, column) - lo) / width));
                b = std::min(idx, bins - 1);
            }
        }
        counts[b][detail::label_index(t.require_label(r))] += 1.0;
    }
    double conditional = 0.0;
    for (const auto& c : counts) {
        const double m = c[0] + c[1];
        if (m > 0.0) conditional += (m / static_cast<double>(n)) * entropy2(c[0], c[1]);
    }
    return std::max(0.0, label_entropy(t) - conditional);
}

/// Features sorted by descending information gain; ties keep column order.
inline FeatureRanking info_gain_rank(const Table& t, std::size_t bins = kDefaultBins) {
    if (bins < 2) throw invalid_input("bins must be >= 2");
    FeatureRanking ranking;
    for (std::size_t c = 0; c < t.cols(); ++c) ranking.push_back({t.feature_names()[c], information_gain(t, c, bins)});
    std::stable_sort(ranking.begin(), ranking.end(),
                     [](const FeatureRank& a, const FeatureRank& b) { return a.info_gain > b.info_gain; });
    return ranking;
}

// ---------------------------------------------------------------------------
// Report writers
// ---------------------------------------------------------------------------

inline json to_json(const ConfusionMatrix& c) { return json{{"tp", c.tp}, {"fp", c.fp}, {"tn", c.tn}, {"fn", c.fn}}; }

inline json to_json(const ClassMetrics& m) {
    json j{{"precision", m.precision}, {"recall", m.recall}, {"f_measure", m.f_measure}};
    json undefined = json::array();
    if (m.precision_undefined) undefined.push_back("precision");
    if (m.recall_undefined) undefined.push_back("recall");
    if (m.f_measure_undefined) undefined.push_back("f_measure");
    if (!undefined.empty()) j["undefined"] = undefined;
    return j;
}

inline json to_json(const EvalReport& r) {
    json j;
    j["confusion"] = to_json(r.confusion);
    j["accuracy"] = r.accuracy;
    j["malicious"] = to_json(r.malicious);
    j["benign"] = to_json(r.benign);
    j["weighted_f_measure"] = r.weighted_f_measure;
    if (r.mean_fold_accuracy) j["mean_fold_accuracy"] = *r.mean_fold_accuracy;
    if (!r.folds.empty()) {
        j["folds"] = json::array();
        for (const auto& f : r.folds) j["folds"].push_back(to_json(f));
    }
    return j;
}

inline json to_json(const FeatureRanking& ranking) {
    json j = json::array();
    for (std::size_t i = 0; i < ranking.size(); ++i) {
        j.push_back(json{{"rank", i + 1}, {"feature", ranking[i].feature}, {"info_gain", ranking[i].info_gain}});
    }
    return j;
}

namespace detail {

inline std::string pct(double v) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(2) << v * 100.0 << '%';
    return os.str();
}

}  // namespace detail

/// Metrics table with one column per named report (accuracy, recall,
/// precision and F-measure per class, weighted F-measure).
inline void write_metrics_table(std::ostream& out, const std::vector<std::pair<std::string, EvalReport>>& columns) {
    const std::vector<std::pair<std::string, std::function<double(const EvalReport&)>>> rows = {
        {"Accuracy", [](const EvalReport& r) { return r.accuracy; }},
        {"Recall (malicious)", [](const EvalReport& r) { return r.malicious.recall; }},
        {"Recall (benign)", [](const EvalReport& r) { return r.benign.recall; }},
        {"Precision (malicious)", [](const EvalReport& r) { return r.malicious.precision; }},
        {"Precision (benign)", [](const EvalReport& r) { return r.benign.precision; }},
        {"F-measure (malicious)", [](const EvalReport& r) { return r.malicious.f_measure; }},
        {"F-measure (benign)", [](const EvalReport& r) { return r.benign.f_measure; }},
        {"Weighted F-measure", [](const EvalReport& r) { return r.weighted_f_measure; }},
    };
    out << std::left << std::setw(24) << "Evaluation Metric";
    for (const auto& [name, _] : columns) out << std::right << std::setw(16) << name;
    out << '\n';
    for (const auto& [label, get] : rows) {
        out << std::left << std::setw(24) << label;
        for (const auto& [_, report] : columns) out << std::right << std::setw(16) << detail::pct(get(report));
        out << '\n';
    }
}

/// Confusion matrix as counts and as row-normalized percentages (rows are
/// the actual class, columns the predicted class).
inline void write_confusion(std::ostream& out, const ConfusionMatrix& c) {
    auto row_pct = [](std::uint64_t a, std::uint64_t b) {
        const double n = static_cast<double>(a + b);
        return std::pair{n > 0 ? a / n : 0.0, n > 0 ? b / n : 0.0};
    };
    out << std::left << std::setw(12) << "actual" << std::right << std::setw(12) << "malicious" << std::setw(12)
        << "benign" << std::setw(12) << "malicious%" << std::setw(12) << "benign%" << '\n';
    auto [mm, mb] = row_pct(c.tp, c.fn);
    out << std::left << std::setw(12) << "malicious" << std::right << std::setw(12) << c.tp << std::setw(12) << c.fn
        << std::setw(12) << detail::pct(mm) << std::setw(12) << detail::pct(mb) << '\n';
    auto [bm, bb] = row_pct(c.fp, c.tn);
    out << std::left << std::setw(12) << "benign" << std::right << std::setw(12) << c.fp << std::setw(12) << c.tn
        << std::setw(12) << detail::pct(bm) << std::setw(12) << detail::pct(bb) << '\n';
}

inline void write_report_text(std::ostream& out, const std::string& name, const EvalReport& r) {
    write_metrics_table(out, {{name, r}});
    out << '\n';
    write_confusion(out, r.confusion);
    if (r.mean_fold_accuracy) {
        out << "\nfolds: " << r.folds.size() << ", mean fold accuracy " << detail::pct(*r.mean_fold_accuracy) << '\n';
    }
}

inline void write_report_csv(std::ostream& out, const EvalReport& r) {
    out << "metric,value\n";
    out << "tp," << r.confusion.tp << "\nfp," << r.confusion.fp << "\ntn," << r.confusion.tn << "\nfn,"
        << r.confusion.fn << '\n';
    out << "accuracy," << format_double(r.accuracy) << '\n';
    out << "precision_malicious," << format_double(r.malicious.precision) << '\n';
    out << "recall_malicious," << format_double(r.malicious.recall) << '\n';
    out << "f_measure_malicious," << format_double(r.malicious.f_measure) << '\n';
    out << "precision_benign," << format_double(r.benign.precision) << '\n';
    out << "recall_benign," << format_double(r.benign.recall) << '\n';
    out << "f_measure_benign," << format_double(r.benign.f_measure) << '\n';
    out << "weighted_f_measure," << format_double(r.weighted_f_measure) << '\n';
    if (r.mean_fold_accuracy) out << "mean_fold_accuracy," << format_double(*r.mean_fold_accuracy) << '\n';
}

}  // namespace bitscan
