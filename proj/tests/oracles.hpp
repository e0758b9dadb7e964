#pragma once

// Brute-force reference computations used to cross-check the library.
// Deliberately naive: no shared code with the implementations under test.

#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <vector>

namespace oracle {

/// Shannon entropy (bits) of a label multiset given as 0/1 ints.
inline double entropy(const std::vector<int>& labels) {
    if (labels.empty()) return 0.0;
    std::map<int, double> freq;
    for (int l : labels) freq[l] += 1.0;
    double h = 0.0;
    for (const auto& [_, c] : freq) {
        const double p = c / static_cast<double>(labels.size());
        h -= p * std::log(p) / std::log(2.0);
    }
    return h;
}

/// H(Y) - H(Y | X) with X treated as categorical.
inline double categorical_gain(const std::vector<double>& x, const std::vector<int>& y) {
    std::map<double, std::vector<int>> groups;
    for (std::size_t i = 0; i < x.size(); ++i) groups[x[i]].push_back(y[i]);
    double cond = 0.0;
    for (const auto& [_, g] : groups) cond += static_cast<double>(g.size()) / static_cast<double>(y.size()) * entropy(g);
    return entropy(y) - cond;
}

/// Gain of the binary partition x <= t versus x > t.
inline double threshold_gain(const std::vector<double>& x, const std::vector<int>& y, double t) {
    std::vector<int> left, right;
    for (std::size_t i = 0; i < x.size(); ++i) (x[i] <= t ? left : right).push_back(y[i]);
    const double n = static_cast<double>(y.size());
    return entropy(y) - static_cast<double>(left.size()) / n * entropy(left) -
           static_cast<double>(right.size()) / n * entropy(right);
}

struct Split {
    std::size_t feature = 0;
    double threshold = 0.0;
    double gain = -1.0;
};

/// Maximum threshold gain over every column and every midpoint between
/// consecutive distinct values. cols[f][r] holds the value of row r.
inline Split best_threshold_split(const std::vector<std::vector<double>>& cols, const std::vector<int>& y) {
    Split best;
    for (std::size_t f = 0; f < cols.size(); ++f) {
        std::set<double> distinct(cols[f].begin(), cols[f].end());
        std::vector<double> v(distinct.begin(), distinct.end());
        for (std::size_t i = 0; i + 1 < v.size(); ++i) {
            const double t = (v[i] + v[i + 1]) / 2.0;
            const double g = threshold_gain(cols[f], y, t);
            if (g > best.gain) best = {f, t, g};
        }
    }
    return best;
}

/// Population variance, two-pass.
inline double variance(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double s = 0.0;
    for (double x : v) s += (x - mean) * (x - mean);
    return s / static_cast<double>(v.size());
}

}  // namespace oracle
