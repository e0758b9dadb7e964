#pragma once

// Shared vocabulary for the bitscan headers: error types, the class label,
// deterministic RNG helpers, number formatting and a tiny parallel-for.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <thread>
#include <vector>

namespace bitscan {

inline constexpr const char* kVersion = "1.0.0";

/// Base class for every error raised by the library.
class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input that violates an operation's precondition.
class invalid_input : public error {
public:
    using error::error;
};

/// A file could not be opened or read.
class io_error : public error {
public:
    using error::error;
};

/// A file was readable but its contents are not in the expected format.
class format_error : public error {
public:
    using error::error;
};

/// A model file written by an incompatible format version.
class version_mismatch : public format_error {
public:
    using format_error::format_error;
};

enum class Label { benign = 0, malicious = 1 };

inline std::string_view to_string(Label l) { return l == Label::malicious ? "malicious" : "benign"; }

namespace detail {
inline std::size_t label_index(Label l) { return l == Label::malicious ? 1 : 0; }
}  // namespace detail

inline std::optional<Label> parse_label(std::string_view s) {
    if (s == "malicious") return Label::malicious;
    if (s == "benign") return Label::benign;
    return std::nullopt;
}

inline std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

/// Shortest decimal representation that parses back to the same double.
inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline std::optional<double> parse_double(std::string_view s) {
    if (s.empty()) return std::nullopt;
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

// splitmix64 finalizer; used to derive independent sub-seeds from a master seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Portable random source. std::mt19937_64 output is fully specified; the
/// helpers below avoid the implementation-defined std distributions so that
/// results are identical across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        if (n <= 1) return 0;
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                    std::numeric_limits<std::uint64_t>::max() % n;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

    /// Uniform integer in [lo, hi].
    std::int64_t between(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo) + 1));
    }

    /// Uniform real in [0, 1).
    double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

    bool chance(double p) { return unit() < p; }

    /// Number of failures before the first success, success probability p.
    std::int64_t geometric(double p) {
        std::int64_t k = 0;
        while (!chance(p)) ++k;
        return k;
    }

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[below(i)]);
        }
    }

private:
    std::mt19937_64 engine_;
};

inline unsigned default_workers() {
    unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1u : n;
}

/// Runs body(i) for i in [0, count) on up to `workers` threads. Each index is
/// visited exactly once; callers write results into pre-sized slots so the
/// outcome does not depend on scheduling.
inline void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& body) {
    if (workers <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    const std::size_t n_threads = std::min<std::size_t>(workers, count);
    std::vector<std::exception_ptr> failures(n_threads);
    std::vector<std::thread> threads;
    threads.reserve(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t) {
        threads.emplace_back([&, t] {
            try {
                for (std::size_t i = t; i < count; i += n_threads) body(i);
            } catch (...) {
                failures[t] = std::current_exception();
            }
        });
    }
    for (auto& th : threads) th.join();
    for (auto& f : failures) {
        if (f) std::rethrow_exception(f);
    }
}

/// Binary entropy of a two-class count pair, in bits.
inline double entropy2(double a, double b) {
    const double n = a + b;
    if (n <= 0.0) return 0.0;
    double h = 0.0;
    if (a > 0.0) h -= (a / n) * std::log2(a / n);
    if (b > 0.0) h -= (b / n) * std::log2(b / n);
    return h;
}

}  // namespace bitscan
