#pragma once

// Dense labeled numeric table with an explicit missing-value mask. This is
// the common currency of the learners and the evaluation harness; feature
// extraction produces it and the CSV reader/writer persists it.

#include <istream>
#include <ostream>
#include <span>

#include "common.hpp"

namespace bitscan {

class Table {
public:
    Table() = default;
    explicit Table(std::vector<std::string> feature_names) : names_(std::move(feature_names)) {}

    const std::vector<std::string>& feature_names() const { return names_; }
    std::size_t rows() const { return labels_.size(); }
    std::size_t cols() const { return names_.size(); }
    bool empty() const { return labels_.empty(); }

    void add_row(std::span<const std::optional<double>> values, std::optional<Label> label, std::string id = {}) {
        if (values.size() != names_.size()) {
            throw invalid_input("row has " + std::to_string(values.size()) + " values, table has " +
                                std::to_string(names_.size()) + " features");
        }
        for (const auto& v : values) {
            values_.push_back(v.value_or(0.0));
            present_.push_back(v.has_value() ? 1 : 0);
        }
        labels_.push_back(label);
        ids_.push_back(std::move(id));
    }

    bool has(std::size_t r, std::size_t c) const { return present_[r * names_.size() + c] != 0; }
    /// Stored value; meaningful only when has(r, c).
    double raw(std::size_t r, std::size_t c) const { return values_[r * names_.size() + c]; }

    std::optional<double> at(std::size_t r, std::size_t c) const {
        if (!has(r, c)) return std::nullopt;
        return raw(r, c);
    }

    std::vector<std::optional<double>> row(std::size_t r) const {
        std::vector<std::optional<double>> out(names_.size());
        for (std::size_t c = 0; c < names_.size(); ++c) out[c] = at(r, c);
        return out;
    }

    const std::optional<Label>& label(std::size_t r) const { return labels_[r]; }
    const std::string& id(std::size_t r) const { return ids_[r]; }

    Label require_label(std::size_t r) const {
        if (!labels_[r]) throw invalid_input("row " + std::to_string(r) + " has no label");
        return *labels_[r];
    }

    bool fully_labeled() const {
        return std::all_of(labels_.begin(), labels_.end(), [](const auto& l) { return l.has_value(); });
    }

    std::size_t count(Label l) const {
        return static_cast<std::size_t>(
            std::count_if(labels_.begin(), labels_.end(), [l](const auto& x) { return x == l; }));
    }

    std::size_t missing_count(std::size_t c) const {
        std::size_t n = 0;
        for (std::size_t r = 0; r < rows(); ++r) n += has(r, c) ? 0 : 1;
        return n;
    }

    std::optional<std::size_t> column(std::string_view name) const {
        for (std::size_t c = 0; c < names_.size(); ++c) {
            if (names_[c] == name) return c;
        }
        return std::nullopt;
    }

    /// Rows selected by index, in the given order (duplicates allowed).
    Table subset(std::span<const std::size_t> idx) const {
        Table out(names_);
        const std::size_t f = names_.size();
        out.values_.reserve(idx.size() * f);
        out.present_.reserve(idx.size() * f);
        for (auto r : idx) {
            out.values_.insert(out.values_.end(), values_.begin() + r * f, values_.begin() + (r + 1) * f);
            out.present_.insert(out.present_.end(), present_.begin() + r * f, present_.begin() + (r + 1) * f);
            out.labels_.push_back(labels_[r]);
            out.ids_.push_back(ids_[r]);
        }
        return out;
    }

    /// Columns reordered/restricted to `names`; every name must exist.
    Table project(const std::vector<std::string>& names) const {
        std::vector<std::size_t> cols;
        for (const auto& n : names) {
            auto c = column(n);
            if (!c) throw invalid_input("feature '" + n + "' not present in table");
            cols.push_back(*c);
        }
        Table out(names);
        for (std::size_t r = 0; r < rows(); ++r) {
            for (auto c : cols) {
                out.values_.push_back(raw(r, c));
                out.present_.push_back(present_[r * names_.size() + c]);
            }
            out.labels_.push_back(labels_[r]);
            out.ids_.push_back(ids_[r]);
        }
        return out;
    }

    bool operator==(const Table&) const = default;

private:
    std::vector<std::string> names_;
    std::vector<double> values_;
    std::vector<std::uint8_t> present_;
    std::vector<std::optional<Label>> labels_;
    std::vector<std::string> ids_;
};

// ---------------------------------------------------------------------------
// CSV: header = feature names + "label" + "global_hash"; missing = empty cell
// ---------------------------------------------------------------------------

namespace detail {

inline std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

inline std::vector<std::string> csv_split(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            cells.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (quoted) throw format_error("unterminated quote in CSV line");
    cells.push_back(std::move(cur));
    return cells;
}

}  // namespace detail

inline void write_csv(const Table& t, std::ostream& out) {
    for (const auto& n : t.feature_names()) out << detail::csv_escape(n) << ',';
    out << "label,global_hash\n";
    for (std::size_t r = 0; r < t.rows(); ++r) {
        for (std::size_t c = 0; c < t.cols(); ++c) {
            if (t.has(r, c)) out << format_double(t.raw(r, c));
            out << ',';
        }
        if (t.label(r)) out << to_string(*t.label(r));
        out << ',' << detail::csv_escape(t.id(r)) << '\n';
    }
}

inline Table read_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw format_error("feature CSV is empty (missing header)");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto header = detail::csv_split(line);
    if (header.size() < 2 || header[header.size() - 2] != "label" || header.back() != "global_hash") {
        throw format_error("feature CSV header must end with 'label,global_hash'");
    }
    std::vector<std::string> names(header.begin(), header.end() - 2);
    Table t(names);
    std::vector<std::optional<double>> values(names.size());
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto cells = detail::csv_split(line);
        if (cells.size() != header.size()) {
            throw format_error("feature CSV line " + std::to_string(lineno) + " has " + std::to_string(cells.size()) +
                               " cells, expected " + std::to_string(header.size()));
        }
        for (std::size_t c = 0; c < names.size(); ++c) {
            if (cells[c].empty()) {
                values[c].reset();
            } else {
                values[c] = parse_double(cells[c]);
                if (!values[c] || !std::isfinite(*values[c])) {
                    throw format_error("feature CSV line " + std::to_string(lineno) + ": bad number '" + cells[c] +
                                       "'");
                }
            }
        }
        std::optional<Label> label;
        const auto& lc = cells[names.size()];
        if (!lc.empty()) {
            label = parse_label(lc);
            if (!label) throw format_error("feature CSV line " + std::to_string(lineno) + ": bad label '" + lc + "'");
        }
        t.add_row(values, label, cells.back());
    }
    return t;
}

}  // namespace bitscan
