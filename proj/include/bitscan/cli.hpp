#pragma once

// Batch command-line frontend. run() is the whole program; tools/bitscan.cpp
// only forwards main() to it so that tests can drive every subcommand
// in-process.
//
// Exit codes: 0 success, 1 domain error (bad input, missing file, ...),
// 2 usage error. Diagnostics go to `err`; data goes to files or `out`.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <sstream>

#include <CLI11.hpp>

#include "eval.hpp"
#include "forensics.hpp"
#include "synth.hpp"

namespace bitscan::cli {

inline constexpr const char* kWhoisEnv = "BITSCAN_WHOIS";
inline constexpr const char* kVerdictsEnv = "BITSCAN_VERDICTS";

struct Streams {
    std::istream& in;
    std::ostream& out;
    std::ostream& err;
};

/// Options shared by the subcommands; unused fields stay at their defaults.
struct RunConfig {
    std::string subcommand;
    std::string input;
    std::string output;
    std::string model_path;
    std::string whois_path;
    std::string verdicts_dir;
    std::string providers = "safebrowsing,surbl,phishtank,virustotal,warning_page";
    std::string mode = "full";
    std::string kind = "random_forest";
    std::string format = "text";
    std::string manifest_path;
    std::string items = "domain";
    std::string separation = "easy";
    std::string timeline_encoder;
    std::uint64_t seed = kDefaultSeed;
    unsigned workers = default_workers();
    int tree_count = 100;
    int max_depth = -1;
    int min_leaf = 1;
    int features_per_split = -1;
    bool no_bootstrap = false;
    bool only_unclicked = false;
    std::size_t folds = 10;
    double test_fraction = 0.25;
    std::size_t bins = kDefaultBins;
    std::size_t steps = 100;
    double threshold = kDefaultCommunityThreshold;
    std::size_t min_size = 2;
    std::size_t top_n = 1000;
    std::int64_t cutoff = 1388534400;  // 2014-01-01T00:00:00Z
    std::size_t n_links = 2000;
    double malicious_fraction = 0.5;
    double zero_click_malicious = 0.4616;
    double zero_click_benign = 0.30;
    std::uint64_t synth_seed = 7;
};

namespace detail {

class Input {
public:
    Input(const std::string& path, std::istream& stdin_stream) {
        if (path.empty()) throw invalid_input("no input given (use --in)");
        if (path == "-") {
            stream_ = &stdin_stream;
        } else {
            file_.open(path, std::ios::binary);
            if (!file_) throw io_error("cannot open input file '" + path + "'");
            stream_ = &file_;
        }
    }
    std::istream& get() { return *stream_; }

private:
    std::ifstream file_;
    std::istream* stream_ = nullptr;
};

class Output {
public:
    Output(const std::string& path, std::ostream& stdout_stream) {
        if (path.empty() || path == "-") {
            stream_ = &stdout_stream;
        } else {
            file_.open(path, std::ios::binary);
            if (!file_) throw io_error("cannot write output file '" + path + "'");
            stream_ = &file_;
        }
    }
    std::ostream& get() { return *stream_; }

private:
    std::ofstream file_;
    std::ostream* stream_ = nullptr;
};

inline std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline std::string manifest_target(const RunConfig& c) {
    if (!c.manifest_path.empty()) return c.manifest_path;
    if (c.subcommand == "synth") return (std::filesystem::path(c.output) / "run_manifest.json").string();
    if (c.output.empty() || c.output == "-") return "";
    return c.output + ".manifest.json";
}

/// Config, versions and seeds of this run, written beside its outputs. Only
/// the "timestamp" field differs between identical runs.
inline void write_manifest(const RunConfig& c, const std::vector<std::string>& argv) {
    const auto path = manifest_target(c);
    if (path.empty()) return;
    json m;
    m["tool"] = "bitscan";
    m["version"] = kVersion;
    m["subcommand"] = c.subcommand;
    m["argv"] = argv;
    m["seed"] = c.seed;
    m["synth_seed"] = c.synth_seed;
    m["workers"] = c.workers;
    m["public_suffix_snapshot"] = std::string(psl::kSnapshotVersion);
    m["model_format_version"] = kModelFormatVersion;
    m["timestamp"] = utc_timestamp();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot write run manifest '" + path + "'");
    out << m.dump(2) << '\n';
}

inline std::string env_or(const std::string& value, const char* env) {
    if (!value.empty()) return value;
    if (const char* v = std::getenv(env)) return v;
    return "";
}

inline std::set<VerdictSource> parse_providers(const std::string& list) {
    std::set<VerdictSource> out;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        auto src = parse_source(item);
        if (!src) throw invalid_input("unknown provider '" + item + "'");
        out.insert(*src);
    }
    if (out.empty()) throw invalid_input("no providers given");
    return out;
}

inline FeatureMode mode_of(const RunConfig& c) {
    auto m = parse_mode(c.mode);
    if (!m) throw invalid_input("unknown mode '" + c.mode + "'");
    return *m;
}

inline TrainParams train_params(const RunConfig& c, unsigned workers) {
    TrainParams p;
    p.tree_count = c.tree_count;
    if (c.max_depth >= 0) p.max_depth = c.max_depth;
    p.min_leaf = c.min_leaf;
    if (c.features_per_split > 0) p.features_per_split = c.features_per_split;
    p.seed = c.seed;
    p.bootstrap = !c.no_bootstrap;
    p.workers = workers;
    return p;
}

inline std::vector<ModelKind> kinds_of(const std::string& kind) {
    if (kind == "all") return {ModelKind::naive_bayes, ModelKind::decision_tree, ModelKind::random_forest};
    auto k = parse_model_kind(kind);
    if (!k) throw invalid_input("unknown classifier kind '" + kind + "'");
    return {*k};
}

inline Dataset read_dataset(const RunConfig& c, Streams& io, LoadReport& report) {
    Input in(c.input, io.in);
    return load_dataset(in.get(), report);
}

inline Dataset read_dataset(const RunConfig& c, Streams& io) {
    LoadReport report;
    auto ds = read_dataset(c, io, report);
    if (!report.drops.empty()) io.err << "note: " << report.drops.size() << " record(s) dropped while loading\n";
    return ds;
}

inline Table read_table(const RunConfig& c, Streams& io) {
    Input in(c.input, io.in);
    return read_csv(in.get());
}

/// Table restricted to the requested mode's columns.
inline Table table_for_mode(const Table& t, const RunConfig& c) { return project(t, mode_of(c)); }

inline WhoisStore whois_store(const RunConfig& c) {
    const auto path = env_or(c.whois_path, kWhoisEnv);
    if (path.empty()) throw invalid_input("no WHOIS fixture given (use --whois or " + std::string(kWhoisEnv) + ")");
    return WhoisStore::load(path);
}

inline void emit_reports(std::ostream& out, const RunConfig& c,
                         const std::vector<std::pair<std::string, EvalReport>>& reports) {
    if (c.format == "json") {
        json j = json::object();
        for (const auto& [name, r] : reports) j[name] = to_json(r);
        out << j.dump(2) << '\n';
    } else if (c.format == "csv") {
        out << "classifier,metric,value\n";
        for (const auto& [name, r] : reports) {
            std::stringstream body;
            write_report_csv(body, r);
            std::string line;
            std::getline(body, line);  // header
            while (std::getline(body, line)) out << name << ',' << line << '\n';
        }
    } else {
        write_metrics_table(out, reports);
        for (const auto& [name, r] : reports) {
            out << "\nConfusion matrix (" << name << ")\n";
            write_confusion(out, r.confusion);
            if (r.mean_fold_accuracy) {
                out << "folds: " << r.folds.size() << ", mean fold accuracy "
                    << bitscan::detail::pct(*r.mean_fold_accuracy) << '\n';
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

inline void cmd_ingest(const RunConfig& c, Streams& io) {
    LoadReport report;
    auto ds = read_dataset(c, io, report);
    if (!c.output.empty()) {
        Output out(c.output, io.out);
        write_dataset(ds, out.get());
    }
    auto& sink = io.err;
    if (c.format == "json") {
        json j;
        j["lines"] = report.lines;
        j["malformed"] = report.malformed;
        j["links"] = ds.links().size();
        j["encoders"] = ds.encoders().size();
        j["clicks"] = ds.click_count();
        j["drops"] = json::array();
        for (const auto& d : report.drops) {
            j["drops"].push_back(json{{"line", d.line}, {"type", d.record_type}, {"id", d.id}, {"reason", d.reason}});
        }
        (c.output.empty() ? io.out : sink) << j.dump(2) << '\n';
    } else {
        auto& o = c.output.empty() ? io.out : sink;
        o << "links " << ds.links().size() << ", encoders " << ds.encoders().size() << ", clicks " << ds.click_count()
          << ", lines " << report.lines << ", malformed " << report.malformed << ", dropped " << report.drops.size()
          << '\n';
        for (const auto& d : report.drops) {
            o << "  line " << d.line << " [" << d.record_type << "] " << d.id << ": " << d.reason << '\n';
        }
    }
}

inline void cmd_label(const RunConfig& c, Streams& io) {
    auto ds = read_dataset(c, io);
    const auto providers = parse_providers(c.providers);
    const auto dir = env_or(c.verdicts_dir, kVerdictsEnv);
    if (dir.empty()) throw invalid_input("no verdict fixture directory (use --fixtures or " + std::string(kVerdictsEnv) + ")");
    auto stores = load_verdict_stores(dir, providers);
    auto labeled = label_dataset(ds, providers, stores);
    Output out(c.output, io.out);
    write_dataset(labeled.dataset, out.get());
    io.err << "labeled " << labeled.dataset.links().size() << " links: " << labeled.report.malicious << " malicious, "
           << labeled.report.benign << " benign";
    if (labeled.report.overwritten > 0) io.err << " (" << labeled.report.overwritten << " existing labels overwritten)";
    io.err << '\n';
}

inline void cmd_extract(const RunConfig& c, Streams& io) {
    auto ds = read_dataset(c, io);
    auto whois = whois_store(c);
    auto m = extract(ds, whois, mode_of(c), c.workers);
    if (c.only_unclicked) {
        std::erase_if(m.rows, [&ds](const FeatureVector& v) { return !ds.clicks_of(v.global_hash).empty(); });
    }
    Output out(c.output, io.out);
    write_csv(m, out.get());
}

inline void cmd_train(const RunConfig& c, Streams& io) {
    auto table = table_for_mode(read_table(c, io), c);
    auto kinds = kinds_of(c.kind);
    if (kinds.size() != 1) throw invalid_input("train needs a single classifier kind");
    auto model = train(kinds.front(), table, train_params(c, c.workers));
    Output out(c.output, io.out);
    save_model(model, out.get());
    if (const auto* f = std::get_if<ForestParams>(&model.body); f && f->oob_accuracy) {
        io.err << "out-of-bag accuracy " << format_double(*f->oob_accuracy) << '\n';
    }
}

inline void cmd_predict(const RunConfig& c, Streams& io) {
    if (c.model_path.empty()) throw invalid_input("no model given (use --model)");
    auto model = load_model(c.model_path);
    auto table = read_table(c, io);
    auto predictions = predict_all(model, table);
    Output out(c.output, io.out);
    if (c.format == "json") {
        json j = json::array();
        for (std::size_t r = 0; r < table.rows(); ++r) {
            j.push_back(json{{"global_hash", table.id(r)},
                             {"label", std::string(to_string(predictions[r].label))},
                             {"score", predictions[r].score}});
        }
        out.get() << j.dump(2) << '\n';
    } else {
        out.get() << "global_hash,label,score\n";
        for (std::size_t r = 0; r < table.rows(); ++r) {
            out.get() << bitscan::detail::csv_escape(table.id(r)) << ',' << to_string(predictions[r].label) << ','
                      << format_double(predictions[r].score) << '\n';
        }
    }
}

inline void cmd_evaluate(const RunConfig& c, Streams& io) {
    std::vector<std::pair<std::string, EvalReport>> reports;
    if (!c.model_path.empty()) {
        auto model = load_model(c.model_path);
        auto table = read_table(c, io);
        reports.emplace_back(std::string(to_string(model.kind)), evaluate(model, table));
    } else {
        // Holdout protocol: stratified split, train on the rest, test once.
        auto table = table_for_mode(read_table(c, io), c);
        auto split = split_holdout(table, c.test_fraction, c.seed);
        auto train_rows = table.subset(split.train);
        auto test_rows = table.subset(split.test);
        for (auto kind : kinds_of(c.kind)) {
            auto model = train(kind, train_rows, train_params(c, c.workers));
            reports.emplace_back(std::string(to_string(kind)), evaluate(model, test_rows));
        }
    }
    Output out(c.output, io.out);
    emit_reports(out.get(), c, reports);
}

inline void cmd_crossval(const RunConfig& c, Streams& io) {
    auto table = table_for_mode(read_table(c, io), c);
    std::vector<std::pair<std::string, EvalReport>> reports;
    for (auto kind : kinds_of(c.kind)) {
        // Folds run in parallel; each fold trains single-threaded.
        auto trainer = model_trainer(kind, train_params(c, 1));
        reports.emplace_back(std::string(to_string(kind)), cross_validate(trainer, table, c.folds, c.seed, c.workers));
    }
    Output out(c.output, io.out);
    emit_reports(out.get(), c, reports);
}

inline void cmd_rank(const RunConfig& c, Streams& io) {
    auto table = table_for_mode(read_table(c, io), c);
    auto ranking = info_gain_rank(table, c.bins);
    Output out(c.output, io.out);
    if (c.format == "json") {
        out.get() << to_json(ranking).dump(2) << '\n';
    } else if (c.format == "csv") {
        out.get() << "rank,feature,info_gain\n";
        for (std::size_t i = 0; i < ranking.size(); ++i) {
            out.get() << i + 1 << ',' << ranking[i].feature << ',' << format_double(ranking[i].info_gain) << '\n';
        }
    } else {
        out.get() << std::left << std::setw(6) << "Rank" << std::setw(32) << "Feature" << "Info gain (bits)\n";
        for (std::size_t i = 0; i < ranking.size(); ++i) {
            out.get() << std::left << std::setw(6) << i + 1 << std::setw(32) << ranking[i].feature << std::fixed
                      << std::setprecision(4) << ranking[i].info_gain << '\n';
        }
    }
}

inline void cmd_susfac(const RunConfig& c, Streams& io) {
    auto ds = read_dataset(c, io);
    Output out(c.output, io.out);
    if (!c.timeline_encoder.empty()) {
        if (ds.find_encoder(c.timeline_encoder) == nullptr) {
            throw invalid_input("encoder '" + c.timeline_encoder + "' not found");
        }
        out.get() << "month,links,clicks\n";
        for (const auto& m : encoder_timeline(ds, c.timeline_encoder)) {
            out.get() << m.month << ',' << m.links << ',' << m.clicks << '\n';
        }
        return;
    }
    auto table = susfac_distribution(ds, c.steps);
    std::vector<SuspicionReport> per_encoder;
    for (const auto& e : ds.encoders()) {
        if (!e.link_history.empty()) per_encoder.push_back(suspicion_factor(e));
    }
    if (c.format == "csv") {
        write_distribution_csv(out.get(), table);
    } else if (c.format == "json") {
        json j;
        j["distribution"] = json::array();
        for (const auto& p : table) j["distribution"].push_back(json{{"threshold", p.threshold}, {"count", p.count}});
        j["encoders"] = json::array();
        for (const auto& r : per_encoder) j["encoders"].push_back(to_json(r));
        out.get() << j.dump(2) << '\n';
    } else {
        const auto highly = std::count_if(per_encoder.begin(), per_encoder.end(),
                                          [](const SuspicionReport& r) { return r.highly_suspicious; });
        out.get() << "encoders with history: " << per_encoder.size() << ", highly suspicious (sus_fac = 1): " << highly
                  << '\n';
        out.get() << std::left << std::setw(12) << "sus_fac <=" << "encoders\n";
        for (const auto& p : table) {
            out.get() << std::left << std::setw(12) << format_double(p.threshold) << p.count << '\n';
        }
    }
}

inline void cmd_communities(const RunConfig& c, Streams& io) {
    auto ds = read_dataset(c, io);
    ItemMode mode;
    if (c.items == "domain") mode = ItemMode::domain;
    else if (c.items == "url") mode = ItemMode::url;
    else throw invalid_input("unknown item mode '" + c.items + "'");
    auto report = detect_communities(account_items(ds, mode), c.threshold, c.min_size, c.workers);
    Output out(c.output, io.out);
    if (c.format == "json") {
        out.get() << to_json(report).dump(2) << '\n';
    } else if (c.format == "csv") {
        out.get() << "group,account\n";
        for (std::size_t g = 0; g < report.groups.size(); ++g) {
            for (const auto& id : report.groups[g]) out.get() << g + 1 << ',' << id << '\n';
        }
    } else {
        out.get() << "groups: " << report.groups.size() << ", pairs: " << report.pairwise_scores.size()
                  << ", score variance: " << format_double(report.score_variance) << '\n';
        for (std::size_t g = 0; g < report.groups.size(); ++g) {
            out.get() << "  group " << g + 1 << " (" << report.groups[g].size() << "):";
            for (const auto& id : report.groups[g]) out.get() << ' ' << id;
            out.get() << '\n';
        }
    }
}

inline void cmd_liveness(const RunConfig& c, Streams& io) {
    auto ds = read_dataset(c, io);
    auto report = domain_liveness(ds, whois_store(c));
    Output out(c.output, io.out);
    if (c.format == "json") {
        out.get() << to_json(report).dump(2) << '\n';
    } else if (c.format == "csv") {
        out.get() << "domain,alive,links,warning_pages\n";
        for (const auto& d : report.domains) {
            out.get() << d.domain << ',' << (d.alive ? "true" : "false") << ',' << d.links << ',' << d.warning_pages
                      << '\n';
        }
    } else {
        out.get() << "domains: " << report.domains.size() << ", dead: " << report.dead_domains << " ("
                  << bitscan::detail::pct(report.dead_fraction) << "), warning pages on dead domains: "
                  << report.dead_warning_total << '\n';
    }
}

inline void cmd_persistence(const RunConfig& c, Streams& io) {
    auto ds = read_dataset(c, io);
    auto report = persistence(ds, c.top_n, c.cutoff);
    if (report.shortfall) {
        io.err << "note: only " << report.examined << " links with warning counts (requested " << report.requested
               << ")\n";
    }
    Output out(c.output, io.out);
    if (c.format == "json") {
        out.get() << to_json(report).dump(2) << '\n';
    } else if (c.format == "csv") {
        out.get() << "requested,examined,clicked_after_cutoff,fraction\n"
                  << report.requested << ',' << report.examined << ',' << report.clicked_after_cutoff << ','
                  << format_double(report.fraction) << '\n';
    } else {
        out.get() << report.clicked_after_cutoff << " of " << report.examined << " top warned links clicked at or after "
                  << c.cutoff << " (" << bitscan::detail::pct(report.fraction) << ")\n";
    }
}

inline void cmd_synth(const RunConfig& c, Streams& io) {
    if (c.output.empty() || c.output == "-") throw invalid_input("synth needs an output directory (--out DIR)");
    SynthParams p;
    p.n_links = c.n_links;
    p.malicious_fraction = c.malicious_fraction;
    p.zero_click_fraction_malicious = c.zero_click_malicious;
    p.zero_click_fraction_benign = c.zero_click_benign;
    p.seed = c.synth_seed;
    auto sep = parse_separation(c.separation);
    if (!sep) throw invalid_input("unknown separation '" + c.separation + "'");
    p.separation = *sep;
    auto s = generate(p);
    write_synth(s, c.output);
    io.err << "wrote " << s.dataset.links().size() << " links to " << c.output << '\n';
}

}  // namespace detail

/// Runs one CLI invocation. `args` excludes the program name.
inline int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
    RunConfig c;
    CLI::App app{"bitscan: malicious short-URL detection toolkit", "bitscan"};
    app.require_subcommand(1, 1);

    auto add_common = [&c](CLI::App* sub) {
        sub->add_option("--workers", c.workers, "Worker threads (results do not depend on it)");
    };
    auto add_format = [&c](CLI::App* sub) {
        sub->add_option("--format", c.format, "Report format")->check(CLI::IsMember({"text", "json", "csv"}));
    };
    auto add_in_out = [&c](CLI::App* sub, const char* in_help) {
        sub->add_option("--in", c.input, in_help)->required();
        sub->add_option("--out", c.output, "Output path, '-' for stdout");
    };
    auto add_mode = [&c](CLI::App* sub) {
        sub->add_option("--mode", c.mode, "Feature mode")->check(CLI::IsMember({"full", "non_click"}));
    };
    auto add_train = [&c](CLI::App* sub) {
        sub->add_option("--kind", c.kind, "Classifier kind")
            ->check(CLI::IsMember({"naive_bayes", "decision_tree", "random_forest", "all"}));
        sub->add_option("--seed", c.seed, "Training / partition seed");
        sub->add_option("--trees", c.tree_count, "Forest size");
        sub->add_option("--max-depth", c.max_depth, "Tree depth limit (-1 = unlimited)");
        sub->add_option("--min-leaf", c.min_leaf, "Minimum rows per leaf");
        sub->add_option("--features-per-split", c.features_per_split, "Forest features per split (-1 = ceil(sqrt F))");
        sub->add_flag("--no-bootstrap", c.no_bootstrap, "Grow forest trees on the full training set");
    };

    auto* ingest = app.add_subcommand("ingest", "Load a dataset file and report dropped records");
    add_in_out(ingest, "Dataset JSONL");
    add_format(ingest);
    add_common(ingest);

    auto* label = app.add_subcommand("label", "Label links from blacklist verdict fixtures");
    add_in_out(label, "Dataset JSONL");
    label->add_option("--fixtures", c.verdicts_dir, "Directory of <provider>.jsonl verdict fixtures");
    label->add_option("--providers", c.providers, "Comma-separated providers");
    add_common(label);

    auto* extract_cmd = app.add_subcommand("extract", "Extract the feature matrix as CSV");
    add_in_out(extract_cmd, "Labeled dataset JSONL");
    extract_cmd->add_option("--whois", c.whois_path, "WHOIS fixture JSONL");
    add_mode(extract_cmd);
    extract_cmd->add_flag("--only-unclicked", c.only_unclicked, "Keep only links that were never clicked");
    add_common(extract_cmd);

    auto* train_cmd = app.add_subcommand("train", "Train a classifier on a feature CSV");
    add_in_out(train_cmd, "Feature CSV");
    add_mode(train_cmd);
    add_train(train_cmd);
    add_common(train_cmd);

    auto* predict_cmd = app.add_subcommand("predict", "Score feature rows with a trained model");
    predict_cmd->add_option("--model", c.model_path, "Model file")->required();
    predict_cmd->add_option("--url-features,--in", c.input, "Feature CSV rows")->required();
    predict_cmd->add_option("--out", c.output, "Output path, '-' for stdout");
    predict_cmd->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"csv", "json", "text"}));
    add_common(predict_cmd);

    auto* evaluate_cmd = app.add_subcommand("evaluate", "Evaluate a model on test rows, or run a holdout split");
    add_in_out(evaluate_cmd, "Feature CSV");
    evaluate_cmd->add_option("--model", c.model_path, "Trained model; omit to train on a stratified holdout split");
    evaluate_cmd->add_option("--test-fraction", c.test_fraction, "Holdout test share");
    add_mode(evaluate_cmd);
    add_train(evaluate_cmd);
    add_format(evaluate_cmd);
    add_common(evaluate_cmd);

    auto* crossval_cmd = app.add_subcommand("crossval", "Stratified k-fold cross-validation");
    add_in_out(crossval_cmd, "Feature CSV");
    crossval_cmd->add_option("--k", c.folds, "Number of folds");
    add_mode(crossval_cmd);
    add_train(crossval_cmd);
    add_format(crossval_cmd);
    add_common(crossval_cmd);

    auto* rank_cmd = app.add_subcommand("rank", "Rank features by information gain");
    add_in_out(rank_cmd, "Feature CSV");
    rank_cmd->add_option("--bins", c.bins, "Equal-width bins per feature");
    add_mode(rank_cmd);
    add_format(rank_cmd);
    add_common(rank_cmd);

    auto* susfac_cmd = app.add_subcommand("susfac", "Suspicion factor distribution over encoders");
    add_in_out(susfac_cmd, "Dataset JSONL");
    susfac_cmd->add_option("--steps", c.steps, "Threshold grid steps over [0, 1]");
    susfac_cmd->add_option("--timeline", c.timeline_encoder, "Emit per-month link/click counts for one encoder");
    add_format(susfac_cmd);
    add_common(susfac_cmd);

    auto* communities_cmd = app.add_subcommand("communities", "Group accounts by Jaccard similarity of their items");
    add_in_out(communities_cmd, "Dataset JSONL");
    communities_cmd->add_option("--threshold", c.threshold, "Similarity threshold in (0, 1]");
    communities_cmd->add_option("--min-size", c.min_size, "Smallest reported group");
    communities_cmd->add_option("--items", c.items, "Item set per account")->check(CLI::IsMember({"domain", "url"}));
    add_format(communities_cmd);
    add_common(communities_cmd);

    auto* liveness_cmd = app.add_subcommand("liveness", "Dead-domain share and warning counts");
    add_in_out(liveness_cmd, "Dataset JSONL");
    liveness_cmd->add_option("--whois", c.whois_path, "WHOIS fixture JSONL");
    add_format(liveness_cmd);
    add_common(liveness_cmd);

    auto* persistence_cmd = app.add_subcommand("persistence", "Share of top warned links still clicked after a cutoff");
    add_in_out(persistence_cmd, "Dataset JSONL");
    persistence_cmd->add_option("--top", c.top_n, "Links to examine");
    persistence_cmd->add_option("--cutoff", c.cutoff, "Epoch seconds");
    add_format(persistence_cmd);
    add_common(persistence_cmd);

    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic dataset with fixtures");
    synth_cmd->add_option("--out", c.output, "Output directory")->required();
    synth_cmd->add_option("--n", c.n_links, "Number of links");
    synth_cmd->add_option("--malicious-fraction", c.malicious_fraction, "Malicious share");
    synth_cmd->add_option("--zero-click-malicious", c.zero_click_malicious, "Never-clicked share of malicious links");
    synth_cmd->add_option("--zero-click-benign", c.zero_click_benign, "Never-clicked share of benign links");
    synth_cmd->add_option("--separation", c.separation, "Class overlap")->check(CLI::IsMember({"easy", "hard"}));
    synth_cmd->add_option("--seed", c.synth_seed, "Generator seed");

    for (auto* sub : app.get_subcommands({})) {
        sub->add_option("--manifest", c.manifest_path, "Run manifest path (default: <out>.manifest.json)");
    }

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return 2;
    }

    c.subcommand = app.get_subcommands().front()->get_name();
    if (c.workers == 0) c.workers = 1;
    Streams io{in, out, err};
    try {
        const auto& s = c.subcommand;
        if (s == "ingest") detail::cmd_ingest(c, io);
        else if (s == "label") detail::cmd_label(c, io);
        else if (s == "extract") detail::cmd_extract(c, io);
        else if (s == "train") detail::cmd_train(c, io);
        else if (s == "predict") detail::cmd_predict(c, io);
        else if (s == "evaluate") detail::cmd_evaluate(c, io);
        else if (s == "crossval") detail::cmd_crossval(c, io);
        else if (s == "rank") detail::cmd_rank(c, io);
        else if (s == "susfac") detail::cmd_susfac(c, io);
        else if (s == "communities") detail::cmd_communities(c, io);
        else if (s == "liveness") detail::cmd_liveness(c, io);
        else if (s == "persistence") detail::cmd_persistence(c, io);
        else if (s == "synth") detail::cmd_synth(c, io);
        detail::write_manifest(c, args);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

inline int run(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args, in, out, err);
}

}  // namespace bitscan::cli
