#include <gtest/gtest.h>

#include <bitscan/cli.hpp>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "fixtures.hpp"

using namespace bitscan;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result call(const std::vector<std::string>& args, const std::string& stdin_text = "") {
    std::istringstream in(stdin_text);
    std::ostringstream out, err;
    const int code = cli::run(args, in, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

json without_timestamp(const fs::path& p) {
    auto j = json::parse(slurp(p));
    j.erase("timestamp");
    return j;
}

// synth -> label -> extract, shared by the tests below.
class CliPipeline : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        dir_ = fixtures::temp_dir("cli_pipeline");
        const auto d = dir_.string();
        ASSERT_EQ(call({"synth", "--out", d + "/synth", "--n", "400", "--seed", "3"}).code, 0);
        ASSERT_EQ(call({"label", "--in", d + "/synth/dataset.jsonl", "--fixtures", d + "/synth/verdicts", "--out",
                        d + "/labeled.jsonl"})
                      .code,
                  0);
        ASSERT_EQ(call({"extract", "--in", d + "/labeled.jsonl", "--whois", d + "/synth/whois.jsonl", "--out",
                        d + "/features.csv"})
                      .code,
                  0);
    }
    static std::string path(const std::string& name) { return (dir_ / name).string(); }
    static inline fs::path dir_;
};

}  // namespace

TEST_F(CliPipeline, SynthWritesManifests) {
    EXPECT_TRUE(fs::exists(path("synth/run_manifest.json")));
    EXPECT_TRUE(fs::exists(path("synth/manifest.json")));
    EXPECT_TRUE(fs::exists(path("labeled.jsonl.manifest.json")));
    auto m = json::parse(slurp(path("labeled.jsonl.manifest.json")));
    EXPECT_EQ(m["subcommand"], "label");
    EXPECT_TRUE(m.contains("public_suffix_snapshot"));
    EXPECT_TRUE(m.contains("timestamp"));
}

TEST_F(CliPipeline, TrainWritesLoadableModelAndManifest) {
    auto r = call({"train", "--in", path("features.csv"), "--out", path("rf.json"), "--trees", "20", "--workers", "3"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.err.find("out-of-bag accuracy"), std::string::npos);
    EXPECT_TRUE(fs::exists(path("rf.json.manifest.json")));
    auto model = load_model(path("rf.json"));
    EXPECT_EQ(model.kind, ModelKind::random_forest);
}

TEST_F(CliPipeline, EvaluateHoldoutShowsMetricTable) {
    auto r = call({"evaluate", "--in", path("features.csv"), "--kind", "all", "--trees", "20"});
    ASSERT_EQ(r.code, 0) << r.err;
    for (const char* s : {"Evaluation Metric", "naive_bayes", "decision_tree", "random_forest", "Accuracy",
                          "Precision (malicious)", "Weighted F-measure", "Confusion matrix"}) {
        EXPECT_NE(r.out.find(s), std::string::npos) << s;
    }
}

TEST_F(CliPipeline, EvaluateWithModelAndFormats) {
    ASSERT_EQ(call({"train", "--in", path("features.csv"), "--out", path("dt.json"), "--kind", "decision_tree"}).code, 0);
    auto j = call({"evaluate", "--in", path("features.csv"), "--model", path("dt.json"), "--format", "json"});
    ASSERT_EQ(j.code, 0) << j.err;
    auto parsed = json::parse(j.out);
    EXPECT_EQ(parsed["decision_tree"]["accuracy"], 1.0);
    auto c = call({"evaluate", "--in", path("features.csv"), "--model", path("dt.json"), "--format", "csv"});
    EXPECT_EQ(c.out.substr(0, c.out.find('\n')), "classifier,metric,value");
    EXPECT_NE(c.out.find("decision_tree,accuracy,1\n"), std::string::npos);
}

TEST_F(CliPipeline, PredictFromStdinToStdout) {
    ASSERT_EQ(call({"train", "--in", path("features.csv"), "--out", path("nb.json"), "--kind", "naive_bayes"}).code, 0);
    const auto csv = slurp(path("features.csv"));
    auto r = call({"predict", "--model", path("nb.json"), "--url-features", "-"}, csv);
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "global_hash,label,score");
    EXPECT_EQ(static_cast<std::size_t>(std::count(r.out.begin(), r.out.end(), '\n')), 401u);
    auto j = call({"predict", "--model", path("nb.json"), "--in", path("features.csv"), "--format", "json"});
    EXPECT_EQ(json::parse(j.out).size(), 400u);
}

TEST_F(CliPipeline, CrossvalAndRankAreDeterministic) {
    auto a = call({"crossval", "--in", path("features.csv"), "--kind", "decision_tree", "--k", "5", "--workers", "1",
                   "--out", path("cv1.txt")});
    auto b = call({"crossval", "--in", path("features.csv"), "--kind", "decision_tree", "--k", "5", "--workers", "4",
                   "--out", path("cv2.txt")});
    ASSERT_EQ(a.code, 0) << a.err;
    ASSERT_EQ(b.code, 0) << b.err;
    EXPECT_EQ(slurp(path("cv1.txt")), slurp(path("cv2.txt")));
    auto m1 = without_timestamp(path("cv1.txt.manifest.json"));
    auto m2 = without_timestamp(path("cv2.txt.manifest.json"));
    m1.erase("argv"), m2.erase("argv"), m1.erase("workers"), m2.erase("workers");
    EXPECT_EQ(m1, m2);

    auto r = call({"rank", "--in", path("features.csv"), "--format", "csv"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out, call({"rank", "--in", path("features.csv"), "--format", "csv"}).out);
}

TEST_F(CliPipeline, IdenticalRunsDifferOnlyInTimestamp) {
    ASSERT_EQ(call({"train", "--in", path("features.csv"), "--out", path("a.json"), "--trees", "10"}).code, 0);
    ASSERT_EQ(call({"train", "--in", path("features.csv"), "--out", path("b.json"), "--trees", "10"}).code, 0);
    EXPECT_EQ(slurp(path("a.json")), slurp(path("b.json")));
    auto ma = without_timestamp(path("a.json.manifest.json"));
    auto mb = without_timestamp(path("b.json.manifest.json"));
    EXPECT_EQ(ma["argv"].size(), mb["argv"].size());
    ma.erase("argv"), mb.erase("argv");
    EXPECT_EQ(ma, mb);
}

TEST_F(CliPipeline, ForensicsSubcommands) {
    const auto ds = path("synth/dataset.jsonl");
    auto s = call({"susfac", "--in", ds, "--format", "csv", "--steps", "4"});
    ASSERT_EQ(s.code, 0) << s.err;
    EXPECT_EQ(s.out.substr(0, s.out.find('\n')), "threshold,count");
    auto c = call({"communities", "--in", ds, "--format", "json"});
    ASSERT_EQ(c.code, 0) << c.err;
    EXPECT_TRUE(json::parse(c.out).contains("groups"));
    auto l = call({"liveness", "--in", ds, "--whois", path("synth/whois.jsonl"), "--format", "json"});
    ASSERT_EQ(l.code, 0) << l.err;
    EXPECT_TRUE(json::parse(l.out).contains("dead_fraction"));
    auto p = call({"persistence", "--in", ds, "--top", "10", "--cutoff", "0", "--format", "json"});
    ASSERT_EQ(p.code, 0) << p.err;
    EXPECT_EQ(json::parse(p.out)["examined"], 10);
}

TEST_F(CliPipeline, WhoisFromEnvironment) {
    const auto labeled = path("labeled.jsonl");
    auto missing = call({"extract", "--in", labeled});
    EXPECT_EQ(missing.code, 1);
    EXPECT_NE(missing.err.find("BITSCAN_WHOIS"), std::string::npos);
    ::setenv("BITSCAN_WHOIS", path("synth/whois.jsonl").c_str(), 1);
    auto r = call({"extract", "--in", labeled});
    ::unsetenv("BITSCAN_WHOIS");
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out, slurp(path("features.csv")));
}

TEST(Cli, MissingInputFileNamesThePath) {
    auto dir = fixtures::temp_dir("cli_missing");
    std::ofstream(dir / "model.json") << "{}";
    auto r = call({"predict", "--model", (dir / "model.json").string(), "--url-features", "/no/such/file.csv"});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("corrupt model"), std::string::npos);  // bad model reported first
    auto m = call({"predict", "--model", "/no/such/model.json", "--url-features", "/no/such/file.csv"});
    EXPECT_EQ(m.code, 1);
    EXPECT_NE(m.err.find("/no/such/model.json"), std::string::npos);
    auto i = call({"ingest", "--in", "/no/such/data.jsonl"});
    EXPECT_EQ(i.code, 1);
    EXPECT_NE(i.err.find("/no/such/data.jsonl"), std::string::npos);
}

TEST(Cli, UsageErrors) {
    auto unknown = call({"train", "--in", "x.csv", "--bogus"});
    EXPECT_EQ(unknown.code, 2);
    EXPECT_NE(unknown.err.find("Usage"), std::string::npos);
    EXPECT_EQ(call({}).code, 2);
    EXPECT_EQ(call({"frobnicate"}).code, 2);
    EXPECT_EQ(call({"train", "--in", "x.csv", "--kind", "svm"}).code, 2);
    EXPECT_EQ(call({"--help"}).code, 0);
}

TEST(Cli, IngestFromStdinReportsDrops) {
    const std::string text =
        R"({"type":"encoder","encoder_id":"e1","kind":"regular"}
{"type":"link","global_hash":"h1","long_url":"http://a.com/","created_at":100,"encoder_ids":["e1"]}
{"type":"click","global_hash":"h1","clicked_at":50,"referrer_domain":""}
)";
    auto r = call({"ingest", "--in", "-", "--format", "json"}, text);
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(json::parse(r.out)["drops"].size(), 1u);
    auto out = call({"ingest", "--in", "-", "--out", "-"}, text);
    EXPECT_EQ(out.out.find("clicked_at"), std::string::npos);
    EXPECT_NE(out.out.find("\"h1\""), std::string::npos);
}
