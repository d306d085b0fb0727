#include <gtest/gtest.h>

#include <sstream>

#include "cli.hpp"
#include "icsu/util.hpp"
#include "support.hpp"

using namespace icsu;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result invoke(std::vector<std::string> args) {
    args.insert(args.begin(), "icsu");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    int code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::vector<std::string> bench_args(std::vector<std::string> extra) {
    std::vector<std::string> a = {"--corpus", (fixtures::synthetic_dir() / "benchmark.jsonl").string(), "--kb",
                                  (fixtures::synthetic_dir() / "kb.tsv").string(), "--dim", "256"};
    a.insert(a.end(), extra.begin(), extra.end());
    return a;
}

Result verb(const std::string& name, std::vector<std::string> extra) {
    auto a = bench_args(std::move(extra));
    a.insert(a.begin(), name);
    return invoke(a);
}

}  // namespace

TEST(Cli, HelpAndUsageErrors) {
    EXPECT_EQ(invoke({"--help"}).code, cli::kOk);
    EXPECT_EQ(invoke({}).code, cli::kUsageError);
    EXPECT_EQ(invoke({"frobnicate"}).code, cli::kUsageError);
    EXPECT_EQ(invoke({"run", "--no-such-flag"}).code, cli::kUsageError);
    EXPECT_EQ(invoke({"run", "--k", "many"}).code, cli::kUsageError);
}

TEST(Cli, UnknownStrategyListsChoices) {
    auto r = verb("run", {"--strategy", "semantic"});
    EXPECT_EQ(r.code, cli::kUsageError);
    EXPECT_NE(r.err.find("raw, anonymized, sparql, hybrid"), std::string::npos) << r.err;
}

TEST(Cli, MissingInputs) {
    EXPECT_EQ(invoke({"run", "--kb", "x.tsv"}).code, cli::kUsageError);
    auto r = invoke({"run", "--corpus", "/nonexistent/q.jsonl", "--kb", "/nonexistent/kb.tsv"});
    EXPECT_EQ(r.code, cli::kIoError) << r.err;
    EXPECT_EQ(verb("run", {"--llm", "remote-chat"}).code, cli::kUsageError);
    EXPECT_EQ(verb("run", {"--embedder", "remote"}).code, cli::kUsageError);
}

TEST(Cli, RunGoldOracleWritesRunDir) {
    fixtures::TempDir dir("cli-run");
    auto r = verb("run", {"--strategy", "hybrid", "--out-dir", dir.path().string(), "--parallelism", "2"});
    ASSERT_EQ(r.code, cli::kOk) << r.err;
    EXPECT_NE(r.out.find("accuracy          1.000"), std::string::npos) << r.out;
    EXPECT_TRUE(std::filesystem::exists(dir.path() / "report.json"));
    EXPECT_TRUE(std::filesystem::exists(dir.path() / "drafts.jsonl"));
    auto rep = invoke({"report", "--run-dir", dir.path().string()});
    EXPECT_EQ(rep.code, cli::kOk);
    EXPECT_NE(rep.out.find("# recall_bin_center"), std::string::npos);
    EXPECT_EQ(invoke({"report", "--run-dir", (dir.path() / "nope").string()}).code, cli::kIoError);
}

TEST(Cli, NoAutoBuildWithoutIndexIsConfigError) {
    fixtures::TempDir dir("cli-idx");
    auto r = verb("run", {"--strategy", "sparql", "--no-auto-build", "--index-dir", dir.path().string()});
    EXPECT_EQ(r.code, cli::kUsageError);
    EXPECT_NE(r.err.find("auto-build is disabled"), std::string::npos) << r.err;

    auto b = invoke({"build-index", "--corpus", (fixtures::synthetic_dir() / "benchmark.jsonl").string(), "--index-dir",
                  dir.path().string(), "--dim", "256"});
    ASSERT_EQ(b.code, cli::kOk) << b.err;
    auto again = verb("run", {"--strategy", "sparql", "--no-auto-build", "--index-dir", dir.path().string()});
    EXPECT_EQ(again.code, cli::kOk) << again.err;
}

TEST(Cli, BudgetExhaustionIsPartial) {
    fixtures::TempDir dir("cli-budget");
    auto r = verb("run", {"--budget", "1", "--out-dir", dir.path().string()});
    EXPECT_EQ(r.code, cli::kPartialRun);
    EXPECT_NE(r.out.find("PARTIAL RUN"), std::string::npos) << r.out;
    auto j = nlohmann::json::parse(read_file(dir.path() / "report.json"));
    EXPECT_EQ(j["partial"], true);
    EXPECT_EQ(j["unanswered"], 299);
}

TEST(Cli, SweepTableAndEmptyStrategyList) {
    EXPECT_EQ(verb("sweep-k", {"--strategies", " , "}).code, cli::kUsageError);
    EXPECT_EQ(verb("sweep-k", {"--ks", "2,x"}).code, cli::kUsageError);
    fixtures::TempDir dir("cli-sweep");
    auto r = verb("sweep-k", {"--strategies", "raw,hybrid", "--ks", "0,4", "--llm", "relation-gate", "--exclude-self",
                              "--out-dir", dir.path().string()});
    ASSERT_EQ(r.code, cli::kOk) << r.err;
    EXPECT_EQ(r.out.rfind("strategy\tk=0\tk=4\nraw\t0.000\t", 0), 0u) << r.out;
    EXPECT_TRUE(std::filesystem::exists(dir.path() / "hybrid-k4" / "report.json"));
    EXPECT_EQ(read_file(dir.path() / "sweep.tsv"), r.out);
}

TEST(Cli, TraceShowsEveryStep) {
    auto r = verb("trace", {"--strategy", "sparql", "--k", "2", "--id", "syn-0002", "--exclude-self"});
    ASSERT_EQ(r.code, cli::kOk) << r.err;
    for (const char* section : {"== question syn-0002", "== anonymized", "== pass 1 (anonymized) prompt", "== draft",
                                "== pass 2 (sparql) retrieval", "== parsed query", "== answers", "== gold answers",
                                "== relation recall", "== verdict\ncorrect"}) {
        EXPECT_NE(r.out.find(section), std::string::npos) << section << "\n" << r.out;
    }
    EXPECT_EQ(verb("trace", {"--id", "missing"}).code, cli::kUsageError);
}

TEST(Cli, IngestCanonicalizes) {
    fixtures::TempDir dir("cli-ingest");
    auto r = invoke({"ingest", "--corpus", (fixtures::synthetic_dir() / "benchmark.jsonl").string(), "--out-dir",
                  dir.path().string()});
    ASSERT_EQ(r.code, cli::kOk) << r.err;
    EXPECT_NE(r.out.find("records            300"), std::string::npos);
    EXPECT_EQ(read_file(dir.path() / "benchmark.jsonl"), read_file(fixtures::synthetic_dir() / "benchmark.jsonl"));

    write_file(dir.path() / "bad.jsonl", "{\"id\":\"a\"}\n");
    auto bad = invoke({"ingest", "--corpus", (dir.path() / "bad.jsonl").string()});
    EXPECT_EQ(bad.code, cli::kRuntimeFailure);
    EXPECT_NE(bad.err.find("line 1: missing field question"), std::string::npos) << bad.err;
}
