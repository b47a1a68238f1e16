#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "support.hpp"

namespace fs = std::filesystem;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string output;
};

RunResult run_cli(const std::string& args) {
    const std::string cmd = std::string(NARRAMAP_CLI_PATH) + " " + args + " 2>&1";
    std::array<char, 4096> buf{};
    RunResult result;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    while (fgets(buf.data(), buf.size(), pipe)) result.output += buf.data();
    const int status = pclose(pipe);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

std::string fixture_config() {
    return (support::fixtures_dir() / "news60" / "config.json").string();
}

}  // namespace

TEST_CASE("full offline run on the bundled fixture produces all report files") {
    support::TempDir tmp("cli");
    const std::string common = "--config " + fixture_config() + " --out " +
                               (tmp.path() / "out").string() + " --cache " +
                               (tmp.path() / "cache").string();

    for (const std::string cmd :
         {"ingest", "extract", "embed", "build", "project", "cluster", "report", "baseline"}) {
        const auto result = run_cli(common + " " + cmd);
        INFO(cmd << " output: " << result.output);
        REQUIRE(result.exit_code == 0);
    }

    const fs::path out = tmp.path() / "out";
    for (const std::string file :
         {"corpus.normalized.jsonl", "extraction.jsonl", "actant_vectors.jsonl", "narrative.f64",
          "narrative.ids.txt", "narrative.meta.json", "projection.csv", "assignment.csv",
          "silhouette_by_k.csv", "manifest.json", "reports/labels.csv", "reports/labels.json",
          "reports/actor_table.csv", "reports/actor_table.json", "reports/syncretisms.csv",
          "reports/syncretisms.json", "reports/missing_actants.csv",
          "reports/missing_actants.json", "reports/source_shares.csv",
          "reports/source_shares.json", "reports/component_timeline.csv",
          "reports/cluster_map.svg", "reports/run_params.json", "baseline/comparison.json",
          "weekly_counts.csv"}) {
        INFO("missing " << file);
        CHECK(fs::exists(out / file));
    }

    SUBCASE("repeated commands short-circuit via the manifest") {
        const auto again = run_cli(common + " extract");
        CHECK(again.exit_code == 0);
        CHECK(again.output.find("up to date") != std::string::npos);
    }

    SUBCASE("a re-run without the manifest is served from the response cache") {
        fs::remove(out / "manifest.json");
        const auto again = run_cli(common + " extract");
        CHECK(again.exit_code == 0);
        CHECK(again.output.find("cache hits 60/60") != std::string::npos);
    }

    SUBCASE("post drop/merge updates the assignment and audit log") {
        const auto result = run_cli(common + " post --drop 0 --merge 0,1");
        INFO(result.output);
        CHECK(result.exit_code == 0);
        std::ifstream meta(out / "cluster_meta.json");
        std::string contents((std::istreambuf_iterator<char>(meta)),
                             std::istreambuf_iterator<char>());
        CHECK(contents.find("\"drop\"") != std::string::npos);
        CHECK(contents.find("\"merge\"") != std::string::npos);

        // dropped rows are marked -1 and excluded from subsequent reports
        std::ifstream assignment(out / "assignment.csv");
        std::string line;
        bool has_dropped = false;
        while (std::getline(assignment, line))
            if (line.find(",-1") != std::string::npos) has_dropped = true;
        CHECK(has_dropped);

        const auto report = run_cli(common + " report");
        CHECK(report.exit_code == 0);
    }

    SUBCASE("dimstudy runs on the stored actant vectors") {
        const auto result = run_cli(common + " dimstudy --dims 2,8 --methods svd,pca");
        CHECK(result.exit_code == 0);
        CHECK(fs::exists(out / "dimstudy.csv"));
    }
}

TEST_CASE("ingest preserves unknown corpus keys in the normalized file") {
    support::TempDir tmp("cli");
    const auto corpus = tmp.path() / "corpus.jsonl";
    {
        std::ofstream out(corpus);
        out << R"({"id":"k1","source":"s","body":"alpha beta","section":"news","rank":3})" << "\n";
    }
    const auto config = tmp.path() / "config.json";
    {
        std::ofstream out(config);
        out << R"({"corpus":"corpus.jsonl","chat":{"mode":"stub","stub_dir":"."},"embedder":{"mode":"hash","dim":8},"svd":{"dim":4}})";
    }
    const auto result = run_cli("--config " + config.string() + " --out " +
                                (tmp.path() / "out").string() + " ingest");
    INFO(result.output);
    REQUIRE(result.exit_code == 0);
    const std::string normalized = support::slurp(tmp.path() / "out" / "corpus.normalized.jsonl");
    CHECK(normalized.find("\"section\":\"news\"") != std::string::npos);
    CHECK(normalized.find("\"rank\":3") != std::string::npos);
    CHECK(normalized.find("\"word_count\":2") != std::string::npos);
}

TEST_CASE("commands fail fast with an actionable message when prerequisites are missing") {
    support::TempDir tmp("cli");
    const std::string common = "--config " + fixture_config() + " --out " +
                               (tmp.path() / "out").string() + " --cache " +
                               (tmp.path() / "cache").string();

    const auto report = run_cli(common + " report");
    CHECK(report.exit_code == 1);
    CHECK(report.output.find("ingest") != std::string::npos);

    run_cli(common + " ingest");
    const auto embed = run_cli(common + " embed");
    CHECK(embed.exit_code == 1);
    CHECK(embed.output.find("narramap extract") != std::string::npos);

    run_cli(common + " extract");
    run_cli(common + " embed");
    run_cli(common + " build");
    run_cli(common + " project");
    const auto report2 = run_cli(common + " report");
    CHECK(report2.exit_code == 1);
    CHECK(report2.output.find("narramap cluster") != std::string::npos);
}

TEST_CASE("config validation reports every problem at once") {
    support::TempDir tmp("cli");
    const auto bad = tmp.path() / "bad.json";
    {
        std::ofstream out(bad);
        out << R"({"chat": {"mode": "nonsense"}, "embedder": {"mode": "also-bad", "dim": 0},
                   "cluster": {"k_min": 9, "k_max": 3}})";
    }
    const auto result = run_cli("--config " + bad.string() + " ingest");
    CHECK(result.exit_code == 1);
    CHECK(result.output.find("chat.mode") != std::string::npos);
    CHECK(result.output.find("embedder.mode") != std::string::npos);
    CHECK(result.output.find("embedder.dim") != std::string::npos);
    CHECK(result.output.find("cluster.k_max") != std::string::npos);
    CHECK(result.output.find("corpus") != std::string::npos);
}

TEST_CASE("a missing config file is a user error") {
    const auto result = run_cli("--config /nonexistent/config.json ingest");
    CHECK(result.exit_code == 1);
}
