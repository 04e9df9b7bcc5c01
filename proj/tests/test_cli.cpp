#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "tokleak/policy.hpp"

namespace fs = std::filesystem;

namespace {

std::string cli() {
    const char* path = std::getenv("TOKLEAK_CLI");
    REQUIRE(path != nullptr);
    return path;
}

int run(const std::string& args) {
    int status = std::system((cli() + " " + args + " >/dev/null 2>&1").c_str());
    return WEXITSTATUS(status);
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("tokleak_cli_test_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    REQUIRE(out);
    out << content;
}

}  // namespace

TEST_CASE("cli runs the full attack pipeline end to end") {
    TempDir dir;
    write_file(dir.file("corpus.txt"),
               "Here is some advice about your itchy skin rash problem."
               " Also try applying some gentle cream every day and rest well.\n");
    tokleak::TransmissionPolicy policy;
    policy.metadata_overhead_h = 100;
    tokleak::save_policy(policy, dir.file("policy.json"));

    CHECK(run("simulate --policy " + dir.file("policy.json") + " --corpus " +
              dir.file("corpus.txt") + " --out " + dir.file("trace.txt")) == 0);
    CHECK(run("extract --trace " + dir.file("trace.txt") + " --mode cumulative --h 100 --out " +
              dir.file("lengths.txt")) == 0);
    CHECK(run("segment --lengths " + dir.file("lengths.txt") + " --out " +
              dir.file("segments.txt")) == 0);
    CHECK(run("train --corpus " + dir.file("corpus.txt") + " --which first --out " +
              dir.file("first.model")) == 0);
    CHECK(run("train --corpus " + dir.file("corpus.txt") + " --which inner --out " +
              dir.file("inner.model")) == 0);
    CHECK(run("reconstruct --segments " + dir.file("segments.txt") + " --model " +
              dir.file("first.model") + " --model-inner " + dir.file("inner.model") +
              " --out " + dir.file("reconstructed.json")) == 0);

    std::ifstream rec(dir.file("reconstructed.json"));
    std::stringstream buf;
    buf << rec.rdbuf();
    CHECK(buf.str().find("itchy skin rash problem") != std::string::npos);
}

TEST_CASE("cli dataprep, evaluate, and mitigate succeed") {
    TempDir dir;
    write_file(dir.file("corpus.txt"),
               "Here is some advice about your itchy skin rash problem."
               " Also try applying some gentle cream every day and rest well.\n");
    tokleak::TransmissionPolicy policy;
    policy.metadata_overhead_h = 100;
    tokleak::save_policy(policy, dir.file("policy.json"));

    CHECK(run("dataprep --corpus " + dir.file("corpus.txt") + " --out " +
              dir.file("dataset.jsonl")) == 0);
    CHECK(run("evaluate --pred " + dir.file("corpus.txt") + " --truth " +
              dir.file("corpus.txt") + " --out " + dir.file("eval.txt")) == 0);
    CHECK(run("mitigate --policy " + dir.file("policy.json") +
              " --apply pad:bucket=16 --corpus " + dir.file("corpus.txt") + " --report " +
              dir.file("report.txt")) == 0);

    std::ifstream report(dir.file("report.txt"));
    std::stringstream buf;
    buf << report.rdbuf();
    CHECK(buf.str().find("exact_recovery_rate=") != std::string::npos);
    CHECK(buf.str().find("bandwidth_overhead=") != std::string::npos);
}

TEST_CASE("cli pipeline produces a summary and per-response rows") {
    TempDir dir;
    write_file(dir.file("corpus.txt"),
               "Here is some advice about your itchy skin rash problem."
               " Also try applying some gentle cream every day and rest well.\n");
    write_file(dir.file("pipeline.json"),
               "{\"corpus\": \"" + dir.file("corpus.txt") + "\", \"k\": 2, \"beam_width\": 8}\n");
    CHECK(run("pipeline --config " + dir.file("pipeline.json") + " --rows " +
              dir.file("rows.jsonl") + " --out " + dir.file("summary.txt")) == 0);
    std::ifstream rows(dir.file("rows.jsonl"));
    std::stringstream buf;
    buf << rows.rdbuf();
    CHECK(buf.str().find("\"exact\":true") != std::string::npos);
}

TEST_CASE("cli maps configuration errors to exit code 2") {
    CHECK(run("extract --trace /nonexistent/trace.txt") == 3);
    CHECK(run("bogus-subcommand") == 2);
    CHECK(run("extract") == 2);  // missing required --trace
    TempDir dir;
    write_file(dir.file("bad_policy.json"), "{\"mode\": \"sideways\"}\n");
    write_file(dir.file("corpus.txt"), "hello.\n");
    CHECK(run("simulate --policy " + dir.file("bad_policy.json") + " --corpus " +
              dir.file("corpus.txt")) == 3);
}
