// End-to-end checks of the imcmc binary: artifacts, exit codes, and the
// byte-identical rerun contract. argv[1] is the binary, argv[2] the
// bundled configs directory.

#define DOCTEST_CONFIG_IMPLEMENT
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace {

std::string g_binary;
std::string g_configs;

int run_command(const std::string& args, std::string* output = nullptr) {
    std::string redirect = " > /tmp/cli_test_out.txt 2>&1";
    int status = std::system((g_binary + " " + args + redirect).c_str());
    if (output) {
        std::ifstream f("/tmp/cli_test_out.txt");
        std::stringstream ss;
        ss << f.rdbuf();
        *output = ss.str();
    }
    if (status < 0) return -1;
    return WEXITSTATUS(status);
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path);
    f << content;
}

}  // namespace

TEST_CASE("list-models prints the bundle") {
    std::string out;
    CHECK(run_command("list-models", &out) == 0);
    CHECK(out.find("fk3") != std::string::npos);
    CHECK(out.find("bilaplace-continuous") != std::string::npos);

    CHECK(run_command("list-models --json", &out) == 0);
    auto j = nlohmann::json::parse(out);
    CHECK(j.size() >= 4);
}

TEST_CASE("unknown subcommands exit with usage") {
    std::string out;
    CHECK(run_command("frobnicate", &out) == 2);
}

TEST_CASE("run produces the artifact set and identical reruns") {
    write_file("/tmp/cli_run.toml", R"(
model = "fk3"
seed = 4242
horizon = 1024
replicates = 20
workers = 1
out = "/tmp/cli-run-a"
suites = ["rates", "normalizers"]
)");
    CHECK(run_command("run /tmp/cli_run.toml") == 0);
    namespace fs = std::filesystem;
    for (const char* name : {"results.csv", "summary.json", "plots.gp", "exact_flow.json"})
        CHECK(fs::exists(fs::path("/tmp/cli-run-a") / name));

    auto summary = nlohmann::json::parse(slurp("/tmp/cli-run-a/summary.json"));
    CHECK(summary["schema"] == "imcmc-summary/1");
    CHECK(summary["suites"].contains("rates"));
    CHECK(summary["suites"]["rates"][0].contains("slope"));

    // Same config and seed into a second directory: byte-identical CSV.
    CHECK(run_command("run /tmp/cli_run.toml --out /tmp/cli-run-b") == 0);
    CHECK(slurp("/tmp/cli-run-a/results.csv") == slurp("/tmp/cli-run-b/results.csv"));

    // A different seed changes the records.
    CHECK(run_command("run /tmp/cli_run.toml --seed 7 --out /tmp/cli-run-c") == 0);
    CHECK(slurp("/tmp/cli-run-a/results.csv") != slurp("/tmp/cli-run-c/results.csv"));
}

TEST_CASE("missing seed fails validation") {
    write_file("/tmp/cli_noseed.toml", "model = \"fk3\"\n");
    std::string out;
    CHECK(run_command("run /tmp/cli_noseed.toml", &out) == 2);
    CHECK(out.find("seed") != std::string::npos);
}

TEST_CASE("verify passes on the bundled model") {
    write_file("/tmp/cli_verify.toml", R"(
model = "fk3"
seed = 11
out = "/tmp/cli-verify"
)");
    std::string out;
    CHECK(run_command("verify /tmp/cli_verify.toml", &out) == 0);
    CHECK(out.find("[pass]") != std::string::npos);
    CHECK(out.find("figure-reproduction") != std::string::npos);
}

TEST_CASE("verify flags corrupted kernels with a witness") {
    write_file("/tmp/cli_bad.json", R"({
  "model": "inline",
  "seed": 1,
  "inline": {
    "levels": 1,
    "labels": ["a", "b"],
    "initial": [0.5, 0.5],
    "potentials": [[1.0, 1.0]],
    "transitions": [[[0.9, 0.6], [0.3, 0.7]]]
  }
})");
    std::string out;
    CHECK(run_command("verify /tmp/cli_bad.json", &out) == 1);
    CHECK(out.find("row") != std::string::npos);
}

TEST_CASE("verify skips ergodicity-bound certificates on path models") {
    write_file("/tmp/cli_path.toml", R"(
model = "fk3-path"
seed = 11
)");
    std::string out;
    CHECK(run_command("verify /tmp/cli_path.toml", &out) == 0);
    CHECK(out.find("unstable") != std::string::npos);
    CHECK(out.find("[skip]") != std::string::npos);
}

TEST_CASE("burn-in option runs and changes the records") {
    write_file("/tmp/cli_burn.toml", R"(
model = "fk3"
seed = 61
horizon = 512
replicates = 8
workers = 1
burn_in = 128
out = "/tmp/cli-burn-a"
)");
    CHECK(run_command("run /tmp/cli_burn.toml") == 0);
    write_file("/tmp/cli_noburn.toml", R"(
model = "fk3"
seed = 61
horizon = 512
replicates = 8
workers = 1
out = "/tmp/cli-burn-b"
)");
    CHECK(run_command("run /tmp/cli_noburn.toml") == 0);
    CHECK(slurp("/tmp/cli-burn-a/results.csv") != slurp("/tmp/cli-burn-b/results.csv"));
}

TEST_CASE("verify passes on the deeper bundled models") {
    write_file("/tmp/cli_verify_ann.toml", "model = \"annealing-3state\"\nseed = 13\n");
    std::string out;
    CHECK(run_command("verify /tmp/cli_verify_ann.toml", &out) == 0);
    CHECK(out.find("[fail]") == std::string::npos);
}

TEST_CASE("bundled configs run end to end") {
    namespace fs = std::filesystem;
    fs::path rates = fs::path(g_configs) / "fk3-rates.toml";
    REQUIRE(fs::exists(rates));
    // Trimmed-down override of the bundled experiment.
    CHECK(run_command("run " + rates.string() +
                      " --seed 2 --workers 1 --out /tmp/cli-bundled") == 0);
    auto summary = nlohmann::json::parse(slurp("/tmp/cli-bundled/summary.json"));
    CHECK(summary["suites"]["rates"][0].contains("slope"));
}

TEST_CASE("inline model config runs and verifies") {
    namespace fs = std::filesystem;
    fs::path inline_cfg = fs::path(g_configs) / "inline-2state.toml";
    REQUIRE(fs::exists(inline_cfg));
    std::string out;
    CHECK(run_command("verify " + inline_cfg.string(), &out) == 0);
    CHECK(out.find("[fail]") == std::string::npos);
    CHECK(run_command("run " + inline_cfg.string() +
                      " --workers 1 --out /tmp/cli-inline") == 0);
    auto summary = nlohmann::json::parse(slurp("/tmp/cli-inline/summary.json"));
    CHECK(summary["model"] == "inline");
    CHECK(summary["suites"].contains("stability"));
}

int main(int argc, char** argv) {
    if (argc < 3) {
        std::fprintf(stderr, "usage: cli_test <imcmc-binary> <configs-dir>\n");
        return 1;
    }
    g_binary = argv[1];
    g_configs = argv[2];
    doctest::Context context;
    context.applyCommandLine(1, argv);
    return context.run();
}
