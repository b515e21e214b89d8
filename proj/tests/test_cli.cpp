#include "realize/io.hpp"
#include "realize/task.hpp"

#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sys/wait.h>

using namespace realize;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code = -1;
    std::string out;
};

Result run(const std::string& args) {
    const std::string command = std::string(REALIZE_CLI) + " " + args + " 2>/dev/null";
    Result r;
    FILE* pipe = popen(command.c_str(), "r");
    if (!pipe) return r;
    std::array<char, 4096> buffer{};
    std::size_t n = 0;
    while ((n = std::fread(buffer.data(), 1, buffer.size(), pipe)) > 0) r.out.append(buffer.data(), n);
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("realize_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }
    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    fs::path dir_;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace

TEST_F(Cli, VersionPrintsToleranceStack) {
    const auto r = run("--version");
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("realize 0.1.0"), std::string::npos);
    EXPECT_NE(r.out.find("tolerances"), std::string::npos);
}

TEST_F(Cli, XorTasksAreNegative) {
    for (const char* task : {"xor_soap", "xor_soap_range", "xor_po", "xor_to"}) {
        const auto r = run(std::string("design --env builtin:xor --task builtin:") + task);
        EXPECT_EQ(r.code, 3) << task;
        EXPECT_EQ(io::parse_text(r.out)["status"], "unrealizable") << task;
    }
    EXPECT_EQ(run("decide --env builtin:steady --task builtin:steady_soap").code, 3);
}

TEST_F(Cli, DesignThenVerifyRoundTrip) {
    const auto r = run("design --env builtin:xor --task builtin:separation_range --out " + path("outcome.json") +
                       " --dump-lp " + path("program.txt"));
    ASSERT_EQ(r.code, 0) << r.out;
    const auto outcome = io::parse_text(slurp(path("outcome.json")));
    EXPECT_EQ(outcome["status"], "found");
    EXPECT_GT(outcome["epsilon"].get<double>(), 0.0);
    EXPECT_EQ(slurp(path("program.txt")).rfind("vars ", 0), 0u);

    const auto verified = run("verify --env builtin:xor --task builtin:separation_range --reward " + path("outcome.json"));
    EXPECT_EQ(verified.code, 0);
    EXPECT_EQ(io::parse_text(verified.out)["status"], "realized");

    // The same reward does not tie the acceptable policies, so equal mode is violated.
    const auto equal = run("verify --env builtin:xor --task builtin:separation_equal --reward " + path("outcome.json"));
    EXPECT_EQ(equal.code, 3);
    const auto verdict = io::parse_text(equal.out);
    EXPECT_EQ(verdict["status"], "violated");
    EXPECT_TRUE(verdict.contains("witness"));
}

TEST_F(Cli, NonclosedPairNeedsStateActionRewards) {
    const std::string envs = "--env builtin:nonclosed-x --env builtin:nonclosed-y --task builtin:nonclosed_soap";
    EXPECT_EQ(run("design --state-reward --env builtin:nonclosed-x --task builtin:nonclosed_soap").code, 0);
    EXPECT_EQ(run("design --state-reward " + envs).code, 3);
    EXPECT_EQ(run("design " + envs).code, 0);
}

TEST_F(Cli, FixturesRoundTripThroughFiles) {
    const auto r = run("fixture all --out-dir " + path("fx"));
    ASSERT_EQ(r.code, 0);
    EXPECT_TRUE(fs::exists(path("fx/grid_env.json")));
    EXPECT_TRUE(fs::exists(path("fx/nonclosed_x_env.json")));
    EXPECT_TRUE(fs::exists(path("fx/grid_soap.json")));
    const auto from_files = run("decide --env " + path("fx/xor_env.json") + " --task " + path("fx/separation_range.json"));
    EXPECT_EQ(from_files.code, 0);
    EXPECT_EQ(io::load_cmp(path("fx/grid_env.json")), io::builtin_cmp("grid"));
}

TEST_F(Cli, GridDesignVerifiesBySampling) {
    ASSERT_EQ(run("design --env builtin:grid --task builtin:grid_soap --zero-terminal-reward --out " +
                  path("grid.json")).code,
              0);
    const auto r = run("verify --env builtin:grid --task builtin:grid_soap --samples 5000 --reward " + path("grid.json"));
    EXPECT_EQ(r.code, 0) << r.out;
}

TEST_F(Cli, SweepWritesCsv) {
    const auto r = run("sweep --vary gamma --grid 0.5,0.9 --samples 10 --seed 3 --out " + path("sweep.csv"));
    ASSERT_EQ(r.code, 0);
    const std::string csv = slurp(path("sweep.csv"));
    EXPECT_EQ(csv.rfind("param,value,mode,n,fraction,ci_low,ci_high,seed\n", 0), 0u);
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
    EXPECT_NE(csv.find("gamma,0.9,range,10,"), std::string::npos);
    EXPECT_EQ(run("sweep --vary gamma --grid 0.5,0.9 --samples 10 --seed 3 --threads 3").out, csv);
}

TEST_F(Cli, SweepConfigFileMatchesFlags) {
    std::ofstream(path("sweep.json")) << R"({"vary": "gamma", "grid": [0.5, 0.9], "samples": 10, "seed": 3})";
    const auto from_file = run("sweep --config " + path("sweep.json"));
    ASSERT_EQ(from_file.code, 0);
    EXPECT_EQ(from_file.out, run("sweep --vary gamma --grid 0.5,0.9 --samples 10 --seed 3").out);
    // Explicit flags take precedence over the file.
    EXPECT_EQ(run("sweep --config " + path("sweep.json") + " --seed 4").out,
              run("sweep --vary gamma --grid 0.5,0.9 --samples 10 --seed 4").out);
    std::ofstream(path("typo.json")) << R"({"vary": "gamma", "sampels": 10})";
    EXPECT_EQ(run("sweep --config " + path("typo.json")).code, 2);
    EXPECT_EQ(run("sweep").code, 2);
}

TEST_F(Cli, LearnWritesCurvesAndSummary) {
    const auto r = run("learn --episodes 5 --runs 3 --out " + path("curve.csv"));
    ASSERT_EQ(r.code, 0);
    const auto summary = io::parse_text(r.out);
    EXPECT_EQ(summary["runs"], 3);
    EXPECT_GE(summary["final_25_mean"].get<double>(), 0.0);
    const std::string csv = slurp(path("curve.csv"));
    EXPECT_EQ(csv.rfind("run,episode,metric\n", 0), 0u);
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 15);
    EXPECT_EQ(run("learn --episodes 5 --runs 3 --reward builtin:goal --out " + path("goal.csv")).code, 0);
}

TEST_F(Cli, InputErrorsExitWithTwo) {
    EXPECT_EQ(run("design --env " + path("missing.json") + " --task builtin:xor_soap").code, 2);
    EXPECT_EQ(run("design --env builtin:nope --task builtin:xor_soap").code, 2);
    EXPECT_EQ(run("design --env builtin:grid --task builtin:xor_soap").code, 2);
    EXPECT_EQ(run("sweep --vary colour").code, 2);
    EXPECT_EQ(run("frobnicate").code, 2);
    std::ofstream(path("bad.json")) << "{ not json";
    EXPECT_EQ(run("design --env " + path("bad.json") + " --task builtin:xor_soap").code, 2);
}
