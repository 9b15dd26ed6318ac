#include <gtest/gtest.h>
#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "urysohn/study.hpp"

namespace {

int run(const std::string& args) {
    const std::string cmd = std::string(URYSOHN_CLI_PATH) + " " + args + " > cli_stdout.txt 2> cli_stderr.txt";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

}  // namespace

TEST(Cli, StudyWritesCsv) {
    ASSERT_EQ(run("study --problem zero-kernel --r 1 --n 4,8 --out cli_zero.csv"), 0);
    const std::string csv = slurp("cli_zero.csv");
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "t_i,E1@4,E1@8,alpha@4-8,E2@4,zeta@4,zeta@8");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
}

TEST(Cli, StudyToStdoutInEachFormat) {
    ASSERT_EQ(run("study --n 4,8,16 --format json"), 0);
    const urysohn::ReportTable t = urysohn::parse_report_json(slurp("cli_stdout.txt"));
    EXPECT_EQ(t.rows.size(), 3u);
    ASSERT_EQ(run("study --n 4,8,16 --format md"), 0);
    EXPECT_NE(slurp("cli_stdout.txt").find("## Richardson extrapolation"), std::string::npos);
}

TEST(Cli, ConfigFileWithFlagOverrides) {
    write("cli_cfg.json", R"({"problem_id": "linear-green", "r": 2, "n_sequence": [2, 4],
                              "output_format": "json", "params": {"gamma": 2.0}})");
    ASSERT_EQ(run("study --config cli_cfg.json --n 4,8 --param gamma=2.5 --out cli_cfg_out.json"), 0);
    const nlohmann::json doc = nlohmann::json::parse(slurp("cli_cfg_out.json"));
    const nlohmann::json& cfg = doc.at("metadata").at("config");
    EXPECT_EQ(cfg.at("problem_id"), "linear-green");
    EXPECT_EQ(cfg.at("r"), 2);
    EXPECT_EQ(cfg.at("n_sequence"), nlohmann::json::parse("[4, 8]"));
    EXPECT_EQ(cfg.at("params").at("gamma"), 2.5);
    EXPECT_EQ(doc.at("rows").size(), 3u);
}

TEST(Cli, TimingFlagAddsWallSeconds) {
    ASSERT_EQ(run("study --n 2,4 --format json --out cli_t0.json"), 0);
    EXPECT_EQ(slurp("cli_t0.json").find("wall_seconds"), std::string::npos);
    ASSERT_EQ(run("study --n 2,4 --format json --timing --out cli_t1.json"), 0);
    EXPECT_NE(slurp("cli_t1.json").find("wall_seconds"), std::string::npos);
}

TEST(Cli, SolveDumpsSamples) {
    ASSERT_EQ(run("solve --n 10 --samples 4 --out cli_solve.csv"), 0);
    const std::string csv = slurp("cli_solve.csv");
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "s,x_s,x_g_left,x_g_right,exact,error");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    EXPECT_EQ(rows, 5);
    EXPECT_NE(slurp("cli_stderr.txt").find("iterations="), std::string::npos);
}

TEST(Cli, ConfigErrorsExitThree) {
    EXPECT_EQ(run("study --problem nosuch"), 3);
    EXPECT_EQ(run("study --n 20,30"), 3);
    EXPECT_EQ(run("study --n 20,x"), 3);
    EXPECT_EQ(run("study --method secant"), 3);
    EXPECT_EQ(run("study --param gamma"), 3);
    EXPECT_EQ(run("study --param beta=1"), 3);
    EXPECT_EQ(run("study --rhs paper --problem linear-green"), 3);
    EXPECT_EQ(run("study --config /nonexistent.json"), 3);
    EXPECT_EQ(run("study --bogus-flag"), 3);
    EXPECT_EQ(run(""), 3);
    write("cli_badcfg.json", R"({"unknown_field": 1})");
    EXPECT_EQ(run("study --config cli_badcfg.json"), 3);
}

TEST(Cli, DivergenceExitsTwo) {
    EXPECT_EQ(run("study --n 4,8 --max-iter 2"), 2);
    EXPECT_NE(slurp("cli_stderr.txt").find("n=4"), std::string::npos);
    EXPECT_EQ(run("solve --n 4 --max-iter 2"), 2);
}

TEST(Cli, UnwritableOutputExitsOne) {
    EXPECT_EQ(run("study --n 2,4 --out /nonexistent/dir/x.csv"), 1);
}

TEST(Cli, HelpExitsZero) { EXPECT_EQ(run("--help"), 0); }
