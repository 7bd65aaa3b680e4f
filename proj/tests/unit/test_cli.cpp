#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const std::string kCli = SETFUSE_CLI;
const fs::path kScenarios = SETFUSE_SCENARIO_DIR;

struct Run {
    int code;
    std::string err;
};

Run run(const std::string& args) {
    static int calls = 0;
    const auto err_file = fs::temp_directory_path() /
                          ("setfuse_cli_stderr_" + std::to_string(::getpid()) + "_" + std::to_string(calls++) + ".txt");
    const std::string cmd = "\"" + kCli + "\" " + args + " >/dev/null 2>\"" + err_file.string() + "\"";
    const int status = std::system(cmd.c_str());
    std::ifstream in(err_file);
    std::ostringstream ss;
    ss << in.rdbuf();
    in.close();
    fs::remove(err_file);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, ss.str()};
}

std::string out_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("setfuse_cli_" + name);
    fs::remove_all(dir);
    return dir.string();
}

std::string scenario(const std::string& name) { return "\"" + (kScenarios / name).string() + "\""; }

}  // namespace

TEST(Cli, FuseSucceeds) {
    const auto dir = out_dir("fuse");
    EXPECT_EQ(run("fuse --scenario " + scenario("example1.json") + " --mode consistent --out " + dir).code, 0);
    EXPECT_TRUE(fs::exists(fs::path(dir) / "fuse.csv"));
    EXPECT_EQ(run("fuse --scenario " + scenario("poisson.json") + " --mode p2 --out " + dir + " --seed 3").code, 0);
}

TEST(Cli, SweepSucceeds) {
    const auto dir = out_dir("sweep");
    EXPECT_EQ(run("sweep --scenario " + scenario("binomial_iid.json") + " --out " + dir + " --jobs 2").code, 0);
    EXPECT_TRUE(fs::exists(fs::path(dir) / "sweep.csv"));
}

TEST(Cli, InputErrorsExitTwo) {
    const auto dir = out_dir("bad");
    EXPECT_EQ(run("fuse --scenario " + scenario("missing.json") + " --mode p2 --out " + dir).code, 2);
    EXPECT_EQ(run("fuse --scenario " + scenario("example1.json") + " --mode fancy --out " + dir).code, 2);
    EXPECT_EQ(run("frobnicate").code, 2);
    EXPECT_EQ(run("reproduce ex9 --out " + dir).code, 2);
    EXPECT_EQ(run("sweep --scenario " + scenario("identical.json") + " --out " + dir).code, 2);
}

TEST(Cli, SolverErrorExitsThree) {
    const auto r = run("fuse --scenario " + scenario("disjoint_iid.json") + " --mode p2 --out " + out_dir("solver"));
    EXPECT_EQ(r.code, 3);
    EXPECT_NE(r.err.find("incompatible cardinality supports"), std::string::npos) << r.err;
}

TEST(Cli, HelpExitsZero) { EXPECT_EQ(run("--help").code, 0); }

TEST(Cli, LogLevelFromEnvironment) {
    const std::string cmd = "SETFUSE_LOG=debug \"" + kCli + "\" fuse --scenario " + scenario("identical.json") +
                            " --mode consistent --out " + out_dir("log") + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    EXPECT_TRUE(WIFEXITED(status) && WEXITSTATUS(status) == 0);
}
