#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

namespace fs = std::filesystem;

namespace {

const std::string kCli = GLSGE_CLI_PATH;

int run(const std::string &args, const std::string &out_file = "") {
    std::string cmd = kCli + " " + args + (out_file.empty() ? " >/dev/null" : " >" + out_file) + " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path &p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string &name) {
    const auto dir = fs::temp_directory_path() / ("glsge_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

const std::string kSmall =
    " --set synth.n_source=60 --set synth.n_target=60 --set n_outer=1 --set n_inner=1 --set batch=20"
    " --set pretrain_epochs=20";

}  // namespace

TEST(Cli, ExitCodes) {
    EXPECT_EQ(run("--help"), 0);
    EXPECT_EQ(run("adapt --bogus-flag"), 2);
    EXPECT_EQ(run("adapt --set lambda=-1"), 2);
    EXPECT_EQ(run("adapt --set lambda=1 --set lambda=2"), 2);
    EXPECT_EQ(run("adapt -c /nonexistent.cfg"), 3);
    EXPECT_EQ(run("fit-label --labels /nonexistent.csv"), 3);
}

TEST(Cli, SynthThenPcodOnIdenticalFiles) {
    const auto dir = scratch("pcod");
    ASSERT_EQ(run("synth --set synth.n_source=40 --set synth.n_target=40 -o " + dir.string()), 0);
    for (const char *f : {"source.csv", "target.csv", "truth.csv"}) EXPECT_TRUE(fs::exists(dir / f)) << f;
    const auto src = (dir / "source.csv").string();
    const auto out = (dir / "pcod.txt").string();
    ASSERT_EQ(run("pcod --source " + src + " --target " + src, out), 0);
    const std::string rec = slurp(out);
    const auto pos = rec.find("pcod_sq = ");
    ASSERT_NE(pos, std::string::npos) << rec;
    EXPECT_LE(std::abs(std::stod(rec.substr(pos + 10))), 1e-6);

    ASSERT_EQ(run("pcod --q tgau-fit --source " + src + " --target " + (dir / "target.csv").string() + " --truth " +
                      (dir / "truth.csv").string(),
                  out),
              0);
    EXPECT_EQ(run("pcod --q bogus --source " + src + " --target " + src), 2);

    ASSERT_EQ(run("fit-label --labels " + (dir / "truth.csv").string(), out), 0);
    EXPECT_NE(slurp(out).find("mu_yaw"), std::string::npos);
}

TEST(Cli, AdaptWritesOutputsAndEvalAgrees) {
    const auto dir = scratch("adapt");
    ASSERT_EQ(run("adapt" + kSmall + " -o " + dir.string()), 0);
    for (const char *f : {"model.ckpt", "history.csv", "label_trajectory.txt", "metrics.txt"}) {
        EXPECT_TRUE(fs::exists(dir / f)) << f;
    }
    ASSERT_EQ(run("synth --set synth.n_source=60 --set synth.n_target=60 -o " + dir.string()), 0);
    const auto out = (dir / "eval.txt").string();
    ASSERT_EQ(run("eval --model " + (dir / "model.ckpt").string() + " --target " + (dir / "target.csv").string() +
                      " --truth " + (dir / "truth.csv").string(),
                  out),
              0);
    const std::string metrics = slurp(dir / "metrics.txt");
    const std::string eval = slurp(out);
    const auto line = [](const std::string &s) { return s.substr(0, s.find('\n')); };
    EXPECT_EQ(line(eval), line(metrics));
}

TEST(Cli, SweepGridRows) {
    const auto dir = scratch("sweep");
    ASSERT_EQ(run("sweep" + kSmall + " --set n_seeds=1 -o " + dir.string()), 0);
    const std::string csv = slurp(dir / "sweep.csv");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 10);
}
