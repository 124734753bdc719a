#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "liouville/config.hpp"
#include "liouville/run.hpp"

using namespace liouville;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("liouville_test_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(LIOUVILLE_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

RunConfig small(const std::string& extra = "{}") {
    json j = json::parse(R"({"eps": [0.1], "grid_m": 1024, "l_max": 8})");
    j.merge_patch(json::parse(extra));
    return parse_config(j);
}

std::vector<std::string> problems_of(const json& j) {
    try {
        parse_config(j);
    } catch (const ValidationError& e) {
        return e.problems();
    }
    return {};
}

} // namespace

TEST(Config, Defaults) {
    const RunConfig c = parse_config(json::object());
    EXPECT_EQ(c.pipeline, Pipeline::nonquantized);
    EXPECT_EQ(c.alpha, 0.5);
    EXPECT_EQ(c.eps_list, (std::vector<double>{0.1, 0.03, 0.01, 0.003}));
    EXPECT_EQ(c.grid_m, 4096);
    EXPECT_EQ(c.l_max, 32);
    EXPECT_EQ(c.h, default_h_nonquantized(0.5));
    EXPECT_EQ(c, RunConfig{});
}

TEST(Config, IntegerExponentSelectsTheQuantizedPipeline) {
    const RunConfig c = parse_config(json{{"n", 2}});
    EXPECT_EQ(c.pipeline, Pipeline::quantized);
    EXPECT_EQ(c.h, default_h_quantized(2));
    EXPECT_EQ(c.params(0.1).h.h0, 72.0);
}

TEST(Config, RejectsInvalidValues) {
    EXPECT_FALSE(problems_of(json{{"alpha", 2.0}}).empty());
    EXPECT_FALSE(problems_of(json{{"alpha", -1.0}}).empty());
    EXPECT_FALSE(problems_of(json{{"eps", {0.01, 0.1}}}).empty());
    EXPECT_FALSE(problems_of(json{{"eps", {0.1, 0.1}}}).empty());
    EXPECT_FALSE(problems_of(json{{"eps", {1.5}}}).empty());
    EXPECT_FALSE(problems_of(json{{"eps", json::array()}}).empty());
    EXPECT_FALSE(problems_of(json{{"grid_m", 8}}).empty());
    EXPECT_FALSE(problems_of(json{{"format", {"xml"}}}).empty());
    EXPECT_FALSE(problems_of(json{{"colour", 1}}).empty());
    EXPECT_FALSE(problems_of(json{{"grid_m", "big"}}).empty());
    EXPECT_FALSE(problems_of(json{{"n", 1}, {"h", {{"grad", {1.0, 0.0}}}}}).empty());
    EXPECT_FALSE(problems_of(json{{"h", {{"h0", 17.0}}}}).empty());
    EXPECT_THROW(parse_config(json::array()), ValidationError);
}

TEST(Config, ReportsEveryProblem) {
    const auto p = problems_of(json{{"alpha", 2.0}, {"grid_m", 8}, {"tol", -1.0}});
    EXPECT_GE(p.size(), 3u);
    auto mentions = [&](const std::string& key) {
        for (const auto& s : p)
            if (s.rfind(key, 0) == 0) return true;
        return false;
    };
    EXPECT_TRUE(mentions("alpha"));
    EXPECT_TRUE(mentions("grid_m"));
    EXPECT_TRUE(mentions("tol"));
}

TEST(Config, RoundTripsThroughJson) {
    const RunConfig c = parse_config(json{{"alpha", -0.25}, {"eps", {0.2, 0.05}}, {"h", {{"grad", {0.5, -2.0}}}}});
    EXPECT_EQ(parse_config(to_json(c)), c);
    EXPECT_EQ(config_hash(c), config_hash(parse_config(to_json(c))));
    EXPECT_NE(config_hash(c), config_hash(RunConfig{}));
    EXPECT_EQ(config_hash(c).size(), 16u);
}

TEST(Config, FileOverrides) {
    const fs::path dir = scratch_dir("config");
    fs::create_directories(dir);
    const fs::path file = dir / "c.json";
    std::ofstream(file) << R"({"alpha": 1.5, "grid_m": 2048})";
    const RunConfig c = parse_config(file.string(), json{{"grid_m", 1024}});
    EXPECT_EQ(c.alpha, 1.5);
    EXPECT_EQ(c.grid_m, 1024);
    EXPECT_EQ(c.h.h0, 50.0);
    EXPECT_THROW(parse_config((dir / "missing.json").string(), json::object()), IoError);
    std::ofstream(dir / "bad.json") << "{ nope";
    EXPECT_THROW(parse_config((dir / "bad.json").string(), json::object()), ValidationError);
}

TEST(Run, SingleScaleVerify) {
    const ResultBundle b = run(small(), Command::verify);
    ASSERT_EQ(b.results.size(), 1u);
    EXPECT_EQ(b.exit_code, kExitPass) << (b.failure ? b.failure->dump() : "");
    const std::string sweep = b.files.at("sweep.csv");
    EXPECT_EQ(std::count(sweep.begin(), sweep.end(), '\n'), 2);
    EXPECT_TRUE(b.files.count("corrections_0.1.csv"));
    EXPECT_TRUE(b.files.count("oscillation_0.1.csv"));
    const json report = json::parse(b.files.at("report.json"));
    EXPECT_EQ(report["command"], "verify");
    EXPECT_EQ(report["config_hash"], config_hash(b.config));
    EXPECT_TRUE(report["passed"].get<bool>());
    EXPECT_TRUE(report["order_fit"].is_null());
}

TEST(Run, BuildSkipsVerification) {
    const ResultBundle b = run(small(R"({"format": ["json"]})"), Command::build);
    EXPECT_EQ(b.files.size(), 1u);
    EXPECT_FALSE(b.results.front().verified);
}

TEST(Run, RepeatedRunsAreByteIdentical) {
    const RunConfig c = small(R"({"eps": [0.2, 0.1]})");
    const ResultBundle a = run(c, Command::sweep), b = run(c, Command::sweep);
    EXPECT_EQ(a.files, b.files);

    RunConfig c1 = c, c2 = c;
    c1.out_dir = scratch_dir("det_a").string();
    c2.out_dir = scratch_dir("det_b").string();
    ResultBundle x = run(c1, Command::sweep), y = run(c2, Command::sweep);
    export_bundle(x);
    export_bundle(y);
    for (const auto& [name, bytes] : x.files) {
        if (name == "report.json") continue;  // echoes out_dir
        EXPECT_EQ(slurp(fs::path(c1.out_dir) / name), slurp(fs::path(c2.out_dir) / name)) << name;
        EXPECT_EQ(slurp(fs::path(c1.out_dir) / name), bytes);
    }
}

TEST(Run, CorrectionsCsvRoundTrips) {
    const RunConfig c = small();
    const ResultBundle b = run(c, Command::build);
    const Profile p = build_profile(c.params(0.1), c.grid_m);
    std::istringstream in(b.files.at("corrections_0.1.csv"));
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line.rfind("r,U,c0,c1_cos,c1_sin,c2_cos,c2_sin,d_mode0,d_cos_1,d_sin_1", 0), 0u);
    const ModeFunction& c0 = *p.term(Origin::c0)->find(0, Parity::radial);
    const ModeFunction& d3 = *p.term(Origin::d)->find(3, Parity::sin);
    std::size_t i = 0;
    while (std::getline(in, line)) {
        std::vector<double> row;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) row.push_back(std::strtod(cell.c_str(), nullptr));
        ASSERT_LT(i, p.grid.size());
        EXPECT_EQ(row[0], p.grid.r[i]);
        EXPECT_EQ(row[2], c0.values[i]);
        EXPECT_EQ(row[8 + 2 * 2 + 1], d3.values[i]);
        ++i;
    }
    EXPECT_EQ(i, p.grid.size());
}

TEST(Run, QuantizedReportsTheLogHessian) {
    const ResultBundle b = run(small(R"({"n": 1})"), Command::verify);
    const json report = json::parse(b.files.at("report.json"));
    EXPECT_EQ(report["nonvanish"][0]["lap_log_h"].get<double>(), 0.125);
    EXPECT_EQ(b.exit_code, kExitCriterion);
    ASSERT_TRUE(b.failure);
    EXPECT_EQ((*b.failure)["criterion"], "lap_log_h_reference@0.1");
}

TEST(Run, NumericalFailureIsRecorded) {
    const ResultBundle b = run(small(R"({"max_iter": 1})"), Command::verify);
    EXPECT_EQ(b.exit_code, kExitNumerical);
    ASSERT_TRUE(b.failure);
    EXPECT_EQ((*b.failure)["kind"], "numerical");
    EXPECT_FALSE(json::parse(b.files.at("report.json"))["failure"].is_null());
}

TEST(Cli, ExitCodes) {
    const std::string out = scratch_dir("cli").string();
    EXPECT_EQ(run_cli("verify --grid-m 8 --out " + out), kExitConfig);
    EXPECT_EQ(run_cli("verify --alpha 2 --out " + out), kExitConfig);
    EXPECT_EQ(run_cli("frobnicate"), kExitConfig);
    EXPECT_EQ(run_cli("verify --alpha 0.5 --n 1"), kExitConfig);
    EXPECT_EQ(run_cli("verify --eps 0.1 --grid-m 1024 --l-max 8 --out " + out), kExitPass);
    EXPECT_TRUE(fs::exists(fs::path(out) / "report.json"));
    EXPECT_EQ(run_cli("verify --n 1 --eps 0.1 --grid-m 1024 --format json --out " + out), kExitCriterion);
    EXPECT_EQ(run_cli("build --eps 0.1 --grid-m 1024 --l-max 8 --format json --out " + out), kExitPass);
}
