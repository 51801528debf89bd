#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "sheetlab/experiments.hpp"

using namespace sheetlab;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code = -1;
    std::string out;
};

Run run_cli(const std::string& args, const std::string& env = "") {
    const char* bin = std::getenv("SHEETLAB_BIN");
    REQUIRE_MESSAGE(bin != nullptr, "SHEETLAB_BIN is not set");
    const std::string cmd = env + " '" + std::string(bin) + "' " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    Run r;
    char buf[4096];
    while (std::fgets(buf, sizeof buf, pipe)) r.out += buf;
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string data_rows(const std::string& text) {
    std::istringstream in(text);
    std::string line, out;
    while (std::getline(in, line))
        if (!line.starts_with("#")) out += line + "\n";
    return out;
}

fs::path scratch_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("sheetlab_cli_test_" + name);
    fs::remove_all(dir);
    return dir;
}

}  // namespace

TEST_CASE("catalog lists every experiment") {
    std::vector<std::string> names;
    for (const auto& e : experiment_catalog()) names.push_back(e.name);
    const std::vector<std::string> expected{"sheet-stats", "ito-check",    "est-check", "chaos-rate",    "chaos-closed-form",
                                            "picard",      "fokker-planck", "lemma61",  "control-equiv", "control-search"};
    CHECK(names == expected);
    for (const auto& e : experiment_catalog()) {
        CHECK(e.defaults.count("seed") == 1);
        CHECK(e.defaults.count("workers") == 1);
    }
}

TEST_CASE("params") {
    const Params p({{"a", "1.5"}, {"n", "3"}, {"list", "1,2,3"}}, {{"n", "7"}});
    CHECK(p.real("a") == 1.5);
    CHECK(p.integer("n") == 7);
    CHECK(p.integers("list") == std::vector<int>{1, 2, 3});
    CHECK_THROWS_AS(Params({{"a", "1"}}, {{"b", "2"}}), ConfigError);
    CHECK_THROWS_AS(Params({{"a", "x"}}, {}).real("a"), ConfigError);
    CHECK_THROWS_AS(Params({{"a", "2.5"}}, {}).integer("a"), ConfigError);
    CHECK_THROWS_AS(Params({{"a", "-1"}}, {}).u64("a"), ConfigError);
    CHECK_THROWS_AS(Params({{"a", "1,b"}}, {}).reals("a"), ConfigError);
}

TEST_CASE("override and config-file parsing") {
    const auto o = parse_overrides({"seed=4", " reps = 10 "});
    CHECK(o.at("seed") == "4");
    CHECK(o.at("reps") == "10");
    CHECK_THROWS_AS(parse_overrides({"seed"}), ConfigError);
    CHECK_THROWS_AS(parse_overrides({"=3"}), ConfigError);
    CHECK_THROWS_AS(parse_overrides({"a=1", "a=2"}), ConfigError);

    const fs::path dir = scratch_dir("config");
    fs::create_directories(dir);
    {
        std::ofstream f(dir / "run.cfg");
        f << "# comment\nreps = 50\n\nseed=3  # trailing\n";
    }
    const auto c = read_config_file(dir / "run.cfg");
    CHECK(c.at("reps") == "50");
    CHECK(c.at("seed") == "3");
    CHECK_THROWS_AS(read_config_file(dir / "missing.cfg"), ConfigError);
}

TEST_CASE("run_experiment and table output") {
    const auto& info = experiment_catalog().front();
    const Params p(info.defaults, {{"reps", "200"}, {"nt", "8"}, {"nx", "8"}});
    const Table t = run_experiment("sheet-stats", p);
    CHECK(t.columns.front() == "statistic");
    CHECK(t.rows.size() == 3);
    std::ostringstream out;
    write_table(out, "sheet-stats", p, t, 0.5);
    const std::string s = out.str();
    CHECK(s.find("# experiment=sheet-stats\n") != std::string::npos);
    CHECK(s.find("# version=") != std::string::npos);
    CHECK(s.find("# reps=200\n") != std::string::npos);
    CHECK(s.find("# wall_time_s=0.5\n") != std::string::npos);
    CHECK_THROWS_AS(run_experiment("nope", p), ConfigError);
    CHECK_THROWS_AS(run_experiment("sheet-stats", Params(info.defaults, {{"workers", "0"}})), ConfigError);
}

TEST_CASE("exit codes") {
    CHECK(run_cli("--list").code == 0);
    CHECK(run_cli("no-such-experiment").code == 1);
    CHECK(run_cli("sheet-stats bogus=1").code == 1);
    CHECK(run_cli("sheet-stats reps=abc").code == 1);
    CHECK(run_cli("").code == 1);
    CHECK(run_cli("lemma61 n=128 plane_n=4").code == 0);
    // An impossible threshold turns into a failed check, not a config error.
    CHECK(run_cli("ito-check grids=8,16 reps=10 min_factor=100").code == 2);
}

TEST_CASE("identical configs give identical data rows") {
    const Run a = run_cli("sheet-stats reps=300 nt=8 nx=8 seed=5");
    const Run b = run_cli("sheet-stats reps=300 nt=8 nx=8 seed=5 workers=2");
    REQUIRE(a.code != 1);
    CHECK(data_rows(a.out) == data_rows(b.out));
    CHECK(a.out.find("# seed=5") != std::string::npos);
    CHECK(data_rows(a.out) != data_rows(run_cli("sheet-stats reps=300 nt=8 nx=8 seed=6").out));
}

TEST_CASE("output locations") {
    const fs::path dir = scratch_dir("out");
    CHECK(run_cli("lemma61 n=128 plane_n=4 --out-dir '" + dir.string() + "'").code == 0);
    CHECK(fs::exists(dir / "lemma61.csv"));

    const fs::path env_dir = scratch_dir("env");
    CHECK(run_cli("lemma61 n=128 plane_n=4", "SHEETLAB_OUTPUT_DIR='" + env_dir.string() + "'").code == 0);
    CHECK(fs::exists(env_dir / "lemma61.csv"));

    const fs::path file = scratch_dir("file") / "nested" / "table.csv";
    CHECK(run_cli("lemma61 n=128 plane_n=4 out='" + file.string() + "'").code == 0);
    CHECK(fs::exists(file));

    const fs::path cfg_dir = scratch_dir("cfg");
    fs::create_directories(cfg_dir);
    {
        std::ofstream f(cfg_dir / "c.cfg");
        f << "n = 16\nplane_n = 4\n";
    }
    const Run r = run_cli("lemma61 --config '" + (cfg_dir / "c.cfg").string() + "' n=128");
    CHECK(r.code == 0);
    CHECK(r.out.find("# n=128") != std::string::npos);
    CHECK(r.out.find("# plane_n=4") != std::string::npos);
}
