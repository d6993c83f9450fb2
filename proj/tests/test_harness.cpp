#include "doctest.h"

#include "sobflow/harness.hpp"

#include <filesystem>
#include <fstream>

using namespace sobflow;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("sobflow_harness_" + name);
    fs::remove_all(p);
    return p;
}

nlohmann::json read_json(const fs::path& p) {
    std::ifstream in(p);
    return nlohmann::json::parse(in);
}

}  // namespace

TEST_CASE("config overlay and validation") {
    RunConfig base;
    base.command = "verify";
    const RunConfig c = apply_json(base, {{"d", 3}, {"n", 1024}, {"tolerances", {{"theorem_gap", 0.1}}}, {"seed", 9}});
    CHECK(c.d == 3);
    CHECK(c.n == 1024);
    CHECK(c.seed == 9);
    CHECK(c.tolerances.at("theorem_gap") == 0.1);
    CHECK(c.command == "verify");
    CHECK_THROWS_AS(apply_json(base, {{"colour", 1}}), UsageError);
    CHECK_THROWS_AS(apply_json(base, {{"d", "five"}}), UsageError);
    CHECK_THROWS_AS(apply_json(base, nlohmann::json::array()), UsageError);

    const RunConfig round = apply_json(RunConfig{}, to_json(c));
    CHECK(to_json(round) == to_json(c));

    RunConfig bad = base;
    bad.flow = "log";
    bad.d = 3;
    CHECK_THROWS_AS(validate(bad), UsageError);
    bad.flow = "fd";
    bad.d = 2;
    CHECK_THROWS_AS(validate(bad), UsageError);
    bad.flow.clear();
    CHECK_NOTHROW(validate(bad));
    bad.command = "sweep";
    CHECK_THROWS_AS(validate(bad), UsageError);
    bad.sweep_axis = "p";
    CHECK_NOTHROW(validate(bad));
    bad.eps_ext = 2.0;
    CHECK_THROWS_AS(validate(bad), UsageError);
}

TEST_CASE("default profiles") {
    RunConfig c;
    c.d = 5;
    CHECK(default_profile(c) == "aubin_talenti:eps=0.1,exponent=q");
    c.d = 2;
    CHECK(default_profile(c).rfind("moon_measure", 0) == 0);
    c.d = 3;
    c.flow = "fd-ccl";
    CHECK(default_profile(c) == "gn_optimizer:p=2,exponent=2.5");
}

TEST_CASE("exit statuses") {
    const fs::path out = scratch_dir("status");
    RunConfig c;
    c.command = "run-flow";
    c.flow = "log";
    c.d = 3;
    c.out = out.string();
    CHECK(run_command(c) == 2);
    c.command = "jump";
    CHECK(run_command(c) == 2);

    c.command = "run-flow";
    c.flow = "fd";
    c.d = 5;
    c.profile = "custom_tabulated:path=" + (out / "missing.txt").string();
    CHECK(run_command(c) == 1);
    CHECK(fs::exists(out / "diagnostics.txt"));
    c.profile = "aubin_talenti:d=4";
    CHECK(run_command(c) == 2);

    fs::create_directories(out);
    std::ofstream(out / "bad.json") << "{ not json";
    RunConfig r;
    r.command = "report";
    r.input = (out / "bad.json").string();
    r.out = out.string();
    CHECK(run_command(r) == 1);
    fs::remove_all(out);
}

TEST_CASE("run-flow on the separated solution") {
    const fs::path out = scratch_dir("separated");
    RunConfig c;
    c.command = "run-flow";
    c.d = 5;
    c.profile = "separated:T=1";
    c.out = out.string();
    REQUIRE(run_command(c) == 0);
    const auto s = read_json(out / "summary.json");
    CHECK(s["T_hat"].get<double>() >= 0.99);
    CHECK(s["T_hat"].get<double>() <= 1.01);
    CHECK(s["config"]["profile"] == "separated:T=1");
    CHECK(s["config"]["flow"] == "fd");
    CHECK(fs::exists(out / "trace.csv"));
    CHECK(fs::exists(out / "snapshots" / "index.csv"));
    CHECK(fs::exists(out / "snapshots" / "snapshot_0000.txt"));
    fs::remove_all(out);
}

TEST_CASE("run-flow log from mu is stationary") {
    const fs::path out = scratch_dir("moon");
    RunConfig c;
    c.command = "run-flow";
    c.d = 2;
    c.flow = "log";
    c.profile = "moon_measure";
    c.out = out.string();
    REQUIRE(run_command(c) == 0);
    const auto s = read_json(out / "summary.json");
    CHECK(std::abs(s["H2_final"].get<double>() - s["H2_initial"].get<double>()) < 1e-14);
    CHECK(std::abs(s["H2_initial"].get<double>()) < 1e-8);
    CHECK(s["max_step_change"].get<double>() < 1e-10);
    fs::remove_all(out);
}

TEST_CASE("sweeps are deterministic and well formed") {
    const fs::path out = scratch_dir("sweep");
    RunConfig c;
    c.command = "sweep";
    c.d = 2;
    c.sweep_axis = "p";
    c.out = out.string();
    REQUIRE(run_command(c) == 0);
    std::ifstream in(out / "sweep_p.csv");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(text.rfind("p,Q2p,Qp,limit,abs_error\n", 0) == 0);
    REQUIRE(run_command(c) == 0);
    std::ifstream in2(out / "sweep_p.csv");
    std::string text2((std::istreambuf_iterator<char>(in2)), std::istreambuf_iterator<char>());
    CHECK(text == text2);
    c.sweep_axis = "n";
    c.sweep_values = {10.5};
    CHECK(run_command(c) == 2);
    fs::remove_all(out);
}
