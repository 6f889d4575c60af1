#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "ccqed/io/config.hpp"
#include "ccqed/io/csv.hpp"
#include "ccqed/io/scenarios.hpp"

using namespace ccqed;
using namespace ccqed::io;
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("ccqed_test_" + name);
    fs::remove_all(dir);
    return dir;
}

// Short dynamics run so the file-level tests stay fast.
RunConfig quick_dynamics(const fs::path& out) {
    auto c = parse_config(R"({"scenario":"dynamics",
        "continuum":{"n_modes":201,"bandwidth":20},
        "integration":{"t_final":20,"dt":0.02},
        "schedule":{"kind":"linear_ramp","rate":2.0}})");
    c.output.dir = out.string();
    return c;
}

}  // namespace

TEST(Config, MinimalShapeConfigFillsDefaults) {
    const auto c = parse_config(R"({"scenario":"shape",
        "system":{"g":0.1,"eta":10,"kappa_t":1,"kappa_l":1,"kappa_r":1},
        "target":{"sigma":25,"t0":50}})");
    EXPECT_EQ(c.scenario, Scenario::shape);
    EXPECT_EQ(c.n_modes, 2001u);
    EXPECT_DOUBLE_EQ(c.bandwidth, 40.0);
    EXPECT_DOUBLE_EQ(c.integration.dt, 0.01);
    EXPECT_DOUBLE_EQ(c.integration.t_final, 120.0);
    EXPECT_EQ(c.integration.snapshot_stride, 10u);
    EXPECT_DOUBLE_EQ(c.target.target.p_tot, 0.95);
    EXPECT_EQ(c.schedule.kind, ScheduleKind::designed);
    EXPECT_DOUBLE_EQ(c.system.gamma, 0.0);
}

TEST(Config, ReferenceParametersAccepted) {
    const auto c = parse_config(R"({"system":{"g":0.1,"eta":10,"kappa_l":1,"kappa_r":1,"kappa_t":1}})");
    EXPECT_DOUBLE_EQ(c.system.g, 0.1 * c.system.kappa_t);
    EXPECT_DOUBLE_EQ(c.system.eta, 10.0 * c.system.kappa_t);
    EXPECT_DOUBLE_EQ(c.system.kappa_l, c.system.kappa_t);
}

TEST(Config, ZeroKappaTRejected) {
    try {
        parse_config(R"({"system":{"kappa_t":0}})");
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.path(), "system");
        EXPECT_NE(std::string(e.what()).find("kappa_t"), std::string::npos);
    }
}

TEST(Config, UnknownKeysReportPath) {
    try {
        parse_config(R"({"system":{"g":0.1,"kapa_t":1}})");
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.path(), "system.kapa_t");
    }
    try {
        parse_config(R"({"plots":true})");
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.path(), "plots");
    }
}

TEST(Config, SchemaViolations) {
    EXPECT_THROW(parse_config("{not json"), ConfigError);
    EXPECT_THROW(parse_config(R"({"system":{"g":"big"}})"), ConfigError);
    EXPECT_THROW(parse_config(R"({"continuum":{"n_modes":-3}})"), ConfigError);
    EXPECT_THROW(parse_config(R"({"scenario":"plot"})"), ConfigError);
    EXPECT_THROW(parse_config(R"({"schedule":{"kind":"sampled","samples":[[0,1]]}})"), ConfigError);
    EXPECT_THROW(parse_config(R"({"schedule":{"kind":"sampled","samples":[[0,1],[0,2]]}})"), ConfigError);
    EXPECT_THROW(parse_config(R"({"target":{"p_tot":1.0}})"), ConfigError);
}

TEST(Config, ConstantScheduleDefaultsToFiftyEta) {
    const auto c = parse_config(R"({"scenario":"dynamics","system":{"eta":4},"schedule":{"kind":"constant"}})");
    EXPECT_DOUBLE_EQ(c.schedule.value, 200.0);
}

TEST(Config, OverridesBeatFileBeatDefaults) {
    const std::string text = R"({"system":{"g":0.2},"integration":{"dt":0.005}})";
    const auto c = parse_config(text, "eigens", {"system.g=0.3", "continuum.n_modes=401", "output.dir=xyz"});
    EXPECT_EQ(c.scenario, Scenario::eigens);
    EXPECT_DOUBLE_EQ(c.system.g, 0.3);           // flag
    EXPECT_DOUBLE_EQ(c.integration.dt, 0.005);   // file
    EXPECT_DOUBLE_EQ(c.bandwidth, 40.0);         // default
    EXPECT_EQ(c.n_modes, 401u);
    EXPECT_EQ(c.output.dir, "xyz");
    EXPECT_THROW(parse_config(text, {}, {"system.gg=1"}), ConfigError);
    EXPECT_THROW(parse_config(text, {}, {"novalue"}), ConfigError);
}

TEST(Config, EchoRoundTrips) {
    const auto c = parse_config(R"({"scenario":"dynamics","schedule":{"kind":"sampled","samples":[[0,0],[10,5],[20,30]]},
                                    "adiabaticity":{"regime":"rabi"},"target":{"on_infeasible":"error"}})");
    const auto c2 = config_from_json(to_json(c));
    EXPECT_EQ(to_json(c).dump(), to_json(c2).dump());
}

TEST(Config, ScheduleCsvInput) {
    const auto dir = scratch("sched_csv");
    fs::create_directories(dir);
    const std::vector<double> t{0, 1, 2}, d{0, 3, 4};
    export_csv((dir / "s.csv").string(), {{"t", t}, {"delta", d}});
    const auto c = parse_config(R"({"schedule":{"kind":"sampled","csv":")" + (dir / "s.csv").string() + R"("}})");
    ASSERT_EQ(c.schedule.samples.size(), 3u);
    EXPECT_EQ(c.schedule.samples[1].delta, 3.0);
    EXPECT_THROW(parse_config(R"({"schedule":{"csv":"/nonexistent/x.csv"}})"), ConfigError);
    fs::remove_all(dir);
}

TEST(Csv, FormatAndHeader) {
    const std::vector<double> a{0.1, 1.0 / 3.0}, b{-2.5e-300, 7.0};
    const auto text = to_csv({{"t", a}, {"p_e", b}});
    EXPECT_EQ(text, "t,p_e\n0.10000000000000001,-2.5e-300\n0.33333333333333331,7\n");
    EXPECT_EQ(format_double(0.1), "0.10000000000000001");
    EXPECT_EQ(std::stod(format_double(1.0 / 3.0)), 1.0 / 3.0);
    const std::vector<double> one{1.0};
    EXPECT_THROW(to_csv({{"t", a}, {"x", one}}), InvalidArgument);
    EXPECT_EQ(to_csv({{"a,b", one}}), "\"a,b\"\n1\n");
}

TEST(Csv, IoFailure) {
    const std::vector<double> a{1.0};
    EXPECT_THROW(export_csv("/nonexistent_dir/x.csv", {{"t", a}}), Error);
}

TEST(Scenario, EigensColumnsAndMetrics) {
    const auto dir = scratch("eigens");
    auto c = parse_config(R"({"scenario":"eigens","system":{"kappa_t":1e-300,"kappa_l":0,"kappa_r":0}})");
    c.output.dir = dir.string();
    const auto m = run_scenario(c);
    const auto text = read_file(dir / "eigens.csv");
    EXPECT_EQ(text.substr(0, text.find('\n')), "delta_over_eta,w1,w2,w3,frac_t");
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 402);
    EXPECT_LT(m.doc["metrics"]["max_eigenvalue_deviation_over_eta"].get<double>(), 1e-9);
    EXPECT_LT(m.doc["metrics"]["max_frac_t_deviation"].get<double>(), 1e-12);
    // Delta = 0 row: splitting +-sqrt 2, frac_t = 0
    std::istringstream rows(text);
    std::string line;
    for (int i = 0; i <= 201; ++i) std::getline(rows, line);
    double r, w1, w2, w3, ft;
    ASSERT_EQ(std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf", &r, &w1, &w2, &w3, &ft), 5);
    EXPECT_NEAR(r, 0.0, 1e-15);
    EXPECT_NEAR(w2, std::sqrt(2.0), 1e-9);
    EXPECT_NEAR(w3, -std::sqrt(2.0), 1e-9);
    EXPECT_NEAR(ft, 0.0, 1e-12);
    EXPECT_TRUE(fs::exists(dir / "manifest.json"));
    fs::remove_all(dir);
}

TEST(Scenario, LdosAndAdiabaticityOutputs) {
    const auto dir = scratch("ldos");
    auto c = parse_config(R"({"scenario":"ldos"})");
    c.output.dir = (dir / "l").string();
    run_scenario(c);
    EXPECT_EQ(read_file(dir / "l" / "ldos.csv").substr(0, 21), "delta_over_eta,d_over");

    auto a = parse_config(R"({"scenario":"adiabaticity","schedule":{"kind":"linear_ramp","rate":4}})");
    a.output.dir = (dir / "a").string();
    const auto m = run_scenario(a);
    EXPECT_TRUE(m.doc["metrics"]["adiabaticity"]["pass"].get<bool>());
    const auto rep = json::parse(read_file(dir / "a" / "adiabaticity.json"));
    EXPECT_DOUBLE_EQ(rep["sqrt_beta_max"].get<double>(), 2.0);
    fs::remove_all(dir);
}

TEST(Scenario, DynamicsFilesAndDeterminism) {
    const auto d1 = scratch("dyn1"), d2 = scratch("dyn2");
    run_scenario(quick_dynamics(d1));
    run_scenario(quick_dynamics(d2));
    for (const char* f : {"populations.csv", "pulse.csv", "schedule.csv"}) {
        const auto a = read_file(d1 / f), b = read_file(d2 / f);
        EXPECT_FALSE(a.empty()) << f;
        EXPECT_EQ(a, b) << f;
    }
    EXPECT_EQ(read_file(d1 / "populations.csv").substr(0, 25), "t,p_e,p_t,p_l,p_r,p_cont\n");
    EXPECT_EQ(read_file(d1 / "pulse.csv").substr(0, 27), "t,re_f,im_f,abs2_f,phase\n0,");
    fs::remove_all(d1);
    fs::remove_all(d2);
}

TEST(Scenario, ManifestRoundTripReproducesMetrics) {
    const auto d1 = scratch("rt1"), d2 = scratch("rt2");
    const auto m1 = run_scenario(quick_dynamics(d1));
    auto c2 = parse_config(read_file(d1 / "manifest.json"));
    c2.output.dir = d2.string();
    const auto m2 = run_scenario(c2);
    const auto& a = m1.doc["metrics"];
    const auto& b = m2.doc["metrics"];
    EXPECT_NEAR(a["emitted_probability"].get<double>(), b["emitted_probability"].get<double>(), 1e-12);
    EXPECT_NEAR(a["final_populations"]["p_e"].get<double>(), b["final_populations"]["p_e"].get<double>(), 1e-12);
    EXPECT_NEAR(a["pulse"]["fidelity"].get<double>(), b["pulse"]["fidelity"].get<double>(), 1e-12);
    auto e1 = m1.doc["config"], e2 = m2.doc["config"];
    e1["output"]["dir"] = e2["output"]["dir"] = "";
    EXPECT_EQ(e1.dump(), e2.dump());
    fs::remove_all(d1);
    fs::remove_all(d2);
}

TEST(Scenario, FailureRemovesPartialOutputs) {
    const auto dir = scratch("partial");
    fs::create_directories(dir / "manifest.json");  // a directory where the manifest must go
    fs::create_directories(dir / "manifest.json" / "blocker");
    EXPECT_THROW(run_scenario(quick_dynamics(dir)), Error);
    EXPECT_FALSE(fs::exists(dir / "populations.csv"));
    EXPECT_FALSE(fs::exists(dir / "pulse.csv"));
    EXPECT_FALSE(fs::exists(dir / "schedule.csv"));
    fs::remove_all(dir);

    // a fresh directory created by a failing run is removed again
    const auto fresh = scratch("partial_fresh");
    auto c = quick_dynamics(fresh);
    c.n_modes = 11;  // recurrence time 2 pi / 2 < t_final: aliasing
    EXPECT_THROW(run_scenario(c), AliasingError);
    EXPECT_FALSE(fs::exists(fresh));
}

TEST(Sweep, ThreadedRunsKeepOrder) {
    const auto dir = scratch("sweep");
    std::vector<RunConfig> cfgs;
    for (int i = 0; i < 4; ++i) {
        auto c = quick_dynamics(dir / ("run_" + std::to_string(i)));
        c.schedule.rate = 1.0 + i;
        cfgs.push_back(c);
    }
    cfgs[2].n_modes = 11;  // fails with aliasing, others unaffected
    const auto res = run_sweep(cfgs, 3);
    ASSERT_EQ(res.size(), 4u);
    for (int i = 0; i < 4; ++i) EXPECT_EQ(res[i].out_dir, cfgs[i].output.dir);
    EXPECT_TRUE(res[0].manifest && res[1].manifest && res[3].manifest);
    EXPECT_FALSE(res[2].manifest);
    EXPECT_FALSE(res[2].error.empty());
    const auto merged = merge_manifests(res);
    EXPECT_EQ(merged["runs"][2]["status"], "error");
    // same config alone gives the same numbers as inside the sweep
    auto solo = cfgs[1];
    solo.output.dir = (dir / "solo").string();
    const auto m = run_scenario(solo);
    EXPECT_EQ(m.doc["metrics"]["emitted_probability"], res[1].manifest->doc["metrics"]["emitted_probability"]);
    fs::remove_all(dir);
}

#ifdef CCQED_SIM_EXE
TEST(Cli, ExitCodesAndOverrides) {
    const auto dir = scratch("cli");
    fs::create_directories(dir);
    const auto cfg = dir / "c.json";
    write_text(cfg.string(), R"({"scenario":"ldos","sweep":{"points":11}})");
    const std::string exe = CCQED_SIM_EXE;
    auto run = [&](const std::string& args) { return std::system((exe + " " + args + " > /dev/null 2>&1").c_str()); };
    EXPECT_EQ(run("ldos --config " + cfg.string() + " --out " + (dir / "o").string() + " --set sweep.points=21"), 0);
    const auto text = read_file(dir / "o" / "ldos.csv");
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 22);
    EXPECT_NE(run("ldos --config " + cfg.string() + " --set system.kappa_t=0 --out " + (dir / "bad").string()), 0);
    EXPECT_FALSE(fs::exists(dir / "bad"));
    EXPECT_NE(run("nosuch"), 0);
    EXPECT_EQ(run("sweep --config " + cfg.string() + " --vary sweep.points=5,7 --jobs 2 --out " +
                  (dir / "sw").string()),
              0);
    EXPECT_TRUE(fs::exists(dir / "sw" / "run_001" / "ldos.csv"));
    const auto merged = json::parse(read_file(dir / "sw" / "sweep_manifest.json"));
    EXPECT_EQ(merged["runs"].size(), 2u);
    fs::remove_all(dir);
}
#endif
