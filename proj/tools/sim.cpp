// sim: command-line front end for the coupled-cavity emitter scenarios.
//
//   sim <scenario> [--config file.json] [--out dir] [--set key=value ...]
//   sim sweep --config a.json [--config b.json ...] [--vary key=v1,v2,...] [--jobs N] [--out dir]

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"

#include "ccqed/io/config.hpp"
#include "ccqed/io/scenarios.hpp"

namespace {

using namespace ccqed;
using namespace ccqed::io;

std::string slurp(const std::string& path) {
    if (path.empty()) return "{}";
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot open config '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void print_summary(const RunManifest& m, const std::string& dir) {
    std::printf("%s -> %s\n", m.doc["scenario"].get<std::string>().c_str(), dir.c_str());
    for (const auto& f : m.files) std::printf("  %s\n", f.c_str());
    const auto& metrics = m.doc["metrics"];
    for (const char* key : {"fidelity", "r_squared", "phase_flatness", "emitted_probability", "emitter_decay_rate"})
        if (metrics.contains(key) && metrics[key].is_number())
            std::printf("  %-20s %.6g\n", key, metrics[key].get<double>());
}

// "key=v1,v2" -> list of "key=v" assignments
std::vector<std::string> expand_vary(const std::string& arg) {
    const auto eq = arg.find('=');
    if (eq == std::string::npos) throw ConfigError(arg, "--vary must look like key=v1,v2,...");
    const std::string key = arg.substr(0, eq);
    std::vector<std::string> out;
    std::stringstream ss(arg.substr(eq + 1));
    for (std::string v; std::getline(ss, v, ',');)
        if (!v.empty()) out.push_back(key + "=" + v);
    if (out.empty()) throw ConfigError(key, "--vary needs at least one value");
    return out;
}

int run_single(const std::string& scenario, const std::string& config_path, const std::string& out_dir,
               const std::vector<std::string>& sets) {
    RunConfig cfg = parse_config(slurp(config_path), scenario, sets);
    if (!out_dir.empty()) cfg.output.dir = out_dir;
    const auto m = run_scenario(cfg);
    print_summary(m, cfg.output.dir);
    return 0;
}

int run_sweep_cmd(const std::vector<std::string>& config_paths, const std::vector<std::string>& varies,
                  const std::vector<std::string>& sets, const std::string& out_dir, unsigned jobs) {
    // Cartesian product over every --vary list.
    std::vector<std::vector<std::string>> combos{{}};
    for (const auto& v : varies) {
        std::vector<std::vector<std::string>> next;
        for (const auto& c : combos)
            for (const auto& a : expand_vary(v)) {
                auto n = c;
                n.push_back(a);
                next.push_back(std::move(n));
            }
        combos = std::move(next);
    }

    std::vector<RunConfig> configs;
    for (const auto& path : config_paths) {
        const std::string text = slurp(path);
        for (const auto& combo : combos) {
            auto overrides = sets;
            overrides.insert(overrides.end(), combo.begin(), combo.end());
            RunConfig c = parse_config(text, {}, overrides);
            char name[32];
            std::snprintf(name, sizeof name, "run_%03zu", configs.size());
            c.output.dir = (std::filesystem::path(out_dir) / name).string();
            configs.push_back(std::move(c));
        }
    }
    std::filesystem::create_directories(out_dir);
    const auto results = run_sweep(configs, jobs);
    const json merged = merge_manifests(results);
    write_text((std::filesystem::path(out_dir) / "sweep_manifest.json").string(), merged.dump(2) + "\n");

    int failed = 0;
    for (const auto& r : results) {
        if (r.manifest)
            std::printf("ok     %s\n", r.out_dir.c_str());
        else {
            std::printf("error  %s: %s\n", r.out_dir.c_str(), r.error.c_str());
            ++failed;
        }
    }
    return failed ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Coupled-cavity single-photon emission simulator"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    std::vector<std::string> sets;
    for (const char* name : {"eigens", "ldos", "dynamics", "shape", "adiabaticity"}) {
        auto* sub = app.add_subcommand(name, std::string("run the ") + name + " scenario");
        sub->add_option("--config,-c", config_path, "JSON config (or a previous manifest.json)");
        sub->add_option("--out,-o", out_dir, "output directory (overrides output.dir)");
        sub->add_option("--set,-s", sets, "override a config field, e.g. --set system.g=0.2")->take_all();
    }

    std::vector<std::string> sweep_configs, varies;
    unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
    std::string sweep_out = "sweep";
    auto* sweep = app.add_subcommand("sweep", "run many configs on worker threads");
    sweep->add_option("--config,-c", sweep_configs, "JSON config; repeatable")->required()->take_all();
    sweep->add_option("--vary", varies, "key=v1,v2,...; repeatable, cartesian product");
    sweep->add_option("--set,-s", sets, "override applied to every run")->take_all();
    sweep->add_option("--jobs,-j", jobs, "worker threads")->check(CLI::PositiveNumber);
    sweep->add_option("--out,-o", sweep_out, "parent output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sweep->parsed()) return run_sweep_cmd(sweep_configs, varies, sets, sweep_out, jobs);
        for (auto* sub : app.get_subcommands()) return run_single(sub->get_name(), config_path, out_dir, sets);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
