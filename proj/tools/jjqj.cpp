// Command-line entry point: simulate, ensemble, sweep, lz.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "jjqj/commands.hpp"

namespace {

struct CommonOptions {
    std::string config;
    std::optional<std::uint64_t> seed;
    unsigned workers = 1;
    std::string out;
    std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
    cmd->add_option("--config", o.config, "INI configuration file (or any output file with an embedded config)");
    cmd->add_option("--seed", o.seed, "master seed, overrides engine.master_seed");
    cmd->add_option("--workers", o.workers, "worker threads")->check(CLI::PositiveNumber);
    cmd->add_option("--out", o.out, "output directory, overrides output.directory");
    cmd->add_option("--set", o.overrides, "override section.key=value (repeatable)");
}

jjqj::RunConfig resolve(const CommonOptions& o) {
    jjqj::ConfigNotes notes;
    auto overrides = o.overrides;
    if (o.seed) overrides.push_back("engine.master_seed=" + std::to_string(*o.seed));
    if (!o.out.empty()) overrides.push_back("output.directory=" + o.out);
    const jjqj::RunConfig c =
        o.config.empty() ? jjqj::parse_config("", overrides, &notes) : jjqj::load_config(o.config, overrides, &notes);
    for (const auto& d : notes.defaults) spdlog::info("default {}", d);
    for (const auto& w : notes.warnings) spdlog::warn("{}", w);
    return c;
}

void report_error(const char* kind, int code, const std::string& message) {
    nlohmann::ordered_json j;
    j["error"] = kind;
    j["exit_code"] = code;
    j["message"] = message;
    std::fprintf(stdout, "%s\n", j.dump().c_str());
    spdlog::error("{}", message);
}

}  // namespace

int main(int argc, char** argv) {
    spdlog::set_default_logger(spdlog::stderr_color_st("jjqj"));
    spdlog::set_pattern("[%l] %v");

    CLI::App app{"Quantum-jump simulation of switching currents in a current-biased Josephson junction"};
    app.require_subcommand(1);

    CommonOptions sim_opts, ens_opts, sweep_opts, lz_opts;
    auto* simulate = app.add_subcommand("simulate", "telegraph sequence of consecutive ramps");
    add_common(simulate, sim_opts);
    auto* ensemble = app.add_subcommand("ensemble", "independent ramps against the master equation");
    add_common(ensemble, ens_opts);
    auto* sweep = app.add_subcommand("sweep", "simulate over a list of Rabi frequencies or ramp rates");
    add_common(sweep, sweep_opts);
    std::string axis;
    std::vector<double> values;
    sweep->add_option("--axis", axis, "rabi_MHz or ramp_rate")->required();
    sweep->add_option("--values", values, "axis values (MHz or uA/s)")->required()->delimiter(',');
    auto* lz = app.add_subcommand("lz", "Landau-Zener report for the TLS crossing");
    add_common(lz, lz_opts);

    CLI11_PARSE(app, argc, argv);

    try {
        auto log = [](const std::string& m) { spdlog::info("{}", m); };
        nlohmann::ordered_json result;
        if (*simulate) {
            const auto c = resolve(sim_opts);
            result = jjqj::cmd_simulate(c, c.directory, log);
        } else if (*ensemble) {
            const auto c = resolve(ens_opts);
            result = jjqj::cmd_ensemble(c, c.directory, ens_opts.workers, log);
        } else if (*sweep) {
            const auto c = resolve(sweep_opts);
            result = jjqj::cmd_sweep(c, jjqj::parse_sweep_axis(axis), values, c.directory, sweep_opts.workers, log);
        } else if (*lz) {
            const auto c = resolve(lz_opts);
            result = jjqj::cmd_lz(c, c.directory, log);
        }
        result.erase("config_ini");
        if (result.contains("classification")) {
            result["classification"].erase("dwell_upper");
            result["classification"].erase("dwell_lower");
        }
        if (result.contains("points"))
            for (auto& p : result["points"]) {
                p["classification"].erase("dwell_upper");
                p["classification"].erase("dwell_lower");
            }
        std::fprintf(stdout, "%s\n", result.dump(2).c_str());
        return 0;
    } catch (const jjqj::Error& e) {
        report_error(e.kind(), e.exit_code(), e.what());
        return e.exit_code();
    } catch (const std::filesystem::filesystem_error& e) {
        report_error("io", 2, e.what());
        return 2;
    } catch (const std::exception& e) {
        report_error("internal", 1, e.what());
        return 1;
    }
}
