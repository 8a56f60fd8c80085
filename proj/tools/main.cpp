#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mtdc/scenario_io.hpp"

namespace {

// exit codes: 0 success, 1 verification failure, 2 invalid input, 3 numerical failure
constexpr int kOk = 0;
constexpr int kVerifyFailed = 1;
constexpr int kInvalidInput = 2;
constexpr int kNumericalFailure = 3;

mtdc::Vec parse_value_list(const std::string& csv) {
    mtdc::Vec values;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        try {
            values.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw mtdc::ScenarioError("--values: cannot parse \"" + item + "\" as a number");
        }
    }
    if (values.empty()) throw mtdc::ScenarioError("--values: expected a comma-separated list");
    return values;
}

int cmd_analyze(const std::string& path) {
    const mtdc::Scenario scn = mtdc::load_scenario(path);
    std::cout << mtdc::analyze_report(scn).dump(2) << "\n";
    return kOk;
}

int cmd_simulate(const std::string& path, const std::string& out) {
    const mtdc::Scenario scn = mtdc::load_scenario(path);
    const mtdc::Trajectory traj = mtdc::integrate(scn);
    mtdc::write_trajectory_csv(traj, out);
    mtdc::Json rep = mtdc::analyze_report(scn);
    rep["trajectory_csv"] = out;
    rep["samples"] = traj.times.size();
    if (traj.dt_forced_warning)
        rep["warnings"] = mtdc::Json::array({"dt forced above the stable step size"});
    std::cout << rep.dump(2) << "\n";
    return kOk;
}

int cmd_bench(const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const std::pair<mtdc::Config, const char*> variants[] = {
        {mtdc::Config::DroopOnly, "benchmark_droop.json"},
        {mtdc::Config::SecondaryComplete, "benchmark_secondary_complete.json"},
        {mtdc::Config::SecondaryProjected, "benchmark_secondary_projected.json"},
        {mtdc::Config::SecondaryDistributed, "benchmark_secondary_distributed.json"},
    };
    for (const auto& [config, name] : variants) {
        const fs::path file = fs::path(dir) / name;
        std::ofstream out(file);
        if (!out) throw mtdc::Error("cannot write " + file.string());
        out << mtdc::serialize_scenario(mtdc::benchmark_scenario(config)).dump(2) << "\n";
        std::cout << file.string() << "\n";
    }
    return kOk;
}

int cmd_verify(const std::string& path) {
    const mtdc::Scenario scn = mtdc::load_scenario(path);
    const mtdc::VerifyResult res = mtdc::run_verify(scn);
    std::cout << res.report.dump(2) << "\n";
    if (!res.pass) {
        std::cerr << "verify failed: " << res.failures.front() << "\n";
        return kVerifyFailed;
    }
    return kOk;
}

int cmd_sweep(const std::string& path, const std::string& param, const std::string& values_csv) {
    const mtdc::Scenario scn = mtdc::load_scenario(path);
    const mtdc::Vec values = parse_value_list(values_csv);
    mtdc::Json rep;
    rep["schema"] = 1;
    rep["parameter"] = param;
    mtdc::Json entries = mtdc::Json::array();
    for (const auto& entry : mtdc::sweep(scn, param, values)) {
        mtdc::Json je;
        je["value"] = entry.value;
        if (entry.ok) {
            je["omega_hat_avg"] = entry.eq.omega_hat_avg;
            je["v_hat_avg"] = entry.eq.v_hat_avg;
            je["sum_omega_hat"] = entry.sum_omega_hat;
            je["sum_v_hat"] = entry.sum_v_hat;
            je["eta_prime"] = entry.eta_prime;
            je["p_gen_asym"] = entry.eq.p_gen_asym;
            if (entry.bounds_pass) je["bounds_pass"] = *entry.bounds_pass;
        } else {
            je["error"] = entry.error;
        }
        entries.push_back(std::move(je));
    }
    rep["entries"] = std::move(entries);
    std::cout << rep.dump(2) << "\n";
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Asynchronous AC areas coupled by a multi-terminal HVDC grid: "
                 "frequency-controller analysis and simulation"};
    app.require_subcommand(1);

    std::string scenario_path, out_path, dir = ".", param, values_csv;

    auto* analyze = app.add_subcommand("analyze", "stability, equilibrium and bound report");
    analyze->add_option("scenario", scenario_path, "scenario JSON file")->required();

    auto* simulate = app.add_subcommand("simulate", "integrate and export a CSV trajectory");
    simulate->add_option("scenario", scenario_path, "scenario JSON file")->required();
    simulate->add_option("--out", out_path, "output CSV path")->required();

    auto* bench = app.add_subcommand("bench", "write the six-terminal benchmark scenarios");
    bench->add_option("--dir", dir, "output directory");

    auto* verify = app.add_subcommand("verify", "simulate and check every applicable property");
    verify->add_option("scenario", scenario_path, "scenario JSON file")->required();

    auto* sweep = app.add_subcommand("sweep", "equilibrium sweep over a controller parameter");
    sweep->add_option("scenario", scenario_path, "scenario JSON file")->required();
    sweep->add_option("--param", param, "delta|gamma|k_droop|k_droop_i|k_omega|k_v")->required();
    sweep->add_option("--values", values_csv, "comma-separated values")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kInvalidInput;
    }

    try {
        if (*analyze) return cmd_analyze(scenario_path);
        if (*simulate) return cmd_simulate(scenario_path, out_path);
        if (*bench) return cmd_bench(dir);
        if (*verify) return cmd_verify(scenario_path);
        if (*sweep) return cmd_sweep(scenario_path, param, values_csv);
    } catch (const mtdc::ScenarioError& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return kInvalidInput;
    } catch (const mtdc::Error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kNumericalFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kNumericalFailure;
    }
    return kInvalidInput;
}
