#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qpiston/cli.hpp"

namespace {

using nlohmann::json;

struct Flags {
    std::string config_path;
    std::optional<double> sigma, tau_p, phi0, y_advanced, y_retracted, lambda, bath_amp;
    std::optional<double> coupling_offset_fluid, coupling_offset_bath;
    std::optional<double> omega_hot, omega_cold, tau_b, dtau, cutoff_fail_threshold;
    std::optional<double> steady_tol;
    std::optional<int> cutoff, cycles, steady_window, jobs;
    std::optional<std::string> output, format, direction;
    std::optional<double> omega_min, omega_max, y_min, y_max;
    std::optional<int> omega_count, y_count;
    std::vector<double> tau_p_values, sweep_sigmas, sweep_tau_ps;
    std::vector<std::string> sweep_modes;
};

void add_common_options(CLI::App* cmd, Flags& f)
{
    cmd->add_option("--config", f.config_path, "JSON config file; flags override its fields");
    cmd->add_option("--sigma", f.sigma, "piston interaction width");
    cmd->add_option("--tau-p", f.tau_p, "piston stroke duration (oscillator periods)");
    cmd->add_option("--phi0", f.phi0, "piston interaction amplitude");
    cmd->add_option("--y-advanced", f.y_advanced, "advanced piston position");
    cmd->add_option("--y-retracted", f.y_retracted, "retracted piston position (default 10 sigma)");
    cmd->add_option("--lambda", f.lambda, "bath coupling width");
    cmd->add_option("--bath-amp", f.bath_amp, "bath coupling amplitude");
    cmd->add_option("--coupling-offset-fluid", f.coupling_offset_fluid,
                    "bath coupling center, fluid axis");
    cmd->add_option("--coupling-offset-bath", f.coupling_offset_bath,
                    "bath coupling center, bath axis");
    cmd->add_option("--omega-hot", f.omega_hot, "hot bath thermal frequency");
    cmd->add_option("--omega-cold", f.omega_cold, "cold bath thermal frequency");
    cmd->add_option("--tau-b", f.tau_b, "bath contact time (default tau_p)");
    cmd->add_option("--cutoff", f.cutoff, "Fock states per oscillator");
    cmd->add_option("--dtau", f.dtau, "integrator step");
    cmd->add_option("--cutoff-fail-threshold", f.cutoff_fail_threshold,
                    "abort when thermal top-state population exceeds this");
    cmd->add_option("--cycles", f.cycles, "number of engine cycles");
    cmd->add_option("--steady-window", f.steady_window, "steady-state detector window");
    cmd->add_option("--steady-tol", f.steady_tol, "steady-state detector tolerance");
    cmd->add_option("--jobs", f.jobs, "sweep worker count");
    cmd->add_option("--output", f.output, "output file path");
    cmd->add_option("--format", f.format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
}

json flags_to_json(const Flags& f, const std::string& experiment)
{
    json j;
    if (!f.config_path.empty()) {
        std::ifstream in(f.config_path);
        if (!in)
            throw qpiston::ArgumentError("cannot open config file '" + f.config_path + "'");
        try {
            in >> j;
        } catch (const json::parse_error& e) {
            throw qpiston::ArgumentError("config file is not valid JSON: " + std::string(e.what()));
        }
        if (!j.is_object())
            throw qpiston::ArgumentError("config must be a JSON object");
    }
    j["experiment"] = experiment;

    auto put = [&](const char* key, const auto& opt) {
        if (opt)
            j[key] = *opt;
    };
    put("sigma", f.sigma);
    put("tau_p", f.tau_p);
    put("phi0", f.phi0);
    put("y_advanced", f.y_advanced);
    put("y_retracted", f.y_retracted);
    put("lambda", f.lambda);
    put("bath_amp", f.bath_amp);
    put("coupling_offset_fluid", f.coupling_offset_fluid);
    put("coupling_offset_bath", f.coupling_offset_bath);
    put("omega_hot", f.omega_hot);
    put("omega_cold", f.omega_cold);
    put("tau_b", f.tau_b);
    put("cutoff", f.cutoff);
    put("dtau", f.dtau);
    put("cutoff_fail_threshold", f.cutoff_fail_threshold);
    put("n_cycles", f.cycles);
    put("steady_window", f.steady_window);
    put("steady_tol", f.steady_tol);
    put("jobs", f.jobs);
    put("output", f.output);
    put("format", f.format);

    if (f.omega_min || f.omega_max || f.omega_count) {
        if (!(f.omega_min && f.omega_max && f.omega_count))
            throw qpiston::ArgumentError("--omega-min/--omega-max/--omega-count must come together");
        j["omega_grid"] = {{"min", *f.omega_min}, {"max", *f.omega_max}, {"count", *f.omega_count}};
    }
    if (f.y_min || f.y_max || f.y_count) {
        if (!(f.y_min && f.y_max && f.y_count))
            throw qpiston::ArgumentError("--y-min/--y-max/--y-count must come together");
        j["y_grid"] = {{"min", *f.y_min}, {"max", *f.y_max}, {"count", *f.y_count}};
    }
    if (!f.tau_p_values.empty())
        j["tau_p_values"] = f.tau_p_values;
    if (f.direction) {
        if (*f.direction == "both")
            j["directions"] = {"retract", "advance"};
        else
            j["directions"] = {*f.direction};
    }
    if (!f.sweep_sigmas.empty())
        j["sweep_sigmas"] = f.sweep_sigmas;
    if (!f.sweep_tau_ps.empty())
        j["sweep_tau_ps"] = f.sweep_tau_ps;
    if (!f.sweep_modes.empty())
        j["sweep_modes"] = f.sweep_modes;
    return j;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Single-piston oscillator engine simulator"};
    app.require_subcommand(1);

    Flags flags;
    CLI::App* map_cmd = app.add_subcommand("interaction-map",
                                           "thermal interaction energy over an omega_T-y grid");
    CLI::App* adia_cmd = app.add_subcommand("adiabaticity",
                                            "final stroke energy vs tau_p with analytic bounds");
    CLI::App* bath_cmd = app.add_subcommand("run-bath", "multi-cycle bath-powered engine run");
    CLI::App* meas_cmd =
        app.add_subcommand("run-measurement", "multi-cycle measurement-powered engine run");
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "summaries over a parameter grid");

    for (CLI::App* cmd : {map_cmd, adia_cmd, bath_cmd, meas_cmd, sweep_cmd})
        add_common_options(cmd, flags);

    map_cmd->add_option("--omega-min", flags.omega_min, "omega_T grid start");
    map_cmd->add_option("--omega-max", flags.omega_max, "omega_T grid end");
    map_cmd->add_option("--omega-count", flags.omega_count, "omega_T grid points");
    map_cmd->add_option("--y-min", flags.y_min, "y grid start (oscillator lengths)");
    map_cmd->add_option("--y-max", flags.y_max, "y grid end");
    map_cmd->add_option("--y-count", flags.y_count, "y grid points");

    adia_cmd->add_option("--tau-p-values", flags.tau_p_values, "stroke durations to scan");
    adia_cmd->add_option("--direction", flags.direction, "retract, advance or both")
        ->check(CLI::IsMember({"retract", "advance", "both"}));

    sweep_cmd->add_option("--sweep-sigmas", flags.sweep_sigmas, "sigma values");
    sweep_cmd->add_option("--sweep-tau-ps", flags.sweep_tau_ps, "tau_p values");
    sweep_cmd->add_option("--sweep-modes", flags.sweep_modes, "bath and/or measurement");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        const std::string experiment = app.get_subcommands().front()->get_name();
        const qpiston::RunConfig config = qpiston::parse_config(flags_to_json(flags, experiment));
        const qpiston::ExecutionResult result = qpiston::execute(config);
        for (const auto& path : result.files_written)
            std::cout << "wrote " << path << "\n";
        return 0;
    } catch (const qpiston::ArgumentError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const qpiston::Error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "unexpected failure: " << e.what() << "\n";
        return 2;
    }
}
