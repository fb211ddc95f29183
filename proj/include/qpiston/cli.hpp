#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "qpiston/engine.hpp"

namespace qpiston {

enum class Experiment { InteractionMap, Adiabaticity, RunBath, RunMeasurement, Sweep };
enum class OutputFormat { Csv, Json };

std::string experiment_name(Experiment e);
Experiment experiment_from_name(const std::string& name);

/// A fully resolved experiment description. Defaults are the values used in
/// the reference simulations; sigma and tau_p must always be given.
struct RunConfig {
    Experiment experiment = Experiment::RunBath;
    EngineParams params;
    int n_cycles = 80;

    // interaction-map grids (y in oscillator lengths)
    std::vector<double> omega_grid;
    std::vector<double> y_grid;

    // adiabaticity
    std::vector<double> tau_p_values{0.1, 0.5, 1.0, 2.0, 5.0, 10.0};
    std::vector<std::string> directions{"retract", "advance"};

    // sweep
    std::vector<double> sweep_sigmas;
    std::vector<double> sweep_tau_ps;
    std::vector<std::string> sweep_modes{"bath"};

    int steady_window = 10;
    double steady_tol = 1e-3;
    int jobs = 1;

    std::string output_path; // empty: derived from the experiment name
    OutputFormat format = OutputFormat::Csv;

    void validate() const;
};

/// Parse and validate a config given as JSON. Unknown keys and invariant
/// violations raise ArgumentError naming the field. All defaults are filled
/// so the result serializes to a complete manifest.
RunConfig parse_config(const nlohmann::json& j);
RunConfig parse_config_file(const std::string& path);

/// Full round-trip serialization of a config (also the manifest payload).
nlohmann::json config_to_json(const RunConfig& config);

struct ExecutionResult {
    std::vector<std::string> files_written;
};

/// Run the configured experiment and write its outputs. Output paths resolve
/// against QPISTON_OUTPUT_DIR when set and the config path is relative.
/// Throws ArgumentError / NumericalError; partially written files are
/// removed before rethrow.
ExecutionResult execute(const RunConfig& config);

} // namespace qpiston
