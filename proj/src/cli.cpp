#include "qpiston/cli.hpp"

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

namespace qpiston {

namespace {

using nlohmann::json;

std::string fmt(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<double> linspace(double lo, double hi, int count)
{
    if (count < 1)
        throw ArgumentError("grid count must be positive");
    std::vector<double> v(count);
    if (count == 1) {
        v[0] = lo;
        return v;
    }
    for (int i = 0; i < count; ++i)
        v[i] = lo + (hi - lo) * double(i) / double(count - 1);
    return v;
}

double as_double(const json& j, const std::string& key)
{
    if (!j.is_number())
        throw ArgumentError("config field '" + key + "' must be a number");
    return j.get<double>();
}

int as_int(const json& j, const std::string& key)
{
    if (!j.is_number_integer())
        throw ArgumentError("config field '" + key + "' must be an integer");
    return j.get<int>();
}

std::string as_string(const json& j, const std::string& key)
{
    if (!j.is_string())
        throw ArgumentError("config field '" + key + "' must be a string");
    return j.get<std::string>();
}

// A grid is either an explicit list of numbers or {min, max, count}.
std::vector<double> as_grid(const json& j, const std::string& key)
{
    if (j.is_array()) {
        std::vector<double> v;
        for (const auto& e : j)
            v.push_back(as_double(e, key));
        if (v.empty())
            throw ArgumentError("config field '" + key + "' must not be empty");
        return v;
    }
    if (j.is_object()) {
        for (const auto& [k, _] : j.items())
            if (k != "min" && k != "max" && k != "count")
                throw ArgumentError("unknown key '" + k + "' in grid '" + key + "'");
        if (!j.contains("min") || !j.contains("max") || !j.contains("count"))
            throw ArgumentError("grid '" + key + "' needs min, max and count");
        return linspace(as_double(j.at("min"), key), as_double(j.at("max"), key),
                        as_int(j.at("count"), key));
    }
    throw ArgumentError("config field '" + key + "' must be a list or {min,max,count}");
}

std::vector<std::string> as_string_list(const json& j, const std::string& key)
{
    if (!j.is_array())
        throw ArgumentError("config field '" + key + "' must be a list of strings");
    std::vector<std::string> v;
    for (const auto& e : j)
        v.push_back(as_string(e, key));
    return v;
}

// Removes the file unless commit() ran; keeps failed runs from leaving
// partial outputs behind.
class OutputFile {
public:
    explicit OutputFile(const std::string& path)
        : path_(path), out_(path, std::ios::trunc)
    {
        if (!out_)
            throw ArgumentError("cannot open output file '" + path + "'");
    }

    std::ostream& stream() { return out_; }

    void commit()
    {
        out_.flush();
        if (!out_)
            throw NumericalError("write failed for '" + path_ + "'");
        out_.close();
        committed_ = true;
    }

    ~OutputFile()
    {
        if (!committed_) {
            out_.close();
            std::error_code ec;
            std::filesystem::remove(path_, ec);
        }
    }

private:
    std::string path_;
    std::ofstream out_;
    bool committed_ = false;
};

PowerMode mode_from_name(const std::string& name)
{
    if (name == "bath")
        return PowerMode::Bath;
    if (name == "measurement")
        return PowerMode::Measurement;
    throw ArgumentError("unknown mode '" + name + "' (expected bath or measurement)");
}

StrokeDirection direction_from_name(const std::string& name)
{
    if (name == "retract")
        return StrokeDirection::Retract;
    if (name == "advance")
        return StrokeDirection::Advance;
    throw ArgumentError("unknown direction '" + name + "' (expected retract or advance)");
}

std::string resolve_output_path(const RunConfig& config, const std::string& extension)
{
    std::filesystem::path p = config.output_path.empty()
                                  ? experiment_name(config.experiment) + extension
                                  : config.output_path;
    if (p.is_relative()) {
        if (const char* dir = std::getenv("QPISTON_OUTPUT_DIR"); dir && *dir)
            p = std::filesystem::path(dir) / p;
    }
    return p.string();
}

json params_to_json(const EngineParams& p)
{
    return json{{"sigma", p.sigma},
                {"tau_p", p.tau_p},
                {"phi0", p.phi0},
                {"y_advanced", p.y_advanced},
                {"y_retracted", p.resolved_y_retracted()},
                {"coupling_offset_fluid", p.coupling_offset_fluid},
                {"coupling_offset_bath", p.coupling_offset_bath},
                {"lambda", p.lambda},
                {"bath_amp", p.bath_amp},
                {"omega_hot", p.omega_hot},
                {"omega_cold", p.omega_cold},
                {"tau_b", p.resolved_tau_b()},
                {"cutoff", p.cutoff},
                {"dtau", p.dtau},
                {"cutoff_fail_threshold", p.cutoff_fail_threshold}};
}

} // namespace

std::string experiment_name(Experiment e)
{
    switch (e) {
    case Experiment::InteractionMap: return "interaction-map";
    case Experiment::Adiabaticity:   return "adiabaticity";
    case Experiment::RunBath:        return "run-bath";
    case Experiment::RunMeasurement: return "run-measurement";
    case Experiment::Sweep:          return "sweep";
    }
    throw ArgumentError("unknown experiment");
}

Experiment experiment_from_name(const std::string& name)
{
    if (name == "interaction-map")  return Experiment::InteractionMap;
    if (name == "adiabaticity")     return Experiment::Adiabaticity;
    if (name == "run-bath")         return Experiment::RunBath;
    if (name == "run-measurement")  return Experiment::RunMeasurement;
    if (name == "sweep")            return Experiment::Sweep;
    throw ArgumentError("unknown experiment '" + name + "'");
}

void RunConfig::validate() const
{
    params.validate();
    if (n_cycles < 1)
        throw ArgumentError("config field 'n_cycles' must be positive");
    if (steady_window < 1)
        throw ArgumentError("config field 'steady_window' must be positive");
    if (!(steady_tol > 0.0))
        throw ArgumentError("config field 'steady_tol' must be positive");
    if (jobs < 1 || jobs > 64)
        throw ArgumentError("config field 'jobs' must be in [1, 64]");
    for (const auto& d : directions)
        direction_from_name(d);
    for (const auto& m : sweep_modes)
        mode_from_name(m);
    if (directions.empty())
        throw ArgumentError("config field 'directions' must not be empty");
    if (sweep_modes.empty())
        throw ArgumentError("config field 'sweep_modes' must not be empty");
}

RunConfig parse_config(const json& j)
{
    if (!j.is_object())
        throw ArgumentError("config must be a JSON object");
    if (!j.contains("experiment"))
        throw ArgumentError("config field 'experiment' is required");
    if (!j.contains("sigma"))
        throw ArgumentError("config field 'sigma' is required");
    if (!j.contains("tau_p"))
        throw ArgumentError("config field 'tau_p' is required");

    RunConfig c;
    for (const auto& [key, value] : j.items()) {
        if (key == "experiment")       c.experiment = experiment_from_name(as_string(value, key));
        else if (key == "sigma")       c.params.sigma = as_double(value, key);
        else if (key == "tau_p")       c.params.tau_p = as_double(value, key);
        else if (key == "phi0")        c.params.phi0 = as_double(value, key);
        else if (key == "y_advanced")  c.params.y_advanced = as_double(value, key);
        else if (key == "y_retracted") c.params.y_retracted = as_double(value, key);
        else if (key == "coupling_offset_fluid") c.params.coupling_offset_fluid = as_double(value, key);
        else if (key == "coupling_offset_bath")  c.params.coupling_offset_bath = as_double(value, key);
        else if (key == "lambda")      c.params.lambda = as_double(value, key);
        else if (key == "bath_amp")    c.params.bath_amp = as_double(value, key);
        else if (key == "omega_hot")   c.params.omega_hot = as_double(value, key);
        else if (key == "omega_cold")  c.params.omega_cold = as_double(value, key);
        else if (key == "tau_b")       c.params.tau_b = as_double(value, key);
        else if (key == "cutoff")      c.params.cutoff = as_int(value, key);
        else if (key == "dtau")        c.params.dtau = as_double(value, key);
        else if (key == "cutoff_fail_threshold") c.params.cutoff_fail_threshold = as_double(value, key);
        else if (key == "n_cycles")    c.n_cycles = as_int(value, key);
        else if (key == "omega_grid")  c.omega_grid = as_grid(value, key);
        else if (key == "y_grid")      c.y_grid = as_grid(value, key);
        else if (key == "tau_p_values") c.tau_p_values = as_grid(value, key);
        else if (key == "directions")  c.directions = as_string_list(value, key);
        else if (key == "sweep_sigmas") c.sweep_sigmas = as_grid(value, key);
        else if (key == "sweep_tau_ps") c.sweep_tau_ps = as_grid(value, key);
        else if (key == "sweep_modes") c.sweep_modes = as_string_list(value, key);
        else if (key == "steady_window") c.steady_window = as_int(value, key);
        else if (key == "steady_tol")  c.steady_tol = as_double(value, key);
        else if (key == "jobs")        c.jobs = as_int(value, key);
        else if (key == "output")      c.output_path = as_string(value, key);
        else if (key == "format") {
            const std::string f = as_string(value, key);
            if (f == "csv")       c.format = OutputFormat::Csv;
            else if (f == "json") c.format = OutputFormat::Json;
            else throw ArgumentError("config field 'format' must be csv or json");
        }
        else throw ArgumentError("unknown config key '" + key + "'");
    }

    // grid defaults need sigma, so they resolve after field parsing
    if (c.omega_grid.empty())
        c.omega_grid = linspace(0.1, 5.0, 50);
    if (c.y_grid.empty())
        c.y_grid = linspace(0.0, c.params.resolved_y_retracted(), 51);
    if (c.sweep_sigmas.empty())
        c.sweep_sigmas = {0.5, 2.0};
    if (c.sweep_tau_ps.empty())
        c.sweep_tau_ps = {5.0, 10.0};

    c.validate();
    return c;
}

RunConfig parse_config_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ArgumentError("cannot open config file '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ArgumentError("config file '" + path + "' is not valid JSON: " + e.what());
    }
    return parse_config(j);
}

json config_to_json(const RunConfig& c)
{
    json j = params_to_json(c.params);
    j["experiment"] = experiment_name(c.experiment);
    j["n_cycles"] = c.n_cycles;
    j["omega_grid"] = c.omega_grid;
    j["y_grid"] = c.y_grid;
    j["tau_p_values"] = c.tau_p_values;
    j["directions"] = c.directions;
    j["sweep_sigmas"] = c.sweep_sigmas;
    j["sweep_tau_ps"] = c.sweep_tau_ps;
    j["sweep_modes"] = c.sweep_modes;
    j["steady_window"] = c.steady_window;
    j["steady_tol"] = c.steady_tol;
    j["jobs"] = c.jobs;
    j["output"] = c.output_path;
    j["format"] = c.format == OutputFormat::Csv ? "csv" : "json";
    return j;
}

namespace {

void write_manifest_comment(std::ostream& out, const RunConfig& config)
{
    out << "# " << config_to_json(config).dump() << "\n";
}

ExecutionResult execute_interaction_map(const RunConfig& config)
{
    EngineModel model(config.params);
    RealVector omega = Eigen::Map<const RealVector>(config.omega_grid.data(),
                                                    Index(config.omega_grid.size()));
    RealVector y = Eigen::Map<const RealVector>(config.y_grid.data(), Index(config.y_grid.size()));
    const RealMatrix map = interaction_energy_map(model, omega, y);

    const bool csv = config.format == OutputFormat::Csv;
    const std::string path = resolve_output_path(config, csv ? ".csv" : ".json");
    OutputFile file(path);
    if (csv) {
        write_manifest_comment(file.stream(), config);
        file.stream() << "omega_T,y_over_sigma,energy\n";
        for (Index i = 0; i < omega.size(); ++i)
            for (Index j = 0; j < y.size(); ++j)
                file.stream() << fmt(omega[i]) << ',' << fmt(y[j] / config.params.sigma) << ','
                              << fmt(map(i, j)) << "\n";
    } else {
        json rows = json::array();
        for (Index i = 0; i < omega.size(); ++i)
            for (Index j = 0; j < y.size(); ++j)
                rows.push_back({{"omega_T", omega[i]},
                                {"y_over_sigma", y[j] / config.params.sigma},
                                {"energy", map(i, j)}});
        file.stream() << json{{"manifest", config_to_json(config)}, {"rows", rows}}.dump(2)
                      << "\n";
    }
    file.commit();
    return {{path}};
}

ExecutionResult execute_adiabaticity(const RunConfig& config)
{
    struct Row {
        double tau_p, final_energy, adiabatic, sudden;
        std::string direction;
    };
    std::vector<Row> rows;
    for (const auto& dname : config.directions) {
        const AdiabaticityScan scan =
            adiabaticity_scan(config.params, config.tau_p_values, direction_from_name(dname));
        for (const auto& [tau_p, energy] : scan.final_energies)
            rows.push_back({tau_p, energy, scan.adiabatic_bound, scan.sudden_bound, dname});
    }

    const bool csv = config.format == OutputFormat::Csv;
    const std::string path = resolve_output_path(config, csv ? ".csv" : ".json");
    OutputFile file(path);
    if (csv) {
        write_manifest_comment(file.stream(), config);
        file.stream() << "tau_p,final_energy,adiabatic_bound,sudden_bound,direction\n";
        for (const Row& r : rows)
            file.stream() << fmt(r.tau_p) << ',' << fmt(r.final_energy) << ','
                          << fmt(r.adiabatic) << ',' << fmt(r.sudden) << ',' << r.direction
                          << "\n";
    } else {
        json jrows = json::array();
        for (const Row& r : rows)
            jrows.push_back({{"tau_p", r.tau_p},
                             {"final_energy", r.final_energy},
                             {"adiabatic_bound", r.adiabatic},
                             {"sudden_bound", r.sudden},
                             {"direction", r.direction}});
        file.stream() << json{{"manifest", config_to_json(config)}, {"rows", jrows}}.dump(2)
                      << "\n";
    }
    file.commit();
    return {{path}};
}

json record_to_json(const CycleRecord& r)
{
    return json{{"cycle_index", r.cycle_index},
                {"e_advanced_cold", r.e_advanced_cold},
                {"e_advanced_hot", r.e_advanced_hot},
                {"e_retracted_hot", r.e_retracted_hot},
                {"e_retracted_cold", r.e_retracted_cold},
                {"q_in", r.q_in},
                {"w_retract", r.w_retract},
                {"q_out", r.q_out},
                {"w_advance", r.w_advance},
                {"net_work", r.net_work},
                {"efficiency", r.efficiency},
                {"power", r.power}};
}

json summary_to_json(const RunConfig& config, const EngineRun& run, const RunSummary& s)
{
    const FockSpace space(config.params.cutoff);
    json j{{"experiment", experiment_name(config.experiment)},
           {"params", config_to_json(config)},
           {"n_cycles", int(run.records.size())},
           {"averaged_from_cycle", s.averaged_from_cycle},
           {"mean_net_work", s.mean_net_work},
           {"mean_q_in", s.mean_q_in},
           {"mean_efficiency", s.mean_efficiency},
           {"mean_power", s.mean_power},
           {"cumulative_efficiency", s.cumulative_efficiency},
           {"propagator_dtau", run.propagator_dtau},
           {"cutoff_warning_cold",
            thermal_cutoff_warning(space, ThermalSpec(config.params.omega_cold))}};
    if (s.steady_state_index)
        j["steady_state_index"] = *s.steady_state_index;
    else
        j["steady_state_index"] = nullptr;
    if (run.mode == PowerMode::Bath)
        j["cutoff_warning_hot"] =
            thermal_cutoff_warning(space, ThermalSpec(config.params.omega_hot));
    return j;
}

ExecutionResult execute_engine_run(const RunConfig& config, PowerMode mode)
{
    const EngineRun run = run_engine(config.params, mode, config.n_cycles);
    const RunSummary summary = summarize_run(run, config.steady_window, config.steady_tol);

    const bool csv = config.format == OutputFormat::Csv;
    const std::string records_path = resolve_output_path(config, csv ? ".csv" : ".json");
    const std::string summary_path =
        std::filesystem::path(records_path).replace_extension().string() + "_summary.json";

    OutputFile records_file(records_path);
    if (csv) {
        write_manifest_comment(records_file.stream(), config);
        records_file.stream()
            << "cycle_index,e_advanced_cold,e_advanced_hot,e_retracted_hot,e_retracted_cold,"
               "q_in,w_retract,q_out,w_advance,net_work,efficiency,power\n";
        for (const CycleRecord& r : run.records)
            records_file.stream()
                << r.cycle_index << ',' << fmt(r.e_advanced_cold) << ',' << fmt(r.e_advanced_hot)
                << ',' << fmt(r.e_retracted_hot) << ',' << fmt(r.e_retracted_cold) << ','
                << fmt(r.q_in) << ',' << fmt(r.w_retract) << ',' << fmt(r.q_out) << ','
                << fmt(r.w_advance) << ',' << fmt(r.net_work) << ',' << fmt(r.efficiency) << ','
                << fmt(r.power) << "\n";
    } else {
        json jrows = json::array();
        for (const CycleRecord& r : run.records)
            jrows.push_back(record_to_json(r));
        records_file.stream()
            << json{{"manifest", config_to_json(config)}, {"records", jrows}}.dump(2) << "\n";
    }

    OutputFile summary_file(summary_path);
    summary_file.stream() << summary_to_json(config, run, summary).dump(2) << "\n";

    records_file.commit();
    summary_file.commit();
    return {{records_path, summary_path}};
}

ExecutionResult execute_sweep(const RunConfig& config)
{
    struct Entry {
        double sigma, tau_p;
        std::string mode;
    };
    std::vector<Entry> entries;
    for (double sigma : config.sweep_sigmas)
        for (double tau_p : config.sweep_tau_ps)
            for (const auto& mode : config.sweep_modes)
                entries.push_back({sigma, tau_p, mode});

    struct Row {
        Entry entry;
        RunSummary summary;
    };
    std::vector<Row> rows(entries.size());
    std::atomic<std::size_t> cursor{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto worker = [&] {
        for (;;) {
            const std::size_t i = cursor.fetch_add(1);
            if (i >= entries.size())
                return;
            try {
                EngineParams p = config.params;
                p.sigma = entries[i].sigma;
                p.tau_p = entries[i].tau_p;
                const EngineRun run =
                    run_engine(p, mode_from_name(entries[i].mode), config.n_cycles);
                rows[i] = {entries[i], summarize_run(run, config.steady_window, config.steady_tol)};
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure)
                    failure = std::current_exception();
                cursor.store(entries.size());
                return;
            }
        }
    };

    const int jobs = std::min<std::size_t>(config.jobs, entries.size());
    std::vector<std::thread> pool;
    for (int t = 1; t < jobs; ++t)
        pool.emplace_back(worker);
    worker();
    for (auto& t : pool)
        t.join();
    if (failure)
        std::rethrow_exception(failure);

    const bool csv = config.format == OutputFormat::Csv;
    const std::string path = resolve_output_path(config, csv ? ".csv" : ".json");
    OutputFile file(path);
    if (csv) {
        write_manifest_comment(file.stream(), config);
        file.stream() << "sigma,tau_p,mode,steady_state_index,averaged_from_cycle,"
                         "mean_net_work,mean_q_in,mean_efficiency,mean_power,"
                         "cumulative_efficiency\n";
        for (const Row& r : rows) {
            file.stream() << fmt(r.entry.sigma) << ',' << fmt(r.entry.tau_p) << ','
                          << r.entry.mode << ',';
            if (r.summary.steady_state_index)
                file.stream() << *r.summary.steady_state_index;
            file.stream() << ',' << r.summary.averaged_from_cycle << ','
                          << fmt(r.summary.mean_net_work) << ',' << fmt(r.summary.mean_q_in)
                          << ',' << fmt(r.summary.mean_efficiency) << ','
                          << fmt(r.summary.mean_power) << ','
                          << fmt(r.summary.cumulative_efficiency) << "\n";
        }
    } else {
        json jrows = json::array();
        for (const Row& r : rows) {
            json jr{{"sigma", r.entry.sigma},
                    {"tau_p", r.entry.tau_p},
                    {"mode", r.entry.mode},
                    {"averaged_from_cycle", r.summary.averaged_from_cycle},
                    {"mean_net_work", r.summary.mean_net_work},
                    {"mean_q_in", r.summary.mean_q_in},
                    {"mean_efficiency", r.summary.mean_efficiency},
                    {"mean_power", r.summary.mean_power},
                    {"cumulative_efficiency", r.summary.cumulative_efficiency}};
            if (r.summary.steady_state_index)
                jr["steady_state_index"] = *r.summary.steady_state_index;
            else
                jr["steady_state_index"] = nullptr;
            jrows.push_back(jr);
        }
        file.stream() << json{{"manifest", config_to_json(config)}, {"rows", jrows}}.dump(2)
                      << "\n";
    }
    file.commit();
    return {{path}};
}

} // namespace

ExecutionResult execute(const RunConfig& config)
{
    config.validate();
    switch (config.experiment) {
    case Experiment::InteractionMap: return execute_interaction_map(config);
    case Experiment::Adiabaticity:   return execute_adiabaticity(config);
    case Experiment::RunBath:        return execute_engine_run(config, PowerMode::Bath);
    case Experiment::RunMeasurement: return execute_engine_run(config, PowerMode::Measurement);
    case Experiment::Sweep:          return execute_sweep(config);
    }
    throw ArgumentError("unknown experiment");
}

} // namespace qpiston
