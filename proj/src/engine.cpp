#include "qpiston/engine.hpp"

#include <cmath>
#include <limits>

namespace qpiston {

namespace {

constexpr double kPropagatorUnitarityTarget = 1e-8;

CollisionChannel make_channel(const EngineModel& model, double y, double omega_bath,
                              double tau_b, const CutoffPolicy& policy)
{
    const UnitaryOperator b = hermitian_expm(model.composite_bath_hamiltonian(y), tau_b);
    const DensityOperator bath = thermal_state(model.space(), ThermalSpec(omega_bath), policy);
    return CollisionChannel(b, bath, model.dim());
}

double fluid_energy(const Matrix& rho, const Matrix& h) { return expected_energy_raw(rho, h); }

} // namespace

EngineAssets build_engine_assets(const EngineParams& params, PowerMode mode)
{
    EngineModel model(params);
    const double y_adv = params.y_advanced;
    const double y_ret = params.resolved_y_retracted();
    const double tau_b = params.resolved_tau_b();
    const CutoffPolicy policy{1e-10, params.cutoff_fail_threshold};

    const double dtau_u =
        unitary_safe_step(model.spectral_bound(), params.tau_p, kPropagatorUnitarityTarget,
                          params.dtau);
    RampHamiltonian ramp(model, PistonTrajectory(y_adv, y_ret, params.tau_p));
    UnitaryOperator u = propagator(ramp, 0.0, params.tau_p, dtau_u, model.dim());

    Matrix h_adv = model.hamiltonian(y_adv).matrix();
    Matrix h_ret = model.hamiltonian(y_ret).matrix();

    std::optional<CollisionChannel> hot;
    if (mode == PowerMode::Bath)
        hot = make_channel(model, y_adv, params.omega_hot, tau_b, policy);
    CollisionChannel cold = make_channel(model, y_ret, params.omega_cold, tau_b, policy);

    return EngineAssets{std::move(model), mode,       u.matrix(),      std::move(h_adv),
                        std::move(h_ret), std::move(hot), std::move(cold), dtau_u};
}

namespace {

// Shared cycle body; `heated` is the state after the powering step.
std::pair<DensityOperator, CycleRecord> finish_cycle(const DensityOperator& rho, Matrix heated,
                                                     const EngineAssets& assets, int cycle_index)
{
    const EngineParams& p = assets.model.params();
    CycleRecord rec;
    rec.cycle_index = cycle_index;
    rec.e_advanced_cold = fluid_energy(rho.matrix(), assets.h_advanced);
    rec.e_advanced_hot  = fluid_energy(heated, assets.h_advanced);

    Matrix retracted = assets.u_retract * heated * assets.u_retract.adjoint();
    rec.e_retracted_hot = fluid_energy(retracted, assets.h_retracted);

    Matrix cooled = assets.cold.apply_raw(retracted);
    rec.e_retracted_cold = fluid_energy(cooled, assets.h_retracted);

    Matrix advanced = assets.u_retract.adjoint() * cooled * assets.u_retract;
    DensityOperator next = [&] {
        try {
            return DensityOperator(std::move(advanced));
        } catch (const InvariantViolation& e) {
            throw ChannelError("cycle " + std::to_string(cycle_index) + ": " + e.what());
        }
    }();
    const double e_next_start = fluid_energy(next.matrix(), assets.h_advanced);

    const double top_population = next.matrix()(next.dim() - 1, next.dim() - 1).real();
    if (top_population > p.cutoff_fail_threshold)
        throw CutoffError("cycle " + std::to_string(cycle_index) +
                          ": fluid population leaked to the top Fock state (" +
                          std::to_string(top_population) + ")");

    rec.q_in      = rec.e_advanced_hot - rec.e_advanced_cold;
    rec.w_retract = rec.e_retracted_hot - rec.e_advanced_hot;
    rec.q_out     = rec.e_retracted_hot - rec.e_retracted_cold;
    rec.w_advance = rec.e_retracted_cold - e_next_start;
    rec.net_work  = rec.w_advance - rec.w_retract;
    rec.efficiency = rec.q_in != 0.0 ? rec.net_work / rec.q_in
                                     : std::numeric_limits<double>::quiet_NaN();
    rec.power = cycle_power(rec, assets.mode, p.tau_p);
    return {std::move(next), rec};
}

} // namespace

std::pair<DensityOperator, CycleRecord> run_bath_cycle(const DensityOperator& rho,
                                                       const EngineAssets& assets,
                                                       int cycle_index)
{
    if (!assets.hot)
        throw ArgumentError("run_bath_cycle: assets were built for measurement powering");
    return finish_cycle(rho, assets.hot->apply_raw(rho.matrix()), assets, cycle_index);
}

std::pair<DensityOperator, CycleRecord> run_measurement_cycle(const DensityOperator& rho,
                                                              const EngineAssets& assets,
                                                              int cycle_index)
{
    return finish_cycle(rho, measure_raw(rho.matrix()), assets, cycle_index);
}

EngineRun run_engine(const EngineParams& params, PowerMode mode, int n_cycles,
                     const std::optional<DensityOperator>& initial)
{
    if (n_cycles < 1)
        throw ArgumentError("run_engine: n_cycles must be positive");
    EngineAssets assets = build_engine_assets(params, mode);
    const CutoffPolicy policy{1e-10, params.cutoff_fail_threshold};

    DensityOperator rho = initial ? *initial
                                  : thermal_state(assets.model.space(),
                                                  ThermalSpec(params.omega_cold), policy);
    if (rho.dim() != assets.model.dim())
        throw ArgumentError("run_engine: initial state dimension mismatch");

    EngineRun run{params, mode, {}, rho, assets.propagator_dtau};
    run.records.reserve(n_cycles);
    for (int c = 1; c <= n_cycles; ++c) {
        auto [next, rec] = mode == PowerMode::Bath ? run_bath_cycle(rho, assets, c)
                                                   : run_measurement_cycle(rho, assets, c);
        rho = std::move(next);
        run.records.push_back(rec);
    }
    run.final_state = rho;
    return run;
}

double cycle_efficiency(const CycleRecord& record)
{
    if (record.q_in == 0.0)
        throw UndefinedEfficiencyError("cycle_efficiency: q_in is zero");
    return record.net_work / record.q_in;
}

double cycle_power(const CycleRecord& record, PowerMode mode, double tau_p)
{
    if (!(tau_p > 0.0))
        throw ArgumentError("cycle_power: tau_p must be positive");
    const double phases = mode == PowerMode::Bath ? 4.0 : 3.0;
    return record.net_work / (phases * tau_p);
}

TheoreticalEfficiency theoretical_efficiency(const DensityOperator& rho_high,
                                             const DensityOperator& rho_low,
                                             const HermitianOperator& phi_close,
                                             const HermitianOperator& phi_far,
                                             const HermitianOperator& h0)
{
    const Matrix delta = rho_high.matrix() - rho_low.matrix();
    if (max_abs(delta) < 1e-15)
        throw UndefinedEfficiencyError("theoretical_efficiency: no thermal contrast");
    auto contrast = [&](const Matrix& op) {
        const Complex t = delta.transpose().cwiseProduct(op).sum();
        return t.real();
    };
    const double close = contrast(phi_close.matrix());
    const double far   = contrast(phi_far.matrix());
    const double bare  = contrast(h0.matrix());
    const double denominator = bare + close;
    if (denominator == 0.0)
        throw UndefinedEfficiencyError("theoretical_efficiency: zero denominator");
    return {(close - far) / denominator, 1.0 / (bare / close + 1.0)};
}

AdiabaticityScan adiabaticity_scan(const EngineParams& params,
                                   const std::vector<double>& tau_p_values,
                                   StrokeDirection direction)
{
    if (tau_p_values.empty())
        throw ArgumentError("adiabaticity_scan: empty tau_p list");
    EngineModel model(params);
    const double y_adv = params.y_advanced;
    const double y_ret = params.resolved_y_retracted();

    RealVector evals_adv, evals_ret;
    Matrix vec_adv, vec_ret;
    hermitian_eigendecomposition(model.hamiltonian(y_adv).matrix(), evals_adv, vec_adv);
    hermitian_eigendecomposition(model.hamiltonian(y_ret).matrix(), evals_ret, vec_ret);
    const Vector ground_adv = vec_adv.col(0);
    const Vector ground_ret = vec_ret.col(0);

    const bool retracting = direction == StrokeDirection::Retract;
    const Vector& start = retracting ? ground_adv : ground_ret;
    const Matrix h_final =
        (retracting ? model.hamiltonian(y_ret) : model.hamiltonian(y_adv)).matrix();

    AdiabaticityScan scan;
    scan.adiabatic_bound = retracting ? evals_ret[0] : evals_adv[0];
    scan.sudden_bound = (start.adjoint() * h_final * start).value().real();

    for (double tau_p : tau_p_values) {
        PistonTrajectory traj(retracting ? y_adv : y_ret, retracting ? y_ret : y_adv, tau_p);
        RampHamiltonian ramp(model, traj);
        const StateVector psi =
            evolve_state(StateVector(start), ramp, 0.0, tau_p, params.dtau);
        const double energy = (psi.vector().adjoint() * h_final * psi.vector()).value().real();
        scan.final_energies.emplace_back(tau_p, energy);
    }
    return scan;
}

std::optional<int> detect_steady_state(std::span<const CycleRecord> records, int window,
                                       double tol)
{
    if (window < 1 || std::size_t(window) > records.size())
        throw ArgumentError("detect_steady_state: window must be in [1, records]");
    auto spread = [&](std::size_t first, double CycleRecord::*field) {
        double lo = records[first].*field, hi = lo;
        for (std::size_t i = first; i < first + std::size_t(window); ++i) {
            lo = std::min(lo, records[i].*field);
            hi = std::max(hi, records[i].*field);
        }
        return hi - lo;
    };
    for (std::size_t end = window; end <= records.size(); ++end) {
        const std::size_t first = end - std::size_t(window);
        if (spread(first, &CycleRecord::e_advanced_cold) < tol &&
            spread(first, &CycleRecord::e_advanced_hot) < tol &&
            spread(first, &CycleRecord::e_retracted_hot) < tol &&
            spread(first, &CycleRecord::e_retracted_cold) < tol)
            return int(end);
    }
    return std::nullopt;
}

RunSummary summarize_run(const EngineRun& run, int window, double tol)
{
    RunSummary s;
    const auto& recs = run.records;
    if (recs.empty())
        throw ArgumentError("summarize_run: empty run");
    if (std::size_t(window) <= recs.size())
        s.steady_state_index = detect_steady_state(recs, window, tol);
    const std::size_t from =
        s.steady_state_index ? std::size_t(*s.steady_state_index) - 1 : recs.size() / 2;
    s.averaged_from_cycle = recs[from].cycle_index;

    double total_work = 0.0, total_heat = 0.0;
    for (const auto& r : recs) {
        total_work += r.net_work;
        total_heat += r.q_in;
    }
    s.cumulative_efficiency = total_heat != 0.0
                                  ? total_work / total_heat
                                  : std::numeric_limits<double>::quiet_NaN();

    const double n_tail = double(recs.size() - from);
    for (std::size_t i = from; i < recs.size(); ++i) {
        s.mean_net_work += recs[i].net_work;
        s.mean_q_in += recs[i].q_in;
        s.mean_efficiency += recs[i].efficiency;
        s.mean_power += recs[i].power;
    }
    s.mean_net_work /= n_tail;
    s.mean_q_in /= n_tail;
    s.mean_efficiency /= n_tail;
    s.mean_power /= n_tail;
    return s;
}

double energy_slope(std::span<const CycleRecord> records, std::size_t first, std::size_t last,
                    double CycleRecord::*field)
{
    if (first >= last || last > records.size())
        throw ArgumentError("energy_slope: bad range");
    const double n = double(last - first);
    double mean_x = 0.0, mean_y = 0.0;
    for (std::size_t i = first; i < last; ++i) {
        mean_x += records[i].cycle_index;
        mean_y += records[i].*field;
    }
    mean_x /= n;
    mean_y /= n;
    double cov = 0.0, var = 0.0;
    for (std::size_t i = first; i < last; ++i) {
        const double dx = records[i].cycle_index - mean_x;
        cov += dx * (records[i].*field - mean_y);
        var += dx * dx;
    }
    return cov / var;
}

} // namespace qpiston
