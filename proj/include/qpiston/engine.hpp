#pragma once

#include <optional>
#include <span>
#include <vector>

#include "qpiston/dynamics.hpp"
#include "qpiston/model.hpp"
#include "qpiston/thermo.hpp"

namespace qpiston {

/// How the cycle acquires energy: a hot thermal ancilla, or an unselective
/// number-basis measurement in its place.
enum class PowerMode { Bath, Measurement };

/// Energies at the four phase boundaries, plus the derived bookkeeping.
/// Every energy is tr(rho H) with H = H0 + Phi(y at that phase). The advance
/// work uses the advanced-cold energy measured after the advance, i.e. the
/// next cycle's starting energy.
struct CycleRecord {
    int cycle_index = 0;
    double e_advanced_cold  = 0.0;
    double e_advanced_hot   = 0.0;
    double e_retracted_hot  = 0.0;
    double e_retracted_cold = 0.0;
    double q_in      = 0.0; // heat added during phase 1
    double w_retract = 0.0; // work done on the system, phase 2
    double q_out     = 0.0; // heat removed, phase 3
    double w_advance = 0.0; // work done by the system, phase 4
    double net_work  = 0.0; // w_advance - w_retract
    double efficiency = 0.0; // net_work / q_in (NaN when q_in == 0)
    double power      = 0.0;
};

/// Everything precomputed once per engine configuration: the retraction
/// propagator, the bath evolution operators (via spectral decomposition, hot
/// at the advanced position, cold at the retracted one), the measurement
/// Hamiltonians, and the reset states.
struct EngineAssets {
    EngineModel model;
    PowerMode mode;
    Matrix u_retract;
    Matrix h_advanced;
    Matrix h_retracted;
    std::optional<CollisionChannel> hot;
    CollisionChannel cold;
    double propagator_dtau;
};

EngineAssets build_engine_assets(const EngineParams& params, PowerMode mode);

/// One bath-powered cycle: hot collision (advanced), retraction, cold
/// collision (retracted), advance by the conjugate propagator.
std::pair<DensityOperator, CycleRecord> run_bath_cycle(const DensityOperator& rho,
                                                       const EngineAssets& assets,
                                                       int cycle_index = 1);

/// One measurement-powered cycle: the hot collision is replaced by dropping
/// the number-basis coherences; q_in is the energy jump across that step.
std::pair<DensityOperator, CycleRecord> run_measurement_cycle(const DensityOperator& rho,
                                                              const EngineAssets& assets,
                                                              int cycle_index = 1);

struct EngineRun {
    EngineParams params;
    PowerMode mode;
    std::vector<CycleRecord> records;
    DensityOperator final_state;
    double propagator_dtau = 0.0;
};

/// Drive n_cycles cycles from `initial` (default: the cold thermal state of
/// the bare oscillator, piston advanced). Deterministic given params.
EngineRun run_engine(const EngineParams& params, PowerMode mode, int n_cycles,
                     const std::optional<DensityOperator>& initial = std::nullopt);

/// net_work / q_in. Throws UndefinedEfficiencyError when q_in == 0.
double cycle_efficiency(const CycleRecord& record);

/// net_work divided by the cycle duration: 4 tau_p for bath powering, 3 tau_p
/// for measurement powering (the measurement itself is instantaneous).
double cycle_power(const CycleRecord& record, PowerMode mode, double tau_p);

/// Adiabatic-limit efficiency estimate from the thermal-contrast traces.
/// `exact` keeps the piston-far interaction; `approximate` drops it.
struct TheoreticalEfficiency {
    double exact;
    double approximate;
};

TheoreticalEfficiency theoretical_efficiency(const DensityOperator& rho_high,
                                             const DensityOperator& rho_low,
                                             const HermitianOperator& phi_close,
                                             const HermitianOperator& phi_far,
                                             const HermitianOperator& h0);

enum class StrokeDirection { Retract, Advance };

struct AdiabaticityScan {
    std::vector<std::pair<double, double>> final_energies; // (tau_p, energy)
    double adiabatic_bound;
    double sudden_bound;
};

/// Evolve the appropriate ground state through the constant-speed ramp for
/// each tau_p and report the final energy together with the two analytic
/// bounds (infinitely slow and instantaneous piston).
AdiabaticityScan adiabaticity_scan(const EngineParams& params,
                                   const std::vector<double>& tau_p_values,
                                   StrokeDirection direction);

/// First cycle index (1-based) whose trailing `window` records keep the
/// spread (max - min) of all four phase energies below tol; nullopt if the
/// run never settles.
std::optional<int> detect_steady_state(std::span<const CycleRecord> records, int window,
                                       double tol);

/// Per-run aggregates over the post-steady-state tail (or the second half of
/// the run when the detector never fires).
struct RunSummary {
    std::optional<int> steady_state_index;
    int averaged_from_cycle = 0;
    double mean_net_work   = 0.0;
    double mean_q_in       = 0.0;
    double mean_efficiency = 0.0;
    double mean_power      = 0.0;
    double cumulative_efficiency = 0.0; // total work / total heat, whole run
};

RunSummary summarize_run(const EngineRun& run, int window = 10, double tol = 1e-3);

/// Least-squares slope of y over x = cycle_index for records[first..last).
double energy_slope(std::span<const CycleRecord> records, std::size_t first, std::size_t last,
                    double CycleRecord::*field);

} // namespace qpiston
