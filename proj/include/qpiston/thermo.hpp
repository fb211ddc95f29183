#pragma once

#include "qpiston/model.hpp"
#include "qpiston/types.hpp"

namespace qpiston {

/// Dimensionless temperature omega_T = k_B T / (hbar Omega).
struct ThermalSpec {
    double omega_T;
    explicit ThermalSpec(double omega) : omega_T(omega)
    {
        if (!(omega_T > 0.0))
            throw ArgumentError("ThermalSpec: omega_T must be positive");
    }
};

/// Population tolerances for the truncated thermal state. Leakage above
/// `warn` flags the state; above `fail` the construction aborts, since a
/// silently truncated hot bath corrupts every subsequent collision.
struct CutoffPolicy {
    double warn = 1e-10;
    double fail = 1e-4;
};

/// Population of the top retained Fock state of a thermal state, from the
/// geometric series: e^{-(N-1)/w} (1 - e^{-1/w}) / (1 - e^{-N/w}).
double thermal_top_population(const FockSpace& space, const ThermalSpec& spec);

/// True when the truncated thermal state leaks beyond the warn threshold.
bool thermal_cutoff_warning(const FockSpace& space, const ThermalSpec& spec,
                            const CutoffPolicy& policy = {});

/// Diagonal thermal state with populations proportional to e^{-j/omega_T}
/// (the bare number operator; the zero-point 1/2 cancels in normalization).
/// Throws CutoffError when the top-state population exceeds policy.fail.
DensityOperator thermal_state(const FockSpace& space, const ThermalSpec& spec,
                              const CutoffPolicy& policy = {});

/// Kronecker product with the fluid factor first (slow index).
Matrix tensor_product(const Matrix& a, const Matrix& b);

/// Trace out the bath factor: out[j][j'] = sum_k rho[(j,k)][(j',k)].
Matrix partial_trace_bath(const Matrix& rho_composite, Index fluid_dim);
DensityOperator partial_trace_bath(const DensityOperator& rho_composite, Index fluid_dim);

/// Unselective number-basis measurement: keep the diagonal, drop coherences.
DensityOperator measure(const DensityOperator& rho);
Matrix measure_raw(const Matrix& rho);

/// Re tr(rho H); the imaginary residual must stay below 1e-10.
double expected_energy(const DensityOperator& rho, const HermitianOperator& h);
double expected_energy_raw(const Matrix& rho, const Matrix& h);

/// One fluid-bath collision: rho -> tr_b[ B (rho (x) rho_bath) B^dagger ].
///
/// Materializing the N^2-dimensional composite every collision would cost a
/// dense N^2 x N^2 sandwich; instead the contraction is evaluated blockwise.
/// With composite indices (j,k) = j*M + k (fluid slow) the output is
///
///   out[j][j'] = sum_{k} sum_{a,a',m,m'} B[(j,k),(a,m)] rho[a,a']
///                rho_b[m,m'] conj(B[(j',k),(a',m')])
///
/// contracted in three stages, each a dense product over one index group.
/// The channel precomputes a row-block repacking of B once so repeated
/// applications (one per cycle for 80 cycles) only pay the small products.
class CollisionChannel {
public:
    /// `b` is the joint evolution operator on the composite space (dimension
    /// fluid_dim * bath_dim), `bath` the state the ancilla is reset to before
    /// every collision.
    CollisionChannel(const UnitaryOperator& b, const DensityOperator& bath, Index fluid_dim);

    /// Apply one collision. Validates the output channel invariants.
    DensityOperator apply(const DensityOperator& rho) const;

    /// Same, on raw matrices (no invariant validation); the cycle driver
    /// validates once per cycle.
    Matrix apply_raw(const Matrix& rho) const;

    Index fluid_dim() const { return fluid_dim_; }
    Index bath_dim() const { return bath_dim_; }

private:
    Index fluid_dim_;
    Index bath_dim_;
    Matrix b_;          // composite unitary, column-major, (j,k) rows
    Matrix b_packed_;   // rows (c*M + k), cols j: B[(j,k), c] repacked
    Matrix bath_;       // ancilla reset state
    bool bath_diagonal_;
    RealVector bath_populations_;
};

/// One-shot collision (builds a temporary channel).
DensityOperator bath_collision(const DensityOperator& rho, const DensityOperator& bath,
                               const UnitaryOperator& b_unitary, Index fluid_dim);

/// tr(Phi(y) rho_thermal(omega)) over the grid; rows follow omega_grid,
/// columns follow y_grid.
RealMatrix interaction_energy_map(const EngineModel& model, const RealVector& omega_grid,
                                  const RealVector& y_grid, const CutoffPolicy& policy = {});

} // namespace qpiston
