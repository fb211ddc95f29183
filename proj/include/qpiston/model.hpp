#pragma once

#include <cmath>
#include <optional>

#include "qpiston/fock.hpp"
#include "qpiston/types.hpp"

namespace qpiston {

/// Constant-speed piston ramp y(tau) = y_init + tau*(y_final - y_init)/tau_p.
struct PistonTrajectory {
    double y_init;
    double y_final;
    double tau_p;

    PistonTrajectory(double y_init_, double y_final_, double tau_p_);
};

/// y(tau) on the ramp; tau must lie in [0, tau_p].
double piston_position(const PistonTrajectory& traj, double tau);

/// Full parameter set of the engine. Defaults are the values used throughout
/// the simulations; sigma and tau_p carry no default and must be set.
/// Unset optional fields resolve as y_retracted = 10*sigma and tau_b = tau_p.
struct EngineParams {
    double sigma   = std::nan("");    // piston interaction width (required)
    double tau_p   = std::nan("");    // piston stroke duration (required)
    double phi0    = -5.0;            // piston interaction amplitude
    double y_advanced = 0.0;
    std::optional<double> y_retracted;
    double coupling_offset_fluid = 1.0; // bath-coupling Gaussian center on the fluid axis
    double coupling_offset_bath  = 1.0; // and on the bath axis
    double lambda  = 1.0;             // bath-coupling Gaussian width
    double bath_amp = 1.0;            // bath coupling amplitude
    double omega_hot  = 5.0;          // hot bath thermal frequency
    double omega_cold = 0.1;          // cold bath thermal frequency
    std::optional<double> tau_b;      // bath contact time
    int cutoff = 51;                  // Fock states per oscillator
    double dtau = 1e-3;               // integrator step for state evolution
    double cutoff_fail_threshold = 1e-4; // thermal top-population abort level

    double resolved_y_retracted() const { return y_retracted.value_or(10.0 * sigma); }
    double resolved_tau_b() const { return tau_b.value_or(tau_p); }

    /// Throws ArgumentError naming the offending field.
    void validate() const;
};

/// Cached operator set for one parameter choice: the sigma-width piston
/// coupling matrix is computed once and rescaled as the piston moves, and the
/// lambda-width bath coupling once per offset.
class EngineModel {
public:
    explicit EngineModel(const EngineParams& params);

    const EngineParams& params() const { return params_; }
    const FockSpace& space() const { return space_; }
    Index dim() const { return space_.dim(); }

    const Matrix& bare() const { return h0_.matrix(); }
    const Matrix& piston_coupling() const { return piston_coupling_.matrix(); }
    const Matrix& bath_coupling_fluid() const { return bath_coupling_fluid_.matrix(); }
    const Matrix& bath_coupling_bath() const { return bath_coupling_bath_.matrix(); }

    /// Scalar prefactor phi0 * exp(-y^2 / (2 sigma^2)) of the interaction.
    double interaction_scale(double y) const;

    /// Phi(y): the piston interaction matrix at piston position y.
    Matrix interaction(double y) const;

    /// H(y) = H0 + Phi(y).
    HermitianOperator hamiltonian(double y) const;

    /// Fluid (+) bath composite Hamiltonian with the piston frozen at y:
    /// [H0 + Phi(y)] (x) 1 + 1 (x) H0_bath + Y0 * Y_fluid (x) Y_bath,
    /// fluid factor first (slow index). Dimension N^2 x N^2.
    HermitianOperator composite_bath_hamiltonian(double y) const;

    /// Upper bound on |eigenvalue| of H(y) for any y; used to pick steps.
    double spectral_bound() const;

private:
    EngineParams params_;
    FockSpace space_;
    HermitianOperator h0_;
    HermitianOperator piston_coupling_;
    HermitianOperator bath_coupling_fluid_;
    HermitianOperator bath_coupling_bath_;
};

/// Phi0 * exp(-y^2/(2 sigma^2)) * coupling, the interaction rescaled to the
/// piston position.
HermitianOperator piston_interaction(const EngineParams& params,
                                     const HermitianOperator& coupling_matrix, double y);

/// H(y) on a freshly built model (convenience; prefer EngineModel for reuse).
HermitianOperator engine_hamiltonian(const EngineParams& params, double y);

/// Hamiltonian source for a piston ramp, for the integrators: returns
/// H(y(tau)) with the coupling matrix rescaled in place per call.
class RampHamiltonian {
public:
    RampHamiltonian(const EngineModel& model, PistonTrajectory traj)
        : model_(&model), traj_(traj), buffer_(model.bare()) {}

    const Matrix& operator()(double tau)
    {
        const double s = model_->interaction_scale(piston_position(traj_, tau));
        buffer_ = model_->bare() + s * model_->piston_coupling();
        return buffer_;
    }

    const PistonTrajectory& trajectory() const { return traj_; }

private:
    const EngineModel* model_;
    PistonTrajectory traj_;
    Matrix buffer_;
};

} // namespace qpiston
