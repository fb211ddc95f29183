#include "qpiston/model.hpp"

#include <unsupported/Eigen/KroneckerProduct>

namespace qpiston {

PistonTrajectory::PistonTrajectory(double y_init_, double y_final_, double tau_p_)
    : y_init(y_init_), y_final(y_final_), tau_p(tau_p_)
{
    if (!(tau_p > 0.0))
        throw ArgumentError("PistonTrajectory: tau_p must be positive");
}

double piston_position(const PistonTrajectory& traj, double tau)
{
    if (tau < 0.0 || tau > traj.tau_p)
        throw ArgumentError("piston_position: tau outside [0, tau_p]");
    return traj.y_init + tau * (traj.y_final - traj.y_init) / traj.tau_p;
}

void EngineParams::validate() const
{
    if (!(sigma > 0.0))
        throw ArgumentError("EngineParams: sigma must be positive");
    if (!(tau_p > 0.0))
        throw ArgumentError("EngineParams: tau_p must be positive");
    if (!(lambda > 0.0))
        throw ArgumentError("EngineParams: lambda must be positive");
    if (!(resolved_tau_b() > 0.0))
        throw ArgumentError("EngineParams: tau_b must be positive");
    if (cutoff < 2)
        throw ArgumentError("EngineParams: cutoff must be at least 2");
    if (!(dtau > 0.0))
        throw ArgumentError("EngineParams: dtau must be positive");
    if (!(omega_hot > 0.0))
        throw ArgumentError("EngineParams: omega_hot must be positive");
    if (!(omega_cold > 0.0))
        throw ArgumentError("EngineParams: omega_cold must be positive");
    if (!(cutoff_fail_threshold > 0.0))
        throw ArgumentError("EngineParams: cutoff_fail_threshold must be positive");
}

namespace {

HermitianOperator build_coupling(const FockSpace& space, double width, double center)
{
    return gaussian_coupling_matrix(space, width, center,
                                    build_quadrature(default_node_count(space)));
}

const EngineParams& validated(const EngineParams& p)
{
    p.validate();
    return p;
}

} // namespace

EngineModel::EngineModel(const EngineParams& params)
    : params_(validated(params)),
      space_(params.cutoff),
      h0_(bare_hamiltonian(space_)),
      piston_coupling_(build_coupling(space_, params.sigma, 0.0)),
      bath_coupling_fluid_(build_coupling(space_, params.lambda, params.coupling_offset_fluid)),
      bath_coupling_bath_(params.coupling_offset_bath == params.coupling_offset_fluid
                              ? bath_coupling_fluid_
                              : build_coupling(space_, params.lambda, params.coupling_offset_bath))
{
}

double EngineModel::interaction_scale(double y) const
{
    return params_.phi0 * std::exp(-y * y / (2.0 * params_.sigma * params_.sigma));
}

Matrix EngineModel::interaction(double y) const
{
    return interaction_scale(y) * piston_coupling_.matrix();
}

HermitianOperator EngineModel::hamiltonian(double y) const
{
    return HermitianOperator(h0_.matrix() + interaction(y));
}

HermitianOperator EngineModel::composite_bath_hamiltonian(double y) const
{
    const Index n = dim();
    const Matrix id = Matrix::Identity(n, n);
    const Matrix fluid = h0_.matrix() + interaction(y);
    Matrix h = Eigen::kroneckerProduct(fluid, id).eval();
    h += Eigen::kroneckerProduct(id, h0_.matrix());
    h += params_.bath_amp *
         Eigen::kroneckerProduct(bath_coupling_fluid_.matrix(), bath_coupling_bath_.matrix());
    return HermitianOperator(std::move(h));
}

double EngineModel::spectral_bound() const
{
    // |lambda(H0 + s G)| <= (N - 1/2) + |phi0|, since 0 <= G <= 1.
    return (double(space_.cutoff) - 0.5) + std::abs(params_.phi0);
}

HermitianOperator piston_interaction(const EngineParams& params,
                                     const HermitianOperator& coupling_matrix, double y)
{
    const double s = params.phi0 * std::exp(-y * y / (2.0 * params.sigma * params.sigma));
    return HermitianOperator(s * coupling_matrix.matrix());
}

HermitianOperator engine_hamiltonian(const EngineParams& params, double y)
{
    return EngineModel(params).hamiltonian(y);
}

} // namespace qpiston
