#pragma once

#include <cmath>
#include <utility>

#include "qpiston/spectral.hpp"
#include "qpiston/types.hpp"

namespace qpiston {

namespace detail {

// Dormand-Prince fifth-order coefficients, used as a fixed-step scheme.
struct Rk5Tableau {
    static constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
    static constexpr double a21 = 1.0 / 5.0;
    static constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
    static constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
    static constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0,
                            a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
    static constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                            a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
    static constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0,
                            b5 = -2187.0 / 6784.0, b6 = 11.0 / 84.0;
};

} // namespace detail

/// Fixed-step RK5 integration of dX/dtau = -2*pi*i H(tau) X from tau0 to tau1.
/// X may be a state vector or a full operator; `ham(tau)` must return the
/// Hamiltonian matrix (by value or reference). dtau sets the nominal step; a
/// final shorter step absorbs any remainder of the span.
template <typename StateT, typename HamFn>
StateT rk5_schrodinger(StateT x, HamFn&& ham, double tau0, double tau1, double dtau)
{
    using T = detail::Rk5Tableau;
    if (dtau <= 0.0)
        throw ArgumentError("rk5_schrodinger: dtau must be positive");
    if (tau1 < tau0)
        throw ArgumentError("rk5_schrodinger: span must run forward");

    const double span = tau1 - tau0;
    if (span == 0.0)
        return x;
    const auto n_full = static_cast<long long>(std::floor(span / dtau * (1.0 + 1e-12)));
    const Complex rhs_factor(0.0, -kTwoPi);

    StateT k1, k2, k3, k4, k5, k6, stage;
    auto derivative = [&](double tau, const StateT& y, StateT& k) {
        decltype(auto) hmat = ham(tau);
        k.noalias() = hmat * y;
        k *= rhs_factor;
    };

    double tau = tau0;
    for (long long step = 0; step <= n_full; ++step) {
        const double h = (step < n_full) ? dtau : (tau1 - tau);
        if (h <= span * 1e-14)
            break;
        derivative(tau, x, k1);
        stage = x + h * T::a21 * k1;
        derivative(tau + T::c2 * h, stage, k2);
        stage = x + h * (T::a31 * k1 + T::a32 * k2);
        derivative(tau + T::c3 * h, stage, k3);
        stage = x + h * (T::a41 * k1 + T::a42 * k2 + T::a43 * k3);
        derivative(tau + T::c4 * h, stage, k4);
        stage = x + h * (T::a51 * k1 + T::a52 * k2 + T::a53 * k3 + T::a54 * k4);
        derivative(tau + T::c5 * h, stage, k5);
        stage = x + h * (T::a61 * k1 + T::a62 * k2 + T::a63 * k3 + T::a64 * k4 + T::a65 * k5);
        derivative(tau + h, stage, k6);
        x += h * (T::b1 * k1 + T::b3 * k3 + T::b4 * k4 + T::b5 * k5 + T::b6 * k6);
        tau = (step < n_full) ? tau0 + (step + 1) * dtau : tau1;
    }
    return x;
}

/// Integrate the state Schroedinger equation across [tau0, tau1]. The state
/// is never renormalized; a norm drift beyond 1e-5 aborts with StepSizeError,
/// since drift is the accuracy diagnostic of the fixed-step scheme.
template <typename HamFn>
StateVector evolve_state(const StateVector& psi0, HamFn&& ham, double tau0, double tau1,
                         double dtau)
{
    Vector v = rk5_schrodinger(Vector(psi0.vector()), std::forward<HamFn>(ham), tau0, tau1, dtau);
    const double drift = std::abs(v.norm() - 1.0);
    if (drift > 1e-5)
        throw StepSizeError("evolve_state: norm drift " + std::to_string(drift) +
                            "; refine dtau");
    return StateVector(std::move(v), 1e-5);
}

/// Integrate the propagator equation dU/dtau = -2*pi*i H(tau) U from the
/// identity. The result must pass the unitarity invariant; failure is
/// reported as a step-size problem.
template <typename HamFn>
UnitaryOperator propagator(HamFn&& ham, double tau0, double tau1, double dtau, Index dim)
{
    Matrix u = rk5_schrodinger(Matrix(Matrix::Identity(dim, dim)), std::forward<HamFn>(ham),
                               tau0, tau1, dtau);
    try {
        return UnitaryOperator(std::move(u));
    } catch (const InvariantViolation& e) {
        throw StepSizeError(std::string("propagator: ") + e.what() + "; refine dtau");
    }
}

/// Step size keeping the accumulated RK5 unitarity defect of a propagator
/// below `target_defect` over `span`, given a bound `e_max` on the largest
/// Hamiltonian eigenvalue magnitude. The per-step amplitude defect of the
/// scheme on a mode of frequency 2*pi*e is (2*pi*e*h)^6/3600; summed over
/// span/h steps and solved for h with a factor-2 safety margin. The result
/// is clamped to h_max and rounded down to divide the span evenly.
inline double unitary_safe_step(double e_max, double span, double target_defect, double h_max)
{
    if (span <= 0.0)
        return h_max;
    const double omega = kTwoPi * e_max;
    const double h5 = 3600.0 * (0.5 * target_defect) / (span * std::pow(omega, 6.0));
    double h = std::min(h_max, std::pow(h5, 0.2));
    const double n = std::ceil(span / h - 1e-9);
    return span / n;
}

/// exp(-2*pi*i * duration * H) by spectral decomposition of the Hermitian
/// generator. Exact to round-off, unitary to 1e-10.
UnitaryOperator hermitian_expm(const HermitianOperator& h, double duration);

/// U rho U^dagger, re-symmetrized.
DensityOperator conjugate_density(const DensityOperator& rho, const UnitaryOperator& u);

} // namespace qpiston
