#pragma once

#include "qpiston/types.hpp"

namespace qpiston {

/// Highest oscillator eigenfunction order the recurrences are rated for.
/// Beyond this the weight-stripped polynomials h_n(x) = psi_n(x) e^{x^2/2}
/// can overflow at the far quadrature nodes.
inline constexpr int kMaxHermiteOrder = 200;

/// Truncated single-oscillator basis {|0>, ..., |N-1>}. Lengths are in
/// quantum-oscillator lengths, energies in units of the oscillator quantum,
/// times in oscillator periods.
struct FockSpace {
    explicit FockSpace(int cutoff_states);

    int cutoff; // number of retained Fock states
    Index dim() const { return cutoff; }
};

/// Gauss-Hermite rule: integrates f(x) e^{-x^2} as sum_i w_i f(x_i).
/// Nodes are symmetrized in pairs about zero so that odd integrands cancel
/// exactly in the paired accumulation used by gaussian_coupling_matrix.
struct QuadratureRule {
    RealVector nodes;
    RealVector weights;
    Index node_count() const { return nodes.size(); }
};

/// Normalized oscillator eigenfunction psi_n(x), evaluated by the stable
/// three-term recurrence psi_{n+1} = x sqrt(2/(n+1)) psi_n - sqrt(n/(n+1)) psi_{n-1}.
double hermite_function(int n, double x);

/// Weight-stripped values h_n(x) = psi_n(x) e^{x^2/2} for n = 0..max_order,
/// by the same recurrence. These are what the Gauss-Hermite weight expects.
RealVector scaled_hermite_functions(int max_order, double x);

/// Gauss-Hermite rule of the given order, via the Golub-Welsch eigenproblem
/// of the Jacobi matrix. Exact for polynomials of degree <= 2n-1 against
/// the weight e^{-x^2}.
QuadratureRule build_quadrature(int node_count);

/// Node count used for production coupling matrices on a cutoff-N space.
inline int default_node_count(const FockSpace& space) { return 2 * space.cutoff + 64; }

/// Matrix of the Gaussian potential in the truncated Fock basis:
///   G[j][k] = integral psi_j(x) exp(-(x-center)^2 / (2 width^2)) psi_k(x) dx.
/// The integrand is evaluated as [psi_j e^{x^2/2}][psi_k e^{x^2/2}] g(x)
/// against the rule's weight. Recomputing with a doubled rule must move no
/// element by more than 1e-10, otherwise the rule is too coarse and a
/// QuadratureConvergenceError is thrown. Output is real, symmetric, with
/// entries in [-1, 1].
HermitianOperator gaussian_coupling_matrix(const FockSpace& space, double width,
                                           double center, const QuadratureRule& rule);

/// Bare oscillator Hamiltonian diag(j + 1/2).
HermitianOperator bare_hamiltonian(const FockSpace& space);

} // namespace qpiston
