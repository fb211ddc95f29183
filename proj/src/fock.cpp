#include "qpiston/fock.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

namespace qpiston {
namespace {

const double kPiToMinusQuarter = std::pow(kPi, -0.25);

void require_order(int n)
{
    if (n < 0)
        throw ArgumentError("hermite order must be non-negative");
    if (n > kMaxHermiteOrder)
        throw BasisOverflowError("hermite order " + std::to_string(n) + " exceeds supported maximum " +
                                 std::to_string(kMaxHermiteOrder));
}

} // namespace

FockSpace::FockSpace(int cutoff_states)
    : cutoff(cutoff_states)
{
    if (cutoff < 2)
        throw ArgumentError("FockSpace: cutoff must be at least 2");
    if (cutoff > kMaxHermiteOrder)
        throw BasisOverflowError("FockSpace: cutoff exceeds supported basis order");
}

double hermite_function(int n, double x)
{
    require_order(n);
    if (!std::isfinite(x))
        throw ArgumentError("hermite_function: x must be finite");
    double prev = 0.0;
    double cur  = kPiToMinusQuarter * std::exp(-0.5 * x * x);
    for (int m = 0; m < n; ++m) {
        const double next = x * std::sqrt(2.0 / (m + 1)) * cur - std::sqrt(double(m) / (m + 1)) * prev;
        prev = cur;
        cur  = next;
    }
    return cur;
}

RealVector scaled_hermite_functions(int max_order, double x)
{
    require_order(max_order);
    RealVector h(max_order + 1);
    h[0] = kPiToMinusQuarter;
    if (max_order >= 1)
        h[1] = x * std::sqrt(2.0) * h[0];
    for (int m = 1; m < max_order; ++m)
        h[m + 1] = x * std::sqrt(2.0 / (m + 1)) * h[m] - std::sqrt(double(m) / (m + 1)) * h[m - 1];
    return h;
}

QuadratureRule build_quadrature(int node_count)
{
    if (node_count < 1)
        throw ArgumentError("build_quadrature: node_count must be positive");

    // Golub-Welsch: the Jacobi matrix of the Hermite recurrence has zero
    // diagonal and off-diagonal beta_i = sqrt(i/2). Eigenvalues are the nodes,
    // weights are sqrt(pi) times the squared first eigenvector components.
    const Index n = node_count;
    RealVector diag = RealVector::Zero(n);
    RealVector sub(n > 1 ? n - 1 : 0);
    for (Index i = 0; i + 1 < n; ++i)
        sub[i] = std::sqrt(0.5 * double(i + 1));

    Eigen::SelfAdjointEigenSolver<RealMatrix> solver;
    solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    if (solver.info() != Eigen::Success)
        throw NumericalError("build_quadrature: tridiagonal eigensolve failed");

    QuadratureRule rule;
    rule.nodes   = solver.eigenvalues();
    rule.weights = std::sqrt(kPi) * solver.eigenvectors().row(0).transpose().array().square();

    // The eigensolve delivers the +/- node symmetry only to round-off;
    // enforce it exactly.
    for (Index i = 0; i < n / 2; ++i) {
        const Index j = n - 1 - i;
        const double x = 0.5 * (rule.nodes[j] - rule.nodes[i]);
        const double w = 0.5 * (rule.weights[i] + rule.weights[j]);
        rule.nodes[i] = -x;
        rule.nodes[j] = x;
        rule.weights[i] = rule.weights[j] = w;
    }
    if (n % 2 == 1)
        rule.nodes[n / 2] = 0.0;
    return rule;
}

namespace {

// One pass of the quadrature sum. For a centered potential the integrand of
// every odd j+k element is odd, so those elements vanish by the parity
// selection rule; they are pinned to exactly zero rather than left at the
// level of quadrature round-off.
RealMatrix coupling_sum(const FockSpace& space, double width, double center,
                        const QuadratureRule& rule)
{
    const int top = space.cutoff - 1;
    const double inv_two_w2 = 1.0 / (2.0 * width * width);

    RealMatrix g = RealMatrix::Zero(space.cutoff, space.cutoff);
    for (Index m = 0; m < rule.node_count(); ++m) {
        const double x = rule.nodes[m];
        const double dx = x - center;
        const double f = rule.weights[m] * std::exp(-dx * dx * inv_two_w2);
        if (f == 0.0)
            continue;
        const RealVector h = scaled_hermite_functions(top, x);
        g.selfadjointView<Eigen::Lower>().rankUpdate(h, f);
    }
    RealMatrix full = g.selfadjointView<Eigen::Lower>();
    if (center == 0.0) {
        for (Index j = 0; j < full.rows(); ++j)
            for (Index k = (j % 2 == 0) ? 1 : 0; k < full.cols(); k += 2)
                full(j, k) = 0.0;
    }
    return full;
}

} // namespace

HermitianOperator gaussian_coupling_matrix(const FockSpace& space, double width,
                                           double center, const QuadratureRule& rule)
{
    if (width <= 0.0)
        throw ArgumentError("gaussian_coupling_matrix: width must be positive");
    if (rule.node_count() < 1)
        throw ArgumentError("gaussian_coupling_matrix: empty quadrature rule");

    const RealMatrix g = coupling_sum(space, width, center, rule);
    const RealMatrix g_refined =
        coupling_sum(space, width, center, build_quadrature(int(rule.node_count()) * 2));
    const double drift = (g - g_refined).cwiseAbs().maxCoeff();
    if (drift > 1e-10)
        throw QuadratureConvergenceError("gaussian_coupling_matrix: doubling the rule moved elements by " +
                                         std::to_string(drift));
    if (g.cwiseAbs().maxCoeff() > 1.0 + 1e-8)
        throw QuadratureConvergenceError("gaussian_coupling_matrix: entries escaped [-1, 1]");
    return HermitianOperator(g.cast<Complex>());
}

HermitianOperator bare_hamiltonian(const FockSpace& space)
{
    Vector d(space.dim());
    for (Index j = 0; j < space.dim(); ++j)
        d[j] = Complex(double(j) + 0.5);
    return HermitianOperator(Matrix(d.asDiagonal()));
}

} // namespace qpiston
