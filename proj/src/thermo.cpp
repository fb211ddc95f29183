#include "qpiston/thermo.hpp"

#include <cmath>

#include <unsupported/Eigen/KroneckerProduct>

namespace qpiston {

namespace {

// Populations of the truncated geometric distribution e^{-j/omega}/Z.
RealVector thermal_populations(Index n, double omega)
{
    const double r = std::exp(-1.0 / omega);
    RealVector p(n);
    double v = 1.0;
    for (Index j = 0; j < n; ++j) {
        p[j] = v;
        v *= r;
    }
    p /= p.sum();
    return p;
}

} // namespace

double thermal_top_population(const FockSpace& space, const ThermalSpec& spec)
{
    return thermal_populations(space.dim(), spec.omega_T)[space.dim() - 1];
}

bool thermal_cutoff_warning(const FockSpace& space, const ThermalSpec& spec,
                            const CutoffPolicy& policy)
{
    return thermal_top_population(space, spec) > policy.warn;
}

DensityOperator thermal_state(const FockSpace& space, const ThermalSpec& spec,
                              const CutoffPolicy& policy)
{
    const RealVector p = thermal_populations(space.dim(), spec.omega_T);
    const double top = p[space.dim() - 1];
    if (top > policy.fail)
        throw CutoffError("thermal_state: top-state population " + std::to_string(top) +
                          " exceeds cutoff failure threshold at omega_T = " +
                          std::to_string(spec.omega_T));
    Matrix rho = Matrix::Zero(space.dim(), space.dim());
    rho.diagonal() = p.cast<Complex>();
    return DensityOperator(std::move(rho));
}

Matrix tensor_product(const Matrix& a, const Matrix& b)
{
    return Eigen::kroneckerProduct(a, b);
}

Matrix partial_trace_bath(const Matrix& rho_composite, Index fluid_dim)
{
    if (fluid_dim < 1 || rho_composite.rows() != rho_composite.cols() ||
        rho_composite.rows() % fluid_dim != 0)
        throw ArgumentError("partial_trace_bath: composite dimension must factor as fluid*bath");
    const Index m = rho_composite.rows() / fluid_dim;
    Matrix out(fluid_dim, fluid_dim);
    for (Index j = 0; j < fluid_dim; ++j)
        for (Index jp = 0; jp < fluid_dim; ++jp)
            out(j, jp) = rho_composite.block(j * m, jp * m, m, m).trace();
    return out;
}

DensityOperator partial_trace_bath(const DensityOperator& rho_composite, Index fluid_dim)
{
    return DensityOperator(partial_trace_bath(rho_composite.matrix(), fluid_dim));
}

Matrix measure_raw(const Matrix& rho)
{
    Matrix out = Matrix::Zero(rho.rows(), rho.cols());
    out.diagonal() = rho.diagonal();
    return out;
}

DensityOperator measure(const DensityOperator& rho)
{
    return DensityOperator(measure_raw(rho.matrix()));
}

double expected_energy_raw(const Matrix& rho, const Matrix& h)
{
    if (rho.rows() != h.rows() || rho.cols() != h.cols())
        throw ArgumentError("expected_energy: dimension mismatch");
    const Complex t = rho.transpose().cwiseProduct(h).sum();
    if (std::abs(t.imag()) > 1e-10)
        throw NumericalError("expected_energy: imaginary residual " + std::to_string(t.imag()));
    return t.real();
}

double expected_energy(const DensityOperator& rho, const HermitianOperator& h)
{
    return expected_energy_raw(rho.matrix(), h.matrix());
}

CollisionChannel::CollisionChannel(const UnitaryOperator& b, const DensityOperator& bath,
                                   Index fluid_dim)
    : fluid_dim_(fluid_dim)
{
    if (fluid_dim < 1 || b.dim() % fluid_dim != 0)
        throw ArgumentError("CollisionChannel: composite dimension must factor as fluid*bath");
    bath_dim_ = b.dim() / fluid_dim;
    if (bath.dim() != bath_dim_)
        throw ArgumentError("CollisionChannel: bath state dimension mismatch");
    b_ = b.matrix();
    bath_ = bath.matrix();

    Matrix offdiag = bath_;
    offdiag.diagonal().setZero();
    bath_diagonal_ = max_abs(offdiag) < 1e-15;
    if (bath_diagonal_)
        bath_populations_ = bath_.diagonal().real();

    // Repack B so the trailing contraction over (bath-out, composite-in) is
    // one contiguous product: b_packed_[(c*M + k)][j] = B[(j*M + k)][c].
    const Index n = fluid_dim_, m = bath_dim_, dim = b_.rows();
    b_packed_.resize(dim * m, n);
    for (Index j = 0; j < n; ++j)
        for (Index c = 0; c < dim; ++c)
            b_packed_.col(j).segment(c * m, m) = b_.col(c).segment(j * m, m);
}

Matrix CollisionChannel::apply_raw(const Matrix& rho) const
{
    const Index n = fluid_dim_, m = bath_dim_, dim = b_.rows();
    if (rho.rows() != n || rho.cols() != n)
        throw ArgumentError("CollisionChannel: fluid state dimension mismatch");

    // Stage A: contract the fluid input index. Viewing B as (dim*M) x N over
    // its fluid-input column blocks turns this into a single product.
    Eigen::Map<const Matrix> bflat(b_.data(), dim * m, n);
    Matrix g(dim * m, n);
    g.noalias() = bflat * rho;

    // Stage B: contract the bath input index block by block.
    if (bath_diagonal_) {
        for (Index a = 0; a < n; ++a) {
            Eigen::Map<Matrix> blk(g.col(a).data(), dim, m);
            for (Index q = 0; q < m; ++q)
                blk.col(q) *= bath_populations_[q];
        }
    } else {
        Matrix t1 = std::move(g);
        g.resize(dim * m, n);
        for (Index a = 0; a < n; ++a) {
            Eigen::Map<const Matrix> blk(t1.col(a).data(), dim, m);
            Eigen::Map<Matrix> out(g.col(a).data(), dim, m);
            out.noalias() = blk * bath_;
        }
    }

    // Stage C: repack and contract bath-out and the whole composite input.
    Eigen::Map<const Matrix> gmat(g.data(), dim, dim);
    Matrix g_packed(dim * m, n);
    for (Index j = 0; j < n; ++j)
        for (Index c = 0; c < dim; ++c)
            g_packed.col(j).segment(c * m, m) = gmat.col(c).segment(j * m, m);

    Matrix out_t(n, n);
    out_t.noalias() = b_packed_.adjoint() * g_packed;
    Matrix out = out_t.transpose();
    out = 0.5 * (out + out.adjoint().eval());
    return out;
}

DensityOperator CollisionChannel::apply(const DensityOperator& rho) const
{
    try {
        return DensityOperator(apply_raw(rho.matrix()));
    } catch (const InvariantViolation& e) {
        throw ChannelError(std::string("bath collision output: ") + e.what());
    }
}

DensityOperator bath_collision(const DensityOperator& rho, const DensityOperator& bath,
                               const UnitaryOperator& b_unitary, Index fluid_dim)
{
    return CollisionChannel(b_unitary, bath, fluid_dim).apply(rho);
}

RealMatrix interaction_energy_map(const EngineModel& model, const RealVector& omega_grid,
                                  const RealVector& y_grid, const CutoffPolicy& policy)
{
    if (omega_grid.size() == 0 || y_grid.size() == 0)
        throw ArgumentError("interaction_energy_map: empty grid");
    const RealVector coupling_diag = model.piston_coupling().diagonal().real();
    RealMatrix map(omega_grid.size(), y_grid.size());
    for (Index i = 0; i < omega_grid.size(); ++i) {
        const RealVector p = thermal_state(model.space(), ThermalSpec(omega_grid[i]), policy)
                                 .matrix()
                                 .diagonal()
                                 .real();
        const double thermal_overlap = p.dot(coupling_diag);
        for (Index j = 0; j < y_grid.size(); ++j)
            map(i, j) = model.interaction_scale(y_grid[j]) * thermal_overlap;
    }
    return map;
}

} // namespace qpiston
