#include "qpiston/dynamics.hpp"

namespace qpiston {

UnitaryOperator hermitian_expm(const HermitianOperator& h, double duration)
{
    RealVector evals;
    const Matrix& hm = h.matrix();

    // Real-symmetric generators (every Hamiltonian in this model) assemble
    // exp(-i theta) = cos(theta) - i sin(theta) from two real products.
    if (hm.imag().cwiseAbs().maxCoeff() == 0.0) {
        RealMatrix v;
        symmetric_eigendecomposition(hm.real(), evals, v);
        const RealVector theta = kTwoPi * duration * evals;
        const RealMatrix vc = v * theta.array().cos().matrix().asDiagonal();
        const RealMatrix vs = v * theta.array().sin().matrix().asDiagonal();
        Matrix u(hm.rows(), hm.cols());
        u.real() = vc * v.transpose();
        u.imag() = -(vs * v.transpose());
        return UnitaryOperator(std::move(u), 1e-10);
    }

    Matrix v;
    hermitian_eigendecomposition(hm, evals, v);
    Vector phases(evals.size());
    for (Index i = 0; i < evals.size(); ++i)
        phases[i] = std::exp(Complex(0.0, -kTwoPi * duration * evals[i]));
    Matrix u = (v * phases.asDiagonal()) * v.adjoint();
    return UnitaryOperator(std::move(u), 1e-10);
}

DensityOperator conjugate_density(const DensityOperator& rho, const UnitaryOperator& u)
{
    if (rho.dim() != u.dim())
        throw ArgumentError("conjugate_density: dimension mismatch");
    Matrix out = u.matrix() * rho.matrix() * u.matrix().adjoint();
    return DensityOperator(std::move(out));
}

} // namespace qpiston
