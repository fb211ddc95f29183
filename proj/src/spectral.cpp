#include "qpiston/spectral.hpp"

#include <Eigen/Eigenvalues>

#ifdef QPISTON_WITH_LAPACKE
#include <lapacke.h>
#endif

namespace qpiston {

void symmetric_eigendecomposition(const RealMatrix& h, RealVector& evals, RealMatrix& evecs)
{
#ifdef QPISTON_WITH_LAPACKE
    const lapack_int n = lapack_int(h.rows());
    evecs = h;
    evals.resize(n);
    const lapack_int info =
        LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', n, evecs.data(), n, evals.data());
    if (info == 0)
        return;
    // fall through to Eigen on LAPACK failure
#endif
    Eigen::SelfAdjointEigenSolver<RealMatrix> solver(h);
    if (solver.info() != Eigen::Success)
        throw NumericalError("symmetric_eigendecomposition failed");
    evals = solver.eigenvalues();
    evecs = solver.eigenvectors();
}

void hermitian_eigendecomposition(const Matrix& h, RealVector& evals, Matrix& evecs)
{
    // Every Hamiltonian in this model is real symmetric; solve those in real
    // arithmetic, which is substantially cheaper at composite-space sizes.
    if (h.imag().cwiseAbs().maxCoeff() == 0.0) {
        RealMatrix v;
        symmetric_eigendecomposition(h.real(), evals, v);
        evecs = v.cast<Complex>();
        return;
    }
#ifdef QPISTON_WITH_LAPACKE
    {
        const lapack_int n = lapack_int(h.rows());
        evecs = h;
        evals.resize(n);
        const lapack_int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, 'V', 'L', n,
                                               reinterpret_cast<lapack_complex_double*>(evecs.data()),
                                               n, evals.data());
        if (info == 0)
            return;
    }
#endif
    Eigen::SelfAdjointEigenSolver<Matrix> solver(h);
    if (solver.info() != Eigen::Success)
        throw NumericalError("hermitian_eigendecomposition failed");
    evals = solver.eigenvalues();
    evecs = solver.eigenvectors();
}

} // namespace qpiston
