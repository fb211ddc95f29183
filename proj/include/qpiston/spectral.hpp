#pragma once

#include "qpiston/types.hpp"

namespace qpiston {

/// Full eigendecomposition H = V diag(evals) V^dagger of a Hermitian matrix.
/// Routed through LAPACK's divide-and-conquer drivers when available (the
/// composite-space operators are 2601x2601), with Eigen as fallback. Real
/// symmetric input is detected and solved in real arithmetic.
void hermitian_eigendecomposition(const Matrix& h, RealVector& evals, Matrix& evecs);

/// Eigenvalues and eigenvectors of a real symmetric matrix.
void symmetric_eigendecomposition(const RealMatrix& h, RealVector& evals, RealMatrix& evecs);

} // namespace qpiston
