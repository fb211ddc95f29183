#pragma once

#include <complex>
#include <numbers>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "qpiston/errors.hpp"

namespace qpiston {

using Complex    = std::complex<double>;
using Matrix     = Eigen::MatrixXcd;
using Vector     = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using Index      = Eigen::Index;

inline constexpr double kPi    = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

inline double hermiticity_defect(const Matrix& m)
{
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

inline double unitarity_defect(const Matrix& u)
{
    return (u.adjoint() * u - Matrix::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff();
}

/// Dense Hermitian matrix. Construction checks the adjoint defect and then
/// symmetrizes, absorbing round-off from quadrature or accumulation.
class HermitianOperator {
public:
    explicit HermitianOperator(Matrix m, double tol = 1e-12)
    {
        if (m.rows() != m.cols() || m.rows() < 1)
            throw ArgumentError("HermitianOperator: matrix must be square and non-empty");
        const double defect = hermiticity_defect(m);
        if (defect > tol)
            throw InvariantViolation("HermitianOperator: adjoint defect " + std::to_string(defect));
        m_ = 0.5 * (m + m.adjoint().eval());
    }

    Index dim() const { return m_.rows(); }
    const Matrix& matrix() const { return m_; }

private:
    Matrix m_;
};

/// Dense unitary. The defect check is a full U†U product; for the composite
/// bath evolution operators this is the honest (and not free) verification.
class UnitaryOperator {
public:
    explicit UnitaryOperator(Matrix u, double tol = 1e-8)
        : m_(std::move(u))
    {
        if (m_.rows() != m_.cols() || m_.rows() < 1)
            throw ArgumentError("UnitaryOperator: matrix must be square and non-empty");
        const double defect = unitarity_defect(m_);
        if (defect > tol)
            throw InvariantViolation("UnitaryOperator: unitarity defect " + std::to_string(defect));
    }

    Index dim() const { return m_.rows(); }
    const Matrix& matrix() const { return m_; }

private:
    Matrix m_;
};

/// Normalized pure state.
class StateVector {
public:
    explicit StateVector(Vector v, double tol = 1e-8)
        : v_(std::move(v))
    {
        if (v_.size() < 1)
            throw ArgumentError("StateVector: empty vector");
        const double defect = std::abs(v_.norm() - 1.0);
        if (defect > tol)
            throw InvariantViolation("StateVector: norm defect " + std::to_string(defect));
    }

    static StateVector basis_state(Index dim, Index j)
    {
        if (j < 0 || j >= dim)
            throw ArgumentError("StateVector::basis_state: index out of range");
        Vector v = Vector::Zero(dim);
        v[j] = 1.0;
        return StateVector(std::move(v));
    }

    Index dim() const { return v_.size(); }
    const Vector& vector() const { return v_; }

private:
    Vector v_;
};

/// Unit-trace, Hermitian, positive-semidefinite state. Construction
/// re-symmetrizes and verifies all three invariants (the PSD check is an
/// eigenvalue solve, so keep the hot paths on raw matrices and wrap last).
class DensityOperator {
public:
    struct Tolerances {
        double trace = 1e-10;
        double herm  = 1e-10;
        double psd   = 1e-8;
    };

    explicit DensityOperator(Matrix m, Tolerances tol = {})
    {
        if (m.rows() != m.cols() || m.rows() < 1)
            throw ArgumentError("DensityOperator: matrix must be square and non-empty");
        const double trace_defect = std::abs(m.trace() - Complex(1.0));
        if (trace_defect > tol.trace)
            throw InvariantViolation("DensityOperator: trace defect " + std::to_string(trace_defect));
        const double herm_defect = hermiticity_defect(m);
        if (herm_defect > tol.herm)
            throw InvariantViolation("DensityOperator: adjoint defect " + std::to_string(herm_defect));
        m_ = 0.5 * (m + m.adjoint().eval());
        const double lambda_min =
            Eigen::SelfAdjointEigenSolver<Matrix>(m_, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
        if (lambda_min < -tol.psd)
            throw InvariantViolation("DensityOperator: negative eigenvalue " + std::to_string(lambda_min));
    }

    static DensityOperator pure(const StateVector& psi)
    {
        return DensityOperator(psi.vector() * psi.vector().adjoint());
    }

    Index dim() const { return m_.rows(); }
    const Matrix& matrix() const { return m_; }

    double purity() const { return (m_ * m_).trace().real(); }

    double min_eigenvalue() const
    {
        return Eigen::SelfAdjointEigenSolver<Matrix>(m_, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
    }

private:
    Matrix m_;
};

} // namespace qpiston
