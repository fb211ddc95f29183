#include <doctest.h>

#include <cmath>
#include <random>

#include "qpiston/dynamics.hpp"
#include "qpiston/thermo.hpp"

using namespace qpiston;

namespace {

Matrix random_unitary(Index n, unsigned seed)
{
    std::mt19937 rng(seed);
    std::normal_distribution<double> dist(0.0, 1.0);
    Matrix m(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j)
            m(i, j) = Complex(dist(rng), dist(rng));
    const Matrix h = 0.5 * (m + m.adjoint().eval());
    return hermitian_expm(HermitianOperator(h), 0.37).matrix();
}

Matrix random_density(Index n, unsigned seed)
{
    std::mt19937 rng(seed);
    std::normal_distribution<double> dist(0.0, 1.0);
    Matrix m(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j)
            m(i, j) = Complex(dist(rng), dist(rng));
    Matrix rho = m * m.adjoint();
    rho /= rho.trace();
    return rho;
}

// Geometric-series oracle for the truncated thermal top population.
double top_population_oracle(int n, double omega)
{
    const double r = std::exp(-1.0 / omega);
    return std::pow(r, n - 1) * (1.0 - r) / (1.0 - std::pow(r, n));
}

// Index-loop oracle for tr_b.
Matrix partial_trace_oracle(const Matrix& rho, Index nf)
{
    const Index m = rho.rows() / nf;
    Matrix out = Matrix::Zero(nf, nf);
    for (Index j = 0; j < nf; ++j)
        for (Index jp = 0; jp < nf; ++jp)
            for (Index k = 0; k < m; ++k)
                out(j, jp) += rho(j * m + k, jp * m + k);
    return out;
}

// Dense brute-force collision: build the composite, sandwich, trace out.
Matrix collision_oracle(const Matrix& rho, const Matrix& bath, const Matrix& b, Index nf)
{
    const Matrix composite = b * tensor_product(rho, bath) * b.adjoint();
    return partial_trace_oracle(composite, nf);
}

} // namespace

TEST_CASE("thermal_state: limits and Boltzmann ratios")
{
    const FockSpace space(51);

    // effectively zero temperature: a ground-state projector
    const Matrix cold = thermal_state(space, ThermalSpec(0.01)).matrix();
    CHECK(std::abs(cold(0, 0).real() - 1.0) < 1e-14);
    CHECK(cold.diagonal().tail(50).real().maxCoeff() < 1e-40);

    // Boltzmann ratio p1/p0 = e^{-1/omega}
    const Matrix warm = thermal_state(space, ThermalSpec(5.0)).matrix();
    const double ratio = (warm(1, 1) / warm(0, 0)).real();
    CHECK(std::abs(ratio - std::exp(-0.2)) < 1e-12);
    CHECK(std::abs(std::exp(-0.2) - 0.8187307530779818) < 1e-15);

    // populations strictly decreasing
    for (Index j = 0; j + 1 < 51; ++j)
        CHECK(warm(j, j).real() > warm(j + 1, j + 1).real());

    CHECK_THROWS_AS(ThermalSpec(0.0), ArgumentError);
}

TEST_CASE("thermal_state: cutoff policy warns at N=51 and fails at N=11 for omega=5")
{
    const FockSpace paper(51);
    const ThermalSpec hot(5.0);
    const double top = thermal_top_population(paper, hot);
    CHECK(std::abs(top - top_population_oracle(51, 5.0)) <= 1e-10 * top);
    CHECK(top < 1e-4);
    CHECK(thermal_cutoff_warning(paper, hot)); // leaks past 1e-10
    CHECK_NOTHROW(thermal_state(paper, hot));

    const FockSpace tight(11);
    CHECK(top_population_oracle(11, 5.0) > 1e-4);
    CHECK_THROWS_AS(thermal_state(tight, hot), CutoffError);
}

TEST_CASE("tensor_product: identities, diagonals and the loop oracle")
{
    const Matrix id = tensor_product(Matrix::Identity(3, 3), Matrix::Identity(4, 4));
    CHECK((id - Matrix::Identity(12, 12)).cwiseAbs().maxCoeff() == 0.0);

    Vector a(2), b(2);
    a << 2.0, 3.0;
    b << 5.0, 7.0;
    const Matrix d = tensor_product(Matrix(a.asDiagonal()), Matrix(b.asDiagonal()));
    // fluid index slow: diag = (10, 14, 15, 21)
    CHECK(d(0, 0) == Complex(10.0));
    CHECK(d(1, 1) == Complex(14.0));
    CHECK(d(2, 2) == Complex(15.0));
    CHECK(d(3, 3) == Complex(21.0));

    const Matrix x = random_density(2, 3), y = random_density(2, 4);
    const Matrix got = tensor_product(x, y);
    for (Index j = 0; j < 2; ++j)
        for (Index k = 0; k < 2; ++k)
            for (Index jp = 0; jp < 2; ++jp)
                for (Index kp = 0; kp < 2; ++kp)
                    CHECK(std::abs(got(j * 2 + k, jp * 2 + kp) - x(j, jp) * y(k, kp)) < 1e-14);
}

TEST_CASE("partial_trace_bath: product states, Bell state, random composite")
{
    const Matrix rho_f = random_density(3, 11);
    const Matrix rho_b = random_density(4, 12);
    const Matrix recovered = partial_trace_bath(tensor_product(rho_f, rho_b), 3);
    CHECK((recovered - rho_f).cwiseAbs().maxCoeff() < 1e-12);

    // maximally entangled pair on 2x2 traces to the maximally mixed state
    Vector bell = Vector::Zero(4);
    bell[0] = bell[3] = 1.0 / std::sqrt(2.0);
    const Matrix bell_marginal = partial_trace_bath(Matrix(bell * bell.adjoint()), 2);
    CHECK((bell_marginal - 0.5 * Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-14);

    // random 3x3 (x) 3x3 scrambled by a random unitary
    const Matrix u = random_unitary(9, 21);
    const Matrix composite = u * tensor_product(random_density(3, 13), random_density(3, 14)) *
                             u.adjoint();
    const Matrix got = partial_trace_bath(composite, 3);
    CHECK(std::abs(got.trace().real() - 1.0) < 1e-12);
    CHECK((got - partial_trace_oracle(composite, 3)).cwiseAbs().maxCoeff() < 1e-12);

    CHECK_THROWS_AS(partial_trace_bath(composite, 4), ArgumentError);
}

TEST_CASE("measure: coherence erasure, idempotence, purity pinching")
{
    Vector plus(2);
    plus << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
    const DensityOperator superposition = DensityOperator::pure(StateVector(plus));
    const DensityOperator measured = measure(superposition);
    CHECK(std::abs(measured.matrix()(0, 0).real() - 0.5) < 1e-14);
    CHECK(std::abs(measured.matrix()(1, 1).real() - 0.5) < 1e-14);
    CHECK(std::abs(measured.matrix()(0, 1)) == 0.0);

    for (unsigned seed : {31u, 32u, 33u}) {
        const DensityOperator rho{random_density(5, seed)};
        const DensityOperator once = measure(rho);
        const DensityOperator twice = measure(once);
        CHECK((once.matrix() - twice.matrix()).cwiseAbs().maxCoeff() == 0.0);
        CHECK(once.purity() <= rho.purity() + 1e-12);
        CHECK(std::abs(once.matrix().trace().real() - 1.0) < 1e-14);
    }

    const DensityOperator diag = thermal_state(FockSpace(6), ThermalSpec(2.0));
    CHECK((measure(diag).matrix() - diag.matrix()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("expected_energy: anchors and the Bose-Einstein oracle")
{
    const FockSpace space(4);
    const HermitianOperator h0 = bare_hamiltonian(space);
    const DensityOperator ground = DensityOperator::pure(StateVector::basis_state(4, 0));
    CHECK(expected_energy(ground, h0) == 0.5);

    // large cutoff thermal energy approaches 1/2 + 1/(e^{1/omega} - 1)
    const FockSpace big(200);
    const double got = expected_energy(thermal_state(big, ThermalSpec(5.0)),
                                       bare_hamiltonian(big));
    const double want = 0.5 + 1.0 / std::expm1(0.2);
    CHECK(std::abs(want - 5.0166250019773905) < 1e-12);
    CHECK(std::abs(got - want) < 1e-6);
}

TEST_CASE("CollisionChannel: matches the dense brute-force oracle")
{
    const Index nf = 3, nb = 3;
    const Matrix b = random_unitary(nf * nb, 41);
    const Matrix rho = random_density(nf, 42);

    // diagonal (thermal-like) bath
    const Matrix bath_diag = thermal_state(FockSpace(int(nb)), ThermalSpec(1.3)).matrix();
    const CollisionChannel diag_channel(UnitaryOperator(Matrix(b)),
                                        DensityOperator(Matrix(bath_diag)), nf);
    CHECK((diag_channel.apply_raw(rho) - collision_oracle(rho, bath_diag, b, nf))
              .cwiseAbs()
              .maxCoeff() < 1e-12);

    // non-diagonal bath exercises the general contraction path
    const Matrix bath_full = random_density(nb, 43);
    const CollisionChannel full_channel(UnitaryOperator(Matrix(b)),
                                        DensityOperator(Matrix(bath_full)), nf);
    CHECK((full_channel.apply_raw(rho) - collision_oracle(rho, bath_full, b, nf))
              .cwiseAbs()
              .maxCoeff() < 1e-12);

    // trace and positivity survive
    const DensityOperator out = full_channel.apply(DensityOperator(Matrix(rho)));
    CHECK(std::abs(out.matrix().trace().real() - 1.0) < 1e-10);
    CHECK(out.min_eigenvalue() > -1e-8);
}

TEST_CASE("bath_collision: decoupled evolution preserves the fluid spectrum")
{
    EngineParams p;
    p.sigma = 0.5;
    p.tau_p = 10.0;
    p.cutoff = 8;
    p.bath_amp = 0.0; // no fluid-bath coupling
    const EngineModel model(p);
    const UnitaryOperator b = hermitian_expm(model.composite_bath_hamiltonian(0.0), 1.7);
    const DensityOperator bath = thermal_state(model.space(), ThermalSpec(2.0));
    const DensityOperator rho{random_density(8, 51)};

    const DensityOperator out = bath_collision(rho, bath, b, 8);
    const RealVector before =
        Eigen::SelfAdjointEigenSolver<Matrix>(rho.matrix(), Eigen::EigenvaluesOnly).eigenvalues();
    const RealVector after =
        Eigen::SelfAdjointEigenSolver<Matrix>(out.matrix(), Eigen::EigenvaluesOnly).eigenvalues();
    CHECK((before - after).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("bath_collision: energy flows from hot to cold")
{
    EngineParams p;
    p.sigma = 0.5;
    p.tau_p = 10.0;
    p.tau_b = 5.0;
    p.cutoff = 21;
    p.cutoff_fail_threshold = 1e-2; // omega=5 leaks past 1e-4 at this cutoff
    const EngineModel model(p);
    const CutoffPolicy policy{1e-10, p.cutoff_fail_threshold};

    // cold fluid against a hot bath at the advanced position: energy rises
    {
        const UnitaryOperator b = hermitian_expm(model.composite_bath_hamiltonian(0.0), 5.0);
        const DensityOperator bath = thermal_state(model.space(), ThermalSpec(5.0), policy);
        const DensityOperator fluid = thermal_state(model.space(), ThermalSpec(0.1), policy);
        const DensityOperator out = bath_collision(fluid, bath, b, 21);
        const HermitianOperator h = model.hamiltonian(0.0);
        CHECK(expected_energy(out, h) > expected_energy(fluid, h));
    }

    // hot fluid against a cold bath at the retracted position: energy drops
    {
        const double y_ret = p.resolved_y_retracted();
        const UnitaryOperator b = hermitian_expm(model.composite_bath_hamiltonian(y_ret), 5.0);
        const DensityOperator bath = thermal_state(model.space(), ThermalSpec(0.1), policy);
        const DensityOperator fluid = thermal_state(model.space(), ThermalSpec(5.0), policy);
        const DensityOperator out = bath_collision(fluid, bath, b, 21);
        const HermitianOperator h = model.hamiltonian(y_ret);
        CHECK(expected_energy(out, h) < expected_energy(fluid, h));
    }
}

TEST_CASE("channel compositions preserve trace, hermiticity and positivity")
{
    const Matrix b = random_unitary(12, 71); // 4 x 3 composite
    const Matrix bath = random_density(3, 72);
    const CollisionChannel channel(UnitaryOperator(Matrix(b)), DensityOperator(Matrix(bath)), 4);
    const UnitaryOperator u = hermitian_expm(
        HermitianOperator(0.5 * (random_density(4, 73) + random_density(4, 73))), 0.9);

    for (unsigned seed : {81u, 82u}) {
        DensityOperator rho{random_density(4, seed)};
        rho = channel.apply(rho);
        rho = conjugate_density(rho, u);
        rho = measure(rho);
        CHECK(std::abs(rho.matrix().trace().real() - 1.0) < 1e-10);
        CHECK(hermiticity_defect(rho.matrix()) < 1e-10);
        CHECK(rho.min_eigenvalue() > -1e-8);
    }
}

TEST_CASE("partial_trace_bath composed with tensor_product is the identity")
{
    const Matrix rho_b = thermal_state(FockSpace(4), ThermalSpec(0.8)).matrix();
    for (unsigned seed : {91u, 92u}) {
        const Matrix rho = random_density(5, seed);
        const Matrix back = partial_trace_bath(tensor_product(rho, rho_b), 5);
        CHECK((back - rho).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("interaction_energy_map: retracted column, wide-well floor, monotonicity")
{
    EngineParams p;
    p.sigma = 2.0;
    p.tau_p = 10.0;
    p.cutoff = 51;
    const EngineModel model(p);

    RealVector omega(8), y(9);
    for (Index i = 0; i < omega.size(); ++i)
        omega[i] = 0.1 + (5.0 - 0.1) * double(i) / double(omega.size() - 1);
    for (Index j = 0; j < y.size(); ++j)
        y[j] = 10.0 * p.sigma * double(j) / double(y.size() - 1);

    const RealMatrix map = interaction_energy_map(model, omega, y);

    // retracted piston: negligible energy
    for (Index i = 0; i < omega.size(); ++i)
        CHECK(std::abs(map(i, y.size() - 1)) < 1e-9);

    // wide well, coldest row, advanced piston: approaches phi0 from above
    CHECK(map(0, 0) > -5.0);
    CHECK(map(0, 0) < -4.2);

    // |energy| non-increasing along both axes
    for (Index i = 0; i < omega.size(); ++i)
        for (Index j = 0; j + 1 < y.size(); ++j)
            CHECK(std::abs(map(i, j + 1)) <= std::abs(map(i, j)) + 1e-12);
    for (Index j = 0; j < y.size(); ++j)
        for (Index i = 0; i + 1 < omega.size(); ++i)
            CHECK(std::abs(map(i + 1, j)) <= std::abs(map(i, j)) + 1e-12);
}
