#include "doctest.h"

#include <cmath>
#include <numbers>

#include "qdyn/dynamics.hpp"
#include "qdyn/errors.hpp"
#include "qdyn/random.hpp"
#include "qdyn/systems.hpp"
#include "test_support.hpp"

using namespace qdyn;
using qdyn::test::log_log_slope;
using qdyn::test::max_abs_diff;
using qdyn::test::strongest_pair;

namespace {

constexpr double kPi = std::numbers::pi;
const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

HamiltonianOperator half_sigma_z(double delta) { return spin_hamiltonian({delta, 0.0}); }
HamiltonianOperator half_sigma_x(double omega) { return spin_hamiltonian({0.0, omega}); }

}  // namespace

TEST_CASE("HamiltonianOperator and Propagator validation") {
    CHECK_THROWS_AS(HamiltonianOperator(ComplexMatrix{{0.0, 1.0}, {0.0, 0.0}}), DomainError);
    CHECK_THROWS_AS(HamiltonianOperator(ComplexMatrix(2, 3)), ShapeError);
    CHECK_THROWS_AS(Propagator(Complex(1.1) * ComplexMatrix::identity(2), 0.0), NumericalError);
}

TEST_CASE("propagator") {
    Rng rng(1);
    const HamiltonianOperator h5(random_hermitian(5, rng));
    CHECK(max_abs_diff(propagator(h5, 0.0).matrix(), ComplexMatrix::identity(5)) < 1e-14);

    const Propagator u = propagator(half_sigma_z(2.0), kPi / 2);
    CHECK(u.time() == kPi / 2);
    CHECK(max_abs_diff(u.matrix(), ComplexMatrix{{-kI, 0.0}, {0.0, kI}}) < 1e-15);

    CHECK(unitarity_residual(propagator(h5, 1.3).matrix()) <= 1e-9);
}

TEST_CASE("evolve_state") {
    const double delta = 1.7, t = 0.9;
    const PureState a = evolve_state(spin_alpha(), half_sigma_z(delta), t);
    CHECK(std::abs(a[0] - std::exp(Complex(0.0, -delta * t / 2))) < 1e-15);
    CHECK(std::abs(a[1]) == 0.0);

    const PureState plus({kInvSqrt2, kInvSqrt2});
    const PureState same = evolve_state(plus, half_sigma_z(delta), 0.0);
    CHECK(std::abs(same[0] - plus[0]) < 1e-16);
    CHECK(std::abs(same[1] - plus[1]) < 1e-16);

    const PureState e = evolve_state(plus, half_sigma_z(2.0), kPi / 2);
    CHECK(std::abs(e[0] - Complex(0.0, -kInvSqrt2)) < 1e-15);
    CHECK(std::abs(e[1] - Complex(0.0, kInvSqrt2)) < 1e-15);
    CHECK(std::norm(e[0]) == doctest::Approx(0.5).epsilon(1e-15));

    CHECK_THROWS_AS(evolve_state(PureState::basis_vector(3, 0), half_sigma_z(1.0), 1.0), ShapeError);
}

TEST_CASE("evolve_state preserves the norm") {
    Rng rng(6);
    for (std::size_t n = 2; n <= 16; ++n) {
        const PureState psi = random_pure_state(n, rng);
        const PureState out = evolve_state(psi, HamiltonianOperator(random_hermitian(n, rng)), rng.uniform(0, 10));
        CHECK(std::abs(norm(out.amplitudes()) - 1.0) <= 1e-10);
    }
}

TEST_CASE("evolve_density") {
    Rng rng(9);
    const HamiltonianOperator h(random_hermitian(3, rng));
    CHECK(max_abs_diff(evolve_density(DensityMatrix::maximally_mixed(3), h, 4.2).matrix(),
                       DensityMatrix::maximally_mixed(3).matrix()) < 1e-15);

    const DensityMatrix diag(ComplexMatrix{{0.8, 0.0}, {0.0, 0.2}});
    for (double t : {0.0, 0.5, 3.0, 17.0}) {
        CHECK(max_abs_diff(evolve_density(diag, half_sigma_z(2.0), t).matrix(), diag.matrix()) < 1e-15);
    }

    const double omega = 1.3;
    for (double t : {0.3, 1.0, 2.2}) {
        const DensityMatrix r = evolve_density(pure_density(spin_alpha()), half_sigma_x(omega), t);
        CHECK(von_neumann_entropy(r) <= 1e-8);
        CHECK(r.matrix()(0, 0).real() == doctest::Approx(std::pow(std::cos(omega * t / 2), 2)).epsilon(1e-12));
    }
}

TEST_CASE("evolve_density preserves trace, Hermiticity, positivity and entropy") {
    Rng rng(100);
    for (std::size_t n = 2; n <= 16; ++n) {
        for (int rep = 0; rep < 5; ++rep) {
            const DensityMatrix rho = random_density(n, rng);
            const HamiltonianOperator h(random_hermitian(n, rng));
            const DensityMatrix out = evolve_density(rho, h, rng.uniform(0, 10));
            CHECK(std::abs(trace(out.matrix()) - 1.0) <= 1e-10);
            CHECK(hermiticity_residual(out.matrix()) <= 1e-10);
            CHECK(hermitian_eigenvalues(out.matrix()).front() >= -1e-9);
            CHECK(std::abs(von_neumann_entropy(out) - von_neumann_entropy(rho)) <= 1e-9);
        }
    }
}

TEST_CASE("heisenberg_observable") {
    Rng rng(2);
    const ComplexMatrix hm = random_hermitian(4, rng);
    const HamiltonianOperator h(hm);
    CHECK(max_abs_diff(heisenberg_observable(hm, h, 2.5), hm) < 1e-10);

    const PauliMatrices p = pauli();
    const double delta = 1.4;
    for (double t : {0.2, 1.0, 3.7}) {
        const ComplexMatrix expected = Complex(std::cos(delta * t)) * p.x - Complex(std::sin(delta * t)) * p.y;
        CHECK(max_abs_diff(heisenberg_observable(p.x, half_sigma_z(delta), t), expected) < 1e-14);
    }

    const ComplexMatrix x0 = random_hermitian(4, rng);
    CHECK(heisenberg_observable(x0, h, 0.0) == x0);

    CHECK_THROWS_AS(heisenberg_observable(ComplexMatrix{{0.0, 1.0}, {0.0, 0.0}}, half_sigma_z(1.0), 1.0), DomainError);
    CHECK_THROWS_AS(heisenberg_observable(p.x, h, 1.0), ShapeError);
}

TEST_CASE("heisenberg_observable preserves the operator spectrum") {
    Rng rng(18);
    for (std::size_t n = 2; n <= 12; ++n) {
        const ComplexMatrix x0 = random_hermitian(n, rng);
        const HamiltonianOperator h(random_hermitian(n, rng));
        const std::vector<double> before = hermitian_eigenvalues(x0);
        const std::vector<double> after = hermitian_eigenvalues(heisenberg_observable(x0, h, rng.uniform(0, 10)));
        for (std::size_t k = 0; k < n; ++k) CHECK(std::abs(before[k] - after[k]) <= 1e-9);
    }
}

TEST_CASE("expectation") {
    Rng rng(3);
    const DensityMatrix rho = random_density(5, rng);
    CHECK(expectation(ComplexMatrix::identity(5), rho) == doctest::Approx(1.0).epsilon(1e-14));

    const PauliMatrices p = pauli();
    CHECK(expectation(p.z, DensityMatrix(ComplexMatrix{{0.8, 0.0}, {0.0, 0.2}})) == doctest::Approx(0.6));
    CHECK(expectation(p.x, pure_density(spin_alpha())) == 0.0);

    // anti-Hermitian observable has an imaginary expectation
    CHECK_THROWS_AS(expectation(kI * p.z, DensityMatrix(ComplexMatrix{{0.8, 0.0}, {0.0, 0.2}})), NumericalError);
    CHECK_THROWS_AS(expectation(p.z, rho), ShapeError);
}

TEST_CASE("picture_equivalence") {
    Rng rng(4);
    const ComplexMatrix hm = random_hermitian(3, rng);
    const DensityMatrix rho0 = random_density(3, rng);
    const PictureValues commuting = picture_equivalence(hm, rho0, HamiltonianOperator(hm), 1.7);
    const double static_value = expectation(hm, rho0);
    CHECK(commuting.schrodinger == doctest::Approx(static_value).epsilon(1e-12));
    CHECK(commuting.heisenberg == doctest::Approx(static_value).epsilon(1e-12));

    const double omega = 0.8;
    const PictureValues flip = picture_equivalence(pauli().z, pure_density(spin_alpha()), half_sigma_x(omega), kPi / omega);
    CHECK(flip.schrodinger == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(flip.heisenberg == doctest::Approx(-1.0).epsilon(1e-12));

    const DensityMatrix r6 = random_density(6, rng);
    const PictureValues v = picture_equivalence(random_hermitian(6, rng), r6, HamiltonianOperator(random_hermitian(6, rng)), 2.3);
    CHECK(std::abs(v.schrodinger - v.heisenberg) / std::max(std::abs(v.schrodinger), 1.0) <= 1e-9);
}

TEST_CASE("heisenberg_rhs") {
    Rng rng(5);
    const ComplexMatrix hm = random_hermitian(4, rng);
    CHECK(frobenius_norm(heisenberg_rhs(hm, HamiltonianOperator(hm))) < 1e-13);

    const PauliMatrices p = pauli();
    const double delta = 2.5;
    CHECK(max_abs_diff(heisenberg_rhs(p.x, half_sigma_z(delta)), Complex(-delta) * p.y) < 1e-15);

    const ComplexMatrix x = random_hermitian(4, rng);
    CHECK(hermiticity_residual(heisenberg_rhs(x, HamiltonianOperator(hm))) < 1e-13);
}

TEST_CASE("heisenberg_rhs matches a central difference of x(t)") {
    Rng rng(55);
    const HamiltonianOperator h(random_hermitian(4, rng));
    const ComplexMatrix x0 = random_hermitian(4, rng);
    const double t = 0.6, d = 1e-4;
    const ComplexMatrix fd = Complex(1.0 / (2 * d)) *
                             (heisenberg_observable(x0, h, t + d) - heisenberg_observable(x0, h, t - d));
    CHECK(max_abs_diff(fd, heisenberg_rhs(heisenberg_observable(x0, h, t), h)) <= 1e-6);
}

TEST_CASE("central-difference error of <x(t)> shrinks fourfold when delta halves") {
    Rng rng(808);
    for (int rep = 0; rep < 10; ++rep) {
        const std::size_t n = 2 + rng.index(7);
        const HamiltonianOperator h(random_hermitian(n, rng));
        const ComplexMatrix x0 = random_hermitian(n, rng);
        const DensityMatrix rho0 = random_density(n, rng);
        const double t = rng.uniform(0, 5);
        const double exact = expectation(heisenberg_rhs(heisenberg_observable(x0, h, t), h), rho0);
        auto error = [&](double d) {
            const double fd = (expectation(heisenberg_observable(x0, h, t + d), rho0) -
                               expectation(heisenberg_observable(x0, h, t - d), rho0)) / (2 * d);
            return std::abs(fd - exact);
        };
        const double ratio = error(1e-3) / error(5e-4);
        CHECK(ratio == doctest::Approx(4.0).epsilon(0.2));
    }
}

TEST_CASE("transition_probability_exact") {
    const OrthonormalBasis ab({spin_alpha(), spin_beta()});
    const HamiltonianOperator zero(ComplexMatrix(2, 2));
    for (double t : {0.0, 1.0, 9.0}) {
        CHECK(transition_probability_exact(ab, 0, 0, zero, t) == 1.0);
        CHECK(transition_probability_exact(ab, 0, 1, zero, t) == 0.0);
    }
    const double omega = 1.1;
    for (double t : {0.1, 1.0, 2.5, 7.0}) {
        CHECK(transition_probability_exact(ab, 0, 1, half_sigma_x(omega), t) ==
              doctest::Approx(std::pow(std::sin(omega * t / 2), 2)).epsilon(1e-12));
    }
    Rng rng(12);
    const HamiltonianOperator h(random_hermitian(4, rng));
    const OrthonormalBasis std4 = OrthonormalBasis::standard(4);
    for (std::size_t k = 0; k < 4; ++k) CHECK(transition_probability_exact(std4, 2, k, h, 0.0) == (k == 2 ? 1.0 : 0.0));
    CHECK_THROWS_AS(transition_probability_exact(std4, 0, 4, h, 1.0), ShapeError);
}

TEST_CASE("transition probabilities out of a state sum to one") {
    Rng rng(13);
    for (std::size_t n = 2; n <= 10; ++n) {
        const HamiltonianOperator h(random_hermitian(n, rng));
        const OrthonormalBasis basis = OrthonormalBasis::eigenbasis(random_hermitian(n, rng));
        const double t = rng.uniform(0, 10);
        const std::size_t j = rng.index(n);
        double sum = 0.0;
        for (std::size_t k = 0; k < n; ++k) sum += transition_probability_exact(basis, j, k, h, t);
        CHECK(std::abs(sum - 1.0) <= 1e-9);
    }
}

TEST_CASE("transition_probability_first_order") {
    const OrthonormalBasis ab({spin_alpha(), spin_beta()});
    CHECK(transition_probability_first_order(ab, 0, 1, half_sigma_z(3.0), 5.0) == 0.0);

    const double omega = 2.0, t = 0.01;  // omega t = 0.02
    const double first = transition_probability_first_order(ab, 0, 1, half_sigma_x(omega), t);
    CHECK(first == doctest::Approx(t * t * omega * omega / 4).epsilon(1e-14));
    const double exact = transition_probability_exact(ab, 0, 1, half_sigma_x(omega), t);
    // sin^2(x)/x^2 = 1 - x^2/3 + ..., x = omega t / 2
    CHECK(std::abs(first / exact - 1.0) <= std::pow(omega * t, 2) / 12 * 1.1);

    CHECK_THROWS_AS(transition_probability_first_order(ab, 1, 1, half_sigma_x(omega), t), DomainError);
}

TEST_CASE("first-order ratio on a random 5x5 H' at t ||H'||_F = 0.01") {
    Rng rng(21);
    const ComplexMatrix hm = random_hermitian(5, rng);
    const HamiltonianOperator h(hm);
    const auto [j, k] = strongest_pair(hm);
    const OrthonormalBasis basis = OrthonormalBasis::standard(5);
    const double t = 0.01 / frobenius_norm(hm);
    const double ratio = transition_probability_exact(basis, j, k, h, t) /
                         transition_probability_first_order(basis, j, k, h, t);
    CHECK(ratio >= 0.99);
    CHECK(ratio <= 1.01);
}

TEST_CASE("first-order discrepancy is O(t^2) for real symmetric H'") {
    Rng rng(33);
    const std::vector<double> scales{1e-3, 1e-2, 1e-1};
    for (std::size_t n = 4; n <= 8; ++n) {
        const ComplexMatrix hm = random_real_symmetric(n, rng);
        const HamiltonianOperator h(hm);
        const auto [j, k] = strongest_pair(hm);
        const OrthonormalBasis basis = OrthonormalBasis::standard(n);
        std::vector<double> errs;
        for (double s : scales) {
            const double t = s / frobenius_norm(hm);
            errs.push_back(std::abs(transition_probability_exact(basis, j, k, h, t) /
                                        transition_probability_first_order(basis, j, k, h, t) -
                                    1.0));
        }
        CHECK(log_log_slope(scales, errs) == doctest::Approx(2.0).epsilon(0.1));
    }
}

TEST_CASE("complex H' with three or more levels has an O(t) first-order discrepancy") {
    // exact = t^2 |H_kj|^2 + t^3 Im(conj(H_kj) (H^2)_kj) + O(t^4)
    Rng rng(34);
    const ComplexMatrix hm = random_hermitian(5, rng);
    const HamiltonianOperator h(hm);
    const auto [j, k] = strongest_pair(hm);
    const Complex h1 = hm(k, j);
    const Complex h2 = matmul(hm, hm)(k, j);
    const double predicted = std::imag(std::conj(h1) * h2) / std::norm(h1);
    REQUIRE(std::abs(predicted) > 0.05);

    const OrthonormalBasis basis = OrthonormalBasis::standard(5);
    const double t = 1e-5;
    const double ratio = transition_probability_exact(basis, j, k, h, t) /
                         transition_probability_first_order(basis, j, k, h, t);
    CHECK((ratio - 1.0) / t == doctest::Approx(predicted).epsilon(1e-2));
}
