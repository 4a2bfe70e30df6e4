#include "qdyn/random.hpp"

#include <cmath>
#include <numbers>

namespace qdyn {

double Rng::uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(angle);
    has_spare_ = true;
    return r * std::cos(angle);
}

std::size_t Rng::index(std::size_t n) {
    return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n;
}

ComplexMatrix random_complex(std::size_t dim, Rng& rng) {
    ComplexMatrix a(dim, dim);
    for (std::size_t i = 0; i < dim; ++i) {
        for (std::size_t j = 0; j < dim; ++j) a(i, j) = rng.complex_normal();
    }
    return a;
}

ComplexMatrix random_hermitian(std::size_t dim, Rng& rng) {
    const ComplexMatrix a = random_complex(dim, rng);
    ComplexMatrix h(dim, dim);
    for (std::size_t i = 0; i < dim; ++i) {
        for (std::size_t j = 0; j < dim; ++j) h(i, j) = 0.5 * (a(i, j) + std::conj(a(j, i)));
    }
    return h;
}

ComplexMatrix random_real_symmetric(std::size_t dim, Rng& rng) {
    ComplexMatrix a(dim, dim);
    for (std::size_t i = 0; i < dim; ++i) {
        for (std::size_t j = 0; j < dim; ++j) a(i, j) = rng.normal();
    }
    ComplexMatrix h(dim, dim);
    for (std::size_t i = 0; i < dim; ++i) {
        for (std::size_t j = 0; j < dim; ++j) h(i, j) = 0.5 * (a(i, j) + a(j, i));
    }
    return h;
}

PureState random_pure_state(std::size_t dim, Rng& rng) {
    ComplexVector v(dim);
    for (Complex& z : v) z = rng.complex_normal();
    const double n = norm(v);
    for (Complex& z : v) z /= n;
    return PureState(std::move(v));
}

DensityMatrix random_density(std::size_t dim, Rng& rng) {
    const ComplexMatrix g = random_complex(dim, rng);
    ComplexMatrix rho = matmul(g, adjoint(g));
    // exact Hermitian symmetry before normalizing
    for (std::size_t i = 0; i < dim; ++i) {
        rho(i, i) = rho(i, i).real();
        for (std::size_t j = i + 1; j < dim; ++j) rho(j, i) = std::conj(rho(i, j));
    }
    rho *= Complex(1.0 / trace(rho).real());
    return DensityMatrix(std::move(rho));
}

}  // namespace qdyn
