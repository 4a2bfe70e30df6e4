#include "qdyn/systems.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "qdyn/errors.hpp"

namespace qdyn {

PauliMatrices pauli() {
    return {
        ComplexMatrix{{0.0, 1.0}, {1.0, 0.0}},
        ComplexMatrix{{0.0, -kI}, {kI, 0.0}},
        ComplexMatrix{{1.0, 0.0}, {0.0, -1.0}},
    };
}

PureState spin_alpha() { return PureState::basis_vector(2, 0); }
PureState spin_beta() { return PureState::basis_vector(2, 1); }

HamiltonianOperator spin_hamiltonian(const SpinHalfSystem& s) {
    if (!std::isfinite(s.delta) || !std::isfinite(s.omega)) {
        throw DomainError("spin_hamiltonian: delta and omega must be finite");
    }
    const PauliMatrices p = pauli();
    return HamiltonianOperator(Complex(s.delta / 2.0) * p.z + Complex(s.omega / 2.0) * p.x);
}

RabiPopulations rabi_populations(const SpinHalfSystem& s, double t) {
    const PureState psi = evolve_state(spin_alpha(), spin_hamiltonian(s), t);
    return {std::norm(psi[0]), std::norm(psi[1])};
}

LatticeFreeParticle::LatticeFreeParticle(std::size_t sites, double length, double mass)
    : sites_(sites), length_(length), mass_(mass) {
    if (sites < 2) throw DomainError("lattice: need at least 2 sites");
    if (!(length > 0.0) || !std::isfinite(length)) throw DomainError("lattice: length must be positive");
    if (!(mass > 0.0) || !std::isfinite(mass)) throw DomainError("lattice: mass must be positive");
}

std::vector<int> LatticeFreeParticle::momentum_labels() const {
    const int n = static_cast<int>(sites_);
    std::vector<int> labels;
    labels.reserve(sites_);
    for (int k = -(n / 2); k <= (n + 1) / 2 - 1; ++k) labels.push_back(k);
    return labels;
}

std::vector<double> LatticeFreeParticle::momenta() const {
    std::vector<double> p;
    for (int k : momentum_labels()) p.push_back(2.0 * std::numbers::pi * k / length_);
    return p;
}

OrthonormalBasis lattice_momentum_basis(const LatticeFreeParticle& sys) {
    const std::size_t n = sys.sites();
    const double amp = 1.0 / std::sqrt(static_cast<double>(n));
    std::vector<PureState> vs;
    vs.reserve(n);
    for (int k : sys.momentum_labels()) {
        ComplexVector v(n);
        for (std::size_t s = 0; s < n; ++s) {
            // p_k x_s = 2 pi k s / n; reduce k s mod n to keep the phase argument small
            const long long ks = (static_cast<long long>(k) * static_cast<long long>(s)) % static_cast<long long>(n);
            v[s] = std::polar(amp, 2.0 * std::numbers::pi * static_cast<double>(ks) / static_cast<double>(n));
        }
        vs.emplace_back(std::move(v));
    }
    return OrthonormalBasis(std::move(vs));
}

HamiltonianOperator lattice_hamiltonian(const LatticeFreeParticle& sys) {
    const ComplexMatrix v = lattice_momentum_basis(sys).as_matrix();
    std::vector<double> energies;
    for (double p : sys.momenta()) energies.push_back(p * p / (2.0 * sys.mass()));
    ComplexMatrix h = matmul(matmul(v, ComplexMatrix::diagonal(std::span<const double>(energies))), adjoint(v));
    // symmetrize away rounding so the result is exactly Hermitian
    const std::size_t n = h.rows();
    for (std::size_t i = 0; i < n; ++i) {
        h(i, i) = h(i, i).real();
        for (std::size_t j = i + 1; j < n; ++j) {
            const Complex avg = 0.5 * (h(i, j) + std::conj(h(j, i)));
            h(i, j) = avg;
            h(j, i) = std::conj(avg);
        }
    }
    return HamiltonianOperator(std::move(h));
}

DensityMatrix compose_density(const DensityMatrix& rho_a, const DensityMatrix& rho_b) {
    return DensityMatrix(kron(rho_a.matrix(), rho_b.matrix()));
}

DensityMatrix reduced_density(const DensityMatrix& rho, std::size_t dim_a, std::size_t dim_b, Subsystem keep) {
    return DensityMatrix(partial_trace(rho.matrix(), dim_a, dim_b, keep));
}

CompositeSystem::CompositeSystem(HamiltonianOperator h1, HamiltonianOperator h2, ComplexMatrix coupling)
    : h1_(std::move(h1)), h2_(std::move(h2)), coupling_(std::move(coupling)) {
    const std::size_t d = h1_.dim() * h2_.dim();
    if (coupling_.rows() != d || coupling_.cols() != d) {
        throw ShapeError("composite system: coupling must be " + std::to_string(d) + "x" + std::to_string(d));
    }
    if (hermiticity_residual(coupling_) > 1e-10) throw DomainError("composite system: coupling not Hermitian");
}

ComplexMatrix xx_coupling(double g) {
    const ComplexMatrix sx = pauli().x;
    return Complex(g) * kron(sx, sx);
}

HamiltonianOperator composite_hamiltonian(const CompositeSystem& c) {
    const ComplexMatrix ia = ComplexMatrix::identity(c.dim_a());
    const ComplexMatrix ib = ComplexMatrix::identity(c.dim_b());
    return HamiltonianOperator(kron(c.h1().matrix(), ib) + kron(ia, c.h2().matrix()) + c.coupling());
}

}  // namespace qdyn
