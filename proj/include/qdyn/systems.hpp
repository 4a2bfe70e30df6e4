// systems.hpp: spin-1/2, periodic free-particle lattice, composite systems

#pragma once

#include <cstddef>
#include <vector>

#include "qdyn/dynamics.hpp"
#include "qdyn/ensembles.hpp"
#include "qdyn/linalg.hpp"

namespace qdyn {

struct PauliMatrices {
    ComplexMatrix x;
    ComplexMatrix y;
    ComplexMatrix z;
};

PauliMatrices pauli();

/// H = (delta/2) sigma_z + (omega/2) sigma_x
struct SpinHalfSystem {
    double delta = 0.0;
    double omega = 0.0;
};

/// Basis state alpha = (1, 0), the +1 eigenvector of sigma_z.
PureState spin_alpha();
/// Basis state beta = (0, 1).
PureState spin_beta();

HamiltonianOperator spin_hamiltonian(const SpinHalfSystem& s);

struct RabiPopulations {
    double alpha;
    double beta;
};

/// Populations of alpha and beta at time t, starting from alpha, computed by
/// exact evolution under spin_hamiltonian(s).
RabiPopulations rabi_populations(const SpinHalfSystem& s, double t);

/// n sites at x_s = s L / n on a ring of length L; H = p^2 / 2m.
class LatticeFreeParticle {
public:
    /// Requires sites >= 2, length > 0, mass > 0 (DomainError otherwise).
    LatticeFreeParticle(std::size_t sites, double length, double mass);

    std::size_t sites() const noexcept { return sites_; }
    double length() const noexcept { return length_; }
    double mass() const noexcept { return mass_; }

    /// Integer momentum labels k = -floor(n/2) ... ceil(n/2) - 1.
    std::vector<int> momentum_labels() const;
    /// p_k = 2 pi k / L, in label order.
    std::vector<double> momenta() const;

private:
    std::size_t sites_;
    double length_;
    double mass_;
};

/// Vector k has site components exp(i p_k x_s) / sqrt(n), in label order.
OrthonormalBasis lattice_momentum_basis(const LatticeFreeParticle& sys);

/// V diag(p_k^2 / 2m) V^dagger in the site basis.
HamiltonianOperator lattice_hamiltonian(const LatticeFreeParticle& sys);

/// rho_A (x) rho_B
DensityMatrix compose_density(const DensityMatrix& rho_a, const DensityMatrix& rho_b);

/// Reduced state of one factor.
DensityMatrix reduced_density(const DensityMatrix& rho, std::size_t dim_a, std::size_t dim_b, Subsystem keep);

class CompositeSystem {
public:
    /// h1 acts on A, h2 on B; coupling is Hermitian on A (x) B.
    CompositeSystem(HamiltonianOperator h1, HamiltonianOperator h2, ComplexMatrix coupling);

    std::size_t dim_a() const noexcept { return h1_.dim(); }
    std::size_t dim_b() const noexcept { return h2_.dim(); }
    const HamiltonianOperator& h1() const noexcept { return h1_; }
    const HamiltonianOperator& h2() const noexcept { return h2_; }
    const ComplexMatrix& coupling() const noexcept { return coupling_; }

private:
    HamiltonianOperator h1_;
    HamiltonianOperator h2_;
    ComplexMatrix coupling_;
};

/// g sigma_x (x) sigma_x
ComplexMatrix xx_coupling(double g);

/// h1 (x) 1_B + 1_A (x) h2 + coupling
HamiltonianOperator composite_hamiltonian(const CompositeSystem& c);

}  // namespace qdyn
