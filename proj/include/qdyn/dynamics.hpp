// dynamics.hpp: unitary time evolution in both pictures
//
// hbar = 1 and H is time independent, so U(t) = exp(-i H t).

#pragma once

#include <cstddef>

#include "qdyn/ensembles.hpp"
#include "qdyn/linalg.hpp"

namespace qdyn {

/// Hermitian generator of time translations (to 1e-10 relative).
class HamiltonianOperator {
public:
    explicit HamiltonianOperator(ComplexMatrix matrix);

    const ComplexMatrix& matrix() const noexcept { return matrix_; }
    std::size_t dim() const noexcept { return matrix_.rows(); }

private:
    ComplexMatrix matrix_;
};

class Propagator {
public:
    /// Throws NumericalError if ||U^dagger U - 1||_F > 1e-9 * dim.
    Propagator(ComplexMatrix matrix, double time);

    const ComplexMatrix& matrix() const noexcept { return matrix_; }
    double time() const noexcept { return time_; }

private:
    ComplexMatrix matrix_;
    double time_;
};

Propagator propagator(const HamiltonianOperator& h, double t);

/// Diagonalizes H once; each at(t) builds U(t) directly from the spectrum, so
/// time points are independent and no error accumulates along a grid.
class TimeEvolution {
public:
    explicit TimeEvolution(const HamiltonianOperator& h);

    Propagator at(double t) const;
    std::size_t dim() const noexcept { return eig_.eigenvalues.size(); }

private:
    EigenDecomposition eig_;
};

/// U(t) psi
PureState evolve_state(const PureState& psi, const HamiltonianOperator& h, double t);

/// U rho U^dagger
DensityMatrix evolve_density(const DensityMatrix& rho, const HamiltonianOperator& h, double t);

/// Heisenberg-picture observable U^dagger x0 U.
ComplexMatrix heisenberg_observable(const ComplexMatrix& x0, const HamiltonianOperator& h, double t);

/// tr(x rho). Throws NumericalError if the imaginary part exceeds 1e-10,
/// which signals a non-Hermitian x.
double expectation(const ComplexMatrix& x, const DensityMatrix& rho);

struct PictureValues {
    double schrodinger;  // tr(x0 rho(t))
    double heisenberg;   // tr(x(t) rho0)
};

PictureValues picture_equivalence(const ComplexMatrix& x0, const DensityMatrix& rho0,
                                  const HamiltonianOperator& h, double t);

/// Right-hand side of dx/dt = i[H, x].
ComplexMatrix heisenberg_rhs(const ComplexMatrix& x, const HamiltonianOperator& h);

/// |<psi_k| exp(-i H' t) |psi_j>|^2 with H' as the sole generator.
double transition_probability_exact(const OrthonormalBasis& basis, std::size_t j, std::size_t k,
                                    const HamiltonianOperator& h_prime, double t);

/// t^2 |<psi_k|H'|psi_j>|^2. Only meaningful for k != j; j == k throws DomainError.
double transition_probability_first_order(const OrthonormalBasis& basis, std::size_t j, std::size_t k,
                                          const HamiltonianOperator& h_prime, double t);

}  // namespace qdyn
