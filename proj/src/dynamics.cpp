#include "qdyn/dynamics.hpp"

#include <cmath>
#include <string>

#include "qdyn/errors.hpp"

namespace qdyn {

namespace {

constexpr double kHamiltonianHermitian = 1e-10;
constexpr double kPropagatorUnitarity = 1e-9;
constexpr double kExpectationImaginary = 1e-10;

void require_dim(std::size_t got, std::size_t want, const char* what) {
    if (got != want) {
        throw ShapeError(std::string(what) + ": dimension " + std::to_string(got) + " does not match Hamiltonian dimension " +
                         std::to_string(want));
    }
}

void require_index(const OrthonormalBasis& basis, std::size_t j, std::size_t k, const char* what) {
    if (j >= basis.size() || k >= basis.size()) {
        throw ShapeError(std::string(what) + ": index out of range for a basis of " + std::to_string(basis.size()));
    }
}

}  // namespace

HamiltonianOperator::HamiltonianOperator(ComplexMatrix matrix) : matrix_(std::move(matrix)) {
    if (!matrix_.is_square()) throw ShapeError("Hamiltonian: not square");
    if (!is_hermitian(matrix_, kHamiltonianHermitian)) throw DomainError("Hamiltonian: not Hermitian");
}

Propagator::Propagator(ComplexMatrix matrix, double time) : matrix_(std::move(matrix)), time_(time) {
    const double r = unitarity_residual(matrix_);
    if (r > kPropagatorUnitarity * static_cast<double>(matrix_.rows())) {
        throw NumericalError("propagator: unitarity residual " + std::to_string(r) + " exceeds tolerance");
    }
}

Propagator propagator(const HamiltonianOperator& h, double t) {
    return Propagator(expm_hermitian(h.matrix(), t), t);
}


TimeEvolution::TimeEvolution(const HamiltonianOperator& h) : eig_(hermitian_eig(h.matrix())) {}

Propagator TimeEvolution::at(double t) const {
    return Propagator(expm_from_eig(eig_, t), t);
}

PureState evolve_state(const PureState& psi, const HamiltonianOperator& h, double t) {
    require_dim(psi.dim(), h.dim(), "evolve_state");
    return PureState(apply(propagator(h, t).matrix(), psi.amplitudes()));
}

DensityMatrix evolve_density(const DensityMatrix& rho, const HamiltonianOperator& h, double t) {
    require_dim(rho.dim(), h.dim(), "evolve_density");
    const ComplexMatrix u = propagator(h, t).matrix();
    return DensityMatrix(matmul(matmul(u, rho.matrix()), adjoint(u)));
}

ComplexMatrix heisenberg_observable(const ComplexMatrix& x0, const HamiltonianOperator& h, double t) {
    if (!x0.is_square()) throw ShapeError("heisenberg_observable: observable not square");
    require_dim(x0.rows(), h.dim(), "heisenberg_observable");
    if (!is_hermitian(x0)) throw DomainError("heisenberg_observable: observable not Hermitian");
    if (t == 0.0) return x0;
    const ComplexMatrix u = propagator(h, t).matrix();
    return matmul(matmul(adjoint(u), x0), u);
}

double expectation(const ComplexMatrix& x, const DensityMatrix& rho) {
    if (!x.is_square() || x.rows() != rho.dim()) throw ShapeError("expectation: observable/state dimension mismatch");
    // tr(x rho) without forming the product
    Complex sum{};
    const ComplexMatrix& r = rho.matrix();
    for (std::size_t i = 0; i < x.rows(); ++i) {
        for (std::size_t k = 0; k < x.cols(); ++k) sum += x(i, k) * r(k, i);
    }
    if (std::abs(sum.imag()) > kExpectationImaginary) {
        throw NumericalError("expectation: imaginary part " + std::to_string(sum.imag()) +
                             " exceeds 1e-10 (observable not Hermitian?)");
    }
    return sum.real();
}

PictureValues picture_equivalence(const ComplexMatrix& x0, const DensityMatrix& rho0,
                                  const HamiltonianOperator& h, double t) {
    return {expectation(x0, evolve_density(rho0, h, t)), expectation(heisenberg_observable(x0, h, t), rho0)};
}

ComplexMatrix heisenberg_rhs(const ComplexMatrix& x, const HamiltonianOperator& h) {
    if (!x.is_square()) throw ShapeError("heisenberg_rhs: observable not square");
    require_dim(x.rows(), h.dim(), "heisenberg_rhs");
    return kI * commutator(h.matrix(), x);
}

double transition_probability_exact(const OrthonormalBasis& basis, std::size_t j, std::size_t k,
                                    const HamiltonianOperator& h_prime, double t) {
    require_index(basis, j, k, "transition_probability_exact");
    require_dim(basis.dim(), h_prime.dim(), "transition_probability_exact");
    const ComplexVector evolved = apply(propagator(h_prime, t).matrix(), basis[j].amplitudes());
    return std::norm(inner(basis[k].amplitudes(), evolved));
}

double transition_probability_first_order(const OrthonormalBasis& basis, std::size_t j, std::size_t k,
                                          const HamiltonianOperator& h_prime, double t) {
    require_index(basis, j, k, "transition_probability_first_order");
    require_dim(basis.dim(), h_prime.dim(), "transition_probability_first_order");
    if (j == k) throw DomainError("transition_probability_first_order: requires distinct states (j == k)");
    const Complex element = inner(basis[k].amplitudes(), apply(h_prime.matrix(), basis[j].amplitudes()));
    return t * t * std::norm(element);
}

}  // namespace qdyn
