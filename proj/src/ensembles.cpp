#include "qdyn/ensembles.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "qdyn/errors.hpp"

namespace qdyn {

namespace {

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

double entropy_of(std::span<const double> weights) {
    double s = 0.0;
    for (double p : weights) {
        if (p > 0.0) s -= p * std::log(p);
    }
    return s;
}

}  // namespace

ProbabilityVector::ProbabilityVector(std::vector<double> weights) : weights_(std::move(weights)) {
    if (weights_.empty()) throw ShapeError("probability vector: no weights");
    double sum = 0.0;
    for (std::size_t j = 0; j < weights_.size(); ++j) {
        double& p = weights_[j];
        if (!std::isfinite(p)) throw DomainError("probability vector: non-finite weight at index " + std::to_string(j));
        if (p < -tolerance::kNegativeProbability) {
            throw DomainError("probability vector: negative weight " + fmt(p) + " at index " + std::to_string(j));
        }
        if (p < 0.0) p = 0.0;
        sum += p;
    }
    if (std::abs(sum - 1.0) > tolerance::kProbabilitySum) {
        throw DomainError("probability vector: sum ≠ 1 (sum = " + fmt(sum) + ")");
    }
}

PureState::PureState(ComplexVector amplitudes) : amplitudes_(std::move(amplitudes)) {
    if (amplitudes_.empty()) throw ShapeError("pure state: no amplitudes");
    const double n2 = std::pow(norm(amplitudes_), 2);
    if (!std::isfinite(n2) || std::abs(n2 - 1.0) > tolerance::kStateNorm) {
        throw DomainError("pure state: squared norm " + fmt(n2) + " is not 1");
    }
}

ProbabilityVector PureState::probabilities() const {
    std::vector<double> p(amplitudes_.size());
    std::transform(amplitudes_.begin(), amplitudes_.end(), p.begin(), [](Complex z) { return std::norm(z); });
    return ProbabilityVector(std::move(p));
}

PureState PureState::basis_vector(std::size_t dim, std::size_t index) {
    if (index >= dim) throw ShapeError("basis_vector: index out of range");
    ComplexVector v(dim);
    v[index] = 1.0;
    return PureState(std::move(v));
}

DensityMatrix::DensityMatrix(ComplexMatrix matrix) : matrix_(std::move(matrix)) {
    if (!matrix_.is_square()) throw ShapeError("density matrix: not square");
    const double herm = hermiticity_residual(matrix_);
    if (herm > tolerance::kDensityHermitian) {
        throw DomainError("density matrix: not Hermitian (residual " + fmt(herm) + ")");
    }
    const double tr = trace(matrix_).real();
    if (std::abs(tr - 1.0) > tolerance::kDensityTrace) {
        throw DomainError("density matrix: trace " + fmt(tr) + " is not 1");
    }
    const double smallest = hermitian_eigenvalues(matrix_).front();
    if (smallest < -tolerance::kNegativeEigenvalue) {
        throw DomainError("density matrix: negative eigenvalue " + fmt(smallest));
    }
}

DensityMatrix DensityMatrix::maximally_mixed(std::size_t dim) {
    ComplexMatrix m = ComplexMatrix::identity(dim);
    m *= Complex(1.0 / static_cast<double>(dim));
    return DensityMatrix(std::move(m));
}

OrthonormalBasis::OrthonormalBasis(std::vector<PureState> vectors) : vectors_(std::move(vectors)) {
    if (vectors_.empty()) throw ShapeError("basis: no vectors");
    const std::size_t d = vectors_.front().dim();
    for (const PureState& v : vectors_) {
        if (v.dim() != d) throw ShapeError("basis: vectors differ in dimension");
    }
}

ComplexMatrix OrthonormalBasis::as_matrix() const {
    ComplexMatrix m(dim(), size());
    for (std::size_t j = 0; j < size(); ++j) {
        for (std::size_t i = 0; i < dim(); ++i) m(i, j) = vectors_[j][i];
    }
    return m;
}

OrthonormalBasis OrthonormalBasis::standard(std::size_t dim) {
    std::vector<PureState> vs;
    vs.reserve(dim);
    for (std::size_t j = 0; j < dim; ++j) vs.push_back(PureState::basis_vector(dim, j));
    return OrthonormalBasis(std::move(vs));
}

OrthonormalBasis OrthonormalBasis::eigenbasis(const ComplexMatrix& hermitian) {
    const EigenDecomposition eig = hermitian_eig(hermitian);
    std::vector<PureState> vs;
    vs.reserve(eig.eigenvalues.size());
    for (std::size_t k = 0; k < eig.eigenvalues.size(); ++k) vs.emplace_back(eig.eigenvectors.column(k));
    return OrthonormalBasis(std::move(vs));
}

double shannon_entropy(const ProbabilityVector& p) {
    return entropy_of(p.weights());
}

double von_neumann_entropy(const DensityMatrix& rho) {
    std::vector<double> lambda = hermitian_eigenvalues(rho.matrix());
    for (double& l : lambda) {
        if (l < -tolerance::kNegativeEigenvalue) {
            throw DomainError("von_neumann_entropy: eigenvalue " + fmt(l) + " below -1e-10; not a density matrix");
        }
        if (l < 0.0) l = 0.0;
    }
    return entropy_of(lambda);
}

PureState factor_pure(const ProbabilityVector& p, std::span<const double> phases) {
    if (phases.size() != p.size()) {
        throw ShapeError("factor_pure: " + std::to_string(phases.size()) + " phases for " +
                         std::to_string(p.size()) + " weights");
    }
    ComplexVector psi(p.size());
    for (std::size_t j = 0; j < p.size(); ++j) psi[j] = std::polar(std::sqrt(p[j]), phases[j]);
    return PureState(std::move(psi));
}

DensityMatrix pure_density(const PureState& psi) {
    return DensityMatrix(outer(psi.amplitudes(), psi.amplitudes()));
}

DensityMatrix mixture_density(const OrthonormalBasis& basis, const ProbabilityVector& p) {
    if (basis.size() != p.size()) {
        throw ShapeError("mixture_density: " + std::to_string(basis.size()) + " basis vectors for " +
                         std::to_string(p.size()) + " weights");
    }
    const BasisResiduals r = basis_residuals(basis);
    if (r.orthonormality > tolerance::kOrthonormality) {
        throw DomainError("mixture_density: basis is not orthonormal (residual " + fmt(r.orthonormality) + ")");
    }
    const std::size_t d = basis.dim();
    ComplexMatrix rho(d, d);
    for (std::size_t j = 0; j < basis.size(); ++j) {
        if (p[j] == 0.0) continue;
        const auto v = basis[j].amplitudes();
        for (std::size_t a = 0; a < d; ++a) {
            for (std::size_t b = 0; b < d; ++b) rho(a, b) += p[j] * v[a] * std::conj(v[b]);
        }
    }
    return DensityMatrix(std::move(rho));
}

BasisResiduals basis_residuals(const OrthonormalBasis& basis) {
    BasisResiduals out;
    const std::size_t n = basis.size();
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t k = 0; k < n; ++k) {
            const Complex g = inner(basis[j].amplitudes(), basis[k].amplitudes());
            const double dev = std::abs(g - Complex(j == k ? 1.0 : 0.0));
            out.orthonormality = std::max(out.orthonormality, dev);
        }
    }
    if (n == basis.dim()) {
        const ComplexMatrix v = basis.as_matrix();
        out.completeness = frobenius_norm(matmul(v, adjoint(v)) - ComplexMatrix::identity(n));
    }
    return out;
}

}  // namespace qdyn
