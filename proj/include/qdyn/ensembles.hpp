// ensembles.hpp: probability vectors, pure states, density matrices, bases, entropies
//
// Entropies are in nats. Inputs are validated on construction and never
// silently renormalized.

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "qdyn/linalg.hpp"

namespace qdyn {

namespace tolerance {
inline constexpr double kProbabilitySum = 1e-10;
inline constexpr double kNegativeProbability = 1e-12;  // clamp window below zero
inline constexpr double kStateNorm = 1e-10;
inline constexpr double kDensityHermitian = 1e-10;
inline constexpr double kDensityTrace = 1e-10;
inline constexpr double kNegativeEigenvalue = 1e-10;  // clamp window below zero
inline constexpr double kOrthonormality = 1e-10;
}  // namespace tolerance

/// Classical weights P_j: nonnegative, summing to one.
class ProbabilityVector {
public:
    /// Entries in [-1e-12, 0) are clamped to zero; anything more negative,
    /// non-finite, or a sum off by more than 1e-10 throws DomainError.
    explicit ProbabilityVector(std::vector<double> weights);

    std::span<const double> weights() const noexcept { return weights_; }
    std::size_t size() const noexcept { return weights_.size(); }
    double operator[](std::size_t j) const { return weights_[j]; }

private:
    std::vector<double> weights_;
};

/// Normalized complex amplitude vector.
class PureState {
public:
    /// Throws DomainError unless | ||psi||^2 - 1 | <= 1e-10.
    explicit PureState(ComplexVector amplitudes);

    std::span<const Complex> amplitudes() const noexcept { return amplitudes_; }
    std::size_t dim() const noexcept { return amplitudes_.size(); }
    Complex operator[](std::size_t j) const { return amplitudes_[j]; }

    /// Componentwise |psi_j|^2.
    ProbabilityVector probabilities() const;

    /// e_index in dimension dim.
    static PureState basis_vector(std::size_t dim, std::size_t index);

private:
    ComplexVector amplitudes_;
};

/// Hermitian, unit-trace, positive semidefinite matrix.
class DensityMatrix {
public:
    /// Validates Hermiticity (1e-10 Frobenius), trace (1e-10) and smallest
    /// eigenvalue (>= -1e-10). Throws ShapeError or DomainError.
    explicit DensityMatrix(ComplexMatrix matrix);

    const ComplexMatrix& matrix() const noexcept { return matrix_; }
    std::size_t dim() const noexcept { return matrix_.rows(); }

    /// Maximally mixed state 1/d.
    static DensityMatrix maximally_mixed(std::size_t dim);

private:
    ComplexMatrix matrix_;
};

/// A set of equal-dimension pure states. Orthonormality is not enforced
/// here; basis_residuals reports it and consumers that need it check it.
class OrthonormalBasis {
public:
    explicit OrthonormalBasis(std::vector<PureState> vectors);

    std::span<const PureState> vectors() const noexcept { return vectors_; }
    const PureState& operator[](std::size_t j) const { return vectors_[j]; }
    std::size_t size() const noexcept { return vectors_.size(); }
    std::size_t dim() const noexcept { return vectors_.front().dim(); }
    /// Column j is vector j.
    ComplexMatrix as_matrix() const;

    /// e_0 ... e_{n-1}
    static OrthonormalBasis standard(std::size_t dim);
    /// Eigenvectors of a Hermitian matrix, in ascending-eigenvalue order.
    static OrthonormalBasis eigenbasis(const ComplexMatrix& hermitian);

private:
    std::vector<PureState> vectors_;
};

struct BasisResiduals {
    /// max_{j,k} |<psi_j|psi_k> - delta_jk|
    double orthonormality = 0.0;
    /// ||sum_j |psi_j><psi_j| - 1||_F; present only for a full-size basis.
    std::optional<double> completeness;
};

/// S = -sum_j P_j ln P_j with 0 ln 0 = 0.
double shannon_entropy(const ProbabilityVector& p);

/// S = -sum_k lambda_k ln lambda_k over the spectrum of rho, eigenvalues in
/// [-1e-10, 0) clamped to zero. A more negative eigenvalue throws DomainError.
double von_neumann_entropy(const DensityMatrix& rho);

/// psi_j = sqrt(P_j) exp(i phi_j)
PureState factor_pure(const ProbabilityVector& p, std::span<const double> phases);

/// |psi><psi|
DensityMatrix pure_density(const PureState& psi);

/// sum_j P_j |psi_j><psi_j|. Throws ShapeError on a count mismatch and
/// DomainError if the basis is not orthonormal to 1e-10.
DensityMatrix mixture_density(const OrthonormalBasis& basis, const ProbabilityVector& p);

BasisResiduals basis_residuals(const OrthonormalBasis& basis);

}  // namespace qdyn
