// linalg.hpp: dense complex matrices, Hermitian eigensolver, matrix exponentials
//
// Everything here is a pure function on values. Storage is dense row-major;
// the intended scale is dimension <= 128.

#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace qdyn {

using Complex = std::complex<double>;
using ComplexVector = std::vector<Complex>;

inline constexpr Complex kI{0.0, 1.0};

class ComplexMatrix {
public:
    ComplexMatrix() = default;
    /// Zero matrix of the given shape. Both counts must be positive.
    ComplexMatrix(std::size_t rows, std::size_t cols);
    /// Row-major entries; throws ShapeError on a length mismatch and
    /// DomainError on non-finite entries.
    ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<Complex> entries);
    ComplexMatrix(std::initializer_list<std::initializer_list<Complex>> rows);

    static ComplexMatrix identity(std::size_t n);
    static ComplexMatrix diagonal(std::span<const Complex> d);
    static ComplexMatrix diagonal(std::span<const double> d);
    /// Matrix whose k-th column is columns[k].
    static ComplexMatrix from_columns(std::span<const ComplexVector> columns);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool is_square() const noexcept { return rows_ == cols_; }
    bool empty() const noexcept { return data_.empty(); }

    Complex& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const Complex& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<const Complex> entries() const noexcept { return data_; }
    ComplexVector column(std::size_t j) const;

    ComplexMatrix& operator+=(const ComplexMatrix& other);
    ComplexMatrix& operator-=(const ComplexMatrix& other);
    ComplexMatrix& operator*=(Complex s);

    friend bool operator==(const ComplexMatrix&, const ComplexMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<Complex> data_;
};

ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b);
ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b);
ComplexMatrix operator*(Complex s, ComplexMatrix m);
ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b);

/// Conjugate transpose.
ComplexMatrix adjoint(const ComplexMatrix& m);
ComplexMatrix matmul(const ComplexMatrix& a, const ComplexMatrix& b);
/// Block (i,j) of the result is a(i,j) * b.
ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);
Complex trace(const ComplexMatrix& m);
/// a*b - b*a
ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b);

double frobenius_norm(const ComplexMatrix& m);
/// ||m - m^dagger||_F
double hermiticity_residual(const ComplexMatrix& m);
bool is_hermitian(const ComplexMatrix& m, double rel_tol = 1e-10);
/// ||m^dagger m - 1||_F
double unitarity_residual(const ComplexMatrix& m);

ComplexVector apply(const ComplexMatrix& m, std::span<const Complex> v);
/// <a|b>, antilinear in the first argument.
Complex inner(std::span<const Complex> a, std::span<const Complex> b);
double norm(std::span<const Complex> v);
/// |a><b|
ComplexMatrix outer(std::span<const Complex> a, std::span<const Complex> b);

struct EigenDecomposition {
    std::vector<double> eigenvalues;  // ascending
    ComplexMatrix eigenvectors;       // column k pairs with eigenvalues[k]
};

/// Cyclic complex Jacobi. Requires ||h - h^dagger||_F <= 1e-10 ||h||_F.
/// Stops when the off-diagonal Frobenius norm is <= 1e-13 ||h||_F; throws
/// NumericalError after 100 sweeps. Each eigenvector is phased so its
/// largest-magnitude component (lowest index on ties) is real-positive.
EigenDecomposition hermitian_eig(const ComplexMatrix& h);

/// Real spectrum of a Hermitian matrix, ascending.
std::vector<double> hermitian_eigenvalues(const ComplexMatrix& h);

/// exp(-i h t) = V diag(exp(-i lambda_k t)) V^dagger.
ComplexMatrix expm_hermitian(const ComplexMatrix& h, double t);

/// Same, from an existing decomposition of h. Exactly the identity at t = 0.
ComplexMatrix expm_from_eig(const EigenDecomposition& eig, double t);

/// exp(a) by scaling and squaring a degree-12 Taylor polynomial. Independent
/// of the eigensolver; used to cross-check expm_hermitian.
ComplexMatrix expm_oracle(const ComplexMatrix& a);

enum class Subsystem { A, B };

/// Trace out one factor of a (dimA*dimB)-square matrix on the space A (x) B.
ComplexMatrix partial_trace(const ComplexMatrix& m, std::size_t dim_a, std::size_t dim_b,
                            Subsystem keep);

}  // namespace qdyn
