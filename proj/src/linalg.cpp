#include "qdyn/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "qdyn/errors.hpp"

namespace qdyn {

namespace {

constexpr double kJacobiTolerance = 1e-13;
constexpr int kJacobiMaxSweeps = 100;
constexpr double kHermitianInputTolerance = 1e-10;

std::string shape_of(const ComplexMatrix& m) {
    return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void require_square(const ComplexMatrix& m, const char* what) {
    if (!m.is_square()) {
        throw ShapeError(std::string(what) + ": expected a square matrix, got " + shape_of(m));
    }
}

void require_same_shape(const ComplexMatrix& a, const ComplexMatrix& b, const char* what) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw ShapeError(std::string(what) + ": shape mismatch " + shape_of(a) + " vs " + shape_of(b));
    }
}

double off_diagonal_norm(const ComplexMatrix& a) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) {
            if (i != j) sum += std::norm(a(i, j));
        }
    }
    return std::sqrt(sum);
}

// Zero a(p,q) with the unitary G = [[c, s e^{i phi}], [-s e^{-i phi}, c]]
// acting on coordinates p,q, where a(p,q) = |a(p,q)| e^{i phi}.
void jacobi_rotate(ComplexMatrix& a, ComplexMatrix& v, std::size_t p, std::size_t q) {
    const Complex apq = a(p, q);
    const double mag = std::abs(apq);
    if (mag == 0.0) return;

    const Complex phase = apq / mag;
    const double app = a(p, p).real();
    const double aqq = a(q, q).real();
    const double theta = (aqq - app) / (2.0 * mag);
    double t;
    if (std::abs(theta) > 1e150) {
        t = 0.5 / theta;
    } else {
        t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
    }
    const double c = 1.0 / std::sqrt(t * t + 1.0);
    const double s = t * c;

    const Complex g_pq = s * phase;             // G(p,q)
    const Complex g_qp = -s * std::conj(phase); // G(q,p)
    const std::size_t n = a.rows();

    // a <- a G
    for (std::size_t k = 0; k < n; ++k) {
        const Complex akp = a(k, p);
        const Complex akq = a(k, q);
        a(k, p) = akp * c + akq * g_qp;
        a(k, q) = akp * g_pq + akq * c;
    }
    // a <- G^dagger a
    for (std::size_t k = 0; k < n; ++k) {
        const Complex apk = a(p, k);
        const Complex aqk = a(q, k);
        a(p, k) = c * apk + std::conj(g_qp) * aqk;
        a(q, k) = std::conj(g_pq) * apk + c * aqk;
    }
    a(p, q) = 0.0;
    a(q, p) = 0.0;
    a(p, p) = a(p, p).real();
    a(q, q) = a(q, q).real();

    for (std::size_t k = 0; k < n; ++k) {
        const Complex vkp = v(k, p);
        const Complex vkq = v(k, q);
        v(k, p) = vkp * c + vkq * g_qp;
        v(k, q) = vkp * g_pq + vkq * c;
    }
}

// Largest-magnitude component made real-positive; near-ties go to the lowest index.
void fix_phase(ComplexMatrix& v, std::size_t col) {
    const std::size_t n = v.rows();
    double best = -1.0;
    std::size_t best_row = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double m = std::abs(v(i, col));
        if (m > best * (1.0 + 1e-12)) {
            best = m;
            best_row = i;
        }
    }
    if (best <= 0.0) return;
    const Complex rot = std::conj(v(best_row, col)) / best;
    for (std::size_t i = 0; i < n; ++i) v(i, col) *= rot;
    v(best_row, col) = v(best_row, col).real();
}

}  // namespace

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols) {
    if (rows == 0 || cols == 0) throw ShapeError("ComplexMatrix: dimensions must be positive");
}

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<Complex> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
    if (rows == 0 || cols == 0) throw ShapeError("ComplexMatrix: dimensions must be positive");
    if (data_.size() != rows * cols) {
        throw ShapeError("ComplexMatrix: " + std::to_string(data_.size()) + " entries for shape " +
                         std::to_string(rows) + "x" + std::to_string(cols));
    }
    for (const Complex& z : data_) {
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
            throw DomainError("ComplexMatrix: non-finite entry");
        }
    }
}

ComplexMatrix::ComplexMatrix(std::initializer_list<std::initializer_list<Complex>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    if (rows_ == 0 || cols_ == 0) throw ShapeError("ComplexMatrix: dimensions must be positive");
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) throw ShapeError("ComplexMatrix: ragged initializer");
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

ComplexMatrix ComplexMatrix::identity(std::size_t n) {
    ComplexMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

ComplexMatrix ComplexMatrix::diagonal(std::span<const Complex> d) {
    ComplexMatrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
}

ComplexMatrix ComplexMatrix::diagonal(std::span<const double> d) {
    ComplexMatrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
}

ComplexMatrix ComplexMatrix::from_columns(std::span<const ComplexVector> columns) {
    if (columns.empty()) throw ShapeError("from_columns: no columns");
    const std::size_t n = columns.front().size();
    ComplexMatrix m(n, columns.size());
    for (std::size_t j = 0; j < columns.size(); ++j) {
        if (columns[j].size() != n) throw ShapeError("from_columns: columns differ in length");
        for (std::size_t i = 0; i < n; ++i) m(i, j) = columns[j][i];
    }
    return m;
}

ComplexVector ComplexMatrix::column(std::size_t j) const {
    ComplexVector out(rows_);
    for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
    return out;
}

ComplexMatrix& ComplexMatrix::operator+=(const ComplexMatrix& other) {
    require_same_shape(*this, other, "operator+");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += other.data_[k];
    return *this;
}

ComplexMatrix& ComplexMatrix::operator-=(const ComplexMatrix& other) {
    require_same_shape(*this, other, "operator-");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= other.data_[k];
    return *this;
}

ComplexMatrix& ComplexMatrix::operator*=(Complex s) {
    for (Complex& z : data_) z *= s;
    return *this;
}

ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
ComplexMatrix operator*(Complex s, ComplexMatrix m) { return m *= s; }
ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) { return matmul(a, b); }

ComplexMatrix adjoint(const ComplexMatrix& m) {
    ComplexMatrix out(m.cols(), m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) out(j, i) = std::conj(m(i, j));
    }
    return out;
}

ComplexMatrix matmul(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.cols() != b.rows()) {
        throw ShapeError("matmul: inner dimensions differ (" + shape_of(a) + " * " + shape_of(b) + ")");
    }
    ComplexMatrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const Complex aik = a(i, k);
            if (aik == Complex{}) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
        }
    }
    return out;
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
    ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) {
            const Complex aij = a(i, j);
            for (std::size_t k = 0; k < b.rows(); ++k) {
                for (std::size_t l = 0; l < b.cols(); ++l) {
                    out(i * b.rows() + k, j * b.cols() + l) = aij * b(k, l);
                }
            }
        }
    }
    return out;
}

Complex trace(const ComplexMatrix& m) {
    require_square(m, "trace");
    Complex sum{};
    for (std::size_t i = 0; i < m.rows(); ++i) sum += m(i, i);
    return sum;
}

ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b) {
    return matmul(a, b) - matmul(b, a);
}

double frobenius_norm(const ComplexMatrix& m) {
    double sum = 0.0;
    for (const Complex& z : m.entries()) sum += std::norm(z);
    return std::sqrt(sum);
}

double hermiticity_residual(const ComplexMatrix& m) {
    require_square(m, "hermiticity_residual");
    double sum = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) sum += std::norm(m(i, j) - std::conj(m(j, i)));
    }
    return std::sqrt(sum);
}

bool is_hermitian(const ComplexMatrix& m, double rel_tol) {
    return m.is_square() && hermiticity_residual(m) <= rel_tol * frobenius_norm(m);
}

double unitarity_residual(const ComplexMatrix& m) {
    require_square(m, "unitarity_residual");
    return frobenius_norm(matmul(adjoint(m), m) - ComplexMatrix::identity(m.rows()));
}

ComplexVector apply(const ComplexMatrix& m, std::span<const Complex> v) {
    if (m.cols() != v.size()) {
        throw ShapeError("apply: matrix " + shape_of(m) + " vs vector of length " + std::to_string(v.size()));
    }
    ComplexVector out(m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        Complex sum{};
        for (std::size_t j = 0; j < m.cols(); ++j) sum += m(i, j) * v[j];
        out[i] = sum;
    }
    return out;
}

Complex inner(std::span<const Complex> a, std::span<const Complex> b) {
    if (a.size() != b.size()) throw ShapeError("inner: vector lengths differ");
    Complex sum{};
    for (std::size_t i = 0; i < a.size(); ++i) sum += std::conj(a[i]) * b[i];
    return sum;
}

double norm(std::span<const Complex> v) {
    double sum = 0.0;
    for (const Complex& z : v) sum += std::norm(z);
    return std::sqrt(sum);
}

ComplexMatrix outer(std::span<const Complex> a, std::span<const Complex> b) {
    ComplexMatrix out(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) out(i, j) = a[i] * std::conj(b[j]);
    }
    return out;
}

EigenDecomposition hermitian_eig(const ComplexMatrix& h) {
    require_square(h, "hermitian_eig");
    const double scale = frobenius_norm(h);
    if (hermiticity_residual(h) > kHermitianInputTolerance * scale) {
        throw DomainError("hermitian_eig: matrix is not Hermitian");
    }
    const std::size_t n = h.rows();

    ComplexMatrix a = h;
    for (std::size_t i = 0; i < n; ++i) a(i, i) = a(i, i).real();
    ComplexMatrix v = ComplexMatrix::identity(n);

    const double target = kJacobiTolerance * scale;
    int sweep = 0;
    while (off_diagonal_norm(a) > target) {
        if (++sweep > kJacobiMaxSweeps) {
            throw NumericalError("hermitian_eig: no convergence after " + std::to_string(kJacobiMaxSweeps) +
                                 " sweeps");
        }
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) jacobi_rotate(a, v, p, q);
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return a(x, x).real() < a(y, y).real(); });

    EigenDecomposition out{std::vector<double>(n), ComplexMatrix(n, n)};
    for (std::size_t k = 0; k < n; ++k) {
        out.eigenvalues[k] = a(order[k], order[k]).real();
        for (std::size_t i = 0; i < n; ++i) out.eigenvectors(i, k) = v(i, order[k]);
        fix_phase(out.eigenvectors, k);
    }
    return out;
}

std::vector<double> hermitian_eigenvalues(const ComplexMatrix& h) {
    return hermitian_eig(h).eigenvalues;
}

ComplexMatrix expm_hermitian(const ComplexMatrix& h, double t) {
    return expm_from_eig(hermitian_eig(h), t);
}

ComplexMatrix expm_from_eig(const EigenDecomposition& eig, double t) {
    const std::size_t n = eig.eigenvalues.size();
    if (t == 0.0) return ComplexMatrix::identity(n);
    const ComplexMatrix& v = eig.eigenvectors;
    ComplexVector phases(n);
    for (std::size_t k = 0; k < n; ++k) phases[k] = std::exp(-kI * (eig.eigenvalues[k] * t));
    ComplexMatrix out(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            Complex sum{};
            for (std::size_t k = 0; k < n; ++k) sum += v(i, k) * phases[k] * std::conj(v(j, k));
            out(i, j) = sum;
        }
    }
    return out;
}

ComplexMatrix expm_oracle(const ComplexMatrix& a) {
    require_square(a, "expm_oracle");
    const std::size_t n = a.rows();
    int squarings = 0;
    double scaled_norm = frobenius_norm(a);
    while (scaled_norm > 0.5) {
        scaled_norm *= 0.5;
        ++squarings;
    }
    const ComplexMatrix x = std::ldexp(1.0, -squarings) * a;

    // Horner form of sum_{k=0}^{12} x^k / k!
    constexpr int kDegree = 12;
    ComplexMatrix result = ComplexMatrix::identity(n);
    for (int k = kDegree; k >= 1; --k) {
        result = ComplexMatrix::identity(n) + Complex(1.0 / k) * matmul(x, result);
    }
    for (int s = 0; s < squarings; ++s) result = matmul(result, result);
    return result;
}

ComplexMatrix partial_trace(const ComplexMatrix& m, std::size_t dim_a, std::size_t dim_b, Subsystem keep) {
    if (dim_a == 0 || dim_b == 0 || !m.is_square() || m.rows() != dim_a * dim_b) {
        throw ShapeError("partial_trace: " + shape_of(m) + " does not factor as " + std::to_string(dim_a) +
                         "x" + std::to_string(dim_b));
    }
    if (keep == Subsystem::A) {
        ComplexMatrix out(dim_a, dim_a);
        for (std::size_t i = 0; i < dim_a; ++i) {
            for (std::size_t j = 0; j < dim_a; ++j) {
                Complex sum{};
                for (std::size_t k = 0; k < dim_b; ++k) sum += m(i * dim_b + k, j * dim_b + k);
                out(i, j) = sum;
            }
        }
        return out;
    }
    ComplexMatrix out(dim_b, dim_b);
    for (std::size_t k = 0; k < dim_b; ++k) {
        for (std::size_t l = 0; l < dim_b; ++l) {
            Complex sum{};
            for (std::size_t i = 0; i < dim_a; ++i) sum += m(i * dim_b + k, i * dim_b + l);
            out(k, l) = sum;
        }
    }
    return out;
}

}  // namespace qdyn
