#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <utility>
#include <vector>

#include "bwmac/errors.hpp"

namespace bwmac {

/// Dense complex matrix, row-major, double precision. The universal operand:
/// channels, detection matrices, Gram matrices, and column vectors all live
/// here. Full precision throughout; quantization is modeled elsewhere.
class ComplexMatrix {
public:
    using value_type = std::complex<double>;

    ComplexMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), entries_(checked_size(rows, cols)) {}

    ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<value_type> entries)
        : rows_(rows), cols_(cols), entries_(std::move(entries)) {
        if (entries_.size() != checked_size(rows, cols)) {
            throw ShapeError("entry count does not match rows*cols");
        }
    }

    static ComplexMatrix identity(std::size_t n) {
        ComplexMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    static ComplexMatrix from_rows(std::initializer_list<std::initializer_list<value_type>> rows) {
        const std::size_t r = rows.size();
        const std::size_t c = r > 0 ? rows.begin()->size() : 0;
        ComplexMatrix m(r, c);
        std::size_t i = 0;
        for (const auto& row : rows) {
            if (row.size() != c) throw ShapeError("ragged initializer rows");
            std::size_t j = 0;
            for (const auto& v : row) m(i, j++) = v;
            ++i;
        }
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    value_type& operator()(std::size_t i, std::size_t j) { return entries_[i * cols_ + j]; }
    const value_type& operator()(std::size_t i, std::size_t j) const { return entries_[i * cols_ + j]; }

    std::vector<value_type>& entries() { return entries_; }
    const std::vector<value_type>& entries() const { return entries_; }

    bool same_shape(const ComplexMatrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

private:
    static std::size_t checked_size(std::size_t rows, std::size_t cols) {
        if (rows == 0 || cols == 0) throw ShapeError("matrix dimensions must be at least 1x1");
        return rows * cols;
    }

    std::size_t rows_;
    std::size_t cols_;
    std::vector<value_type> entries_;
};

/// Dense real matrix, row-major. Carrier for the real-valued branches the
/// photonic preprocessing produces.
class RealMatrix {
public:
    RealMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), entries_(checked_size(rows, cols)) {}

    RealMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
        : rows_(rows), cols_(cols), entries_(std::move(entries)) {
        if (entries_.size() != checked_size(rows, cols)) {
            throw ShapeError("entry count does not match rows*cols");
        }
    }

    static RealMatrix constant(std::size_t rows, std::size_t cols, double value) {
        RealMatrix m(rows, cols);
        for (auto& e : m.entries_) e = value;
        return m;
    }

    static RealMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
        const std::size_t r = rows.size();
        const std::size_t c = r > 0 ? rows.begin()->size() : 0;
        RealMatrix m(r, c);
        std::size_t i = 0;
        for (const auto& row : rows) {
            if (row.size() != c) throw ShapeError("ragged initializer rows");
            std::size_t j = 0;
            for (double v : row) m(i, j++) = v;
            ++i;
        }
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return entries_[i * cols_ + j]; }
    const double& operator()(std::size_t i, std::size_t j) const { return entries_[i * cols_ + j]; }

    std::vector<double>& entries() { return entries_; }
    const std::vector<double>& entries() const { return entries_; }

private:
    static std::size_t checked_size(std::size_t rows, std::size_t cols) {
        if (rows == 0 || cols == 0) throw ShapeError("matrix dimensions must be at least 1x1");
        return rows * cols;
    }

    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> entries_;
};

inline RealMatrix real_part(const ComplexMatrix& a) {
    RealMatrix out(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.entries().size(); ++i) out.entries()[i] = a.entries()[i].real();
    return out;
}

inline RealMatrix imag_part(const ComplexMatrix& a) {
    RealMatrix out(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.entries().size(); ++i) out.entries()[i] = a.entries()[i].imag();
    return out;
}

/// Exact (floating) product. Reference route for every photonic result.
inline ComplexMatrix matmul(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.cols() != b.rows()) throw ShapeError("matmul: inner dimensions differ");
    ComplexMatrix c(a.rows(), b.cols());
    const std::size_t n = a.cols(), k = b.cols();
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t t = 0; t < n; ++t) {
            const std::complex<double> av = a(i, t);
            if (av == 0.0) continue;
            for (std::size_t j = 0; j < k; ++j) {
                c(i, j) += av * b(t, j);
            }
        }
    }
    return c;
}

/// Conjugate transpose.
inline ComplexMatrix hermitian(const ComplexMatrix& a) {
    ComplexMatrix out(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) {
            out(j, i) = std::conj(a(i, j));
        }
    }
    return out;
}

/// H^H H, built symmetrically so the result is Hermitian to the bit.
inline ComplexMatrix gram(const ComplexMatrix& h) {
    const std::size_t m = h.rows(), k = h.cols();
    ComplexMatrix g(k, k);
    for (std::size_t i = 0; i < k; ++i) {
        double diag = 0.0;
        for (std::size_t t = 0; t < m; ++t) diag += std::norm(h(t, i));
        g(i, i) = diag;
        for (std::size_t j = i + 1; j < k; ++j) {
            std::complex<double> s = 0.0;
            for (std::size_t t = 0; t < m; ++t) s += std::conj(h(t, i)) * h(t, j);
            g(i, j) = s;
            g(j, i) = std::conj(s);
        }
    }
    return g;
}

inline double frobenius_norm(const ComplexMatrix& a) {
    double sum = 0.0;
    for (const auto& z : a.entries()) sum += std::norm(z);
    return std::sqrt(sum);
}

inline ComplexMatrix add(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (!a.same_shape(b)) throw ShapeError("add: shapes differ");
    ComplexMatrix out = a;
    for (std::size_t i = 0; i < out.entries().size(); ++i) out.entries()[i] += b.entries()[i];
    return out;
}

inline ComplexMatrix sub(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (!a.same_shape(b)) throw ShapeError("sub: shapes differ");
    ComplexMatrix out = a;
    for (std::size_t i = 0; i < out.entries().size(); ++i) out.entries()[i] -= b.entries()[i];
    return out;
}

inline ComplexMatrix scale(const ComplexMatrix& a, std::complex<double> s) {
    ComplexMatrix out = a;
    for (auto& z : out.entries()) z *= s;
    return out;
}

/// a + s*I
inline ComplexMatrix add_scaled_identity(const ComplexMatrix& a, std::complex<double> s) {
    if (a.rows() != a.cols()) throw ShapeError("add_scaled_identity: matrix must be square");
    ComplexMatrix out = a;
    for (std::size_t i = 0; i < a.rows(); ++i) out(i, i) += s;
    return out;
}

/// Inverse via LU with partial pivoting. Pivots below 1e-12 relative to the
/// largest entry magnitude are treated as singular.
inline ComplexMatrix exact_inverse(const ComplexMatrix& a) {
    if (a.rows() != a.cols()) throw ShapeError("exact_inverse: matrix must be square");
    const std::size_t n = a.rows();

    double max_mag = 0.0;
    for (const auto& z : a.entries()) max_mag = std::max(max_mag, std::abs(z));
    const double pivot_tol = 1e-12 * max_mag;

    std::vector<std::complex<double>> lu = a.entries();
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});

    auto at = [&lu, n](std::size_t i, std::size_t j) -> std::complex<double>& { return lu[i * n + j]; };

    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot_row = col;
        double pivot_mag = std::abs(at(col, col));
        for (std::size_t r = col + 1; r < n; ++r) {
            const double mag = std::abs(at(r, col));
            if (mag > pivot_mag) {
                pivot_mag = mag;
                pivot_row = r;
            }
        }
        if (pivot_mag < pivot_tol || pivot_mag == 0.0) {
            throw SingularityError("exact_inverse: pivot below singularity threshold");
        }
        if (pivot_row != col) {
            for (std::size_t j = 0; j < n; ++j) std::swap(at(col, j), at(pivot_row, j));
            std::swap(perm[col], perm[pivot_row]);
        }
        const std::complex<double> pivot = at(col, col);
        for (std::size_t r = col + 1; r < n; ++r) {
            const std::complex<double> factor = at(r, col) / pivot;
            at(r, col) = factor;
            if (factor == 0.0) continue;
            for (std::size_t j = col + 1; j < n; ++j) at(r, j) -= factor * at(col, j);
        }
    }

    // Solve A x = e_p column by column through the factored form.
    ComplexMatrix inv(n, n);
    std::vector<std::complex<double>> x(n);
    for (std::size_t col = 0; col < n; ++col) {
        for (std::size_t i = 0; i < n; ++i) x[i] = (perm[i] == col) ? 1.0 : 0.0;
        for (std::size_t i = 1; i < n; ++i) {
            std::complex<double> s = x[i];
            for (std::size_t j = 0; j < i; ++j) s -= at(i, j) * x[j];
            x[i] = s;
        }
        for (std::size_t ii = n; ii-- > 0;) {
            std::complex<double> s = x[ii];
            for (std::size_t j = ii + 1; j < n; ++j) s -= at(ii, j) * x[j];
            x[ii] = s / at(ii, ii);
        }
        for (std::size_t i = 0; i < n; ++i) inv(i, col) = x[i];
    }
    return inv;
}

}  // namespace bwmac
