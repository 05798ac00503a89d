#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "bwmac/matrix.hpp"
#include "bwmac/rng.hpp"

namespace bwmac {

/// Split of a square matrix into its diagonal and hollow (zero-diagonal)
/// parts. diag + offdiag reconstructs the input bit-exactly.
struct DiagSplit {
    ComplexMatrix diag;
    ComplexMatrix offdiag;
};

inline DiagSplit diag_split(const ComplexMatrix& a) {
    if (a.rows() != a.cols()) throw ShapeError("diag_split: matrix must be square");
    const std::size_t n = a.rows();
    DiagSplit out{ComplexMatrix(n, n), ComplexMatrix(n, n)};
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            (i == j ? out.diag : out.offdiag)(i, j) = a(i, j);
        }
    }
    return out;
}

/// Residual trace of an iterative inversion. residuals[0] belongs to the
/// order-0/initial estimate; one more entry per executed term or iteration.
struct ConvergenceReport {
    std::vector<double> residuals;  // ||I - X A||_F after each step
    int terms_used = 0;
    bool converged = false;
};

/// Pluggable matrix product. Empty means the exact in-core product; the
/// photonic emulator is slotted in here when a detection chain runs on
/// emulated hardware. Residual diagnostics always use the exact product.
using MatProduct = std::function<ComplexMatrix(const ComplexMatrix&, const ComplexMatrix&)>;

namespace detail {

inline ComplexMatrix apply_product(const MatProduct& mul, const ComplexMatrix& a, const ComplexMatrix& b) {
    return mul ? mul(a, b) : matmul(a, b);
}

inline double left_residual(const ComplexMatrix& x, const ComplexMatrix& a) {
    return frobenius_norm(sub(ComplexMatrix::identity(a.rows()), matmul(x, a)));
}

}  // namespace detail

/// diag(1/a_ii). Any exactly-zero diagonal entry is a singularity.
inline ComplexMatrix diagonal_reciprocal(const ComplexMatrix& a) {
    if (a.rows() != a.cols()) throw ShapeError("diagonal_reciprocal: matrix must be square");
    const std::size_t n = a.rows();
    ComplexMatrix out(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::complex<double> d = a(i, i);
        if (d == 0.0) throw SingularityError("diagonal_reciprocal: zero diagonal entry");
        out(i, i) = 1.0 / d;
    }
    return out;
}

/// I - X^-1 A, the matrix whose vanishing powers drive series convergence.
/// With the default diagonal preconditioner this is -A_diag^-1 A_offdiag.
inline ComplexMatrix iteration_matrix(const ComplexMatrix& a,
                                      const std::optional<ComplexMatrix>& precond_inverse = std::nullopt,
                                      const MatProduct& multiply = {}) {
    const ComplexMatrix x_inv = precond_inverse ? *precond_inverse : diagonal_reciprocal(a);
    return sub(ComplexMatrix::identity(a.rows()), detail::apply_product(multiply, x_inv, a));
}

/// K-term series approximation of the inverse: sum_{n=0..terms} M^n X^-1 with
/// M = I - X^-1 A. Accumulated Horner-style so each added term costs one
/// product of M with the previous term. If residuals grow for three
/// consecutive steps the best iterate seen is returned with converged=false.
inline std::pair<ComplexMatrix, ConvergenceReport> neumann_inverse(
    const ComplexMatrix& a, int terms,
    const std::optional<ComplexMatrix>& precond_inverse = std::nullopt,
    double tolerance = 1e-9, const MatProduct& multiply = {}) {
    if (a.rows() != a.cols()) throw ShapeError("neumann_inverse: matrix must be square");
    if (terms < 0) throw DomainError("neumann_inverse: terms must be nonnegative");
    if (precond_inverse && !precond_inverse->same_shape(a)) {
        throw ShapeError("neumann_inverse: preconditioner shape differs");
    }

    const ComplexMatrix x_inv = precond_inverse ? *precond_inverse : diagonal_reciprocal(a);
    const ComplexMatrix iter = sub(ComplexMatrix::identity(a.rows()),
                                   detail::apply_product(multiply, x_inv, a));

    ComplexMatrix sum = x_inv;
    ComplexMatrix term = x_inv;
    ConvergenceReport report;
    report.residuals.push_back(detail::left_residual(sum, a));

    ComplexMatrix best = sum;
    double best_residual = report.residuals.back();
    int increase_streak = 0;
    bool diverged = false;

    for (int n = 1; n <= terms; ++n) {
        term = detail::apply_product(multiply, iter, term);
        sum = add(sum, term);
        const double prev = report.residuals.back();
        const double res = detail::left_residual(sum, a);
        report.residuals.push_back(res);
        if (res < best_residual) {
            best_residual = res;
            best = sum;
        }
        increase_streak = (res > prev) ? increase_streak + 1 : 0;
        if (increase_streak >= 3) {
            diverged = true;
            break;
        }
    }

    report.terms_used = static_cast<int>(report.residuals.size()) - 1;
    report.converged = !diverged && report.residuals.back() <= tolerance;
    return {diverged ? best : sum, report};
}

/// Newton (Hotelling-Bodewig) iteration X_n = X_{n-1}(2I - A X_{n-1}),
/// quadratically convergent when ||I - A X_0|| < 1. X_0 defaults to the
/// reciprocal of the diagonal. Same divergence policy as neumann_inverse.
inline std::pair<ComplexMatrix, ConvergenceReport> newton_inverse(
    const ComplexMatrix& a, int iterations,
    const std::optional<ComplexMatrix>& x0 = std::nullopt,
    double tolerance = 1e-9, const MatProduct& multiply = {}) {
    if (a.rows() != a.cols()) throw ShapeError("newton_inverse: matrix must be square");
    if (iterations < 0) throw DomainError("newton_inverse: iterations must be nonnegative");
    if (x0 && !x0->same_shape(a)) throw ShapeError("newton_inverse: x0 shape differs");

    ComplexMatrix x = x0 ? *x0 : diagonal_reciprocal(a);
    const ComplexMatrix two_identity = scale(ComplexMatrix::identity(a.rows()), 2.0);

    ConvergenceReport report;
    report.residuals.push_back(detail::left_residual(x, a));

    ComplexMatrix best = x;
    double best_residual = report.residuals.back();
    int increase_streak = 0;
    bool diverged = false;

    for (int n = 1; n <= iterations; ++n) {
        const ComplexMatrix ax = detail::apply_product(multiply, a, x);
        x = detail::apply_product(multiply, x, sub(two_identity, ax));
        const double prev = report.residuals.back();
        const double res = detail::left_residual(x, a);
        report.residuals.push_back(res);
        if (res < best_residual) {
            best_residual = res;
            best = x;
        }
        increase_streak = (res > prev) ? increase_streak + 1 : 0;
        if (increase_streak >= 3) {
            diverged = true;
            break;
        }
    }

    report.terms_used = static_cast<int>(report.residuals.size()) - 1;
    report.converged = !diverged && report.residuals.back() <= tolerance;
    return {diverged ? best : x, report};
}

/// Power-iteration estimate of the largest eigenvalue magnitude. Advisory
/// pre-flight check: callers pass M = I - X0 A and compare against 1.
inline double spectral_radius_estimate(const ComplexMatrix& m, int iterations = 50,
                                       std::uint64_t seed = 0x5eed5eedULL) {
    if (m.rows() != m.cols()) throw ShapeError("spectral_radius_estimate: matrix must be square");
    if (iterations < 1) throw DomainError("spectral_radius_estimate: iterations must be positive");

    const std::size_t n = m.rows();
    GaussianSource gauss(seed);
    ComplexMatrix v(n, 1);
    for (std::size_t i = 0; i < n; ++i) v(i, 0) = {gauss.next(), gauss.next()};
    double norm = frobenius_norm(v);
    if (norm == 0.0) return 0.0;
    for (auto& z : v.entries()) z /= norm;

    double estimate = 0.0;
    for (int it = 0; it < iterations; ++it) {
        ComplexMatrix w = matmul(m, v);
        const double wn = frobenius_norm(w);
        if (wn == 0.0) return 0.0;
        estimate = wn;  // ||M v|| with ||v|| = 1
        for (auto& z : w.entries()) z /= wn;
        v = std::move(w);
    }
    return estimate;
}

}  // namespace bwmac
