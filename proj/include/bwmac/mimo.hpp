#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bwmac/inverse.hpp"
#include "bwmac/matrix.hpp"
#include "bwmac/photonic.hpp"
#include "bwmac/rng.hpp"

namespace bwmac {

enum class Modulation : std::uint8_t { qpsk, qam16 };

/// Finite symbol alphabet, normalized to unit average symbol energy. Point
/// order is fixed; slicing ties resolve to the lowest index.
struct ModulationSet {
    Modulation name;
    std::vector<std::complex<double>> points;

    static const ModulationSet& qpsk() {
        static const ModulationSet set = [] {
            const double s = 1.0 / std::sqrt(2.0);
            return ModulationSet{Modulation::qpsk,
                                 {{s, s}, {s, -s}, {-s, s}, {-s, -s}}};
        }();
        return set;
    }

    static const ModulationSet& qam16() {
        static const ModulationSet set = [] {
            const double s = 1.0 / std::sqrt(10.0);
            std::vector<std::complex<double>> pts;
            for (double re : {-3.0, -1.0, 1.0, 3.0}) {
                for (double im : {-3.0, -1.0, 1.0, 3.0}) {
                    pts.push_back({re * s, im * s});
                }
            }
            return ModulationSet{Modulation::qam16, std::move(pts)};
        }();
        return set;
    }

    static const ModulationSet& get(Modulation m) {
        return m == Modulation::qpsk ? qpsk() : qam16();
    }
};

/// One uplink realization: y = H x + n with known channel and noise power.
struct DetectionProblem {
    ComplexMatrix h;       // M x K channel
    double sigma2;         // noise variance
    ComplexMatrix x;       // K x 1 transmitted symbols
    ComplexMatrix y;       // M x 1 received vector
    std::vector<int> true_indices;
};

/// i.i.d. circularly-symmetric complex Gaussian channel, per-entry variance 1
/// (real and imaginary parts each N(0, 1/2)). Deterministic given the seed.
inline ComplexMatrix sample_rayleigh_channel(int m_antennas, int k_users, std::uint64_t seed) {
    if (m_antennas < 1 || k_users < 1) throw ShapeError("sample_rayleigh_channel: dims must be positive");
    GaussianSource gauss(seed);
    const double s = 1.0 / std::sqrt(2.0);
    ComplexMatrix h(static_cast<std::size_t>(m_antennas), static_cast<std::size_t>(k_users));
    for (auto& z : h.entries()) z = {gauss.next() * s, gauss.next() * s};
    return h;
}

/// Zero-forcing detection matrix (H^H H)^-1 H^H: the left pseudo-inverse.
inline ComplexMatrix zf_matrix(const ComplexMatrix& h) {
    return matmul(exact_inverse(gram(h)), hermitian(h));
}

enum class InverterKind : std::uint8_t { exact, neumann, newton };

/// Inversion backend for the detection chain: exact LU, or an iterative
/// approximation of the given order (series terms / Newton iterations).
struct InverterSpec {
    InverterKind kind = InverterKind::exact;
    int order = 3;
};

namespace detail {

inline ComplexMatrix invert_with(const ComplexMatrix& b, const InverterSpec& inv, const MatProduct& multiply) {
    switch (inv.kind) {
        case InverterKind::neumann:
            return neumann_inverse(b, inv.order, std::nullopt, 1e-9, multiply).first;
        case InverterKind::newton:
            return newton_inverse(b, inv.order, std::nullopt, 1e-9, multiply).first;
        case InverterKind::exact:
        default:
            return exact_inverse(b);
    }
}

}  // namespace detail

/// MMSE detection matrix (H^H H + sigma^2 I)^-1 H^H. The regularized Gram
/// matrix is what the selected inversion backend receives; all matrix
/// products route through `multiply` when given (the emulated-hardware path).
inline ComplexMatrix mmse_matrix(const ComplexMatrix& h, double sigma2,
                                 const InverterSpec& inverter = {}, const MatProduct& multiply = {}) {
    if (sigma2 < 0.0) throw DomainError("mmse_matrix: sigma2 must be nonnegative");
    const ComplexMatrix h_herm = hermitian(h);
    const ComplexMatrix g = multiply ? multiply(h_herm, h) : gram(h);
    const ComplexMatrix b = add_scaled_identity(g, sigma2);
    const ComplexMatrix b_inv = detail::invert_with(b, inverter, multiply);
    return detail::apply_product(multiply, b_inv, h_herm);
}

/// Nearest-point slice of one soft symbol; ties break to the lowest index.
inline int slice_symbol(std::complex<double> v, const ModulationSet& mod) {
    int best = 0;
    double best_dist = std::norm(v - mod.points[0]);
    for (std::size_t s = 1; s < mod.points.size(); ++s) {
        const double dist = std::norm(v - mod.points[s]);
        if (dist < best_dist) {
            best_dist = dist;
            best = static_cast<int>(s);
        }
    }
    return best;
}

/// Linear detection: x_hat = A y, then per-entry nearest-constellation-point
/// slicing.
inline std::vector<int> detect_linear(const ComplexMatrix& a, const ComplexMatrix& y,
                                      const ModulationSet& mod, const MatProduct& multiply = {}) {
    const ComplexMatrix x_hat = detail::apply_product(multiply, a, y);
    std::vector<int> indices(x_hat.rows());
    for (std::size_t i = 0; i < x_hat.rows(); ++i) indices[i] = slice_symbol(x_hat(i, 0), mod);
    return indices;
}

/// Exhaustive maximum-likelihood detection: argmin over S^K of ||y - H x||,
/// ties broken lexicographically. Guarded to |S|^K <= 10^6.
inline std::vector<int> ml_detect(const ComplexMatrix& h, const ComplexMatrix& y,
                                  const ModulationSet& mod) {
    const std::size_t m = h.rows(), k = h.cols();
    const std::size_t s_count = mod.points.size();

    double combos = 1.0;
    for (std::size_t u = 0; u < k; ++u) combos *= static_cast<double>(s_count);
    if (combos > 1e6) throw CapacityError("ml_detect: |S|^K exceeds the 1e6 search guard");

    // Column-times-point products, reused across the whole search.
    std::vector<std::vector<std::complex<double>>> col_sym(k * s_count,
                                                           std::vector<std::complex<double>>(m));
    for (std::size_t u = 0; u < k; ++u) {
        for (std::size_t s = 0; s < s_count; ++s) {
            for (std::size_t i = 0; i < m; ++i) col_sym[u * s_count + s][i] = h(i, u) * mod.points[s];
        }
    }

    std::vector<int> current(k, 0), best(k, 0);
    double best_metric = -1.0;
    // Partial residuals per depth: partial[u] = y - sum_{v<u} h_v s_{current[v]}.
    std::vector<std::vector<std::complex<double>>> partial(k + 1, std::vector<std::complex<double>>(m));
    for (std::size_t i = 0; i < m; ++i) partial[0][i] = y(i, 0);

    std::size_t depth = 0;
    while (true) {
        if (depth == k) {
            double metric = 0.0;
            for (std::size_t i = 0; i < m; ++i) metric += std::norm(partial[k][i]);
            if (best_metric < 0.0 || metric < best_metric) {
                best_metric = metric;
                best = current;
            }
            // Backtrack to the next lexicographic tuple.
            while (depth > 0 && current[depth - 1] == static_cast<int>(s_count) - 1) {
                --depth;
            }
            if (depth == 0) break;
            ++current[depth - 1];
            for (std::size_t u = depth; u < k; ++u) current[u] = 0;
            --depth;
        }
        const auto& contrib = col_sym[depth * s_count + static_cast<std::size_t>(current[depth])];
        for (std::size_t i = 0; i < m; ++i) partial[depth + 1][i] = partial[depth][i] - contrib[i];
        ++depth;
    }
    return best;
}

enum class DetectorKind : std::uint8_t { zf, mmse, ml };

/// End-to-end detector selection: the linear method (or ML), the inversion
/// backend, and optionally the photonic hardware every matrix product runs
/// through. Without a hardware config, arithmetic is exact.
struct DetectorSpec {
    DetectorKind detector = DetectorKind::mmse;
    InverterSpec inverter{};
    std::optional<HardwareConfig> photonic{};
};

inline MatProduct make_engine(const std::optional<HardwareConfig>& hw) {
    if (!hw) return {};
    const HardwareConfig cfg = *hw;
    return [cfg](const ComplexMatrix& a, const ComplexMatrix& b) {
        return photonic_matmul(a, b, cfg).first;
    };
}

/// Detection matrix for either linear scheme; ZF is the sigma^2 = 0 case of
/// the regularized chain.
inline ComplexMatrix detection_matrix(const ComplexMatrix& h, double sigma2, DetectorKind kind,
                                      const InverterSpec& inverter, const MatProduct& multiply = {}) {
    return mmse_matrix(h, kind == DetectorKind::mmse ? sigma2 : 0.0, inverter, multiply);
}

/// SNR convention: snr_db = 10 log10(E|x_i|^2 / sigma^2) = -10 log10(sigma^2)
/// for unit-energy constellations.
inline double sigma2_from_snr_db(double snr_db) { return std::pow(10.0, -snr_db / 10.0); }

/// Draws one complete uplink realization. Channel, symbols, and noise use
/// independent sub-streams derived from the trial seed.
inline DetectionProblem make_detection_problem(int m_antennas, int k_users, double snr_db,
                                               const ModulationSet& mod, std::uint64_t seed) {
    const std::size_t k = static_cast<std::size_t>(k_users);
    ComplexMatrix h = sample_rayleigh_channel(m_antennas, k_users, derive_seed(seed, 0));

    // Symbol indices: alphabet sizes are powers of two, so masking the raw
    // 64-bit draw is exactly uniform.
    GaussianSource symbol_rng(derive_seed(seed, 1));
    const std::uint64_t mask = mod.points.size() - 1;
    std::vector<int> indices(k);
    ComplexMatrix x(k, 1);
    for (std::size_t i = 0; i < k; ++i) {
        indices[i] = static_cast<int>(symbol_rng.raw() & mask);
        x(i, 0) = mod.points[static_cast<std::size_t>(indices[i])];
    }

    const double sigma2 = sigma2_from_snr_db(snr_db);
    GaussianSource noise_rng(derive_seed(seed, 2));
    const double noise_s = std::sqrt(sigma2 / 2.0);
    ComplexMatrix y = matmul(h, x);
    for (std::size_t i = 0; i < y.rows(); ++i) {
        y(i, 0) += std::complex<double>(noise_rng.next() * noise_s, noise_rng.next() * noise_s);
    }
    return DetectionProblem{std::move(h), sigma2, std::move(x), std::move(y), std::move(indices)};
}

struct TrialResult {
    int symbol_errors = 0;
    int symbols = 0;
};

/// One Monte-Carlo trial: draw a channel realization, detect, count per-user
/// symbol errors. Fully deterministic given the seed.
inline TrialResult run_ser_trial(int m_antennas, int k_users, double snr_db, const ModulationSet& mod,
                                 const DetectorSpec& det, std::uint64_t seed) {
    const DetectionProblem prob = make_detection_problem(m_antennas, k_users, snr_db, mod, seed);

    std::vector<int> detected;
    if (det.detector == DetectorKind::ml) {
        detected = ml_detect(prob.h, prob.y, mod);
    } else {
        const MatProduct engine = make_engine(det.photonic);
        const ComplexMatrix a = detection_matrix(prob.h, prob.sigma2, det.detector, det.inverter, engine);
        detected = detect_linear(a, prob.y, mod, engine);
    }

    TrialResult result;
    result.symbols = k_users;
    for (int i = 0; i < k_users; ++i) {
        if (detected[static_cast<std::size_t>(i)] != prob.true_indices[static_cast<std::size_t>(i)]) {
            ++result.symbol_errors;
        }
    }
    return result;
}

}  // namespace bwmac
