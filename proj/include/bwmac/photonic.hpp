#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "bwmac/errors.hpp"
#include "bwmac/matrix.hpp"

namespace bwmac {

/// Architecture parameters of the broadcast-and-weight MAC core.
/// mrr_radius is in micrometers, t_single_use in picoseconds.
/// precision_bits counts magnitude bits; the sign bit is separate.
struct HardwareConfig {
    int channels_D = 8;        // parallel multiplexed waveguides
    int rings_R = 8;           // wavelengths / MRR pairs per waveguide
    int precision_bits = 8;    // modulator magnitude bits b
    double mrr_radius = 10.0;  // um
    double finesse = 368.0;
    double n_eff = 2.4;
    double t_single_use = 100.0;  // ps, electronic-interface bound
    int mrr_budget = 1024;        // total manufacturable MRRs
};

// The channel-count bound for finesse 368 with 3.41-linewidth spacing.
inline constexpr int kMaxRingsPerWaveguide = 100;

struct ConfigFinding {
    enum class Severity { warning, error };
    Severity severity;
    std::string message;
};

/// Checks a config against the architecture's hard and soft limits.
/// Exceeding the per-waveguide ring bound is an error; blowing the MRR
/// manufacturing budget is only a warning, since larger arrangements are
/// still quoted in the power model.
inline std::vector<ConfigFinding> validate_config(const HardwareConfig& cfg) {
    std::vector<ConfigFinding> findings;
    auto error = [&findings](std::string msg) {
        findings.push_back({ConfigFinding::Severity::error, std::move(msg)});
    };
    if (cfg.channels_D < 1) error("channels_D must be positive");
    if (cfg.rings_R < 1) error("rings_R must be positive");
    if (cfg.precision_bits < 1) error("precision_bits must be positive");
    if (cfg.precision_bits > 52) error("precision_bits above 52 exceeds double-precision resolution");
    if (cfg.mrr_radius <= 0.0) error("mrr_radius must be positive");
    if (cfg.finesse < 0.0) error("finesse must be nonnegative");
    if (cfg.n_eff <= 0.0) error("n_eff must be positive");
    if (cfg.t_single_use <= 0.0) error("t_single_use must be positive");
    if (cfg.mrr_budget < 1) error("mrr_budget must be positive");
    if (cfg.rings_R > kMaxRingsPerWaveguide) {
        error("rings_R exceeds the " + std::to_string(kMaxRingsPerWaveguide) +
              "-wavelength bound per waveguide");
    }
    const long long rings_total = 2LL * cfg.channels_D * cfg.rings_R;
    if (cfg.channels_D >= 1 && cfg.rings_R >= 1 && rings_total > cfg.mrr_budget) {
        findings.push_back({ConfigFinding::Severity::warning,
                            "2*D*R = " + std::to_string(rings_total) + " MRRs exceeds the budget of " +
                                std::to_string(cfg.mrr_budget)});
    }
    return findings;
}

inline bool has_errors(const std::vector<ConfigFinding>& findings) {
    for (const auto& f : findings) {
        if (f.severity == ConfigFinding::Severity::error) return true;
    }
    return false;
}

inline nlohmann::json to_json(const HardwareConfig& cfg) {
    return nlohmann::json{{"channels_D", cfg.channels_D},
                          {"rings_R", cfg.rings_R},
                          {"precision_bits", cfg.precision_bits},
                          {"mrr_radius", cfg.mrr_radius},
                          {"finesse", cfg.finesse},
                          {"n_eff", cfg.n_eff},
                          {"t_single_use", cfg.t_single_use},
                          {"mrr_budget", cfg.mrr_budget}};
}

/// Parses a config object. Unknown keys are rejected; missing keys keep
/// their defaults.
inline HardwareConfig hardware_config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("hardware config must be a JSON object");
    HardwareConfig cfg;
    for (const auto& [key, value] : j.items()) {
        try {
            if (key == "channels_D") cfg.channels_D = value.get<int>();
            else if (key == "rings_R") cfg.rings_R = value.get<int>();
            else if (key == "precision_bits") cfg.precision_bits = value.get<int>();
            else if (key == "mrr_radius") cfg.mrr_radius = value.get<double>();
            else if (key == "finesse") cfg.finesse = value.get<double>();
            else if (key == "n_eff") cfg.n_eff = value.get<double>();
            else if (key == "t_single_use") cfg.t_single_use = value.get<double>();
            else if (key == "mrr_budget") cfg.mrr_budget = value.get<int>();
            else throw ConfigError("unknown hardware config key '" + key + "'");
        } catch (const nlohmann::json::exception&) {
            throw ConfigError("hardware config key '" + key + "' has the wrong type");
        }
    }
    return cfg;
}

// ---------------------------------------------------------------------------
// Preprocessing step 1: complex operands as four real products.
// ---------------------------------------------------------------------------

enum class ProductTerm : std::uint8_t { rr, ii, ri, ir };

/// The 8 branches a complex product decomposes into: four real-product terms,
/// each split into a shifted (nonnegative LHS) pass and a compensation pass
/// that undoes the shift with a negated RHS.
enum class BranchTag : std::uint8_t {
    rr_shifted,
    rr_compensation,
    ii_shifted,
    ii_compensation,
    ri_shifted,
    ri_compensation,
    ir_shifted,
    ir_compensation,
};

inline constexpr int kBranchCount = 8;

inline constexpr std::array<BranchTag, kBranchCount> all_branches() {
    return {BranchTag::rr_shifted, BranchTag::rr_compensation, BranchTag::ii_shifted,
            BranchTag::ii_compensation, BranchTag::ri_shifted, BranchTag::ri_compensation,
            BranchTag::ir_shifted,      BranchTag::ir_compensation};
}

inline constexpr ProductTerm product_term(BranchTag tag) {
    return static_cast<ProductTerm>(static_cast<int>(tag) / 2);
}

inline constexpr bool is_compensation(BranchTag tag) {
    return static_cast<int>(tag) % 2 == 1;
}

inline const char* branch_name(BranchTag tag) {
    static constexpr const char* names[kBranchCount] = {
        "rr_shifted", "rr_compensation", "ii_shifted", "ii_compensation",
        "ri_shifted", "ri_compensation", "ir_shifted", "ir_compensation"};
    return names[static_cast<int>(tag)];
}

/// Operand pair of one real-valued product term.
struct RealBranch {
    ProductTerm term;
    RealMatrix lhs;
    RealMatrix rhs;
};

/// Splits A x B over C into the four real products
///   (A_r,B_r), (A_i,B_i), (A_r,B_i), (A_i,B_r),
/// recombined as real = rr - ii and imag = ri + ir.
inline std::array<RealBranch, 4> complex_decompose(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.cols() != b.rows()) throw ShapeError("complex_decompose: inner dimensions differ");
    RealMatrix ar = real_part(a), ai = imag_part(a);
    RealMatrix br = real_part(b), bi = imag_part(b);
    return {RealBranch{ProductTerm::rr, ar, br}, RealBranch{ProductTerm::ii, ai, bi},
            RealBranch{ProductTerm::ri, ar, bi}, RealBranch{ProductTerm::ir, ai, br}};
}

// ---------------------------------------------------------------------------
// Preprocessing step 2: negative values moved out of the intensity path.
// ---------------------------------------------------------------------------

/// Lifts a signed matrix into the nonnegative range:
///   A = (A + s*1) - s*1  with s = max(0, -min(A)),
/// so A x B = shifted x B + s*1 x (-B). Returns the shifted matrix and s.
inline std::pair<RealMatrix, double> negative_shift(const RealMatrix& a) {
    double min_entry = a.entries().front();
    for (double v : a.entries()) min_entry = std::min(min_entry, v);
    const double shift = min_entry < 0.0 ? -min_entry : 0.0;
    if (shift == 0.0) return {a, 0.0};
    RealMatrix shifted = a;
    for (double& v : shifted.entries()) v += shift;
    return {shifted, shift};
}

// ---------------------------------------------------------------------------
// Preprocessing step 3: D x R tiling.
// ---------------------------------------------------------------------------

/// Half-open index interval [begin, end).
struct IndexRange {
    std::size_t begin = 0;
    std::size_t end = 0;

    std::size_t length() const { return end - begin; }
};

/// One single-use invocation of the MAC core: a clipped LHS tile, one RHS
/// column, and the preprocessing branch it belongs to.
struct TileJob {
    IndexRange lhs_rows;  // row block of the (preprocessed) LHS
    IndexRange lhs_cols;  // inner-dimension slab
    std::size_t rhs_col = 0;
    BranchTag branch = BranchTag::rr_shifted;
};

namespace detail {
inline std::uint64_t ceil_div(std::uint64_t a, std::uint64_t b) { return (a + b - 1) / b; }
}  // namespace detail

/// Schedule of single-use MAC invocations realizing one full m x n x k
/// product on a D x R core. Jobs are enumerated on demand (index-addressed)
/// so plans for very large workloads stay cheap; the enumeration order is
/// branch, then output column, then row block, then inner slab, and that
/// order is also the accumulation order.
struct TilePlan {
    std::uint64_t m = 0, n = 0, k = 0;  // workload dims
    std::uint64_t d = 0, r = 0;         // hardware dims
    std::uint64_t use_count = 0;

    std::uint64_t row_blocks() const { return detail::ceil_div(m, d); }
    std::uint64_t slabs() const { return detail::ceil_div(n, r); }

    TileJob job_at(std::uint64_t index) const {
        const std::uint64_t nslabs = slabs();
        const std::uint64_t nblocks = row_blocks();
        const std::uint64_t slab = index % nslabs;
        index /= nslabs;
        const std::uint64_t block = index % nblocks;
        index /= nblocks;
        const std::uint64_t col = index % k;
        index /= k;
        TileJob job;
        job.branch = static_cast<BranchTag>(index);
        job.rhs_col = static_cast<std::size_t>(col);
        job.lhs_rows = {static_cast<std::size_t>(block * d),
                        static_cast<std::size_t>(std::min(m, (block + 1) * d))};
        job.lhs_cols = {static_cast<std::size_t>(slab * r),
                        static_cast<std::size_t>(std::min(n, (slab + 1) * r))};
        return job;
    }

    std::vector<TileJob> materialize_jobs() const {
        std::vector<TileJob> jobs;
        jobs.reserve(static_cast<std::size_t>(use_count));
        for (std::uint64_t i = 0; i < use_count; ++i) jobs.push_back(job_at(i));
        return jobs;
    }
};

/// N_use = 8 * k * ceil(m/D) * ceil(n/R): the upper-bound schedule with both
/// preprocessing steps engaged. Edge tiles are zero-padded to full D x R at
/// execution time.
inline TilePlan tile_plan(std::uint64_t m, std::uint64_t n, std::uint64_t k, const HardwareConfig& cfg) {
    if (m < 1 || n < 1 || k < 1) throw ShapeError("tile_plan: workload dims must be positive");
    if (cfg.channels_D < 1 || cfg.rings_R < 1) throw DomainError("tile_plan: hardware dims must be positive");
    TilePlan plan;
    plan.m = m;
    plan.n = n;
    plan.k = k;
    plan.d = static_cast<std::uint64_t>(cfg.channels_D);
    plan.r = static_cast<std::uint64_t>(cfg.rings_R);
    plan.use_count = static_cast<std::uint64_t>(kBranchCount) * k * plan.row_blocks() * plan.slabs();
    return plan;
}

// ---------------------------------------------------------------------------
// Modulator quantization.
// ---------------------------------------------------------------------------

/// Nearest of the 2^bits uniform intensity levels {i/(2^bits-1)}, ties
/// rounding up. Intensities carry no sign; the LHS is nonnegative after the
/// shift step.
inline double quantize_intensity(double v, int bits) {
    if (bits < 1 || bits > 52) throw DomainError("quantize_intensity: bits out of range");
    if (!(v >= 0.0 && v <= 1.0)) throw DomainError("quantize_intensity: value outside [0, 1]");
    const double levels = static_cast<double>((std::uint64_t{1} << bits) - 1);
    return std::floor(v * levels + 0.5) / levels;
}

/// Sign-magnitude weight quantization: b magnitude bits plus the sign.
inline double quantize_weight(double v, int bits) {
    if (bits < 1 || bits > 52) throw DomainError("quantize_weight: bits out of range");
    if (!(v >= -1.0 && v <= 1.0)) throw DomainError("quantize_weight: value outside [-1, 1]");
    const double magnitude = quantize_intensity(std::abs(v), bits);
    return v < 0.0 ? -magnitude : magnitude;
}

/// Normalization of one single-use invocation: tile values enter the core as
/// lhs/intensity_scale and rhs/weight_scale, and the analog sum is rescaled
/// by the product afterwards. shift records the branch's negative-shift
/// constant |a_min|.
struct ScaleRecord {
    double intensity_scale = 1.0;
    double weight_scale = 1.0;
    double shift = 0.0;
};

namespace detail {

/// Core MAC kernel without allocation: quantized weights are precomputed by
/// the caller; intensities are quantized per entry in normalized units and
/// the photodetector sum is exact.
inline void single_use_mac_into(std::span<const double> lhs_tile, std::size_t d, std::size_t r,
                                std::span<const double> quantized_weights, int bits,
                                double intensity_scale, double weight_scale,
                                std::span<double> out) {
    const double levels = static_cast<double>((std::uint64_t{1} << bits) - 1);
    const double inv_scale = 1.0 / intensity_scale;
    const double rescale = intensity_scale * weight_scale;
    for (std::size_t i = 0; i < d; ++i) {
        double acc = 0.0;
        const double* row = lhs_tile.data() + i * r;
        for (std::size_t j = 0; j < r; ++j) {
            const double q = std::floor(row[j] * inv_scale * levels + 0.5) / levels;
            acc += q * quantized_weights[j];
        }
        out[i] = acc * rescale;
    }
}

}  // namespace detail

/// One invocation of the MAC core: a d x r nonnegative tile against an
/// r-element signed weight segment. Inputs are quantized in normalized
/// hardware units; the optical accumulation itself is lossless.
inline std::vector<double> single_use_mac(const RealMatrix& lhs_tile, std::span<const double> rhs_segment,
                                          const HardwareConfig& cfg, const ScaleRecord& scales) {
    if (lhs_tile.rows() != static_cast<std::size_t>(cfg.channels_D) ||
        lhs_tile.cols() != static_cast<std::size_t>(cfg.rings_R)) {
        throw ShapeError("single_use_mac: tile must be exactly D x R (zero-padded)");
    }
    if (rhs_segment.size() != static_cast<std::size_t>(cfg.rings_R)) {
        throw ShapeError("single_use_mac: weight segment must have R entries");
    }
    if (scales.intensity_scale <= 0.0 || scales.weight_scale <= 0.0 || scales.shift < 0.0) {
        throw DomainError("single_use_mac: invalid scale record");
    }
    for (double v : lhs_tile.entries()) {
        if (!(v >= 0.0 && v <= scales.intensity_scale)) {
            throw DomainError("single_use_mac: tile entry outside [0, intensity_scale]");
        }
    }
    std::vector<double> weights(rhs_segment.size());
    for (std::size_t j = 0; j < rhs_segment.size(); ++j) {
        if (!(std::abs(rhs_segment[j]) <= scales.weight_scale)) {
            throw DomainError("single_use_mac: weight magnitude above weight_scale");
        }
        weights[j] = quantize_weight(rhs_segment[j] / scales.weight_scale, cfg.precision_bits);
    }
    std::vector<double> out(lhs_tile.rows());
    detail::single_use_mac_into(lhs_tile.entries(), lhs_tile.rows(), lhs_tile.cols(), weights,
                                cfg.precision_bits, scales.intensity_scale, scales.weight_scale, out);
    return out;
}

namespace detail {

/// LHS source of one branch: either an actual shifted matrix or the constant
/// shift*ones compensation matrix.
struct BranchLhs {
    const RealMatrix* shifted = nullptr;  // null for compensation branches
    double shift = 0.0;

    double at(std::size_t i, std::size_t j) const {
        return shifted ? (*shifted)(i, j) : shift;
    }
};

}  // namespace detail

/// Full emulated product: decomposition into 8 real branches, per-branch
/// negative shift, D x R tiling with per-tile max-magnitude normalization,
/// quantized single-use invocations, and exact recombination. The numerical
/// result is what idealized (noise-free, quantized) hardware would emit.
/// Zero branches are skipped arithmetically but still counted in the plan.
inline std::pair<ComplexMatrix, TilePlan> photonic_matmul(const ComplexMatrix& a, const ComplexMatrix& b,
                                                          const HardwareConfig& cfg) {
    if (a.cols() != b.rows()) throw ShapeError("photonic_matmul: inner dimensions differ");
    if (cfg.channels_D < 1 || cfg.rings_R < 1 || cfg.precision_bits < 1 || cfg.precision_bits > 52) {
        throw DomainError("photonic_matmul: invalid hardware dims or precision");
    }

    const std::size_t m = a.rows(), n = a.cols(), k = b.cols();
    const std::size_t d = static_cast<std::size_t>(cfg.channels_D);
    const std::size_t r = static_cast<std::size_t>(cfg.rings_R);
    const int bits = cfg.precision_bits;

    auto branches = complex_decompose(a, b);
    std::array<RealMatrix, 4> shifted = {RealMatrix(1, 1), RealMatrix(1, 1), RealMatrix(1, 1),
                                         RealMatrix(1, 1)};
    std::array<double, 4> shifts{};
    for (int t = 0; t < 4; ++t) {
        auto [s, shift] = negative_shift(branches[t].lhs);
        shifted[t] = std::move(s);
        shifts[t] = shift;
    }

    const TilePlan plan = tile_plan(m, n, k, cfg);

    // Per-branch real partial results, accumulated in job-index order.
    std::array<RealMatrix, kBranchCount> partial = {
        RealMatrix(m, k), RealMatrix(m, k), RealMatrix(m, k), RealMatrix(m, k),
        RealMatrix(m, k), RealMatrix(m, k), RealMatrix(m, k), RealMatrix(m, k)};

    std::vector<double> tile(d * r);
    std::vector<double> segment(r);
    std::vector<double> weights(r);
    std::vector<double> out(d);
    const double levels = static_cast<double>((std::uint64_t{1} << bits) - 1);

    for (std::uint64_t idx = 0; idx < plan.use_count; ++idx) {
        const TileJob job = plan.job_at(idx);
        const int term = static_cast<int>(product_term(job.branch));
        const bool comp = is_compensation(job.branch);

        detail::BranchLhs lhs;
        lhs.shift = shifts[term];
        lhs.shifted = comp ? nullptr : &shifted[term];
        if (comp && lhs.shift == 0.0) continue;  // compensation of an already nonnegative branch

        const RealMatrix& rhs = branches[term].rhs;
        const double rhs_sign = comp ? -1.0 : 1.0;

        // Gather the zero-padded weight segment and its scale.
        double weight_scale = 0.0;
        const std::size_t seg_len = job.lhs_cols.length();
        for (std::size_t j = 0; j < r; ++j) {
            const double v = j < seg_len ? rhs_sign * rhs(job.lhs_cols.begin + j, job.rhs_col) : 0.0;
            segment[j] = v;
            weight_scale = std::max(weight_scale, std::abs(v));
        }
        if (weight_scale == 0.0) continue;  // zero weights contribute nothing

        // Gather the zero-padded tile and its scale.
        double intensity_scale = 0.0;
        const std::size_t rows_len = job.lhs_rows.length();
        for (std::size_t i = 0; i < d; ++i) {
            for (std::size_t j = 0; j < r; ++j) {
                const double v = (i < rows_len && j < seg_len)
                                     ? lhs.at(job.lhs_rows.begin + i, job.lhs_cols.begin + j)
                                     : 0.0;
                tile[i * r + j] = v;
                intensity_scale = std::max(intensity_scale, v);
            }
        }
        if (intensity_scale == 0.0) continue;  // all-zero tile

        for (std::size_t j = 0; j < r; ++j) {
            const double normalized = segment[j] / weight_scale;
            const double mag = std::floor(std::abs(normalized) * levels + 0.5) / levels;
            weights[j] = normalized < 0.0 ? -mag : mag;
        }

        detail::single_use_mac_into(tile, d, r, weights, bits, intensity_scale, weight_scale, out);

        RealMatrix& target = partial[static_cast<int>(job.branch)];
        for (std::size_t i = 0; i < rows_len; ++i) {
            target(job.lhs_rows.begin + i, job.rhs_col) += out[i];
        }
    }

    // Recombine: per term shifted + compensation, then real = rr - ii,
    // imag = ri + ir.
    ComplexMatrix result(m, k);
    const auto& rr_s = partial[0];
    const auto& rr_c = partial[1];
    const auto& ii_s = partial[2];
    const auto& ii_c = partial[3];
    const auto& ri_s = partial[4];
    const auto& ri_c = partial[5];
    const auto& ir_s = partial[6];
    const auto& ir_c = partial[7];
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            const double rr = rr_s(i, j) + rr_c(i, j);
            const double ii = ii_s(i, j) + ii_c(i, j);
            const double ri = ri_s(i, j) + ri_c(i, j);
            const double ir = ir_s(i, j) + ir_c(i, j);
            result(i, j) = {rr - ii, ri + ir};
        }
    }
    return {std::move(result), plan};
}

}  // namespace bwmac
