#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>

#include <json.hpp>

#include "bwmac/photonic.hpp"

namespace bwmac {

// Speed of light lives here; the cost formulas are this module's contract.
inline constexpr double kSpeedOfLightMps = 2.998e8;

struct ComponentSpec {
    const char* name;
    double throughput_gsps;
    double processing_time_ps;
};

/// Electronic/photonic interface components with their published throughput
/// and per-sample processing time. Times are the rounded published figures,
/// consistent with 1000/throughput.
struct ComponentThroughputTable {
    std::array<ComponentSpec, 6> components;

    static ComponentThroughputTable defaults() {
        return {{{
            {"MRR", 60.0, 17.0},
            {"ADC", 10.0, 100.0},
            {"DAC", 10.0, 100.0},
            {"BalancedPD", 25.0, 40.0},
            {"TIA", 10.0, 100.0},
            {"SDRAM", 16.0, 60.0},
        }}};
    }

    /// Component with the largest processing time (first wins on ties).
    const ComponentSpec& bottleneck() const {
        const ComponentSpec* worst = &components[0];
        for (const auto& c : components) {
            if (c.processing_time_ps > worst->processing_time_ps) worst = &c;
        }
        return *worst;
    }
};

/// Published power baselines the photonic numbers are quoted against.
struct GpuBaseline {
    const char* name;
    double power_w;
};

inline const std::array<GpuBaseline, 4>& gpu_power_baselines() {
    static const std::array<GpuBaseline, 4> baselines = {{
        {"AMD Vega FE", 375.0},
        {"AMD M125", 300.0},
        {"NVIDIA Tesla V100", 250.0},
        {"NVIDIA GTX 1080 Ti", 250.0},
    }};
    return baselines;
}

// Runtime-comparison devices cited alongside the timing results. Their
// runtimes are published benchmark figures, not modeled here.
inline constexpr const char* kGemmRuntimeBaseline = "NVIDIA Titan XP";
inline constexpr const char* kMimoRuntimeBaseline = "NVIDIA GeForce RTX 2080 Ti";

/// Total electrical power draw in mW: R lasers at 100 mW, 2DR MRR+DAC pairs
/// at 19.5+26 mW, and a TIA+ADC (17+76 mW) per waveguide:
///   P = 100 R + 91 D R + 93 D.
inline double power_total_mw(int d, int r) {
    if (d < 1 || r < 1) throw DomainError("power_total_mw: dims must be positive");
    return 100.0 * r + 91.0 * static_cast<double>(d) * r + 93.0 * d;
}

/// Display-parity wattage: rounded to the nearest 5 W.
inline int power_watts_rounded(int d, int r) {
    const double watts = power_total_mw(d, r) / 1000.0;
    return static_cast<int>(std::lround(watts / 5.0)) * 5;
}

/// Light propagation time through the multiplexed bus, in ps: transit past
/// 2R rings of radius r plus F/(2*pi) round trips in the two in-resonance
/// rings, at group velocity c/n_eff.
inline double propagation_time_ps(const HardwareConfig& cfg) {
    const double radius_m = cfg.mrr_radius * 1e-6;
    const double path_m = 2.0 * radius_m * 2.0 * cfg.rings_R +
                          2.0 * (2.0 * 3.141592653589793238462643 * radius_m) *
                              (cfg.finesse / (2.0 * 3.141592653589793238462643));
    return path_m * cfg.n_eff / kSpeedOfLightMps * 1e12;
}

/// Single-use count for an m x n x k product: 8 k ceil(m/D) ceil(n/R).
/// Identical by construction to TilePlan::use_count.
inline std::uint64_t n_use(std::uint64_t m, std::uint64_t n, std::uint64_t k, const HardwareConfig& cfg) {
    if (m < 1 || n < 1 || k < 1) throw ShapeError("n_use: workload dims must be positive");
    if (cfg.channels_D < 1 || cfg.rings_R < 1) throw DomainError("n_use: hardware dims must be positive");
    const std::uint64_t d = static_cast<std::uint64_t>(cfg.channels_D);
    const std::uint64_t r = static_cast<std::uint64_t>(cfg.rings_R);
    return 8ULL * k * detail::ceil_div(m, d) * detail::ceil_div(n, r);
}

/// Total processing time in ps: N_use * T_single_use.
inline double total_time_ps(std::uint64_t m, std::uint64_t n, std::uint64_t k, const HardwareConfig& cfg) {
    return static_cast<double>(n_use(m, n, k, cfg)) * cfg.t_single_use;
}

/// Power, use count, and latency of one workload on one configuration.
struct CostReport {
    double power_mw = 0.0;
    std::uint64_t use_count = 0;
    double t_total_ps = 0.0;
    double t_propagation_ps = 0.0;
    std::string bottleneck;
};

inline CostReport make_cost_report(std::uint64_t m, std::uint64_t n, std::uint64_t k,
                                   const HardwareConfig& cfg,
                                   const ComponentThroughputTable& table = ComponentThroughputTable::defaults()) {
    CostReport report;
    report.power_mw = power_total_mw(cfg.channels_D, cfg.rings_R);
    report.use_count = n_use(m, n, k, cfg);
    report.t_total_ps = static_cast<double>(report.use_count) * cfg.t_single_use;
    report.t_propagation_ps = propagation_time_ps(cfg);
    report.bottleneck = table.bottleneck().name;
    return report;
}

namespace detail {

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

}  // namespace detail

inline nlohmann::json cost_report_json(const CostReport& report, std::uint64_t m, std::uint64_t n,
                                       std::uint64_t k, const HardwareConfig& cfg) {
    return nlohmann::json{{"d", cfg.channels_D},
                          {"r", cfg.rings_R},
                          {"m", m},
                          {"n", n},
                          {"k", k},
                          {"power_mw", report.power_mw},
                          {"use_count", report.use_count},
                          {"t_total_ps", report.t_total_ps},
                          {"t_propagation_ps", report.t_propagation_ps},
                          {"bottleneck", report.bottleneck}};
}

inline std::string cost_csv_header() {
    return "d,r,m,n,k,power_mw,use_count,t_total_ps,t_propagation_ps";
}

inline std::string cost_csv_row(const CostReport& report, std::uint64_t m, std::uint64_t n,
                                std::uint64_t k, const HardwareConfig& cfg) {
    std::string row;
    row += std::to_string(cfg.channels_D);
    row += ',';
    row += std::to_string(cfg.rings_R);
    row += ',';
    row += std::to_string(m);
    row += ',';
    row += std::to_string(n);
    row += ',';
    row += std::to_string(k);
    row += ',';
    row += detail::format_double(report.power_mw);
    row += ',';
    row += std::to_string(report.use_count);
    row += ',';
    row += detail::format_double(report.t_total_ps);
    row += ',';
    row += detail::format_double(report.t_propagation_ps);
    return row;
}

}  // namespace bwmac
