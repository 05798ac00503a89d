#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "bwmac/cost.hpp"
#include "bwmac/rng.hpp"

using namespace bwmac;

namespace {

HardwareConfig make_cfg(int d, int r) {
    HardwareConfig cfg;
    cfg.channels_D = d;
    cfg.rings_R = r;
    return cfg;
}

}  // namespace

TEST_CASE("power_total_mw reproduces the published table rows") {
    REQUIRE(power_total_mw(32, 32) == 99360.0);
    REQUIRE(power_total_mw(64, 32) == 195520.0);
    REQUIRE(power_total_mw(64, 64) == 385088.0);

    REQUIRE(power_watts_rounded(32, 32) == 100);
    REQUIRE(power_watts_rounded(64, 32) == 195);
    REQUIRE(power_watts_rounded(64, 64) == 385);
}

TEST_CASE("power is strictly increasing in both dimensions") {
    for (int d : {4, 8, 16, 32}) {
        for (int r : {4, 8, 16, 32}) {
            REQUIRE(power_total_mw(d + 1, r) > power_total_mw(d, r));
            REQUIRE(power_total_mw(d, r + 1) > power_total_mw(d, r));
        }
    }
}

TEST_CASE("propagation_time: full-scale configuration") {
    HardwareConfig cfg = make_cfg(8, 100);
    // r = 10 um, F = 368, n_eff = 2.4 (defaults)
    const double t = propagation_time_ps(cfg);
    REQUIRE(t == Catch::Approx(90.94).margin(0.01));
}

TEST_CASE("propagation_time: zero finesse leaves the pure waveguide transit") {
    HardwareConfig cfg = make_cfg(8, 25);
    cfg.finesse = 0.0;
    const double radius_m = cfg.mrr_radius * 1e-6;
    const double expected = 2.0 * radius_m * 2.0 * cfg.rings_R * cfg.n_eff / kSpeedOfLightMps * 1e12;
    REQUIRE(propagation_time_ps(cfg) == Catch::Approx(expected).epsilon(1e-12));

    // doubling R doubles the transit term exactly
    HardwareConfig doubled = cfg;
    doubled.rings_R = 50;
    REQUIRE(propagation_time_ps(doubled) == Catch::Approx(2.0 * propagation_time_ps(cfg)).epsilon(1e-12));
}

TEST_CASE("n_use: benchmark workloads at D = R = 32") {
    const HardwareConfig cfg = make_cfg(32, 32);
    REQUIRE(n_use(7680, 1500, 2560, cfg) == 231014400ULL);
    REQUIRE(n_use(10752, 1, 3584, cfg) == 9633792ULL);
    REQUIRE(n_use(1, 1, 1, cfg) == 8ULL);
}

TEST_CASE("total_time: benchmark workloads in milliseconds") {
    const HardwareConfig cfg = make_cfg(32, 32);  // t_single_use = 100 ps
    const double bench1_ms = total_time_ps(7680, 1500, 2560, cfg) * 1e-9;
    const double bench2_ms = total_time_ps(10752, 1, 3584, cfg) * 1e-9;
    REQUIRE(bench1_ms == Catch::Approx(23.10).margin(0.005));
    REQUIRE(bench2_ms == Catch::Approx(0.963).margin(0.0005));
}

TEST_CASE("total_time: doubling a divisible dimension halves the time") {
    const HardwareConfig d32 = make_cfg(32, 32);
    const HardwareConfig d64 = make_cfg(64, 32);
    const HardwareConfig r64 = make_cfg(32, 64);
    // m and n divisible by 64
    REQUIRE(total_time_ps(1024, 512, 16, d64) == 0.5 * total_time_ps(1024, 512, 16, d32));
    REQUIRE(total_time_ps(1024, 512, 16, r64) == 0.5 * total_time_ps(1024, 512, 16, d32));
}

TEST_CASE("total_time is monotone non-increasing as D or R grow") {
    GaussianSource g(7);
    for (int trial = 0; trial < 50; ++trial) {
        const std::uint64_t m = 1 + g.raw() % 2000;
        const std::uint64_t n = 1 + g.raw() % 2000;
        const std::uint64_t k = 1 + g.raw() % 64;
        const int d = 1 + static_cast<int>(g.raw() % 50);
        const int r = 1 + static_cast<int>(g.raw() % 50);
        const double base = total_time_ps(m, n, k, make_cfg(d, r));
        REQUIRE(total_time_ps(m, n, k, make_cfg(2 * d, r)) <= base);
        REQUIRE(total_time_ps(m, n, k, make_cfg(d, 2 * r)) <= base);
    }
}

TEST_CASE("component table: processing times are consistent with throughput") {
    const ComponentThroughputTable table = ComponentThroughputTable::defaults();
    REQUIRE(table.components.size() == 6);
    for (const auto& c : table.components) {
        const double derived = 1000.0 / c.throughput_gsps;
        REQUIRE(std::abs(c.processing_time_ps - derived) / derived < 0.05);
    }
    REQUIRE(std::string(table.bottleneck().name) == "ADC");
    REQUIRE(table.bottleneck().processing_time_ps == 100.0);
}

TEST_CASE("cost report: fields, JSON, and CSV row") {
    const HardwareConfig cfg = make_cfg(32, 32);
    const CostReport report = make_cost_report(7680, 1500, 2560, cfg);
    REQUIRE(report.use_count == 231014400ULL);
    REQUIRE(report.t_total_ps == static_cast<double>(report.use_count) * cfg.t_single_use);
    REQUIRE(report.power_mw == 99360.0);
    REQUIRE(report.bottleneck == "ADC");

    const nlohmann::json j = cost_report_json(report, 7680, 1500, 2560, cfg);
    REQUIRE(j.at("d") == 32);
    REQUIRE(j.at("use_count") == 231014400ULL);
    REQUIRE(j.at("bottleneck") == "ADC");

    const std::string row = cost_csv_row(report, 7680, 1500, 2560, cfg);
    REQUIRE(row.rfind("32,32,7680,1500,2560,99360,231014400,", 0) == 0);
    REQUIRE(cost_csv_header() == "d,r,m,n,k,power_mw,use_count,t_total_ps,t_propagation_ps");
}

TEST_CASE("gpu baselines are the published constants") {
    const auto& baselines = gpu_power_baselines();
    REQUIRE(baselines.size() == 4);
    REQUIRE(std::string(baselines[0].name) == "AMD Vega FE");
    REQUIRE(baselines[0].power_w == 375.0);
}
