// Acceptance suite: runs every criterion at its stated tolerance and prints
// one PASS/FAIL line per criterion. Exit status is the number of failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "bwmac/cost.hpp"
#include "bwmac/experiment.hpp"
#include "bwmac/inverse.hpp"
#include "bwmac/mimo.hpp"
#include "bwmac/photonic.hpp"

using namespace bwmac;

namespace {

namespace fs = std::filesystem;

ComplexMatrix random_complex(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    GaussianSource g(seed);
    ComplexMatrix m(rows, cols);
    for (auto& z : m.entries()) z = {g.next(), g.next()};
    return m;
}

ComplexMatrix naive_matmul(const ComplexMatrix& a, const ComplexMatrix& b) {
    ComplexMatrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < b.cols(); ++j) {
            std::complex<double> sum = 0.0;
            for (std::size_t t = 0; t < a.cols(); ++t) sum += a(i, t) * b(t, j);
            c(i, j) = sum;
        }
    }
    return c;
}

double rel_frob_error(const ComplexMatrix& x, const ComplexMatrix& ref) {
    return frobenius_norm(sub(x, ref)) / frobenius_norm(ref);
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

// SNR grid shared by the SER-based criteria; the top point is where the
// low-precision penalty is clearly resolvable at 10^4 trials.
const std::vector<double> kSerGrid = {-24.0, -22.0, -20.0, -18.0, -16.0, -14.0};

constexpr int kSerTrials = 10000;

// ---------------------------------------------------------------------------

bool criterion1_power_table(std::string& detail) {
    const std::map<std::pair<int, int>, int> expected = {
        {{32, 32}, 100}, {{64, 32}, 195}, {{64, 64}, 385}};
    for (const auto& [dims, watts] : expected) {
        const int got = power_watts_rounded(dims.first, dims.second);
        if (std::abs(got - watts) > 1) {
            detail = "D=" + std::to_string(dims.first) + " R=" + std::to_string(dims.second) +
                     " gave " + std::to_string(got) + " W, expected " + std::to_string(watts);
            return false;
        }
    }
    detail = "rows 100/195/385 W reproduced";
    return true;
}

bool criterion2_use_count_identity(std::string& detail) {
    GaussianSource g(20240);
    for (int trial = 0; trial < 100; ++trial) {
        const std::uint64_t m = 1 + g.raw() % 300;
        const std::uint64_t n = 1 + g.raw() % 300;
        const std::uint64_t k = 1 + g.raw() % 40;
        HardwareConfig cfg;
        cfg.channels_D = 1 + static_cast<int>(g.raw() % 64);
        cfg.rings_R = 1 + static_cast<int>(g.raw() % 100);
        const std::uint64_t formula = 8ULL * k * ((m + cfg.channels_D - 1) / cfg.channels_D) *
                                      ((n + cfg.rings_R - 1) / cfg.rings_R);
        const TilePlan plan = tile_plan(m, n, k, cfg);
        if (plan.use_count != formula || n_use(m, n, k, cfg) != formula) {
            detail = "formula mismatch at m=" + std::to_string(m) + " n=" + std::to_string(n) +
                     " k=" + std::to_string(k);
            return false;
        }
        std::uint64_t enumerated = 0;
        for (std::uint64_t i = 0; i < plan.use_count; ++i) {
            (void)plan.job_at(i);
            ++enumerated;
        }
        if (enumerated != formula) {
            detail = "enumerated job count mismatch";
            return false;
        }
    }
    detail = "100 random tuples, plan == formula == cost model";
    return true;
}

bool criterion3_gemm_timing(std::string& detail) {
    HardwareConfig cfg;
    cfg.channels_D = 32;
    cfg.rings_R = 32;
    const double bench1_ms = total_time_ps(7680, 1500, 2560, cfg) * 1e-9;
    const double bench2_ms = total_time_ps(10752, 1, 3584, cfg) * 1e-9;
    if (std::abs(bench1_ms - 23.10) > 0.005) {
        detail = "benchmark 1 gave " + std::to_string(bench1_ms) + " ms";
        return false;
    }
    if (std::abs(bench2_ms - 0.963) > 0.0005) {
        detail = "benchmark 2 gave " + std::to_string(bench2_ms) + " ms";
        return false;
    }
    for (const auto& bench : std::vector<std::pair<std::uint64_t, std::pair<std::uint64_t, std::uint64_t>>>{
             {7680, {1500, 2560}}, {10752, {1, 3584}}}) {
        const std::uint64_t m = bench.first, n = bench.second.first, k = bench.second.second;
        for (int d = 4; d <= 64; d *= 2) {
            for (int r = 4; r <= 64; r *= 2) {
                HardwareConfig base = cfg;
                base.channels_D = d;
                base.rings_R = r;
                HardwareConfig dd = base, rr = base;
                dd.channels_D = 2 * d;
                rr.rings_R = 2 * r;
                if (total_time_ps(m, n, k, dd) > total_time_ps(m, n, k, base) ||
                    total_time_ps(m, n, k, rr) > total_time_ps(m, n, k, base)) {
                    detail = "total_time not monotone when doubling D or R";
                    return false;
                }
            }
        }
    }
    detail = "23.10 ms and 0.963 ms; monotone in D and R";
    return true;
}

bool criterion4_oracle_equivalence(std::string& detail) {
    GaussianSource g(42424);
    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t m = 1 + g.raw() % 64;
        const std::size_t n = 1 + g.raw() % 64;
        const std::size_t k = 1 + g.raw() % 16;
        HardwareConfig cfg;
        cfg.channels_D = 2 + static_cast<int>(g.raw() % 15);
        cfg.rings_R = 2 + static_cast<int>(g.raw() % 15);
        cfg.precision_bits = 24;
        const ComplexMatrix a = random_complex(m, n, 90000 + static_cast<std::uint64_t>(trial) * 2);
        const ComplexMatrix b = random_complex(n, k, 90001 + static_cast<std::uint64_t>(trial) * 2);
        const double err = rel_frob_error(photonic_matmul(a, b, cfg).first, naive_matmul(a, b));
        worst = std::max(worst, err);
        if (err > 1e-5) {
            detail = "relative error " + std::to_string(err) + " at trial " + std::to_string(trial);
            return false;
        }
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "200 matmuls, worst relative error %.2e", worst);
    detail = buf;
    return true;
}

bool criterion5_inversion_convergence(std::string& detail) {
    int neumann_ok = 0, newton_ok = 0;
    const int seeds = 100;
    for (int s = 0; s < seeds; ++s) {
        const ComplexMatrix gm =
            gram(sample_rayleigh_channel(64, 8, 70000 + static_cast<std::uint64_t>(s)));

        const auto neumann_report = neumann_inverse(gm, 5).second;
        bool monotone = neumann_report.residuals.size() == 6;
        for (std::size_t i = 1; i < neumann_report.residuals.size() && monotone; ++i) {
            if (neumann_report.residuals[i] >= neumann_report.residuals[i - 1]) monotone = false;
        }
        if (monotone) ++neumann_ok;

        const auto newton_report = newton_inverse(gm, 6).second;
        bool quadratic = true;
        for (std::size_t i = 0; i + 1 < newton_report.residuals.size(); ++i) {
            // check while above the double-precision residual floor
            if (newton_report.residuals[i] < 0.5 && newton_report.residuals[i] > 1e-6 &&
                newton_report.residuals[i + 1] >
                    1.5 * newton_report.residuals[i] * newton_report.residuals[i]) {
                quadratic = false;
            }
        }
        if (quadratic) ++newton_ok;
    }
    detail = "neumann monotone " + std::to_string(neumann_ok) + "/100, newton quadratic " +
             std::to_string(newton_ok) + "/100";
    return neumann_ok >= 95 && newton_ok >= 95;
}

struct SerTable {
    // curve label -> snr -> (errors, symbols)
    std::map<std::string, std::map<double, std::pair<long long, long long>>> counts;
};

SerTable ser_table_from_rows(const std::vector<ResultRow>& rows) {
    SerTable table;
    for (const auto& row : rows) {
        if (row.metric != "ser") continue;
        const std::string label = row.experiment_id.substr(row.experiment_id.find('/') + 1);
        const double snr = row.params.at("snr_db").get<double>();
        const long long symbols =
            static_cast<long long>(row.trials) * row.params.at("k_users").get<long long>();
        const long long errors = std::llround(row.value * static_cast<double>(symbols));
        table.counts[label][snr] = {errors, symbols};
    }
    return table;
}

double ser_of(const SerTable& table, const std::string& label, double snr) {
    const auto& [errors, symbols] = table.counts.at(label).at(snr);
    return static_cast<double>(errors) / static_cast<double>(symbols);
}

ExperimentSpec criterion6_spec(const std::string& out_dir) {
    ExperimentSpec spec = make_default_spec(ExperimentKind::precision_sweep);
    spec.mimo.m_antennas = 64;
    spec.mimo.k_users = 8;
    spec.mimo.modulation = Modulation::qpsk;
    spec.mimo.detector = DetectorKind::mmse;
    spec.mimo.inverter = InverterKind::neumann;
    spec.mimo.terms = 3;
    spec.precision_bits_grid = {6, 8, 24};
    spec.snr_grid_db = kSerGrid;
    spec.trials = kSerTrials;
    spec.master_seed = 2024;
    spec.output_dir = out_dir;
    return spec;
}

bool criterion6_precision_ordering(std::string& detail, const fs::path& out_dir) {
    const ExperimentSpec spec = criterion6_spec(out_dir.string());
    const ExperimentResult result = run_experiment(spec);
    const SerTable table = ser_table_from_rows(result.rows);

    const double top = spec.snr_grid_db.back();
    const double ser6 = ser_of(table, "bits=6", top);
    const double ser8 = ser_of(table, "bits=8", top);
    const double ser24 = ser_of(table, "bits=24", top);
    if (!(ser6 > ser8)) {
        detail = "SER(6-bit) = " + std::to_string(ser6) + " not above SER(8-bit) = " + std::to_string(ser8);
        return false;
    }
    if (!(ser8 >= ser24)) {
        detail = "SER(8-bit) below SER(24-bit) at the top point";
        return false;
    }

    for (double snr : spec.snr_grid_db) {
        const double pe = ser_of(table, "exact", snr);
        const double p8 = ser_of(table, "bits=8", snr);
        const long long symbols = static_cast<long long>(spec.trials) * spec.mimo.k_users;
        const double pooled = 0.5 * (pe + p8);
        const double ci =
            1.96 * std::sqrt(std::max(pooled * (1.0 - pooled), 0.0) * 2.0 / static_cast<double>(symbols));
        if (std::abs(pe - p8) > ci && !(pe == 0.0 && p8 == 0.0)) {
            char buf[160];
            std::snprintf(buf, sizeof(buf),
                          "8-bit SER %.3e vs exact %.3e outside CI %.3e at %g dB", p8, pe, ci, snr);
            detail = buf;
            return false;
        }
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "top point SER: 6-bit %.3e > 8-bit %.3e >= 24-bit %.3e; 8-bit within CI of exact "
                  "everywhere",
                  ser6, ser8, ser24);
    detail = buf;
    return true;
}

bool criterion7_antenna_scaling(std::string& detail, const fs::path& out_dir) {
    ExperimentSpec spec = make_default_spec(ExperimentKind::antenna_sweep);
    spec.mimo.k_users = 8;
    spec.mimo.detector = DetectorKind::mmse;
    spec.mimo.inverter = InverterKind::exact;
    spec.mimo.backend = Backend::exact;
    spec.antennas_grid = {32, 64, 128};
    spec.snr_grid_db = kSerGrid;
    spec.trials = kSerTrials;
    spec.master_seed = 7001;
    spec.output_dir = out_dir.string();
    const ExperimentResult result = run_experiment(spec);
    const SerTable table = ser_table_from_rows(result.rows);

    for (double snr : spec.snr_grid_db) {
        const double ser32 = ser_of(table, "M=32", snr);
        const double ser64 = ser_of(table, "M=64", snr);
        const double ser128 = ser_of(table, "M=128", snr);
        if (!(ser128 <= ser64 && ser64 <= ser32)) {
            char buf[160];
            std::snprintf(buf, sizeof(buf), "ordering broken at %g dB: %.3e / %.3e / %.3e", snr,
                          ser32, ser64, ser128);
            detail = buf;
            return false;
        }
    }
    detail = "SER(M=128) <= SER(M=64) <= SER(M=32) at every grid point";
    return true;
}

bool criterion8_ml_optimality(std::string& detail) {
    const ModulationSet& mod = ModulationSet::qpsk();
    const DetectorSpec mmse_det{DetectorKind::mmse, {InverterKind::exact, 0}, std::nullopt};
    const DetectorSpec ml_det{DetectorKind::ml, {}, std::nullopt};
    for (double snr : {0.0, 2.0, 4.0, 6.0, 8.0, 10.0}) {
        long long ml_errors = 0, mmse_errors = 0;
        for (int t = 0; t < 1000; ++t) {
            const std::uint64_t seed = derive_seed(8001, static_cast<std::uint64_t>(t));
            ml_errors += run_ser_trial(4, 2, snr, mod, ml_det, seed).symbol_errors;
            mmse_errors += run_ser_trial(4, 2, snr, mod, mmse_det, seed).symbol_errors;
        }
        if (ml_errors > mmse_errors) {
            detail = "ML SER above MMSE SER at " + std::to_string(snr) + " dB";
            return false;
        }
    }
    detail = "ML <= MMSE at every SNR point (K=2, M=4, 1000 trials)";
    return true;
}

bool criterion9_determinism(std::string& detail, const fs::path& out_dir) {
    const ExperimentSpec spec = criterion6_spec(out_dir.string());
    const fs::path csv_path = out_dir / "precision_sweep.csv";
    const std::string first = read_file(csv_path);
    if (first.empty()) {
        detail = "criterion 6 output missing";
        return false;
    }
    run_experiment(spec, 3);  // different worker count, same directory
    const std::string second = read_file(csv_path);
    if (first != second) {
        detail = "CSV bytes differ across worker counts";
        return false;
    }
    detail = "byte-identical CSV across worker counts";
    return true;
}

}  // namespace

int main() {
    const fs::path out_root = fs::path("acceptance_out");
    fs::remove_all(out_root);
    fs::create_directories(out_root);

    int failures = 0;
    int index = 0;
    const auto run = [&](const char* name, const std::function<bool(std::string&)>& fn) {
        ++index;
        std::string detail;
        const auto start = std::chrono::steady_clock::now();
        bool ok = false;
        try {
            ok = fn(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("%s  criterion %d: %s (%s) [%.1fs]\n", ok ? "PASS" : "FAIL", index, name,
                    detail.c_str(), seconds);
        std::fflush(stdout);
        if (!ok) ++failures;
    };

    run("power-table reproduction", criterion1_power_table);
    run("use-count identity", criterion2_use_count_identity);
    run("GEMM timing", criterion3_gemm_timing);
    run("photonic oracle equivalence", criterion4_oracle_equivalence);
    run("inversion convergence", criterion5_inversion_convergence);
    run("SER precision ordering",
        [&](std::string& d) { return criterion6_precision_ordering(d, out_root / "c6"); });
    run("SER antenna scaling",
        [&](std::string& d) { return criterion7_antenna_scaling(d, out_root / "c7"); });
    run("ML optimality", criterion8_ml_optimality);
    run("determinism across worker counts",
        [&](std::string& d) { return criterion9_determinism(d, out_root / "c6"); });

    if (failures == 0) {
        std::printf("all %d criteria passed\n", index);
    } else {
        std::printf("%d of %d criteria failed\n", failures, index);
    }
    return failures;
}
