// Experiment driver for the broadcast-and-weight MAC emulator and the
// massive-MIMO detection workbench built on it.

#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bwmac/cost.hpp"
#include "bwmac/experiment.hpp"

namespace {

void handle_sigint(int) { bwmac::interrupt_flag().store(true); }

struct CommonFlags {
    std::optional<std::string> config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> trials;
    std::optional<std::string> out;
    int jobs = 0;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "JSON experiment spec file");
    cmd->add_option("--seed", flags.seed, "master seed override");
    cmd->add_option("--trials", flags.trials, "Monte-Carlo trials per grid point");
    cmd->add_option("--out", flags.out, "output directory (overrides BWMAC_OUTPUT_DIR and the spec)");
    cmd->add_option("--jobs", flags.jobs, "worker threads (0 = all hardware threads)");
}

bwmac::ExperimentSpec build_spec(bwmac::ExperimentKind kind, const CommonFlags& flags) {
    bwmac::ExperimentSpec spec = bwmac::make_default_spec(kind);
    if (flags.config_path) {
        spec = bwmac::load_spec_file(*flags.config_path);
        if (spec.kind != kind) {
            throw bwmac::ConfigError(std::string("config kind '") + bwmac::to_string(spec.kind) +
                                     "' does not match the requested subcommand");
        }
    }
    if (flags.seed) spec.master_seed = *flags.seed;
    if (flags.trials) spec.trials = *flags.trials;
    if (flags.out) {
        spec.output_dir = *flags.out;
    } else if (!flags.config_path || spec.output_dir == ".") {
        if (const char* env = std::getenv("BWMAC_OUTPUT_DIR")) spec.output_dir = env;
    }
    return spec;
}

int execute(const bwmac::ExperimentSpec& spec, int jobs,
            bwmac::ExperimentResult* result_out = nullptr) {
    for (const auto& finding : bwmac::validate_spec(spec)) {
        if (finding.severity == bwmac::ConfigFinding::Severity::warning) {
            std::cerr << "warning: " << finding.message << "\n";
        }
    }
    bwmac::ExperimentResult result = bwmac::run_experiment(spec, jobs);
    for (const auto& file : result.files) std::cout << "wrote " << file << "\n";
    const bool interrupted = result.interrupted;
    if (result_out) *result_out = std::move(result);
    if (interrupted) {
        std::cerr << "interrupted: partial results flushed\n";
        return 1;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    std::signal(SIGINT, handle_sigint);

    CLI::App app{"bwmac: photonic broadcast-and-weight MAC emulator and massive-MIMO detection workbench"};
    app.require_subcommand(1);

    // ser-sweep -------------------------------------------------------------
    auto* ser = app.add_subcommand("ser-sweep", "symbol-error-rate sweep over an SNR grid");
    CommonFlags ser_flags;
    add_common_flags(ser, ser_flags);
    std::vector<double> ser_snr;
    std::optional<int> ser_m, ser_k, ser_terms, ser_iters, ser_bits;
    std::optional<std::string> ser_mod, ser_detector, ser_inverter, ser_backend;
    ser->add_option("--snr", ser_snr, "SNR grid in dB");
    ser->add_option("--m", ser_m, "base-station antennas M");
    ser->add_option("--k", ser_k, "single-antenna users K");
    ser->add_option("--mod", ser_mod, "modulation: qpsk or qam16");
    ser->add_option("--detector", ser_detector, "detector: zf, mmse, or ml");
    ser->add_option("--inverter", ser_inverter, "inversion backend: exact, neumann, or newton");
    ser->add_option("--terms", ser_terms, "Neumann series terms");
    ser->add_option("--iters", ser_iters, "Newton iterations");
    ser->add_option("--backend", ser_backend, "arithmetic backend: exact or photonic");
    ser->add_option("--bits", ser_bits, "photonic modulator precision bits");

    // precision-sweep --------------------------------------------------------
    auto* prec = app.add_subcommand("precision-sweep", "SER vs modulator precision (plus exact reference)");
    CommonFlags prec_flags;
    add_common_flags(prec, prec_flags);
    std::vector<int> prec_bits;
    std::vector<double> prec_snr;
    std::optional<int> prec_m, prec_k;
    prec->add_option("--bits", prec_bits, "precision grid (magnitude bits)");
    prec->add_option("--snr", prec_snr, "SNR grid in dB");
    prec->add_option("--m", prec_m, "base-station antennas M");
    prec->add_option("--k", prec_k, "single-antenna users K");

    // antenna-sweep ----------------------------------------------------------
    auto* ant = app.add_subcommand("antenna-sweep", "SER vs number of base-station antennas");
    CommonFlags ant_flags;
    add_common_flags(ant, ant_flags);
    std::vector<int> ant_antennas;
    std::vector<double> ant_snr;
    std::optional<std::string> ant_backend;
    ant->add_option("--antennas", ant_antennas, "antenna counts to sweep");
    ant->add_option("--snr", ant_snr, "SNR grid in dB");
    ant->add_option("--backend", ant_backend, "arithmetic backend: exact or photonic");

    // gemm-bench ---------------------------------------------------------------
    auto* gemm = app.add_subcommand("gemm-bench", "analytic GEMM cost over benchmark workloads");
    CommonFlags gemm_flags;
    add_common_flags(gemm, gemm_flags);

    // power ---------------------------------------------------------------
    auto* power = app.add_subcommand("power", "power table for photonic configurations");
    CommonFlags power_flags;
    add_common_flags(power, power_flags);
    std::optional<int> power_d, power_r;
    power->add_option("--d", power_d, "waveguide channels D");
    power->add_option("--r", power_r, "rings per section R");

    // invert-demo ---------------------------------------------------------
    auto* invert = app.add_subcommand("invert-demo", "residual ladder of the iterative inverters");
    CommonFlags invert_flags;
    add_common_flags(invert, invert_flags);
    std::optional<int> invert_m, invert_k, invert_terms, invert_iters;
    invert->add_option("--m", invert_m, "base-station antennas M");
    invert->add_option("--k", invert_k, "single-antenna users K");
    invert->add_option("--terms", invert_terms, "Neumann series terms");
    invert->add_option("--iters", invert_iters, "Newton iterations");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (ser->parsed()) {
            auto spec = build_spec(bwmac::ExperimentKind::ser_sweep, ser_flags);
            if (!ser_snr.empty()) spec.snr_grid_db = ser_snr;
            if (ser_m) spec.mimo.m_antennas = *ser_m;
            if (ser_k) spec.mimo.k_users = *ser_k;
            if (ser_mod) spec.mimo.modulation = bwmac::modulation_from_string(*ser_mod);
            if (ser_detector) spec.mimo.detector = bwmac::detector_from_string(*ser_detector);
            if (ser_inverter) spec.mimo.inverter = bwmac::inverter_from_string(*ser_inverter);
            if (ser_terms) spec.mimo.terms = *ser_terms;
            if (ser_iters) spec.mimo.iters = *ser_iters;
            if (ser_backend) spec.mimo.backend = bwmac::backend_from_string(*ser_backend);
            if (ser_bits) spec.hardware.precision_bits = *ser_bits;
            return execute(spec, ser_flags.jobs);
        }
        if (prec->parsed()) {
            auto spec = build_spec(bwmac::ExperimentKind::precision_sweep, prec_flags);
            if (!prec_bits.empty()) spec.precision_bits_grid = prec_bits;
            if (!prec_snr.empty()) spec.snr_grid_db = prec_snr;
            if (prec_m) spec.mimo.m_antennas = *prec_m;
            if (prec_k) spec.mimo.k_users = *prec_k;
            return execute(spec, prec_flags.jobs);
        }
        if (ant->parsed()) {
            auto spec = build_spec(bwmac::ExperimentKind::antenna_sweep, ant_flags);
            if (!ant_antennas.empty()) spec.antennas_grid = ant_antennas;
            if (!ant_snr.empty()) spec.snr_grid_db = ant_snr;
            if (ant_backend) spec.mimo.backend = bwmac::backend_from_string(*ant_backend);
            return execute(spec, ant_flags.jobs);
        }
        if (gemm->parsed()) {
            auto spec = build_spec(bwmac::ExperimentKind::gemm_bench, gemm_flags);
            return execute(spec, gemm_flags.jobs);
        }
        if (power->parsed()) {
            auto spec = build_spec(bwmac::ExperimentKind::power_table, power_flags);
            if (power_d && power_r) {
                spec.dr_grid = {{*power_d, *power_r}};
            } else if (power_d || power_r) {
                throw bwmac::ConfigError("power: --d and --r must be given together");
            }
            const int rc = execute(spec, power_flags.jobs);
            for (const auto& dr : spec.dr_grid) {
                std::printf("Photonic System (D=%d, R=%d): %d W (%.0f mW)\n", dr.d, dr.r,
                            bwmac::power_watts_rounded(dr.d, dr.r),
                            bwmac::power_total_mw(dr.d, dr.r));
            }
            return rc;
        }
        if (invert->parsed()) {
            auto spec = build_spec(bwmac::ExperimentKind::invert_demo, invert_flags);
            if (invert_m) spec.mimo.m_antennas = *invert_m;
            if (invert_k) spec.mimo.k_users = *invert_k;
            if (invert_terms) spec.mimo.terms = *invert_terms;
            if (invert_iters) spec.mimo.iters = *invert_iters;
            bwmac::ExperimentResult result;
            const int rc = execute(spec, invert_flags.jobs, &result);
            for (const auto& row : result.rows) {
                std::printf("%s order %lld: residual %.6e\n",
                            row.params.at("method").get<std::string>().c_str(),
                            row.params.at("order").get<long long>(), row.value);
            }
            return rc;
        }
    } catch (const bwmac::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
