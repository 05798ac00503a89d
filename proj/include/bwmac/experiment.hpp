#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "bwmac/cost.hpp"
#include "bwmac/mimo.hpp"
#include "bwmac/photonic.hpp"

namespace bwmac {

enum class ExperimentKind : std::uint8_t {
    ser_sweep,
    precision_sweep,
    antenna_sweep,
    gemm_bench,
    power_table,
    invert_demo,
};

inline const char* to_string(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::ser_sweep: return "ser_sweep";
        case ExperimentKind::precision_sweep: return "precision_sweep";
        case ExperimentKind::antenna_sweep: return "antenna_sweep";
        case ExperimentKind::gemm_bench: return "gemm_bench";
        case ExperimentKind::power_table: return "power_table";
        case ExperimentKind::invert_demo: return "invert_demo";
    }
    return "unknown";
}

inline ExperimentKind experiment_kind_from_string(const std::string& s) {
    if (s == "ser_sweep") return ExperimentKind::ser_sweep;
    if (s == "precision_sweep") return ExperimentKind::precision_sweep;
    if (s == "antenna_sweep") return ExperimentKind::antenna_sweep;
    if (s == "gemm_bench") return ExperimentKind::gemm_bench;
    if (s == "power_table") return ExperimentKind::power_table;
    if (s == "invert_demo") return ExperimentKind::invert_demo;
    throw ConfigError("unknown experiment kind '" + s + "'");
}

enum class Backend : std::uint8_t { exact, photonic };

/// Detection-side parameters of an experiment.
struct MimoSpec {
    int m_antennas = 64;
    int k_users = 8;
    Modulation modulation = Modulation::qpsk;
    DetectorKind detector = DetectorKind::mmse;
    InverterKind inverter = InverterKind::neumann;
    int terms = 3;  // Neumann series terms
    int iters = 3;  // Newton iterations
    Backend backend = Backend::photonic;
};

struct GemmBenchmark {
    std::uint64_t m = 1, n = 1, k = 1;
};

struct DrPoint {
    int d = 8, r = 8;
};

/// A named experiment: everything needed to reproduce its outputs. Worker
/// count is deliberately not part of the spec; results are identical for any
/// scheduling.
struct ExperimentSpec {
    ExperimentKind kind = ExperimentKind::ser_sweep;
    HardwareConfig hardware{};
    MimoSpec mimo{};
    std::vector<double> snr_grid_db = {-24.0, -22.0, -20.0, -18.0, -16.0, -14.0};
    int trials = 10000;
    std::uint64_t master_seed = 1;
    std::string output_dir = ".";
    std::vector<int> precision_bits_grid = {6, 8, 24};
    std::vector<int> antennas_grid = {32, 64, 128};
    std::vector<GemmBenchmark> gemm_dims = {{7680, 1500, 2560}, {10752, 1, 3584}};
    std::vector<DrPoint> dr_grid{};  // default depends on kind
};

inline std::vector<DrPoint> default_dr_grid(ExperimentKind kind) {
    if (kind == ExperimentKind::power_table) return {{32, 32}, {64, 32}, {64, 64}};
    return {{8, 8}, {16, 16}, {32, 32}, {64, 64}};
}

inline ExperimentSpec make_default_spec(ExperimentKind kind) {
    ExperimentSpec spec;
    spec.kind = kind;
    spec.dr_grid = default_dr_grid(kind);
    if (kind == ExperimentKind::antenna_sweep) spec.mimo.backend = Backend::exact;
    return spec;
}

// --------------------------------------------------------------------------
// Spec <-> JSON. Unknown keys are rejected with the offending field named;
// missing keys keep their defaults.
// --------------------------------------------------------------------------

inline const char* to_string(Modulation m) { return m == Modulation::qpsk ? "qpsk" : "qam16"; }

inline const char* to_string(DetectorKind d) {
    switch (d) {
        case DetectorKind::zf: return "zf";
        case DetectorKind::ml: return "ml";
        case DetectorKind::mmse:
        default: return "mmse";
    }
}

inline const char* to_string(InverterKind k) {
    switch (k) {
        case InverterKind::neumann: return "neumann";
        case InverterKind::newton: return "newton";
        case InverterKind::exact:
        default: return "exact";
    }
}

inline const char* to_string(Backend b) { return b == Backend::exact ? "exact" : "photonic"; }

inline Modulation modulation_from_string(const std::string& s) {
    if (s == "qpsk") return Modulation::qpsk;
    if (s == "qam16") return Modulation::qam16;
    throw ConfigError("unknown modulation '" + s + "' (expected qpsk or qam16)");
}

inline DetectorKind detector_from_string(const std::string& s) {
    if (s == "zf") return DetectorKind::zf;
    if (s == "mmse") return DetectorKind::mmse;
    if (s == "ml") return DetectorKind::ml;
    throw ConfigError("unknown detector '" + s + "' (expected zf, mmse, or ml)");
}

inline InverterKind inverter_from_string(const std::string& s) {
    if (s == "exact") return InverterKind::exact;
    if (s == "neumann") return InverterKind::neumann;
    if (s == "newton") return InverterKind::newton;
    throw ConfigError("unknown inverter '" + s + "' (expected exact, neumann, or newton)");
}

inline Backend backend_from_string(const std::string& s) {
    if (s == "exact") return Backend::exact;
    if (s == "photonic") return Backend::photonic;
    throw ConfigError("unknown backend '" + s + "' (expected exact or photonic)");
}

namespace detail {

template <typename T>
T get_field(const nlohmann::json& value, const std::string& field) {
    try {
        return value.get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError("field '" + field + "' has the wrong type");
    }
}

inline MimoSpec mimo_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("field 'mimo' must be an object");
    MimoSpec mimo;
    for (const auto& [key, value] : j.items()) {
        if (key == "m_antennas") mimo.m_antennas = get_field<int>(value, "mimo.m_antennas");
        else if (key == "k_users") mimo.k_users = get_field<int>(value, "mimo.k_users");
        else if (key == "modulation") mimo.modulation = modulation_from_string(get_field<std::string>(value, "mimo.modulation"));
        else if (key == "detector") mimo.detector = detector_from_string(get_field<std::string>(value, "mimo.detector"));
        else if (key == "inverter") mimo.inverter = inverter_from_string(get_field<std::string>(value, "mimo.inverter"));
        else if (key == "terms") mimo.terms = get_field<int>(value, "mimo.terms");
        else if (key == "iters") mimo.iters = get_field<int>(value, "mimo.iters");
        else if (key == "backend") mimo.backend = backend_from_string(get_field<std::string>(value, "mimo.backend"));
        else throw ConfigError("unknown key 'mimo." + key + "'");
    }
    return mimo;
}

}  // namespace detail

inline nlohmann::json spec_to_json(const ExperimentSpec& spec) {
    nlohmann::json gemm = nlohmann::json::array();
    for (const auto& b : spec.gemm_dims) gemm.push_back({{"m", b.m}, {"n", b.n}, {"k", b.k}});
    nlohmann::json dr = nlohmann::json::array();
    for (const auto& p : spec.dr_grid) dr.push_back({{"d", p.d}, {"r", p.r}});
    return nlohmann::json{
        {"kind", to_string(spec.kind)},
        {"hardware", to_json(spec.hardware)},
        {"mimo",
         {{"m_antennas", spec.mimo.m_antennas},
          {"k_users", spec.mimo.k_users},
          {"modulation", to_string(spec.mimo.modulation)},
          {"detector", to_string(spec.mimo.detector)},
          {"inverter", to_string(spec.mimo.inverter)},
          {"terms", spec.mimo.terms},
          {"iters", spec.mimo.iters},
          {"backend", to_string(spec.mimo.backend)}}},
        {"snr_grid_db", spec.snr_grid_db},
        {"trials", spec.trials},
        {"master_seed", spec.master_seed},
        {"output_dir", spec.output_dir},
        {"precision_bits_grid", spec.precision_bits_grid},
        {"antennas_grid", spec.antennas_grid},
        {"gemm_dims", gemm},
        {"dr_grid", dr},
    };
}

inline ExperimentSpec spec_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("experiment spec must be a JSON object");
    ExperimentSpec spec;
    bool saw_dr_grid = false;
    for (const auto& [key, value] : j.items()) {
        if (key == "kind") {
            spec.kind = experiment_kind_from_string(detail::get_field<std::string>(value, "kind"));
        } else if (key == "hardware") {
            spec.hardware = hardware_config_from_json(value);
        } else if (key == "mimo") {
            spec.mimo = detail::mimo_from_json(value);
        } else if (key == "snr_grid_db") {
            spec.snr_grid_db = detail::get_field<std::vector<double>>(value, "snr_grid_db");
        } else if (key == "trials") {
            spec.trials = detail::get_field<int>(value, "trials");
        } else if (key == "master_seed") {
            spec.master_seed = detail::get_field<std::uint64_t>(value, "master_seed");
        } else if (key == "output_dir") {
            spec.output_dir = detail::get_field<std::string>(value, "output_dir");
        } else if (key == "precision_bits_grid") {
            spec.precision_bits_grid = detail::get_field<std::vector<int>>(value, "precision_bits_grid");
        } else if (key == "antennas_grid") {
            spec.antennas_grid = detail::get_field<std::vector<int>>(value, "antennas_grid");
        } else if (key == "gemm_dims") {
            if (!value.is_array()) throw ConfigError("field 'gemm_dims' must be an array");
            spec.gemm_dims.clear();
            for (const auto& item : value) {
                if (!item.is_object()) throw ConfigError("field 'gemm_dims' entries must be objects");
                GemmBenchmark bench;
                for (const auto& [bk, bv] : item.items()) {
                    if (bk == "m") bench.m = detail::get_field<std::uint64_t>(bv, "gemm_dims.m");
                    else if (bk == "n") bench.n = detail::get_field<std::uint64_t>(bv, "gemm_dims.n");
                    else if (bk == "k") bench.k = detail::get_field<std::uint64_t>(bv, "gemm_dims.k");
                    else throw ConfigError("unknown key 'gemm_dims." + bk + "'");
                }
                spec.gemm_dims.push_back(bench);
            }
        } else if (key == "dr_grid") {
            if (!value.is_array()) throw ConfigError("field 'dr_grid' must be an array");
            spec.dr_grid.clear();
            saw_dr_grid = true;
            for (const auto& item : value) {
                if (!item.is_object()) throw ConfigError("field 'dr_grid' entries must be objects");
                DrPoint p;
                for (const auto& [dk, dv] : item.items()) {
                    if (dk == "d") p.d = detail::get_field<int>(dv, "dr_grid.d");
                    else if (dk == "r") p.r = detail::get_field<int>(dv, "dr_grid.r");
                    else throw ConfigError("unknown key 'dr_grid." + dk + "'");
                }
                spec.dr_grid.push_back(p);
            }
        } else {
            throw ConfigError("unknown key '" + key + "'");
        }
    }
    if (!saw_dr_grid) spec.dr_grid = default_dr_grid(spec.kind);
    return spec;
}

/// Loads a spec file, mapping parse failures to line-numbered diagnostics and
/// field failures to the offending key.
inline ExperimentSpec load_spec_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        std::size_t line = 1;
        const std::size_t limit = std::min(text.size(), static_cast<std::size_t>(e.byte));
        for (std::size_t i = 0; i < limit; ++i) {
            if (text[i] == '\n') ++line;
        }
        throw ConfigError(path + ":" + std::to_string(line) + ": " + e.what());
    }
    try {
        return spec_from_json(j);
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

inline bool is_ser_kind(ExperimentKind kind) {
    return kind == ExperimentKind::ser_sweep || kind == ExperimentKind::precision_sweep ||
           kind == ExperimentKind::antenna_sweep;
}

/// Structural validation beyond parsing; throws ConfigError on the first
/// problem. Hardware warnings are returned for the caller to surface.
inline std::vector<ConfigFinding> validate_spec(const ExperimentSpec& spec) {
    if (spec.trials < 1) throw ConfigError("trials must be at least 1");
    if (is_ser_kind(spec.kind) && spec.snr_grid_db.empty()) {
        throw ConfigError("snr_grid_db must be non-empty for sweep experiments");
    }
    if (spec.mimo.m_antennas < 1 || spec.mimo.k_users < 1) {
        throw ConfigError("mimo.m_antennas and mimo.k_users must be positive");
    }
    if (spec.mimo.terms < 0 || spec.mimo.iters < 0) {
        throw ConfigError("mimo.terms and mimo.iters must be nonnegative");
    }
    if (spec.kind == ExperimentKind::precision_sweep) {
        if (spec.precision_bits_grid.empty()) throw ConfigError("precision_bits_grid must be non-empty");
        for (int bits : spec.precision_bits_grid) {
            if (bits < 1 || bits > 52) throw ConfigError("precision_bits_grid entries must be in [1, 52]");
        }
    }
    if (spec.kind == ExperimentKind::antenna_sweep && spec.antennas_grid.empty()) {
        throw ConfigError("antennas_grid must be non-empty");
    }
    if (spec.kind == ExperimentKind::gemm_bench && spec.gemm_dims.empty()) {
        throw ConfigError("gemm_dims must be non-empty");
    }
    if ((spec.kind == ExperimentKind::gemm_bench || spec.kind == ExperimentKind::power_table) &&
        spec.dr_grid.empty()) {
        throw ConfigError("dr_grid must be non-empty");
    }
    auto findings = validate_config(spec.hardware);
    for (const auto& f : findings) {
        if (f.severity == ConfigFinding::Severity::error) {
            throw ConfigError("hardware config invalid: " + f.message);
        }
    }
    return findings;
}

// --------------------------------------------------------------------------
// Execution.
// --------------------------------------------------------------------------

/// Cooperative cancellation flag; the CLI wires SIGINT to it. Completed grid
/// points are flushed when a run is cut short.
inline std::atomic<bool>& interrupt_flag() {
    static std::atomic<bool> flag{false};
    return flag;
}

/// One uniquely keyed result value with its provenance.
struct ResultRow {
    std::string experiment_id;
    nlohmann::json params;
    std::string metric;
    double value = 0.0;
    long long trials = 0;
    std::uint64_t master_seed = 0;
};

struct ExperimentResult {
    std::vector<std::string> files;
    std::vector<ResultRow> rows;
    bool interrupted = false;
};

namespace detail {

struct ErrorCount {
    long long errors = 0;
    long long symbols = 0;
};

/// Deterministic parallel trial sum: per-trial seeds depend only on
/// (master_seed, trial index) and the accumulator is an integer, so any
/// worker count yields identical totals. Returns nullopt when interrupted.
inline std::optional<ErrorCount> sum_trials(int trials, int workers,
                                            const std::function<TrialResult(int)>& trial_fn) {
    if (workers < 1) {
        const unsigned hc = std::thread::hardware_concurrency();
        workers = hc == 0 ? 1 : static_cast<int>(hc);
    }
    workers = std::min(workers, trials);

    std::vector<ErrorCount> partials(static_cast<std::size_t>(workers));
    std::atomic<bool> aborted{false};
    auto worker = [&](int w) {
        const int begin = static_cast<int>(static_cast<long long>(trials) * w / workers);
        const int end = static_cast<int>(static_cast<long long>(trials) * (w + 1) / workers);
        ErrorCount local;
        for (int t = begin; t < end; ++t) {
            if ((t - begin) % 32 == 0 && interrupt_flag().load(std::memory_order_relaxed)) {
                aborted.store(true, std::memory_order_relaxed);
                return;
            }
            const TrialResult r = trial_fn(t);
            local.errors += r.symbol_errors;
            local.symbols += r.symbols;
        }
        partials[static_cast<std::size_t>(w)] = local;
    };

    if (workers == 1) {
        worker(0);
    } else {
        std::vector<std::thread> threads;
        threads.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) threads.emplace_back(worker, w);
        for (auto& t : threads) t.join();
    }
    if (aborted.load()) return std::nullopt;
    ErrorCount total;
    for (const auto& p : partials) {
        total.errors += p.errors;
        total.symbols += p.symbols;
    }
    return total;
}

inline std::string format_sig(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

/// One SER curve of a sweep: a fixed detector pipeline evaluated over the
/// SNR grid.
struct SerCurvePlan {
    std::string label;
    DetectorSpec det;
    int m_antennas = 64;
    int precision_bits_col = 0;  // 0 = exact arithmetic (no quantization)
};

inline std::string inverter_label(const InverterSpec& inv) {
    if (inv.kind == InverterKind::exact) return "exact";
    return std::string(to_string(inv.kind)) + "(" + std::to_string(inv.order) + ")";
}

inline InverterSpec inverter_from_mimo(const MimoSpec& mimo) {
    InverterSpec inv;
    inv.kind = mimo.inverter;
    inv.order = mimo.inverter == InverterKind::newton ? mimo.iters : mimo.terms;
    return inv;
}

inline std::vector<SerCurvePlan> build_ser_curves(const ExperimentSpec& spec) {
    std::vector<SerCurvePlan> curves;
    const InverterSpec inv = inverter_from_mimo(spec.mimo);
    auto photonic_with_bits = [&spec](int bits) {
        HardwareConfig cfg = spec.hardware;
        cfg.precision_bits = bits;
        return cfg;
    };
    switch (spec.kind) {
        case ExperimentKind::ser_sweep: {
            SerCurvePlan curve;
            curve.m_antennas = spec.mimo.m_antennas;
            curve.det = DetectorSpec{spec.mimo.detector, inv, std::nullopt};
            if (spec.mimo.backend == Backend::photonic) {
                curve.det.photonic = spec.hardware;
                curve.precision_bits_col = spec.hardware.precision_bits;
                curve.label = "photonic bits=" + std::to_string(spec.hardware.precision_bits);
            } else {
                curve.label = "exact";
            }
            curves.push_back(std::move(curve));
            break;
        }
        case ExperimentKind::precision_sweep: {
            SerCurvePlan exact;
            exact.label = "exact";
            exact.m_antennas = spec.mimo.m_antennas;
            exact.det = DetectorSpec{spec.mimo.detector, inv, std::nullopt};
            curves.push_back(std::move(exact));
            for (int bits : spec.precision_bits_grid) {
                SerCurvePlan curve;
                curve.label = "bits=" + std::to_string(bits);
                curve.m_antennas = spec.mimo.m_antennas;
                curve.det = DetectorSpec{spec.mimo.detector, inv, photonic_with_bits(bits)};
                curve.precision_bits_col = bits;
                curves.push_back(std::move(curve));
            }
            break;
        }
        case ExperimentKind::antenna_sweep: {
            for (int m : spec.antennas_grid) {
                SerCurvePlan curve;
                curve.label = "M=" + std::to_string(m);
                curve.m_antennas = m;
                curve.det = DetectorSpec{spec.mimo.detector, inv, std::nullopt};
                if (spec.mimo.backend == Backend::photonic) {
                    curve.det.photonic = spec.hardware;
                    curve.precision_bits_col = spec.hardware.precision_bits;
                }
                curves.push_back(std::move(curve));
            }
            break;
        }
        default:
            break;
    }
    return curves;
}

}  // namespace detail

// --------------------------------------------------------------------------
// SVG line chart (simple polylines; log-scale y available).
// --------------------------------------------------------------------------

struct ChartSeries {
    std::string label;
    std::vector<std::pair<double, double>> points;
};

inline std::string render_line_chart_svg(const std::string& title, const std::string& x_label,
                                         const std::string& y_label,
                                         const std::vector<ChartSeries>& series, bool log_y) {
    constexpr double width = 720, height = 480;
    constexpr double left = 80, right = 700, top = 50, bottom = 420;

    double x_min = 0, x_max = 1, y_min = log_y ? 1.0 : 0.0, y_max = 1.0;
    bool any = false;
    for (const auto& s : series) {
        for (const auto& [x, y] : s.points) {
            if (log_y && y <= 0.0) continue;
            if (!any) {
                x_min = x_max = x;
                y_min = y_max = y;
                any = true;
            } else {
                x_min = std::min(x_min, x);
                x_max = std::max(x_max, x);
                y_min = std::min(y_min, y);
                y_max = std::max(y_max, y);
            }
        }
    }
    if (!any) {
        x_min = 0;
        x_max = 1;
        y_min = log_y ? 1e-1 : 0;
        y_max = 1;
    }
    if (x_max == x_min) x_max = x_min + 1.0;
    if (log_y) {
        y_min = std::pow(10.0, std::floor(std::log10(y_min)));
        y_max = std::pow(10.0, std::ceil(std::log10(y_max)));
        if (y_max == y_min) y_max = y_min * 10.0;
    } else if (y_max == y_min) {
        y_max = y_min + 1.0;
    }

    auto x_px = [&](double x) { return left + (x - x_min) / (x_max - x_min) * (right - left); };
    auto y_px = [&](double y) {
        const double t = log_y ? (std::log10(y) - std::log10(y_min)) / (std::log10(y_max) - std::log10(y_min))
                               : (y - y_min) / (y_max - y_min);
        return bottom - t * (bottom - top);
    };

    static constexpr const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                              "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
    constexpr int palette_size = 8;

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + detail::format_sig(width) +
           "\" height=\"" + detail::format_sig(height) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg += "<text x=\"360\" y=\"28\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">" +
           title + "</text>\n";
    // axes
    svg += "<line x1=\"" + detail::format_sig(left) + "\" y1=\"" + detail::format_sig(bottom) +
           "\" x2=\"" + detail::format_sig(right) + "\" y2=\"" + detail::format_sig(bottom) +
           "\" stroke=\"black\"/>\n";
    svg += "<line x1=\"" + detail::format_sig(left) + "\" y1=\"" + detail::format_sig(top) + "\" x2=\"" +
           detail::format_sig(left) + "\" y2=\"" + detail::format_sig(bottom) + "\" stroke=\"black\"/>\n";
    svg += "<text x=\"390\" y=\"460\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" +
           x_label + "</text>\n";
    svg += "<text x=\"20\" y=\"235\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
           "transform=\"rotate(-90 20 235)\">" +
           y_label + "</text>\n";

    // x ticks: five evenly spaced
    for (int i = 0; i <= 4; ++i) {
        const double x = x_min + (x_max - x_min) * i / 4.0;
        const double px = x_px(x);
        svg += "<line x1=\"" + detail::format_sig(px) + "\" y1=\"" + detail::format_sig(bottom) +
               "\" x2=\"" + detail::format_sig(px) + "\" y2=\"" + detail::format_sig(bottom + 5) +
               "\" stroke=\"black\"/>\n";
        svg += "<text x=\"" + detail::format_sig(px) + "\" y=\"" + detail::format_sig(bottom + 20) +
               "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" +
               detail::format_sig(x) + "</text>\n";
    }
    // y ticks: decades in log mode, five even steps otherwise
    if (log_y) {
        for (double v = y_min; v <= y_max * 1.0000001; v *= 10.0) {
            const double py = y_px(v);
            svg += "<line x1=\"" + detail::format_sig(left - 5) + "\" y1=\"" + detail::format_sig(py) +
                   "\" x2=\"" + detail::format_sig(left) + "\" y2=\"" + detail::format_sig(py) +
                   "\" stroke=\"black\"/>\n";
            svg += "<text x=\"" + detail::format_sig(left - 8) + "\" y=\"" + detail::format_sig(py + 4) +
                   "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" +
                   detail::format_sig(v) + "</text>\n";
        }
    } else {
        for (int i = 0; i <= 4; ++i) {
            const double v = y_min + (y_max - y_min) * i / 4.0;
            const double py = y_px(v);
            svg += "<line x1=\"" + detail::format_sig(left - 5) + "\" y1=\"" + detail::format_sig(py) +
                   "\" x2=\"" + detail::format_sig(left) + "\" y2=\"" + detail::format_sig(py) +
                   "\" stroke=\"black\"/>\n";
            svg += "<text x=\"" + detail::format_sig(left - 8) + "\" y=\"" + detail::format_sig(py + 4) +
                   "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" +
                   detail::format_sig(v) + "</text>\n";
        }
    }

    int color_idx = 0;
    double legend_y = top + 10;
    for (const auto& s : series) {
        const char* color = palette[color_idx % palette_size];
        std::string pts;
        for (const auto& [x, y] : s.points) {
            if (log_y && y <= 0.0) continue;  // unplottable on a log axis
            pts += detail::format_sig(x_px(x)) + "," + detail::format_sig(y_px(y)) + " ";
        }
        if (!pts.empty()) {
            svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
                   "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
        }
        svg += "<line x1=\"580\" y1=\"" + detail::format_sig(legend_y) + "\" x2=\"610\" y2=\"" +
               detail::format_sig(legend_y) + "\" stroke=\"" + color + "\" stroke-width=\"1.5\"/>\n";
        svg += "<text x=\"615\" y=\"" + detail::format_sig(legend_y + 4) +
               "\" font-family=\"sans-serif\" font-size=\"11\">" + s.label + "</text>\n";
        legend_y += 16;
        ++color_idx;
    }
    svg += "</svg>\n";
    return svg;
}

// --------------------------------------------------------------------------
// run_experiment
// --------------------------------------------------------------------------

namespace detail {

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write output file '" + path + "'");
    out << content;
}

inline std::string provenance_header(const ExperimentSpec& spec) {
    std::string header;
    header += "# experiment: ";
    header += to_string(spec.kind);
    header += "\n# master_seed: " + std::to_string(spec.master_seed);
    header += "\n# spec: " + spec_to_json(spec).dump();
    header += "\n";
    return header;
}

}  // namespace detail

/// Runs a validated spec to completion, writing CSV + JSON (and an SVG chart
/// for sweeps) under output_dir. Output bytes depend only on (spec,
/// master_seed), never on the worker count.
inline ExperimentResult run_experiment(const ExperimentSpec& spec, int workers = 0) {
    validate_spec(spec);
    std::filesystem::create_directories(spec.output_dir);

    ExperimentResult result;
    const std::string base =
        (std::filesystem::path(spec.output_dir) / to_string(spec.kind)).string();
    const ModulationSet& mod = ModulationSet::get(spec.mimo.modulation);

    std::string csv = detail::provenance_header(spec);
    nlohmann::json json_out{{"experiment", to_string(spec.kind)},
                            {"master_seed", spec.master_seed},
                            {"spec", spec_to_json(spec)}};
    std::vector<ChartSeries> chart;
    std::string chart_title, chart_y;
    bool chart_log_y = true;

    if (is_ser_kind(spec.kind)) {
        csv += "snr_db,detector,inverter,precision_bits,m_antennas,k_users,trials,symbol_errors,ser\n";
        const auto curves = detail::build_ser_curves(spec);
        for (const auto& curve : curves) {
            ChartSeries series{curve.label, {}};
            for (double snr : spec.snr_grid_db) {
                auto counts = detail::sum_trials(
                    spec.trials, workers, [&](int t) {
                        return run_ser_trial(curve.m_antennas, spec.mimo.k_users, snr, mod, curve.det,
                                             derive_seed(spec.master_seed, static_cast<std::uint64_t>(t)));
                    });
                if (!counts) {
                    result.interrupted = true;
                    break;
                }
                const double ser = static_cast<double>(counts->errors) / static_cast<double>(counts->symbols);
                csv += detail::format_sig(snr);
                csv += ',';
                csv += to_string(curve.det.detector);
                csv += ',';
                csv += detail::inverter_label(curve.det.inverter);
                csv += ',';
                csv += std::to_string(curve.precision_bits_col);
                csv += ',';
                csv += std::to_string(curve.m_antennas);
                csv += ',';
                csv += std::to_string(spec.mimo.k_users);
                csv += ',';
                csv += std::to_string(spec.trials);
                csv += ',';
                csv += std::to_string(counts->errors);
                csv += ',';
                csv += detail::format_sig(ser);
                csv += '\n';

                ResultRow row;
                row.experiment_id = std::string(to_string(spec.kind)) + "/" + curve.label;
                row.params = {{"snr_db", snr},
                              {"detector", to_string(curve.det.detector)},
                              {"inverter", detail::inverter_label(curve.det.inverter)},
                              {"precision_bits", curve.precision_bits_col},
                              {"m_antennas", curve.m_antennas},
                              {"k_users", spec.mimo.k_users}};
                row.metric = "ser";
                row.value = ser;
                row.trials = spec.trials;
                row.master_seed = spec.master_seed;
                result.rows.push_back(std::move(row));
                series.points.emplace_back(snr, ser);
            }
            chart.push_back(std::move(series));
            if (result.interrupted) break;
        }
        chart_title = std::string(to_string(spec.kind)) + " (M=" + std::to_string(spec.mimo.m_antennas) +
                      ", K=" + std::to_string(spec.mimo.k_users) + ")";
        chart_y = "symbol error rate";
    } else if (spec.kind == ExperimentKind::gemm_bench) {
        csv += cost_csv_header() + "\n";
        for (const auto& bench : spec.gemm_dims) {
            ChartSeries series{"m=" + std::to_string(bench.m) + " n=" + std::to_string(bench.n) +
                                   " k=" + std::to_string(bench.k),
                               {}};
            for (const auto& dr : spec.dr_grid) {
                HardwareConfig cfg = spec.hardware;
                cfg.channels_D = dr.d;
                cfg.rings_R = dr.r;
                const CostReport report = make_cost_report(bench.m, bench.n, bench.k, cfg);
                csv += cost_csv_row(report, bench.m, bench.n, bench.k, cfg) + "\n";

                ResultRow row;
                row.experiment_id = "gemm_bench";
                row.params = {{"d", dr.d}, {"r", dr.r}, {"m", bench.m}, {"n", bench.n}, {"k", bench.k}};
                row.metric = "t_total_ps";
                row.value = report.t_total_ps;
                row.trials = 1;
                row.master_seed = spec.master_seed;
                result.rows.push_back(std::move(row));
                series.points.emplace_back(static_cast<double>(dr.d), report.t_total_ps * 1e-9);  // ms
            }
            chart.push_back(std::move(series));
        }
        csv += "# runtime baseline (published benchmark, not modeled): ";
        csv += kGemmRuntimeBaseline;
        csv += "\n";
        chart_title = "GEMM total processing time";
        chart_y = "t_total (ms)";
    } else if (spec.kind == ExperimentKind::power_table) {
        csv += "d,r,power_mw,power_w_rounded\n";
        for (const auto& dr : spec.dr_grid) {
            const double mw = power_total_mw(dr.d, dr.r);
            const int watts = power_watts_rounded(dr.d, dr.r);
            csv += std::to_string(dr.d) + "," + std::to_string(dr.r) + "," + detail::format_sig(mw) +
                   "," + std::to_string(watts) + "\n";
            ResultRow row;
            row.experiment_id = "power_table";
            row.params = {{"d", dr.d}, {"r", dr.r}};
            row.metric = "power_w_rounded";
            row.value = watts;
            row.trials = 1;
            row.master_seed = spec.master_seed;
            result.rows.push_back(std::move(row));
        }
        for (const auto& gpu : gpu_power_baselines()) {
            csv += "# gpu_baseline: " + std::string(gpu.name) + " = " +
                   detail::format_sig(gpu.power_w) + " W\n";
        }
    } else if (spec.kind == ExperimentKind::invert_demo) {
        csv += "method,order,residual\n";
        const ComplexMatrix h = sample_rayleigh_channel(spec.mimo.m_antennas, spec.mimo.k_users,
                                                        derive_seed(spec.master_seed, 0));
        const ComplexMatrix g = gram(h);
        const auto [neumann_x, neumann_report] = neumann_inverse(g, spec.mimo.terms);
        const auto [newton_x, newton_report] = newton_inverse(g, spec.mimo.iters);
        auto emit = [&](const char* method, const ConvergenceReport& report) {
            ChartSeries series{method, {}};
            for (std::size_t i = 0; i < report.residuals.size(); ++i) {
                csv += std::string(method) + "," + std::to_string(i) + "," +
                       detail::format_sig(report.residuals[i]) + "\n";
                ResultRow row;
                row.experiment_id = "invert_demo";
                row.params = {{"method", method}, {"order", i}};
                row.metric = "residual";
                row.value = report.residuals[i];
                row.trials = 1;
                row.master_seed = spec.master_seed;
                result.rows.push_back(std::move(row));
                series.points.emplace_back(static_cast<double>(i), report.residuals[i]);
            }
            chart.push_back(std::move(series));
        };
        emit("neumann", neumann_report);
        emit("newton", newton_report);
        chart_title = "Inverse-approximation residuals (M=" + std::to_string(spec.mimo.m_antennas) +
                      ", K=" + std::to_string(spec.mimo.k_users) + ")";
        chart_y = "||I - XA||_F";
    }

    if (result.interrupted) csv += "# interrupted: partial results\n";

    nlohmann::json rows_json = nlohmann::json::array();
    for (const auto& row : result.rows) {
        rows_json.push_back({{"experiment_id", row.experiment_id},
                             {"params", row.params},
                             {"metric", row.metric},
                             {"value", row.value},
                             {"trials", row.trials},
                             {"seed", row.master_seed}});
    }
    json_out["interrupted"] = result.interrupted;
    json_out["rows"] = rows_json;

    detail::write_text_file(base + ".csv", csv);
    result.files.push_back(base + ".csv");
    detail::write_text_file(base + ".json", json_out.dump(2) + "\n");
    result.files.push_back(base + ".json");

    if (!chart.empty()) {
        const std::string x_label = is_ser_kind(spec.kind) ? "SNR (dB)"
                                    : spec.kind == ExperimentKind::gemm_bench ? "D (= R)"
                                                                              : "term / iteration";
        std::string svg = "<!-- spec: " + spec_to_json(spec).dump() + " -->\n" +
                          render_line_chart_svg(chart_title, x_label, chart_y, chart, chart_log_y);
        detail::write_text_file(base + ".svg", svg);
        result.files.push_back(base + ".svg");
    }
    return result;
}

}  // namespace bwmac
