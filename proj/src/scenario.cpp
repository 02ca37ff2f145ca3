#include "sps/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "sps/analysis.hpp"
#include "sps/budget.hpp"
#include "sps/emitter.hpp"
#include "sps/errors.hpp"
#include "sps/optics.hpp"
#include "sps/photonstream.hpp"
#include "sps/rng.hpp"
#include "sps/units.hpp"

namespace sps::scenario {
namespace {

using nlohmann::ordered_json;
using config::ScenarioConfig;

constexpr const char* kVersion = "0.1.0";

// Scenario-level stream labels; library operations derive their own salted
// keys below these, so no two random streams share a key.
constexpr std::uint64_t kSaltScnLoss = 0x73636e31;
constexpr std::uint64_t kSaltScnDetA = 0x73636e32;
constexpr std::uint64_t kSaltScnDetB = 0x73636e33;
constexpr std::uint64_t kSaltScnSplit = 0x73636e34;
constexpr std::uint64_t kSaltScnRuns = 0x73636e35;
constexpr std::uint64_t kSaltScnHom = 0x73636e36;

std::string hex16(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return std::string(buf);
}

std::string file_prefix(const std::string& scenario_name) {
    std::string out = scenario_name;
    std::replace(out.begin(), out.end(), '-', '_');
    return out;
}

ordered_json provenance_json(const ScenarioConfig& cfg) {
    ordered_json p;
    p["scenario"] = cfg.name;
    p["seed"] = cfg.seed;
    p["config_digest"] = hex16(cfg.digest);
    p["version"] = kVersion;
    return p;
}

std::string provenance_line(const ScenarioConfig& cfg) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "# scenario=%s seed=%llu config_digest=%s version=%s\n",
                  cfg.name.c_str(), static_cast<unsigned long long>(cfg.seed),
                  hex16(cfg.digest).c_str(), kVersion);
    return std::string(buf);
}

struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<ordered_json> rows;  // each row is a JSON array matching columns
};

// Collects the scenario's summary document and tables, then writes either
// CSV-per-table plus a summary JSON, or a single JSON with embedded tables.
class ArtifactSet {
  public:
    explicit ArtifactSet(const ScenarioConfig& cfg) : cfg_(cfg) {
        doc_["provenance"] = provenance_json(cfg);
    }

    ordered_json& doc() { return doc_; }

    void add_table(Table table) { tables_.push_back(std::move(table)); }

    void write() const {
        namespace fs = std::filesystem;
        fs::create_directories(cfg_.out_dir);
        const std::string prefix = file_prefix(cfg_.name);
        if (cfg_.format == "json") {
            ordered_json out = doc_;
            ordered_json tables = ordered_json::object();
            for (const auto& t : tables_) {
                ordered_json jt;
                jt["columns"] = t.columns;
                jt["rows"] = t.rows;
                tables[t.name] = std::move(jt);
            }
            out["tables"] = std::move(tables);
            write_text(fs::path(cfg_.out_dir) / (prefix + ".json"), out.dump(2) + "\n");
            return;
        }
        for (const auto& t : tables_) {
            std::string text = provenance_line(cfg_);
            text += join(t.columns);
            text += '\n';
            for (const auto& row : t.rows) {
                std::string line;
                for (std::size_t i = 0; i < row.size(); ++i) {
                    if (i > 0) line += ',';
                    const auto& cell = row[i];
                    line += cell.is_string() ? cell.get<std::string>() : cell.dump();
                }
                text += line;
                text += '\n';
            }
            write_text(fs::path(cfg_.out_dir) / (prefix + "_" + t.name + ".csv"), text);
        }
        write_text(fs::path(cfg_.out_dir) / (prefix + "_summary.json"), doc_.dump(2) + "\n");
    }

  private:
    static std::string join(const std::vector<std::string>& cols) {
        std::string out;
        for (std::size_t i = 0; i < cols.size(); ++i) {
            if (i > 0) out += ',';
            out += cols[i];
        }
        return out;
    }

    static void write_text(const std::filesystem::path& path, const std::string& text) {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw PreconditionError("cannot open " + path.string() + " for writing");
        out << text;
    }

    const ScenarioConfig& cfg_;
    ordered_json doc_;
    std::vector<Table> tables_;
};

// Time grid that resolves the pulse bandwidth, the strongest scaled drive and
// the decay, with a span of at least 8.2 temporal FWHMs, rounded up to the
// next power of two.
GridSpec auto_grid(double width_ghz, double gamma_ns, double max_area_rad) {
    double fwhm_t = 2.0 * std::log(2.0) / (kPi * width_ghz * 1e-3);  // ps
    double sigma_t = fwhm_t / (2.0 * std::sqrt(std::log(2.0)));
    double gamma_ps = gamma_ns * kPerNsToPerPs;
    double dt = 0.1 / (width_ghz * 1e-3);
    if (max_area_rad > 0.0) {
        double omega_peak = max_area_rad / (sigma_t * std::sqrt(2.0 * kPi));
        dt = std::min(dt, 0.05 / omega_peak);
    }
    if (gamma_ps > 0.0) dt = std::min(dt, 0.02 / gamma_ps);
    dt *= 0.8;
    double span = 8.2 * fwhm_t;
    std::size_t count = 64;
    while (static_cast<double>(count) * dt < span) count *= 2;
    return GridSpec::centered(count, dt);
}

// Gaussian pulse, optional shaper slit, optional detuned cavity mode, as the
// emitter drive. max_scale bounds the amplitude the caller will later apply,
// so the grid stays valid for every scaled copy.
emitter::ShapingChain make_chain(const ScenarioConfig& cfg, double max_scale) {
    return [cfg, max_scale](double width_ghz) {
        GridSpec grid = auto_grid(width_ghz, cfg.emitter_params.gamma_ns,
                                  max_scale * cfg.pulse.area_rad);
        PulseField field = optics::gaussian_pulse(width_ghz, cfg.pulse.area_rad, grid);
        if (cfg.pulse.slit_width_ghz > 0.0) {
            field = optics::slit_filter(
                field, {cfg.pulse.slit_width_ghz, cfg.pulse.slit_center_ghz});
        }
        if (cfg.cavity.apply_v_filter) {
            optics::CavityMode v_mode{optics::Polarization::V, cfg.cavity.q_factor,
                                      cfg.cavity.v_mode_offset_ghz, cfg.cavity.eta_top};
            field = optics::cavity_mode_filter(field, v_mode, cfg.cavity.wavelength_nm);
        }
        return emitter::DriveProfile::from_pulse(field);
    };
}

photonstream::PulseTrain make_train(const ScenarioConfig& cfg) {
    return photonstream::PulseTrain{cfg.train.rep_rate_mhz, cfg.train.pick_factor,
                                    cfg.train.n_pulses};
}

photonstream::DetectorModel make_detector(const ScenarioConfig& cfg) {
    return photonstream::DetectorModel{cfg.detector.efficiency, cfg.detector.dead_time_ns,
                                       cfg.detector.jitter_sigma_ps};
}

std::unique_ptr<photonstream::PulseSource> make_source(const ScenarioConfig& cfg) {
    if (cfg.source.kind == "pn") {
        return std::make_unique<photonstream::DistributionSource>(cfg.source.pn);
    }
    return std::make_unique<photonstream::BernoulliSource>(cfg.source.p *
                                                           cfg.source.duty_cycle);
}

void run_rabi(const ScenarioConfig& cfg, ArtifactSet& art) {
    auto chain = make_chain(cfg, cfg.rabi.scale_max + 0.05);
    std::vector<double> scales(cfg.rabi.n_points);
    for (std::uint32_t i = 0; i < cfg.rabi.n_points; ++i) {
        scales[i] = cfg.rabi.scale_max * static_cast<double>(i) /
                    static_cast<double>(cfg.rabi.n_points - 1);
    }

    Table curve{"curve", {"width_ghz", "scale", "sqrt_power", "area_rad", "mean_photons"}, {}};
    ordered_json summary = ordered_json::array();
    for (double width : cfg.pulse.widths_ghz) {
        emitter::DriveProfile base = chain(width);
        auto points = emitter::rabi_sweep(base, scales, cfg.emitter_params);
        for (const auto& pt : points) {
            curve.rows.push_back(ordered_json::array(
                {width, pt.scale, std::sqrt(pt.power_proxy), pt.area_rad, pt.mean_photons}));
        }
        double pi_scale = emitter::first_rabi_maximum(base, cfg.emitter_params,
                                                      cfg.rabi.scale_max);
        auto at_max = emitter::bloch_integrate(base.scaled(pi_scale), cfg.emitter_params);
        ordered_json entry;
        entry["width_ghz"] = width;
        entry["pi_scale"] = pi_scale;
        entry["area_at_max_rad"] = pi_scale * base.area_rad();
        entry["mean_photons_at_max"] = at_max.mean_photons;
        summary.push_back(std::move(entry));
    }
    art.doc()["maxima"] = std::move(summary);
    art.add_table(std::move(curve));
}

void run_purity_sweep(const ScenarioConfig& cfg, ArtifactSet& art) {
    auto chain = make_chain(cfg, 2.05);
    auto points = emitter::purity_vs_width(cfg.pulse.widths_ghz, cfg.emitter_params, chain,
                                           cfg.n_trajectories, cfg.seed);
    Table table{"points", {"width_ghz", "pi_scale", "mean_photons", "g2", "g2_se"}, {}};
    ordered_json summary = ordered_json::array();
    for (const auto& pt : points) {
        table.rows.push_back(ordered_json::array(
            {pt.width_ghz, pt.pi_scale, pt.mean_photons, pt.g2, pt.g2_se}));
        ordered_json entry;
        entry["width_ghz"] = pt.width_ghz;
        entry["pi_scale"] = pt.pi_scale;
        entry["mean_photons"] = pt.mean_photons;
        entry["g2"] = pt.g2;
        entry["g2_se"] = pt.g2_se;
        summary.push_back(std::move(entry));
    }
    art.doc()["points"] = std::move(summary);
    art.doc()["n_trajectories"] = cfg.n_trajectories;
    art.add_table(std::move(table));
}

photonstream::TimestampStream detected_stream(const ScenarioConfig& cfg,
                                              std::uint64_t detector_salt) {
    auto source = make_source(cfg);
    photonstream::TimestampStream stream = photonstream::emit_stream(
        *source, make_train(cfg), cfg.emitter_params.gamma_ns, cfg.seed);
    if (cfg.loss.transmission < 1.0) {
        stream = photonstream::apply_loss(stream, cfg.loss.transmission,
                                          derive_key(cfg.seed, kSaltScnLoss));
    }
    return photonstream::detect(stream, make_detector(cfg),
                                derive_key(cfg.seed, detector_salt));
}

void run_squeezing(const ScenarioConfig& cfg, ArtifactSet& art) {
    photonstream::TimestampStream stream = detected_stream(cfg, kSaltScnDetA);
    const double period_ps = make_train(cfg).period_ps();
    const double duration_ps = static_cast<double>(cfg.train.n_pulses) * period_ps;
    auto counts = analysis::bin_counts(stream, cfg.analysis.bin_us, duration_ps);

    const double bin_ps = cfg.analysis.bin_us * 1e6;
    const double ppb_exact = bin_ps / period_ps;
    const auto ppb = static_cast<std::uint32_t>(std::llround(ppb_exact));
    const bool commensurate = std::abs(ppb_exact - static_cast<double>(ppb)) <
                              1e-9 * std::max(1.0, ppb_exact);
    auto report = analysis::squeezing_report(counts, ppb);

    ordered_json& doc = art.doc();
    doc["n_clicks"] = stream.size();
    doc["stream_digest"] = hex16(stream.digest());
    doc["pulses_per_bin"] = report.pulses_per_bin;
    doc["pulses_per_bin_is_exact"] = commensurate;
    doc["n_bins"] = report.n_bins;
    doc["mean"] = report.mean;
    doc["sigma"] = report.sigma;
    doc["sigma_shot"] = report.sigma_shot;
    doc["ratio"] = report.ratio;
    doc["squeezing_db"] = report.squeezing_db;
    doc["rho_hat"] = report.rho_hat;
    doc["predicted_ratio"] = report.predicted_ratio;

    // Extrapolate the detected-intensity squeezing back to the first lens by
    // dividing out the downstream stages.
    if (cfg.stages.size() >= 2 && cfg.stages.front().name == "first_lens") {
        double downstream = 1.0;
        for (std::size_t i = 1; i < cfg.stages.size(); ++i) downstream *= cfg.stages[i].value;
        if (downstream > 0.0) {
            double rho_fl = report.rho_hat / downstream;
            ordered_json fl;
            fl["rho"] = rho_fl;
            if (rho_fl < 1.0) {
                double ratio_fl = std::sqrt(1.0 - rho_fl);
                fl["predicted_ratio"] = ratio_fl;
                fl["predicted_squeezing_db"] = -10.0 * std::log10(ratio_fl);
            }
            doc["first_lens"] = std::move(fl);
        }
    }

    Table table{"counts", {"bin_index", "count"}, {}};
    for (std::size_t i = 0; i < counts.size(); ++i) {
        table.rows.push_back(ordered_json::array({i, counts[i]}));
    }
    art.add_table(std::move(table));
}

void run_consecutive(const ScenarioConfig& cfg, ArtifactSet& art) {
    const std::uint64_t n = cfg.runs.n_pulses;
    const double p_eff = cfg.source.p * cfg.source.duty_cycle;
    const std::uint64_t key = derive_key(cfg.seed, kSaltScnRuns);
    std::vector<bool> detected(n);
    for (std::uint64_t i = 0; i < n; ++i) detected[i] = u01_at(key, i) < p_eff;
    auto report = analysis::consecutive_runs(detected);

    const double pulse_rate_hz =
        cfg.train.rep_rate_mhz * 1e6 / static_cast<double>(cfg.train.pick_factor);
    auto rate40_millihz = [&](double rho) {
        return pulse_rate_hz * std::pow(rho, 40) * 1e3;
    };

    ordered_json& doc = art.doc();
    doc["n_pulses"] = n;
    doc["p_configured"] = p_eff;
    doc["fitted_rho"] = report.fitted_rho;
    doc["ci_low"] = report.ci_low;
    doc["ci_high"] = report.ci_high;
    doc["fit_valid"] = report.fit_valid;
    doc["fit_bins_used"] = report.fit_bins_used;
    doc["predicted_40fold_millihz_from_fit"] =
        report.fit_valid ? ordered_json(rate40_millihz(report.fitted_rho)) : ordered_json();
    doc["predicted_40fold_millihz_from_p"] = rate40_millihz(p_eff);
    doc["reference_40fold_millihz"] = cfg.runs.reference_40_rate_millihz;
    doc["note"] =
        "the prediction assumes pulse-to-pulse independence; slow intensity drift "
        "suppresses long runs relative to it";

    Table table{"runs", {"length", "exact", "at_least", "predicted_exact"}, {}};
    const double rho = report.fit_valid ? report.fitted_rho : p_eff;
    const double run_norm = static_cast<double>(n) * (1.0 - rho) * (1.0 - rho);
    for (std::size_t len = 1; len < report.exact_counts.size(); ++len) {
        table.rows.push_back(ordered_json::array({len, report.exact_counts[len],
                                                  report.at_least_counts[len],
                                                  run_norm * std::pow(rho, len)}));
    }
    art.add_table(std::move(table));
}

void run_hbt(const ScenarioConfig& cfg, ArtifactSet& art) {
    auto source = make_source(cfg);
    photonstream::TimestampStream stream = photonstream::emit_stream(
        *source, make_train(cfg), cfg.emitter_params.gamma_ns, cfg.seed);
    if (cfg.loss.transmission < 1.0) {
        stream = photonstream::apply_loss(stream, cfg.loss.transmission,
                                          derive_key(cfg.seed, kSaltScnLoss));
    }
    auto [arm_a, arm_b] = photonstream::beamsplit(stream, cfg.loss.splitter_r,
                                                  derive_key(cfg.seed, kSaltScnSplit));
    auto det = make_detector(cfg);
    arm_a = photonstream::detect(arm_a, det, derive_key(cfg.seed, kSaltScnDetA));
    arm_b = photonstream::detect(arm_b, det, derive_key(cfg.seed, kSaltScnDetB));

    auto hist = analysis::coincidence_histogram(arm_a, arm_b, cfg.analysis.coincidence_bin_ps,
                                                cfg.analysis.window_ns);
    const double period_ns = make_train(cfg).period_ps() * 1e-3;
    auto g2 = analysis::g2_zero(hist, period_ns, cfg.analysis.peak_halfwidth_ns,
                                cfg.analysis.exclude_adjacent);

    ordered_json& doc = art.doc();
    doc["clicks_a"] = arm_a.size();
    doc["clicks_b"] = arm_b.size();
    doc["g2"] = g2.value;
    doc["g2_se"] = g2.se;
    doc["center_area"] = g2.center_area;
    doc["side_mean_area"] = g2.side_mean_area;
    doc["n_side_peaks"] = g2.n_side_peaks;
    doc["period_ns"] = period_ns;

    Table table{"histogram", {"delay_ps", "count"}, {}};
    for (std::size_t i = 0; i < hist.counts.size(); ++i) {
        table.rows.push_back(ordered_json::array({hist.bin_center_ps(i), hist.counts[i]}));
    }
    art.add_table(std::move(table));
}

void run_hom(const ScenarioConfig& cfg, ArtifactSet& art) {
    analysis::HomSimOptions options{cfg.hom.rep_rate_mhz, cfg.emitter_params.gamma_ns,
                                    cfg.hom.n_pulses};
    auto streams = analysis::hom_simulate(cfg.hom.m, cfg.hom.g2, cfg.hom.r,
                                          derive_key(cfg.seed, kSaltScnHom), options);
    auto par = analysis::coincidence_histogram(streams.parallel_1, streams.parallel_2,
                                               cfg.analysis.coincidence_bin_ps,
                                               cfg.analysis.window_ns);
    auto cross = analysis::coincidence_histogram(streams.cross_1, streams.cross_2,
                                                 cfg.analysis.coincidence_bin_ps,
                                                 cfg.analysis.window_ns);
    const double period_ns = 1e3 / cfg.hom.rep_rate_mhz;
    double v_raw = analysis::hom_visibility(par, cross, period_ns,
                                            cfg.analysis.peak_halfwidth_ns,
                                            cfg.analysis.exclude_adjacent);
    auto corr = analysis::correct_indistinguishability(v_raw, cfg.hom.g2, cfg.hom.r);

    ordered_json& doc = art.doc();
    doc["overlap_in"] = cfg.hom.m;
    doc["g2"] = cfg.hom.g2;
    doc["splitter_r"] = cfg.hom.r;
    doc["v_raw"] = v_raw;
    doc["overlap_corrected"] = corr.m;
    doc["correction_bias"] = corr.m - cfg.hom.m;
    doc["physical"] = corr.physical;
    doc["clicks"] = ordered_json{{"parallel_1", streams.parallel_1.size()},
                                 {"parallel_2", streams.parallel_2.size()},
                                 {"cross_1", streams.cross_1.size()},
                                 {"cross_2", streams.cross_2.size()}};

    Table table{"histograms", {"delay_ps", "parallel", "cross"}, {}};
    for (std::size_t i = 0; i < par.counts.size(); ++i) {
        table.rows.push_back(
            ordered_json::array({par.bin_center_ps(i), par.counts[i], cross.counts[i]}));
    }
    art.add_table(std::move(table));
}

void run_delay_hom(const ScenarioConfig& cfg, ArtifactSet& art) {
    emitter::EmitterParams params = cfg.emitter_params;
    ordered_json& doc = art.doc();
    if (cfg.delays.fit) {
        auto fit = emitter::fit_dephasing(cfg.delays.fit_points, cfg.emitter_params.gamma_ns);
        params.gamma_dephase_ns = fit.gamma_dephase_ns;
        params.gamma_sd_ns = fit.gamma_sd_ns;
        params.tau_c_us = fit.tau_c_us;
        ordered_json jfit;
        jfit["gamma_dephase_ns"] = fit.gamma_dephase_ns;
        jfit["gamma_sd_ns"] = fit.gamma_sd_ns;
        jfit["tau_c_us"] = fit.tau_c_us;
        jfit["max_abs_residual"] = fit.max_abs_residual;
        jfit["outer_iterations"] = fit.outer_iterations;
        jfit["residuals"] = fit.residuals;
        doc["fit"] = std::move(jfit);

        Table pts{"fit_points", {"delay_us", "measured", "model", "residual"}, {}};
        for (std::size_t i = 0; i < cfg.delays.fit_points.size(); ++i) {
            const auto& p = cfg.delays.fit_points[i];
            pts.rows.push_back(ordered_json::array(
                {p.delay_us, p.visibility, p.visibility + fit.residuals[i],
                 fit.residuals[i]}));
        }
        art.add_table(std::move(pts));
    }
    doc["params_used"] = ordered_json{{"gamma_ns", params.gamma_ns},
                                      {"gamma_dephase_ns", params.gamma_dephase_ns},
                                      {"gamma_sd_ns", params.gamma_sd_ns},
                                      {"tau_c_us", params.tau_c_us}};

    Table curve{"curve", {"delay_us", "visibility"}, {}};
    for (double delay : cfg.delays.delays_us) {
        curve.rows.push_back(
            ordered_json::array({delay, emitter::indistinguishability(params, delay)}));
    }
    art.add_table(std::move(curve));
}

void run_budget(const ScenarioConfig& cfg, ArtifactSet& art) {
    auto chain = budget::chain_efficiency(cfg.stages);
    ordered_json& doc = art.doc();
    doc["product"] = chain.product;
    doc["sigma"] = chain.sigma;

    double source_side = 1.0;
    std::optional<double> detector_value;
    for (const auto& stage : cfg.stages) {
        if (stage.name == "detector") {
            detector_value = stage.value;
        } else {
            source_side *= stage.value;
        }
    }
    doc["source_side_product"] = source_side;
    if (detector_value) {
        auto threshold = budget::threshold_check(source_side, *detector_value);
        doc["threshold"] = ordered_json{{"eta_source", threshold.eta_source},
                                        {"eta_detector", threshold.eta_detector},
                                        {"product", threshold.product},
                                        {"source_margin", threshold.source_margin},
                                        {"product_margin", threshold.product_margin},
                                        {"source_above", threshold.source_above},
                                        {"product_above", threshold.product_above}};
    }

    Table table{"stages", {"name", "value", "sigma", "cumulative"}, {}};
    for (std::size_t i = 0; i < cfg.stages.size(); ++i) {
        table.rows.push_back(ordered_json::array({cfg.stages[i].name, cfg.stages[i].value,
                                                  cfg.stages[i].sigma, chain.cumulative[i]}));
    }
    art.add_table(std::move(table));
}

void run_dbr(const ScenarioConfig& cfg, ArtifactSet& art) {
    budget::DbrStack stack{cfg.dbr.n_ambient,   cfg.dbr.n_high, cfg.dbr.n_low,
                           cfg.dbr.n_substrate, cfg.dbr.pairs,  cfg.dbr.design_wavelength_nm};
    ordered_json& doc = art.doc();
    doc["r_at_design"] = budget::dbr_reflectivity(stack, cfg.dbr.design_wavelength_nm);
    doc["stack"] = ordered_json{{"n_ambient", stack.n_ambient},
                                {"n_high", stack.n_high},
                                {"n_low", stack.n_low},
                                {"n_substrate", stack.n_substrate},
                                {"pairs", stack.pairs},
                                {"design_wavelength_nm", stack.design_wavelength_nm}};

    Table table{"sweep", {"wavelength_nm", "reflectivity"}, {}};
    const std::uint32_t n = cfg.dbr.sweep_points;
    for (std::uint32_t i = 0; i < n; ++i) {
        double wl = cfg.dbr.sweep_from_nm +
                    (cfg.dbr.sweep_to_nm - cfg.dbr.sweep_from_nm) *
                        (n > 1 ? static_cast<double>(i) / static_cast<double>(n - 1) : 0.0);
        table.rows.push_back(ordered_json::array({wl, budget::dbr_reflectivity(stack, wl)}));
    }
    art.add_table(std::move(table));
}

void run_threshold(const ScenarioConfig& cfg, ArtifactSet& art) {
    auto report = budget::threshold_check(cfg.threshold.eta_source, cfg.threshold.eta_detector);
    ordered_json& doc = art.doc();
    doc["eta_source"] = report.eta_source;
    doc["eta_detector"] = report.eta_detector;
    doc["product"] = report.product;
    doc["source_margin"] = report.source_margin;
    doc["product_margin"] = report.product_margin;
    doc["source_above"] = report.source_above;
    doc["product_above"] = report.product_above;
}

}  // namespace

void run(const config::ScenarioConfig& cfg) {
    if (cfg.name.empty()) throw ConfigError("no scenario selected");
    auto violations = config::validate(cfg);
    if (!violations.empty()) {
        std::string message = "configuration rejected:";
        for (const auto& v : violations) {
            message += "\n  ";
            message += v;
        }
        throw PreconditionError(message);
    }

    ArtifactSet art(cfg);
    if (cfg.name == "rabi") {
        run_rabi(cfg, art);
    } else if (cfg.name == "purity-sweep") {
        run_purity_sweep(cfg, art);
    } else if (cfg.name == "squeezing") {
        run_squeezing(cfg, art);
    } else if (cfg.name == "consecutive") {
        run_consecutive(cfg, art);
    } else if (cfg.name == "hbt") {
        run_hbt(cfg, art);
    } else if (cfg.name == "hom") {
        run_hom(cfg, art);
    } else if (cfg.name == "delay-hom") {
        run_delay_hom(cfg, art);
    } else if (cfg.name == "budget") {
        run_budget(cfg, art);
    } else if (cfg.name == "dbr") {
        run_dbr(cfg, art);
    } else if (cfg.name == "threshold") {
        run_threshold(cfg, art);
    } else {
        throw ConfigError("unknown scenario: " + cfg.name);
    }
    art.write();
}

}  // namespace sps::scenario
