#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sps/budget.hpp"
#include "sps/emitter.hpp"
#include "sps/units.hpp"

namespace sps::config {

// One key=value entry. section_instance distinguishes repeated sections
// (e.g. several [stage] blocks) that share a name.
struct Entry {
    std::string section;
    std::string key;
    std::string value;
    std::size_t section_instance = 0;
};

struct RawConfig {
    std::vector<Entry> entries;
    std::string source = "<defaults>";
};

// INI subset: [section] headers, key = value lines, blank lines, and full-line
// comments starting with # or ;. Anything else raises ConfigError with the
// line number.
RawConfig parse_ini(const std::string& text, const std::string& source_name);
RawConfig load_ini(const std::string& path);

// FNV-1a over "section.key=value" lines in file order; identifies the
// effective configuration in artifact provenance headers.
std::uint64_t config_digest(const RawConfig& raw);

inline const std::vector<std::string> kScenarioNames = {
    "rabi",   "purity-sweep", "squeezing", "consecutive", "hbt",
    "hom",    "delay-hom",    "budget",    "dbr",         "threshold"};

// Full typed configuration with defaults for every scenario. Values describe
// a representative high-efficiency cavity-coupled quantum-dot source.
struct ScenarioConfig {
    std::string name;
    std::uint64_t seed = 20260822;
    std::string out_dir = "out";
    std::string format = "csv";  // csv: tables as CSV plus a JSON summary; json: one JSON

    struct Pulse {
        std::vector<double> widths_ghz = {96.0, 69.0, 46.0};
        double width_ghz = 69.0;
        double area_rad = kPi;
        double slit_width_ghz = 0.0;  // 0 disables the slit
        double slit_center_ghz = 0.0;
    } pulse;

    struct Cavity {
        double q_factor = 8400.0;
        double wavelength_nm = 884.5;
        double v_mode_offset_ghz = 83.0;
        double eta_top = 0.939;
        bool apply_v_filter = false;
        double purcell = 18.0;
        double drift_halfwidth_nm = 0.531;
    } cavity;

    emitter::EmitterParams emitter_params{19.0, 0.139, 0.0, 1.0, 0.0};
    std::uint64_t n_trajectories = 20000;

    struct Rabi {
        double scale_max = 1.8;
        std::uint32_t n_points = 60;
    } rabi;

    struct Train {
        double rep_rate_mhz = 76.13;
        std::uint32_t pick_factor = 3;
        std::uint64_t n_pulses = 1000000;
    } train;

    struct Source {
        std::string kind = "bernoulli";  // bernoulli | pn
        double p = 0.5652;
        std::vector<double> pn;  // used when kind == pn
        double duty_cycle = 1.0;
    } source;

    struct Detector {
        double efficiency = 1.0;
        double dead_time_ns = 30.0;
        double jitter_sigma_ps = 0.0;
    } detector;

    struct Loss {
        double transmission = 1.0;
        double splitter_r = 0.5;
    } loss;

    struct Analysis {
        double bin_us = 1.0;
        double coincidence_bin_ps = 100.0;
        double window_ns = 330.0;
        double peak_halfwidth_ns = 5.0;
        std::uint32_t exclude_adjacent = 1;
    } analysis;

    struct Hom {
        double m = 0.9856;
        double g2 = 0.0205;
        double r = 0.45;
        std::uint64_t n_pulses = 1000000;
        double rep_rate_mhz = 76.13;
    } hom;

    struct Delays {
        std::vector<double> delays_us = {0.0131, 0.0394, 0.1, 0.25, 0.5,
                                         0.67,   1.0,    1.31, 2.0, 2.67};
        bool fit = true;
        std::vector<emitter::DephasingFitPoint> fit_points = {
            {0.0131, 0.9856}, {0.67, 0.985}, {1.31, 0.970}, {2.67, 0.959}};
    } delays;

    struct Dbr {
        double n_ambient = 1.0;
        double n_high = 3.54;
        double n_low = 2.95;
        double n_substrate = 3.54;
        double pairs = 30.0;
        double design_wavelength_nm = 890.0;
        double sweep_from_nm = 820.0;
        double sweep_to_nm = 960.0;
        std::uint32_t sweep_points = 281;
    } dbr;

    struct Threshold {
        double eta_source = 0.712;
        double eta_detector = 0.79;
    } threshold;

    struct Runs {
        std::uint64_t n_pulses = 10000000;
        double reference_40_rate_millihz = 1.67;  // observed long-run 40-fold rate
    } runs;

    std::vector<budget::BudgetStage> stages = {
        {"first_lens", 0.8356, 0.014},
        {"collection_optics", 0.8563, 0.02},
        {"detector", 0.79, 0.02},
    };

    std::uint64_t digest = 0;

    // Applies the raw entries over the defaults. Unknown sections or keys,
    // unparsable values, and unknown scenario names raise ConfigError.
    static ScenarioConfig from(const RawConfig& raw);
};

// Range checks mirroring the operation preconditions. Returns one message per
// violation; an empty list means the scenario can run.
std::vector<std::string> validate(const ScenarioConfig& cfg);

}  // namespace sps::config
