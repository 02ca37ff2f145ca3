#include "sps/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "sps/errors.hpp"

namespace sps::config {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

double parse_double(const Entry& e) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(e.value, &pos);
    } catch (const std::exception&) {
        throw ConfigError("bad number for " + e.section + "." + e.key + ": '" + e.value + "'");
    }
    if (pos != e.value.size())
        throw ConfigError("bad number for " + e.section + "." + e.key + ": '" + e.value + "'");
    return v;
}

std::uint64_t parse_u64(const Entry& e) {
    std::size_t pos = 0;
    unsigned long long v = 0;
    if (!e.value.empty() && e.value[0] == '-')
        throw ConfigError("bad integer for " + e.section + "." + e.key + ": '" + e.value + "'");
    try {
        v = std::stoull(e.value, &pos);
    } catch (const std::exception&) {
        throw ConfigError("bad integer for " + e.section + "." + e.key + ": '" + e.value + "'");
    }
    if (pos != e.value.size())
        throw ConfigError("bad integer for " + e.section + "." + e.key + ": '" + e.value + "'");
    return v;
}

std::uint32_t parse_u32(const Entry& e) {
    const std::uint64_t v = parse_u64(e);
    if (v > 0xffffffffULL)
        throw ConfigError("value too large for " + e.section + "." + e.key);
    return static_cast<std::uint32_t>(v);
}

bool parse_bool(const Entry& e) {
    if (e.value == "true" || e.value == "1" || e.value == "yes") return true;
    if (e.value == "false" || e.value == "0" || e.value == "no") return false;
    throw ConfigError("bad boolean for " + e.section + "." + e.key + ": '" + e.value + "'");
}

std::vector<double> parse_double_list(const Entry& e) {
    std::vector<double> out;
    std::stringstream ss(e.value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty())
            throw ConfigError("empty element in list " + e.section + "." + e.key);
        std::size_t pos = 0;
        try {
            out.push_back(std::stod(item, &pos));
        } catch (const std::exception&) {
            throw ConfigError("bad list element for " + e.section + "." + e.key + ": '" + item +
                              "'");
        }
        if (pos != item.size())
            throw ConfigError("bad list element for " + e.section + "." + e.key + ": '" + item +
                              "'");
    }
    if (out.empty()) throw ConfigError("empty list for " + e.section + "." + e.key);
    return out;
}

// "delay:visibility,delay:visibility,..."
std::vector<emitter::DephasingFitPoint> parse_fit_points(const Entry& e) {
    std::vector<emitter::DephasingFitPoint> out;
    std::stringstream ss(e.value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        const auto colon = item.find(':');
        if (colon == std::string::npos)
            throw ConfigError("fit point '" + item + "' in " + e.section + "." + e.key +
                              " must be delay:visibility");
        try {
            out.push_back({std::stod(item.substr(0, colon)), std::stod(item.substr(colon + 1))});
        } catch (const std::exception&) {
            throw ConfigError("bad fit point '" + item + "' in " + e.section + "." + e.key);
        }
    }
    if (out.empty()) throw ConfigError("empty fit point list for " + e.section + "." + e.key);
    return out;
}

const std::map<std::string, std::set<std::string>>& known_keys() {
    static const std::map<std::string, std::set<std::string>> table = {
        {"scenario", {"name", "seed", "out_dir", "format"}},
        {"pulse", {"widths_ghz", "width_ghz", "area_rad", "slit_width_ghz", "slit_center_ghz"}},
        {"cavity",
         {"q_factor", "wavelength_nm", "v_mode_offset_ghz", "eta_top", "apply_v_filter",
          "purcell", "drift_halfwidth_nm"}},
        {"emitter",
         {"gamma_ns", "gamma_dephase_ns", "gamma_sd_ns", "tau_c_us", "detuning_ghz",
          "n_trajectories"}},
        {"rabi", {"scale_max", "n_points"}},
        {"train", {"rep_rate_mhz", "pick_factor", "n_pulses"}},
        {"source", {"kind", "p", "pn", "duty_cycle"}},
        {"detector", {"efficiency", "dead_time_ns", "jitter_sigma_ps"}},
        {"loss", {"transmission", "splitter_r"}},
        {"analysis",
         {"bin_us", "coincidence_bin_ps", "window_ns", "peak_halfwidth_ns", "exclude_adjacent"}},
        {"hom", {"m", "g2", "r", "n_pulses", "rep_rate_mhz"}},
        {"delays", {"delays_us", "fit", "fit_points"}},
        {"dbr",
         {"n_ambient", "n_high", "n_low", "n_substrate", "pairs", "design_wavelength_nm",
          "sweep_from_nm", "sweep_to_nm", "sweep_points"}},
        {"threshold", {"eta_source", "eta_detector"}},
        {"runs", {"n_pulses", "reference_40_rate_millihz"}},
        {"stage", {"name", "value", "uncertainty"}},
    };
    return table;
}

}  // namespace

RawConfig parse_ini(const std::string& text, const std::string& source_name) {
    RawConfig raw;
    raw.source = source_name;

    std::string section;
    std::size_t instance = 0;
    std::size_t line_no = 0;
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[') {
            if (t.back() != ']' || t.size() < 3)
                throw ConfigError(source_name + ":" + std::to_string(line_no) +
                                  ": malformed section header '" + t + "'");
            section = trim(t.substr(1, t.size() - 2));
            ++instance;
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError(source_name + ":" + std::to_string(line_no) +
                              ": expected key = value, got '" + t + "'");
        if (section.empty())
            throw ConfigError(source_name + ":" + std::to_string(line_no) +
                              ": key outside any [section]");
        Entry e;
        e.section = section;
        e.key = trim(t.substr(0, eq));
        e.value = trim(t.substr(eq + 1));
        e.section_instance = instance;
        if (e.key.empty())
            throw ConfigError(source_name + ":" + std::to_string(line_no) + ": empty key");
        raw.entries.push_back(std::move(e));
    }
    return raw;
}

RawConfig load_ini(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_ini(ss.str(), path);
}

std::uint64_t config_digest(const RawConfig& raw) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](const std::string& s) {
        for (unsigned char c : s) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
    };
    for (const auto& e : raw.entries) {
        mix(e.section);
        mix(".");
        mix(e.key);
        mix("=");
        mix(e.value);
        mix("\n");
    }
    return h;
}

ScenarioConfig ScenarioConfig::from(const RawConfig& raw) {
    ScenarioConfig cfg;
    cfg.digest = config_digest(raw);

    const auto& table = known_keys();
    std::map<std::size_t, budget::BudgetStage> stage_map;
    bool stages_overridden = false;

    for (const auto& e : raw.entries) {
        const auto sect = table.find(e.section);
        if (sect == table.end())
            throw ConfigError("unknown section [" + e.section + "] in " + raw.source);
        if (sect->second.find(e.key) == sect->second.end())
            throw ConfigError("unknown key " + e.section + "." + e.key + " in " + raw.source);

        if (e.section == "scenario") {
            if (e.key == "name") cfg.name = e.value;
            else if (e.key == "seed") cfg.seed = parse_u64(e);
            else if (e.key == "out_dir") cfg.out_dir = e.value;
            else if (e.key == "format") cfg.format = e.value;
        } else if (e.section == "pulse") {
            if (e.key == "widths_ghz") cfg.pulse.widths_ghz = parse_double_list(e);
            else if (e.key == "width_ghz") cfg.pulse.width_ghz = parse_double(e);
            else if (e.key == "area_rad") cfg.pulse.area_rad = parse_double(e);
            else if (e.key == "slit_width_ghz") cfg.pulse.slit_width_ghz = parse_double(e);
            else if (e.key == "slit_center_ghz") cfg.pulse.slit_center_ghz = parse_double(e);
        } else if (e.section == "cavity") {
            if (e.key == "q_factor") cfg.cavity.q_factor = parse_double(e);
            else if (e.key == "wavelength_nm") cfg.cavity.wavelength_nm = parse_double(e);
            else if (e.key == "v_mode_offset_ghz") cfg.cavity.v_mode_offset_ghz = parse_double(e);
            else if (e.key == "eta_top") cfg.cavity.eta_top = parse_double(e);
            else if (e.key == "apply_v_filter") cfg.cavity.apply_v_filter = parse_bool(e);
            else if (e.key == "purcell") cfg.cavity.purcell = parse_double(e);
            else if (e.key == "drift_halfwidth_nm") cfg.cavity.drift_halfwidth_nm = parse_double(e);
        } else if (e.section == "emitter") {
            if (e.key == "gamma_ns") cfg.emitter_params.gamma_ns = parse_double(e);
            else if (e.key == "gamma_dephase_ns") cfg.emitter_params.gamma_dephase_ns = parse_double(e);
            else if (e.key == "gamma_sd_ns") cfg.emitter_params.gamma_sd_ns = parse_double(e);
            else if (e.key == "tau_c_us") cfg.emitter_params.tau_c_us = parse_double(e);
            else if (e.key == "detuning_ghz") cfg.emitter_params.detuning_ghz = parse_double(e);
            else if (e.key == "n_trajectories") cfg.n_trajectories = parse_u64(e);
        } else if (e.section == "rabi") {
            if (e.key == "scale_max") cfg.rabi.scale_max = parse_double(e);
            else if (e.key == "n_points") cfg.rabi.n_points = parse_u32(e);
        } else if (e.section == "train") {
            if (e.key == "rep_rate_mhz") cfg.train.rep_rate_mhz = parse_double(e);
            else if (e.key == "pick_factor") cfg.train.pick_factor = parse_u32(e);
            else if (e.key == "n_pulses") cfg.train.n_pulses = parse_u64(e);
        } else if (e.section == "source") {
            if (e.key == "kind") cfg.source.kind = e.value;
            else if (e.key == "p") cfg.source.p = parse_double(e);
            else if (e.key == "pn") cfg.source.pn = parse_double_list(e);
            else if (e.key == "duty_cycle") cfg.source.duty_cycle = parse_double(e);
        } else if (e.section == "detector") {
            if (e.key == "efficiency") cfg.detector.efficiency = parse_double(e);
            else if (e.key == "dead_time_ns") cfg.detector.dead_time_ns = parse_double(e);
            else if (e.key == "jitter_sigma_ps") cfg.detector.jitter_sigma_ps = parse_double(e);
        } else if (e.section == "loss") {
            if (e.key == "transmission") cfg.loss.transmission = parse_double(e);
            else if (e.key == "splitter_r") cfg.loss.splitter_r = parse_double(e);
        } else if (e.section == "analysis") {
            if (e.key == "bin_us") cfg.analysis.bin_us = parse_double(e);
            else if (e.key == "coincidence_bin_ps") cfg.analysis.coincidence_bin_ps = parse_double(e);
            else if (e.key == "window_ns") cfg.analysis.window_ns = parse_double(e);
            else if (e.key == "peak_halfwidth_ns") cfg.analysis.peak_halfwidth_ns = parse_double(e);
            else if (e.key == "exclude_adjacent") cfg.analysis.exclude_adjacent = parse_u32(e);
        } else if (e.section == "hom") {
            if (e.key == "m") cfg.hom.m = parse_double(e);
            else if (e.key == "g2") cfg.hom.g2 = parse_double(e);
            else if (e.key == "r") cfg.hom.r = parse_double(e);
            else if (e.key == "n_pulses") cfg.hom.n_pulses = parse_u64(e);
            else if (e.key == "rep_rate_mhz") cfg.hom.rep_rate_mhz = parse_double(e);
        } else if (e.section == "delays") {
            if (e.key == "delays_us") cfg.delays.delays_us = parse_double_list(e);
            else if (e.key == "fit") cfg.delays.fit = parse_bool(e);
            else if (e.key == "fit_points") cfg.delays.fit_points = parse_fit_points(e);
        } else if (e.section == "dbr") {
            if (e.key == "n_ambient") cfg.dbr.n_ambient = parse_double(e);
            else if (e.key == "n_high") cfg.dbr.n_high = parse_double(e);
            else if (e.key == "n_low") cfg.dbr.n_low = parse_double(e);
            else if (e.key == "n_substrate") cfg.dbr.n_substrate = parse_double(e);
            else if (e.key == "pairs") cfg.dbr.pairs = parse_double(e);
            else if (e.key == "design_wavelength_nm") cfg.dbr.design_wavelength_nm = parse_double(e);
            else if (e.key == "sweep_from_nm") cfg.dbr.sweep_from_nm = parse_double(e);
            else if (e.key == "sweep_to_nm") cfg.dbr.sweep_to_nm = parse_double(e);
            else if (e.key == "sweep_points") cfg.dbr.sweep_points = parse_u32(e);
        } else if (e.section == "threshold") {
            if (e.key == "eta_source") cfg.threshold.eta_source = parse_double(e);
            else if (e.key == "eta_detector") cfg.threshold.eta_detector = parse_double(e);
        } else if (e.section == "runs") {
            if (e.key == "n_pulses") cfg.runs.n_pulses = parse_u64(e);
            else if (e.key == "reference_40_rate_millihz")
                cfg.runs.reference_40_rate_millihz = parse_double(e);
        } else if (e.section == "stage") {
            stages_overridden = true;
            auto& stage = stage_map[e.section_instance];
            if (e.key == "name") stage.name = e.value;
            else if (e.key == "value") stage.value = parse_double(e);
            else if (e.key == "uncertainty") stage.sigma = parse_double(e);
        }
    }

    if (stages_overridden) {
        cfg.stages.clear();
        for (auto& [idx, stage] : stage_map) {
            if (stage.name.empty())
                throw ConfigError("a [stage] section is missing its name key");
            cfg.stages.push_back(std::move(stage));
        }
    }

    if (!cfg.name.empty() &&
        std::find(kScenarioNames.begin(), kScenarioNames.end(), cfg.name) == kScenarioNames.end())
        throw ConfigError("unknown scenario '" + cfg.name + "'");
    if (cfg.format != "csv" && cfg.format != "json")
        throw ConfigError("format must be csv or json, got '" + cfg.format + "'");
    if (cfg.source.kind != "bernoulli" && cfg.source.kind != "pn")
        throw ConfigError("source kind must be bernoulli or pn, got '" + cfg.source.kind + "'");
    return cfg;
}

std::vector<std::string> validate(const ScenarioConfig& cfg) {
    std::vector<std::string> v;
    auto check = [&v](bool ok, const std::string& msg) {
        if (!ok) v.push_back(msg);
    };

    for (double w : cfg.pulse.widths_ghz)
        check(w >= 20.0 && w <= 200.0,
              "pulse.widths_ghz: width " + std::to_string(w) + " outside [20, 200] GHz");
    check(cfg.pulse.width_ghz >= 20.0 && cfg.pulse.width_ghz <= 200.0,
          "pulse.width_ghz outside [20, 200] GHz");
    check(cfg.pulse.area_rad >= 0.0, "pulse.area_rad must be >= 0");
    check(cfg.pulse.slit_width_ghz >= 0.0, "pulse.slit_width_ghz must be >= 0");

    check(cfg.cavity.q_factor > 0.0, "cavity.q_factor must be positive");
    check(cfg.cavity.wavelength_nm > 0.0, "cavity.wavelength_nm must be positive");
    check(cfg.cavity.eta_top > 0.0 && cfg.cavity.eta_top <= 1.0,
          "cavity.eta_top must lie in (0, 1]");
    check(cfg.cavity.purcell > 0.0, "cavity.purcell must be positive");
    check(cfg.cavity.drift_halfwidth_nm > 0.0, "cavity.drift_halfwidth_nm must be positive");

    check(cfg.emitter_params.gamma_ns > 0.0, "emitter.gamma_ns must be positive");
    check(cfg.emitter_params.gamma_dephase_ns >= 0.0, "emitter.gamma_dephase_ns must be >= 0");
    check(cfg.emitter_params.gamma_sd_ns >= 0.0, "emitter.gamma_sd_ns must be >= 0");
    check(cfg.emitter_params.tau_c_us > 0.0, "emitter.tau_c_us must be positive");
    check(cfg.n_trajectories >= 100, "emitter.n_trajectories must be at least 100");

    check(cfg.rabi.scale_max > 0.0, "rabi.scale_max must be positive");
    check(cfg.rabi.n_points >= 8, "rabi.n_points must be at least 8");

    check(cfg.train.rep_rate_mhz > 0.0, "train.rep_rate_mhz must be positive");
    check(cfg.train.pick_factor >= 1, "train.pick_factor must be >= 1");
    check(cfg.train.n_pulses >= 1, "train.n_pulses must be >= 1");

    check(cfg.source.p >= 0.0 && cfg.source.p <= 1.0, "source.p must lie in [0, 1]");
    check(cfg.source.duty_cycle > 0.0 && cfg.source.duty_cycle <= 1.0,
          "source.duty_cycle must lie in (0, 1]");
    if (cfg.source.kind == "pn") {
        double total = 0.0;
        bool nonneg = true;
        for (double p : cfg.source.pn) {
            total += p;
            nonneg = nonneg && p >= 0.0;
        }
        check(!cfg.source.pn.empty(), "source.pn must be provided for kind=pn");
        if (!cfg.source.pn.empty()) {
            check(nonneg, "source.pn entries must be >= 0");
            check(std::abs(total - 1.0) <= 1e-9, "source.pn must sum to 1");
        }
    }

    check(cfg.detector.efficiency >= 0.0 && cfg.detector.efficiency <= 1.0,
          "detector.efficiency must lie in [0, 1]");
    check(cfg.detector.dead_time_ns >= 0.0, "detector.dead_time_ns must be >= 0");
    check(cfg.detector.jitter_sigma_ps >= 0.0, "detector.jitter_sigma_ps must be >= 0");

    check(cfg.loss.transmission >= 0.0 && cfg.loss.transmission <= 1.0,
          "loss.transmission must lie in [0, 1]");
    check(cfg.loss.splitter_r > 0.0 && cfg.loss.splitter_r < 1.0,
          "loss.splitter_r must lie in (0, 1)");

    check(cfg.analysis.bin_us > 0.0, "analysis.bin_us must be positive");
    check(cfg.analysis.coincidence_bin_ps > 0.0, "analysis.coincidence_bin_ps must be positive");
    check(cfg.analysis.window_ns > 0.0, "analysis.window_ns must be positive");
    check(cfg.analysis.peak_halfwidth_ns > 0.0, "analysis.peak_halfwidth_ns must be positive");

    check(cfg.hom.m >= 0.0 && cfg.hom.m <= 1.0, "hom.m must lie in [0, 1]");
    check(cfg.hom.g2 >= 0.0 && cfg.hom.g2 < 1.0, "hom.g2 must lie in [0, 1)");
    check(cfg.hom.r > 0.0 && cfg.hom.r < 1.0, "hom.r must lie in (0, 1)");
    check(cfg.hom.n_pulses >= 1000, "hom.n_pulses must be at least 1000");
    check(cfg.hom.rep_rate_mhz > 0.0, "hom.rep_rate_mhz must be positive");

    for (double d : cfg.delays.delays_us)
        check(d >= 0.0, "delays.delays_us entries must be >= 0");
    if (cfg.delays.fit) {
        check(cfg.delays.fit_points.size() >= 3,
              "delays.fit_points needs at least 3 points for a 3-parameter fit");
        for (const auto& p : cfg.delays.fit_points) {
            check(p.delay_us > 0.0, "delays.fit_points delays must be positive");
            check(p.visibility > 0.0 && p.visibility <= 1.0,
                  "delays.fit_points visibilities must lie in (0, 1]");
        }
    }

    check(cfg.dbr.n_ambient > 0.0 && cfg.dbr.n_high > 0.0 && cfg.dbr.n_low > 0.0 &&
              cfg.dbr.n_substrate > 0.0,
          "dbr refractive indices must be positive");
    {
        const double doubled = 2.0 * cfg.dbr.pairs;
        check(cfg.dbr.pairs > 0.0 && std::abs(doubled - std::round(doubled)) <= 1e-9,
              "dbr.pairs must be a positive multiple of 0.5");
    }
    check(cfg.dbr.design_wavelength_nm > 0.0, "dbr.design_wavelength_nm must be positive");
    check(cfg.dbr.sweep_from_nm > 0.0 && cfg.dbr.sweep_to_nm > cfg.dbr.sweep_from_nm,
          "dbr sweep range must be positive and increasing");
    check(cfg.dbr.sweep_points >= 2, "dbr.sweep_points must be at least 2");

    check(cfg.threshold.eta_source > 0.0 && cfg.threshold.eta_source <= 1.0,
          "threshold.eta_source must lie in (0, 1]");
    check(cfg.threshold.eta_detector > 0.0 && cfg.threshold.eta_detector <= 1.0,
          "threshold.eta_detector must lie in (0, 1]");

    check(cfg.runs.n_pulses >= 1000, "runs.n_pulses must be at least 1000");
    check(cfg.runs.reference_40_rate_millihz > 0.0,
          "runs.reference_40_rate_millihz must be positive");

    check(!cfg.stages.empty(), "budget stages must not be empty");
    for (const auto& s : cfg.stages) {
        check(s.value > 0.0 && s.value <= 1.0,
              "stage '" + s.name + "' value must lie in (0, 1]");
        check(s.sigma >= 0.0, "stage '" + s.name + "' uncertainty must be >= 0");
    }

    // The drive grid must resolve the pulse: a pi pulse of width w GHz peaks
    // at Omega ~ area/(sigma_t sqrt(2 pi)); the automatic grid picks
    // dt below both 0.05/Omega_max and 0.02/gamma, which is only possible
    // when the spectral sampling rule dt <= 1/(10 w) leaves room.
    check(cfg.pulse.area_rad <= 12.0,
          "pulse.area_rad above 12 rad: drive grid construction would undersample the "
          "Rabi oscillation");
    return v;
}

}  // namespace sps::config
