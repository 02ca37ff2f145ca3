#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "sps/config.hpp"
#include "sps/errors.hpp"

using namespace sps;
using config::RawConfig;
using config::ScenarioConfig;

namespace {

ScenarioConfig from_text(const std::string& text) {
    return ScenarioConfig::from(config::parse_ini(text, "<test>"));
}

}  // namespace

TEST_CASE("ini subset parses sections, comments and repeated blocks") {
    const std::string text =
        "# comment\n"
        "[scenario]\n"
        "name = rabi\n"
        "seed = 7\n"
        "\n"
        "; another comment\n"
        "[stage]\n"
        "name = first_lens\n"
        "value = 0.8\n"
        "[stage]\n"
        "name = detector\n"
        "value = 0.79\n";
    auto raw = config::parse_ini(text, "<test>");
    REQUIRE(raw.entries.size() == 6);
    CHECK(raw.entries[0].section == "scenario");
    CHECK(raw.entries[0].key == "name");
    CHECK(raw.entries[0].value == "rabi");
    CHECK(raw.entries[2].section == "stage");
    CHECK(raw.entries[2].section_instance != raw.entries[4].section_instance);

    CHECK_THROWS_AS(config::parse_ini("key = 1\n", "<test>"), ConfigError);
    CHECK_THROWS_AS(config::parse_ini("[scenario\nname = rabi\n", "<test>"), ConfigError);
    CHECK_THROWS_AS(config::parse_ini("[scenario]\njust some text\n", "<test>"), ConfigError);
    CHECK_THROWS_AS(config::parse_ini("[scenario]\n= 3\n", "<test>"), ConfigError);
}

TEST_CASE("digest identifies the effective configuration") {
    auto a = config::parse_ini("[scenario]\nname = rabi\n", "<a>");
    auto b = config::parse_ini("[scenario]\nname = rabi\n", "<b>");
    CHECK(config::config_digest(a) == config::config_digest(b));

    auto c = config::parse_ini("[scenario]\nname = hbt\n", "<c>");
    CHECK(config::config_digest(a) != config::config_digest(c));

    RawConfig empty;
    auto cfg = ScenarioConfig::from(empty);
    CHECK(cfg.digest == config::config_digest(empty));
}

TEST_CASE("defaults describe a runnable high-efficiency source") {
    RawConfig empty;
    auto cfg = ScenarioConfig::from(empty);
    CHECK(cfg.name.empty());
    CHECK(cfg.seed == 20260822);
    CHECK(cfg.format == "csv");
    CHECK(cfg.pulse.widths_ghz == std::vector<double>{96.0, 69.0, 46.0});
    CHECK(cfg.emitter_params.gamma_ns == 19.0);
    CHECK(cfg.emitter_params.gamma_dephase_ns == 0.139);
    CHECK(cfg.cavity.q_factor == 8400.0);
    CHECK(cfg.train.rep_rate_mhz == 76.13);
    CHECK(cfg.train.pick_factor == 3);
    CHECK(cfg.source.p == 0.5652);
    CHECK(cfg.stages.size() == 3);
    CHECK(config::validate(cfg).empty());
}

TEST_CASE("typed parsing covers every section") {
    auto cfg = from_text(
        "[scenario]\n"
        "name = purity-sweep\n"
        "seed = 123\n"
        "out_dir = artifacts\n"
        "format = json\n"
        "[pulse]\n"
        "widths_ghz = 96, 69, 46\n"
        "area_rad = 3.1\n"
        "slit_width_ghz = 40\n"
        "[cavity]\n"
        "apply_v_filter = true\n"
        "q_factor = 9000\n"
        "[emitter]\n"
        "gamma_dephase_ns = 0.2\n"
        "n_trajectories = 500\n"
        "[train]\n"
        "rep_rate_mhz = 25\n"
        "pick_factor = 1\n"
        "[source]\n"
        "kind = pn\n"
        "pn = 0.02, 0.97, 0.01\n"
        "[delays]\n"
        "fit_points = 0.0131:0.9856, 0.67:0.985, 1.31:0.970\n"
        "[dbr]\n"
        "pairs = 5.5\n");
    CHECK(cfg.name == "purity-sweep");
    CHECK(cfg.seed == 123);
    CHECK(cfg.out_dir == "artifacts");
    CHECK(cfg.format == "json");
    CHECK(cfg.pulse.widths_ghz.size() == 3);
    CHECK(cfg.pulse.area_rad == 3.1);
    CHECK(cfg.pulse.slit_width_ghz == 40.0);
    CHECK(cfg.cavity.apply_v_filter);
    CHECK(cfg.cavity.q_factor == 9000.0);
    CHECK(cfg.emitter_params.gamma_dephase_ns == 0.2);
    CHECK(cfg.n_trajectories == 500);
    CHECK(cfg.train.rep_rate_mhz == 25.0);
    CHECK(cfg.source.kind == "pn");
    REQUIRE(cfg.source.pn.size() == 3);
    CHECK(cfg.source.pn[1] == 0.97);
    CHECK(cfg.delays.fit_points.size() == 3);
    CHECK(cfg.delays.fit_points[2].visibility == 0.970);
    CHECK(cfg.dbr.pairs == 5.5);
    CHECK(config::validate(cfg).empty());
}

TEST_CASE("stage blocks replace the default chain") {
    auto cfg = from_text(
        "[scenario]\nname = budget\n"
        "[stage]\nname = objective\nvalue = 0.9\nuncertainty = 0.01\n"
        "[stage]\nname = fiber\nvalue = 0.8\n");
    REQUIRE(cfg.stages.size() == 2);
    CHECK(cfg.stages[0].name == "objective");
    CHECK(cfg.stages[0].value == 0.9);
    CHECK(cfg.stages[0].sigma == 0.01);
    CHECK(cfg.stages[1].name == "fiber");

    CHECK_THROWS_AS(from_text("[stage]\nvalue = 0.9\n"), ConfigError);
}

TEST_CASE("later entries win") {
    auto cfg = from_text("[scenario]\nname = rabi\nseed = 1\nseed = 2\n");
    CHECK(cfg.seed == 2);
}

TEST_CASE("unknown names are rejected with context") {
    CHECK_THROWS_AS(from_text("[warp]\nfactor = 9\n"), ConfigError);
    CHECK_THROWS_AS(from_text("[pulse]\nbandwidth = 69\n"), ConfigError);
    CHECK_THROWS_AS(from_text("[scenario]\nname = teleport\n"), ConfigError);
    CHECK_THROWS_AS(from_text("[scenario]\nformat = yaml\n"), ConfigError);
    CHECK_THROWS_AS(from_text("[source]\nkind = thermal\n"), ConfigError);
    CHECK_THROWS_AS(from_text("[pulse]\narea_rad = huge\n"), ConfigError);
    CHECK_THROWS_AS(from_text("[scenario]\nseed = -4\n"), ConfigError);
}

TEST_CASE("validation reports range violations without throwing") {
    auto cfg = from_text("[scenario]\nname = squeezing\n[source]\np = 1.5\n");
    auto violations = config::validate(cfg);
    REQUIRE(violations.size() == 1);
    CHECK(violations[0].find("source.p") != std::string::npos);

    auto multi = from_text(
        "[scenario]\nname = squeezing\n"
        "[pulse]\nwidth_ghz = 10\n"
        "[emitter]\nn_trajectories = 10\n"
        "[loss]\nsplitter_r = 0\n");
    CHECK(config::validate(multi).size() == 3);

    auto pn_bad = from_text("[scenario]\nname = hbt\n[source]\nkind = pn\npn = 0.5, 0.4\n");
    CHECK(!config::validate(pn_bad).empty());

    auto fit_short = from_text("[scenario]\nname = delay-hom\n[delays]\nfit_points = 0.1:0.9\n");
    CHECK(!config::validate(fit_short).empty());
}

TEST_CASE("files load with their path in error messages") {
    namespace fs = std::filesystem;
    const auto path = fs::temp_directory_path() / "sps_cfg_test.ini";
    {
        std::ofstream out(path);
        out << "[scenario]\nname = dbr\n[dbr]\nsweep_points = 21\n";
    }
    auto cfg = ScenarioConfig::from(config::load_ini(path.string()));
    CHECK(cfg.name == "dbr");
    CHECK(cfg.dbr.sweep_points == 21);
    std::remove(path.string().c_str());

    CHECK_THROWS_AS(config::load_ini("/nonexistent/sps.ini"), ConfigError);
}
