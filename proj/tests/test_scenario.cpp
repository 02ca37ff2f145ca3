#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sps/config.hpp"
#include "sps/errors.hpp"
#include "sps/scenario.hpp"

using namespace sps;
using config::ScenarioConfig;

namespace {

namespace fs = std::filesystem;

fs::path fresh_dir(const std::string& tag) {
    auto dir = fs::temp_directory_path() / ("sps_scenario_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ScenarioConfig small_config(const std::string& name, const fs::path& out,
                            const std::string& extra = "", const std::string& format = "csv") {
    std::string text =
        "[scenario]\n"
        "name = " + name + "\n"
        "out_dir = " + out.string() + "\n"
        "format = " + format + "\n"
        "[pulse]\n"
        "widths_ghz = 69\n"
        "[emitter]\n"
        "n_trajectories = 300\n"
        "[rabi]\n"
        "n_points = 9\n"
        "[train]\n"
        "rep_rate_mhz = 25\n"
        "pick_factor = 1\n"
        "n_pulses = 50000\n"
        "[hom]\n"
        "n_pulses = 20000\n"
        "[runs]\n"
        "n_pulses = 200000\n"
        "[dbr]\n"
        "sweep_points = 11\n" + extra;
    return ScenarioConfig::from(config::parse_ini(text, "<test>"));
}

}  // namespace

TEST_CASE("every scenario writes its artifacts with provenance") {
    const std::vector<std::pair<std::string, std::vector<std::string>>> expected = {
        {"rabi", {"rabi_curve.csv", "rabi_summary.json"}},
        {"purity-sweep", {"purity_sweep_points.csv", "purity_sweep_summary.json"}},
        {"squeezing", {"squeezing_counts.csv", "squeezing_summary.json"}},
        {"consecutive", {"consecutive_runs.csv", "consecutive_summary.json"}},
        {"hbt", {"hbt_histogram.csv", "hbt_summary.json"}},
        {"hom", {"hom_histograms.csv", "hom_summary.json"}},
        {"delay-hom",
         {"delay_hom_curve.csv", "delay_hom_fit_points.csv", "delay_hom_summary.json"}},
        {"budget", {"budget_stages.csv", "budget_summary.json"}},
        {"dbr", {"dbr_sweep.csv", "dbr_summary.json"}},
        {"threshold", {"threshold_summary.json"}},
    };

    for (const auto& [name, files] : expected) {
        CAPTURE(name);
        auto dir = fresh_dir("each_" + name);
        std::string extra;
        if (name == "hbt") {
            extra = "[source]\nkind = pn\npn = 0.020046, 0.969908, 0.010046\n"
                    "[loss]\ntransmission = 0.5652\n";
        }
        auto cfg = small_config(name, dir, extra);
        scenario::run(cfg);
        for (const auto& file : files) {
            CAPTURE(file);
            CHECK(fs::exists(dir / file));
        }

        // CSV artifacts begin with the provenance line; the summary carries
        // the same identity block.
        for (const auto& file : files) {
            const auto text = read_file(dir / file);
            if (file.ends_with(".csv")) {
                CHECK(text.rfind("# scenario=" + name + " seed=", 0) == 0);
            } else {
                auto doc = nlohmann::json::parse(text);
                CHECK(doc["provenance"]["scenario"] == name);
                CHECK(doc["provenance"]["seed"] == cfg.seed);
                CHECK(doc["provenance"]["version"] == "0.1.0");
                CHECK(doc["provenance"]["config_digest"].get<std::string>().size() == 16);
            }
        }
    }
}

TEST_CASE("json format embeds the tables in one document") {
    auto dir = fresh_dir("json_mode");
    auto cfg = small_config("dbr", dir, "", "json");
    scenario::run(cfg);
    auto doc = nlohmann::json::parse(read_file(dir / "dbr.json"));
    CHECK(doc.contains("provenance"));
    REQUIRE(doc.contains("tables"));
    REQUIRE(doc["tables"].contains("sweep"));
    CHECK(doc["tables"]["sweep"]["columns"].size() == 2);
    CHECK(doc["tables"]["sweep"]["rows"].size() == 11);
    CHECK(!fs::exists(dir / "dbr_sweep.csv"));
}

TEST_CASE("reruns with the same seed are byte-identical") {
    auto dir = fresh_dir("rerun");
    scenario::run(small_config("consecutive", dir));
    const auto first_runs = read_file(dir / "consecutive_runs.csv");
    const auto first_summary = read_file(dir / "consecutive_summary.json");
    scenario::run(small_config("consecutive", dir));
    CHECK(read_file(dir / "consecutive_runs.csv") == first_runs);
    CHECK(read_file(dir / "consecutive_summary.json") == first_summary);

    auto dir_c = fresh_dir("rerun_c");
    auto dir_d = fresh_dir("rerun_d");
    scenario::run(small_config("squeezing", dir_c));
    scenario::run(small_config("squeezing", dir_d, "[scenario]\nseed = 777\n"));
    auto same = nlohmann::json::parse(read_file(dir_c / "squeezing_summary.json"));
    auto reseeded = nlohmann::json::parse(read_file(dir_d / "squeezing_summary.json"));
    CHECK(same["stream_digest"] != reseeded["stream_digest"]);
}

TEST_CASE("squeezing artifacts carry the statistics pipeline") {
    auto dir = fresh_dir("squeezing_doc");
    scenario::run(small_config("squeezing", dir));
    auto doc = nlohmann::json::parse(read_file(dir / "squeezing_summary.json"));
    CHECK(doc["pulses_per_bin"] == 25);
    CHECK(doc["pulses_per_bin_is_exact"] == true);
    CHECK(doc["n_bins"] == 2000);
    const double ratio = doc["ratio"];
    CHECK(ratio > 0.5);
    CHECK(ratio < 0.8);
    CHECK(doc.contains("first_lens"));
    const double db_fl = doc["first_lens"]["predicted_squeezing_db"];
    CHECK(db_fl > 2.0);
    CHECK(db_fl < 6.0);
}

TEST_CASE("consecutive artifacts extrapolate long runs") {
    auto dir = fresh_dir("consecutive_doc");
    scenario::run(small_config("consecutive", dir));
    auto doc = nlohmann::json::parse(read_file(dir / "consecutive_summary.json"));
    CHECK(doc["fit_valid"] == true);
    const double fitted = doc["fitted_rho"];
    CHECK(fitted == doctest::Approx(0.5652).epsilon(0.05));
    CHECK(doc["predicted_40fold_millihz_from_p"].get<double>() > 0.0);
    CHECK(doc["reference_40fold_millihz"] == 1.67);
    CHECK(!doc["note"].get<std::string>().empty());
}

TEST_CASE("delay curve uses the calibrated dephasing model") {
    auto dir = fresh_dir("delay_doc");
    scenario::run(small_config("delay-hom", dir));
    auto doc = nlohmann::json::parse(read_file(dir / "delay_hom_summary.json"));
    CHECK(doc["fit"]["max_abs_residual"].get<double>() <= 0.004);
    CHECK(doc["params_used"]["gamma_ns"] == 19.0);

    const auto curve = read_file(dir / "delay_hom_curve.csv");
    CHECK(curve.find("delay_us,visibility") != std::string::npos);
}

TEST_CASE("scenario rejection paths") {
    auto dir = fresh_dir("reject");
    auto cfg = small_config("squeezing", dir);
    cfg.name = "";
    CHECK_THROWS_AS(scenario::run(cfg), ConfigError);

    auto bad = small_config("squeezing", dir, "[source]\np = 1.5\n");
    CHECK_THROWS_AS(scenario::run(bad), PreconditionError);
}
