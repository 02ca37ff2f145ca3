#include <cstdint>
#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sps/config.hpp"
#include "sps/errors.hpp"
#include "sps/scenario.hpp"

namespace {

// Highest section_instance already present for a section, so command-line
// overrides land in the last block of a repeated section.
std::size_t last_instance(const sps::config::RawConfig& raw, const std::string& section) {
    std::size_t instance = 0;
    for (const auto& e : raw.entries) {
        if (e.section == section) instance = std::max(instance, e.section_instance);
    }
    return instance;
}

void append_override(sps::config::RawConfig& raw, const std::string& spec) {
    auto eq = spec.find('=');
    if (eq == std::string::npos) {
        throw sps::ConfigError("override '" + spec + "' must look like section.key=value");
    }
    std::string path = spec.substr(0, eq);
    std::string value = spec.substr(eq + 1);
    auto dot = path.find('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 == path.size()) {
        throw sps::ConfigError("override '" + spec + "' must look like section.key=value");
    }
    std::string section = path.substr(0, dot);
    std::string key = path.substr(dot + 1);
    raw.entries.push_back({section, key, value, last_instance(raw, section)});
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Single-photon source simulator and analysis toolkit"};
    app.footer("Exit codes: 0 success, 2 configuration error, 3 precondition violation, "
               "4 numerical failure.");

    std::string config_path;
    std::string scenario_name;
    std::string out_dir;
    std::string format;
    std::uint64_t seed = 0;
    bool seed_given = false;
    bool list_scenarios = false;
    std::vector<std::string> overrides;

    app.add_option("-c,--config", config_path, "INI configuration file");
    app.add_option("-s,--scenario", scenario_name, "Scenario to run");
    app.add_option("--seed", seed, "Root seed")->each([&](const std::string&) {
        seed_given = true;
    });
    app.add_option("-o,--out", out_dir, "Output directory");
    app.add_option("-f,--format", format, "Artifact format: csv or json");
    app.add_option("-D,--set", overrides,
                   "Override one configuration value as section.key=value (repeatable)");
    app.add_flag("--list-scenarios", list_scenarios, "Print scenario names and exit");

    CLI11_PARSE(app, argc, argv);

    if (list_scenarios) {
        for (const auto& name : sps::config::kScenarioNames) std::puts(name.c_str());
        return 0;
    }

    try {
        sps::config::RawConfig raw;
        if (!config_path.empty()) raw = sps::config::load_ini(config_path);
        for (const auto& spec : overrides) append_override(raw, spec);
        if (!scenario_name.empty())
            raw.entries.push_back({"scenario", "name", scenario_name, 0});
        if (seed_given)
            raw.entries.push_back({"scenario", "seed", std::to_string(seed), 0});
        if (!out_dir.empty()) raw.entries.push_back({"scenario", "out_dir", out_dir, 0});
        if (!format.empty()) raw.entries.push_back({"scenario", "format", format, 0});

        auto cfg = sps::config::ScenarioConfig::from(raw);
        sps::scenario::run(cfg);
        std::printf("wrote %s artifacts to %s\n", cfg.name.c_str(), cfg.out_dir.c_str());
        return 0;
    } catch (const sps::ConfigError& err) {
        std::fprintf(stderr, "configuration error: %s\n", err.what());
        return 2;
    } catch (const sps::PreconditionError& err) {
        std::fprintf(stderr, "precondition violated: %s\n", err.what());
        return 3;
    } catch (const sps::NumericalError& err) {
        std::fprintf(stderr, "numerical failure: %s\n", err.what());
        return 4;
    } catch (const std::exception& err) {
        std::fprintf(stderr, "error: %s\n", err.what());
        return 4;
    }
}
