#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sps::budget {

// A value with a one-sigma uncertainty; sigma 0 marks an exact input.
struct Measured {
    double value = 0.0;
    double sigma = 0.0;
};

// counts_per_s / (rep_rate_hz * detector_efficiency) with first-order
// propagation of the independent input uncertainties. physical is false when
// the estimate exceeds 1.
struct EfficiencyEstimate {
    Measured eta;
    bool physical = false;
};

EfficiencyEstimate system_efficiency(Measured counts_per_s, Measured rep_rate_hz,
                                     Measured detector_efficiency);

// One multiplicative stage of the efficiency chain.
struct BudgetStage {
    std::string name;
    double value = 0.0;
    double sigma = 0.0;
};

struct ChainResult {
    double product = 0.0;
    double sigma = 0.0;              // first-order, stages independent
    std::vector<double> cumulative;  // running product after each stage
};

ChainResult chain_efficiency(std::span<const BudgetStage> stages);

// Compares source efficiency and source-times-detector product against the
// loss-tolerance threshold of 2/3.
struct ThresholdReport {
    double eta_source = 0.0;
    double eta_detector = 0.0;
    double product = 0.0;
    double source_margin = 0.0;   // eta_source - 2/3
    double product_margin = 0.0;  // product - 2/3
    bool source_above = false;
    bool product_above = false;
};

ThresholdReport threshold_check(double eta_source, double eta_detector);

// Overall efficiency inferred from intensity statistics. The squeezing route
// uses rho = 1 - ratio^2; a ratio above 1 is super-Poissonian and yields no
// estimate. The run-length route takes the fitted geometric base directly.
// When both are present the report carries their gap; source_efficiency
// divides out the detector from whichever estimate is available, preferring
// the squeezing route.
struct RhoReport {
    std::optional<double> rho_from_ratio;
    std::optional<double> rho_from_runs;
    std::optional<double> consistency_gap;
    std::optional<double> source_efficiency;
    std::string note;
};

RhoReport rho_report(std::optional<double> sigma_ratio, std::optional<double> fitted_rho,
                     std::optional<double> detector_efficiency);

// Quarter-wave Bragg stack between an ambient medium and a substrate. pairs
// counts high/low index pairs starting from the ambient side; a trailing .5
// appends one extra high-index layer. Layers are quarter-wave at the design
// wavelength.
struct DbrStack {
    double n_ambient = 1.0;
    double n_high = 0.0;
    double n_low = 0.0;
    double n_substrate = 0.0;
    double pairs = 0.0;
    double design_wavelength_nm = 0.0;
};

// Normal-incidence intensity reflectivity at the probe wavelength via 2x2
// characteristic matrices.
double dbr_reflectivity(const DbrStack& stack, double wavelength_nm);

}  // namespace sps::budget
