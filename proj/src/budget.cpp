#include "sps/budget.hpp"

#include <cmath>
#include <complex>

#include "sps/errors.hpp"
#include "sps/units.hpp"

namespace sps::budget {

EfficiencyEstimate system_efficiency(Measured counts_per_s, Measured rep_rate_hz,
                                     Measured detector_efficiency) {
    if (!(counts_per_s.value > 0.0)) throw PreconditionError("count rate must be positive");
    if (!(rep_rate_hz.value > 0.0)) throw PreconditionError("rep rate must be positive");
    if (!(detector_efficiency.value > 0.0 && detector_efficiency.value <= 1.0))
        throw PreconditionError("detector efficiency must lie in (0, 1]");
    for (const auto& m : {counts_per_s, rep_rate_hz, detector_efficiency})
        if (m.sigma < 0.0) throw PreconditionError("uncertainties must be >= 0");

    EfficiencyEstimate est;
    est.eta.value = counts_per_s.value / (rep_rate_hz.value * detector_efficiency.value);
    const double rel2 = std::pow(counts_per_s.sigma / counts_per_s.value, 2) +
                        std::pow(rep_rate_hz.sigma / rep_rate_hz.value, 2) +
                        std::pow(detector_efficiency.sigma / detector_efficiency.value, 2);
    est.eta.sigma = est.eta.value * std::sqrt(rel2);
    est.physical = est.eta.value <= 1.0;
    return est;
}

ChainResult chain_efficiency(std::span<const BudgetStage> stages) {
    if (stages.empty()) throw PreconditionError("efficiency chain needs at least one stage");

    ChainResult res;
    res.product = 1.0;
    double rel2 = 0.0;
    for (const auto& s : stages) {
        if (!(s.value > 0.0 && s.value <= 1.0))
            throw PreconditionError("stage '" + s.name + "' efficiency must lie in (0, 1], got " +
                                    std::to_string(s.value));
        if (s.sigma < 0.0)
            throw PreconditionError("stage '" + s.name + "' uncertainty must be >= 0");
        res.product *= s.value;
        res.cumulative.push_back(res.product);
        rel2 += std::pow(s.sigma / s.value, 2);
    }
    res.sigma = res.product * std::sqrt(rel2);
    return res;
}

ThresholdReport threshold_check(double eta_source, double eta_detector) {
    if (!(eta_source > 0.0 && eta_source <= 1.0))
        throw PreconditionError("source efficiency must lie in (0, 1]");
    if (!(eta_detector > 0.0 && eta_detector <= 1.0))
        throw PreconditionError("detector efficiency must lie in (0, 1]");

    constexpr double kThreshold = 2.0 / 3.0;
    ThresholdReport rep;
    rep.eta_source = eta_source;
    rep.eta_detector = eta_detector;
    rep.product = eta_source * eta_detector;
    rep.source_margin = eta_source - kThreshold;
    rep.product_margin = rep.product - kThreshold;
    rep.source_above = rep.source_margin > 0.0;
    rep.product_above = rep.product_margin > 0.0;
    return rep;
}

RhoReport rho_report(std::optional<double> sigma_ratio, std::optional<double> fitted_rho,
                     std::optional<double> detector_efficiency) {
    if (!sigma_ratio && !fitted_rho)
        throw PreconditionError("need a squeezing ratio or a fitted run base");

    RhoReport rep;
    if (sigma_ratio) {
        if (!(*sigma_ratio > 0.0)) throw PreconditionError("sigma ratio must be positive");
        if (*sigma_ratio > 1.0) {
            rep.note = "sigma ratio above 1: super-Poissonian counts, no efficiency inferred "
                       "from squeezing";
        } else {
            rep.rho_from_ratio = 1.0 - *sigma_ratio * *sigma_ratio;
        }
    }
    if (fitted_rho) {
        if (!(*fitted_rho > 0.0 && *fitted_rho < 1.0))
            throw PreconditionError("fitted run base must lie in (0, 1)");
        rep.rho_from_runs = *fitted_rho;
    }
    if (rep.rho_from_ratio && rep.rho_from_runs)
        rep.consistency_gap = std::abs(*rep.rho_from_ratio - *rep.rho_from_runs);

    if (detector_efficiency) {
        if (!(*detector_efficiency > 0.0 && *detector_efficiency <= 1.0))
            throw PreconditionError("detector efficiency must lie in (0, 1]");
        const std::optional<double> rho =
            rep.rho_from_ratio ? rep.rho_from_ratio : rep.rho_from_runs;
        if (rho) rep.source_efficiency = *rho / *detector_efficiency;
    }
    return rep;
}

double dbr_reflectivity(const DbrStack& stack, double wavelength_nm) {
    if (!(stack.n_ambient > 0.0 && stack.n_high > 0.0 && stack.n_low > 0.0 &&
          stack.n_substrate > 0.0))
        throw PreconditionError("refractive indices must be positive");
    if (!(stack.design_wavelength_nm > 0.0))
        throw PreconditionError("design wavelength must be positive");
    if (!(wavelength_nm > 0.0)) throw PreconditionError("probe wavelength must be positive");

    const double doubled = 2.0 * stack.pairs;
    const auto n_layers = static_cast<long long>(std::llround(doubled));
    if (n_layers < 1 || std::abs(doubled - static_cast<double>(n_layers)) > 1e-9)
        throw PreconditionError("pairs must be a positive multiple of 0.5");

    // Quarter-wave layers: optical thickness lambda0/4, so the phase at the
    // probe wavelength is (pi/2) * (lambda0 / lambda).
    const double delta = 0.5 * kPi * stack.design_wavelength_nm / wavelength_nm;
    const double c = std::cos(delta);
    const double s = std::sin(delta);
    const std::complex<double> i(0.0, 1.0);

    // Characteristic matrix product, first layer (high index) adjacent to the
    // ambient medium.
    std::complex<double> m11 = 1.0, m12 = 0.0, m21 = 0.0, m22 = 1.0;
    for (long long layer = 0; layer < n_layers; ++layer) {
        const double n = layer % 2 == 0 ? stack.n_high : stack.n_low;
        const std::complex<double> a11 = c, a12 = i * s / n;
        const std::complex<double> a21 = i * n * s, a22 = c;
        const std::complex<double> t11 = m11 * a11 + m12 * a21;
        const std::complex<double> t12 = m11 * a12 + m12 * a22;
        const std::complex<double> t21 = m21 * a11 + m22 * a21;
        const std::complex<double> t22 = m21 * a12 + m22 * a22;
        m11 = t11;
        m12 = t12;
        m21 = t21;
        m22 = t22;
    }

    const double na = stack.n_ambient;
    const double ns = stack.n_substrate;
    const std::complex<double> num = na * (m11 + m12 * ns) - (m21 + m22 * ns);
    const std::complex<double> den = na * (m11 + m12 * ns) + (m21 + m22 * ns);
    return std::norm(num / den);
}

}  // namespace sps::budget
