#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "sps/pulse.hpp"

namespace sps::emitter {

// Two-level emitter. Rates are given in ns^-1 at this boundary and converted
// to ps^-1 internally. gamma_sd and tau_c describe the slow component of
// dephasing: gamma(tau) = gamma_dephase + gamma_sd * (1 - exp(-tau/tau_c))
// for two emission events separated by tau.
struct EmitterParams {
    double gamma_ns = 19.0;          // radiative decay
    double gamma_dephase_ns = 0.0;   // fast pure dephasing
    double gamma_sd_ns = 0.0;        // additional dephasing at large separation
    double tau_c_us = 1.0;           // correlation time of the slow component
    double detuning_ghz = 0.0;       // drive carrier minus transition frequency

    void validate() const;
};

// Rabi envelope Omega(t) in rad/ps on a uniform grid. The grid must resolve
// both the Rabi period and the decay: dt <= min(0.05/max|Omega|, 0.02/gamma).
struct DriveProfile {
    double t0_ps = 0.0;
    double dt_ps = 0.0;
    std::vector<std::complex<double>> rabi;

    // coupling converts field amplitude to Rabi frequency; with the default 1
    // the pulse's area_rad is inherited unchanged.
    static DriveProfile from_pulse(const PulseField& pulse, double coupling = 1.0);

    DriveProfile scaled(double factor) const;

    std::size_t size() const { return rabi.size(); }
    double time_at(std::size_t i) const { return t0_ps + static_cast<double>(i) * dt_ps; }
    double span_ps() const { return static_cast<double>(rabi.size()) * dt_ps; }
    double area_rad() const;   // integral of |Omega| dt
    double max_rabi() const;   // max |Omega|, rad/ps
};

// Density-matrix integration of the driven two-level system with decay and
// pure dephasing. mean_photons counts emission during the window plus the
// excited population left at the end, which decays radiatively once the
// drive is gone.
struct BlochResult {
    double mean_photons = 0.0;
    std::vector<double> excited_pop_trace;  // rho_ee at each grid point
    double dt_ps = 0.0;
    double max_trace_error = 0.0;           // max |rho_ee + rho_gg - 1|
};

BlochResult bloch_integrate(const DriveProfile& drive, const EmitterParams& e);

// Quantum-jump unravelling of the same master equation. Radiative jumps are
// recorded as photon emissions and reset the emitter to the ground state, so
// re-excitation within one pulse produces multi-photon records. Dephasing
// jumps emit nothing. Residual excited population at the end of the window is
// converted to a delayed emission with an exponential tail.
struct EmissionOutcome {
    std::vector<double> pn;                             // photon-number distribution, index = n
    std::vector<std::vector<double>> jump_records_ps;   // per trajectory, offsets from window start
    std::vector<double> excited_pop_trace;              // ensemble average at each grid point
    double dt_ps = 0.0;
    std::uint64_t n_trajectories = 0;
    std::uint64_t seed = 0;

    double mean_photons() const;  // sum n * pn
};

EmissionOutcome mcwf_simulate(const DriveProfile& drive, const EmitterParams& e,
                              std::uint64_t n_trajectories, std::uint64_t seed);

// Normalised pair correlation at zero delay from a photon-number distribution:
// <n(n-1)> / <n>^2.
double g2_from_pn(std::span<const double> pn);

// Multinomial standard error of g2_from_pn for a distribution estimated from
// n_trajectories samples.
double g2_se_from_pn(std::span<const double> pn, std::uint64_t n_trajectories);

// pn, trajectory count and seed as a JSON document; jump records are large
// and only included on request.
std::string emission_json(const EmissionOutcome& outcome, bool include_jump_records = false);

// One point of a pulse-area scan. power_proxy is the envelope energy of the
// scaled drive, so sqrt(power_proxy) is proportional to field amplitude.
struct RabiPoint {
    double scale = 0.0;
    double power_proxy = 0.0;
    double area_rad = 0.0;
    double mean_photons = 0.0;
};

std::vector<RabiPoint> rabi_sweep(const DriveProfile& base, std::span<const double> scales,
                                  const EmitterParams& e);

// Scale factor of the first interior maximum of mean_photons(scale), located
// by a coarse scan up to scan_limit and refined by golden-section search.
double first_rabi_maximum(const DriveProfile& base, const EmitterParams& e,
                          double scan_limit = 2.0);

// Builds the drive for a requested spectral width; lets callers swap in a
// different shaping chain (plain Gaussian, slit-filtered, cavity-filtered).
using ShapingChain = std::function<DriveProfile(double width_ghz)>;

struct PurityPoint {
    double width_ghz = 0.0;
    double pi_scale = 0.0;       // scale factor that maximises emission
    double mean_photons = 0.0;   // at that scale
    double g2 = 0.0;
    double g2_se = 0.0;
};

// For each spectral width: build the drive, find the emission maximum, run the
// jump simulation there and report purity. Widths must lie in [20, 200] GHz.
std::vector<PurityPoint> purity_vs_width(std::span<const double> widths_ghz,
                                         const EmitterParams& e, const ShapingChain& chain,
                                         std::uint64_t n_trajectories, std::uint64_t seed);

// Two-photon interference visibility for emissions separated by delay_us:
// M = gamma / (gamma + 2 gamma(tau)).
double indistinguishability(const EmitterParams& e, double delay_us);

struct DephasingFitPoint {
    double delay_us = 0.0;
    double visibility = 0.0;
};

struct DephasingFit {
    double gamma_dephase_ns = 0.0;
    double gamma_sd_ns = 0.0;
    double tau_c_us = 0.0;
    std::vector<double> residuals;  // model minus data, per input point
    double max_abs_residual = 0.0;
    std::uint32_t outer_iterations = 0;
};

// Calibrates (gamma_dephase, gamma_sd, tau_c) against measured visibilities at
// several delays. Minimises the worst-case residual via iteratively reweighted
// least squares; tau_c is constrained to at most 100 us, beyond which the
// data cannot distinguish saturation times anyway.
DephasingFit fit_dephasing(std::span<const DephasingFitPoint> points, double gamma_ns);

}  // namespace sps::emitter
