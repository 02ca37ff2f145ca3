#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "oracles.hpp"
#include "sps/errors.hpp"
#include "sps/fft.hpp"
#include "sps/optics.hpp"
#include "sps/rng.hpp"
#include "sps/units.hpp"

using namespace sps;

namespace {

double spectral_intensity_fwhm_ghz(const PulseField& pulse) {
    std::vector<std::complex<double>> spec = pulse.samples;
    fft::forward(spec);
    const std::size_t n = spec.size();
    const double peak = std::norm(spec[0]);
    const double half = 0.5 * peak;
    for (std::size_t k = 1; k < n / 2; ++k) {
        const double cur = std::norm(spec[k]);
        if (cur < half) {
            const double prev = std::norm(spec[k - 1]);
            const double frac = (prev - half) / (prev - cur);
            const double f_prev = fft::bin_frequency_ghz(k - 1, n, pulse.dt_ps);
            const double f_cur = fft::bin_frequency_ghz(k, n, pulse.dt_ps);
            return 2.0 * (f_prev + frac * (f_cur - f_prev));
        }
    }
    return 0.0;
}

}  // namespace

TEST_CASE("transform matches the direct DFT and inverts exactly") {
    const std::size_t n = 64;
    CounterRng rng(derive_key(7, 1));
    std::vector<std::complex<double>> data(n);
    for (auto& v : data) v = {rng.u01() - 0.5, rng.u01() - 0.5};

    auto expected = oracle::naive_dft(data, -1);
    auto fwd = data;
    fft::forward(fwd);
    for (std::size_t k = 0; k < n; ++k) {
        CHECK(std::abs(fwd[k] - expected[k]) < 1e-9);
    }

    auto roundtrip = fwd;
    fft::backward(roundtrip);
    for (std::size_t k = 0; k < n; ++k) {
        CHECK(std::abs(roundtrip[k] - data[k]) < 1e-12);
    }
}

TEST_CASE("transform satisfies the energy identity") {
    const std::size_t n = 256;
    CounterRng rng(derive_key(7, 2));
    std::vector<std::complex<double>> data(n);
    double time_energy = 0.0;
    for (auto& v : data) {
        v = {rng.u01() - 0.5, rng.u01() - 0.5};
        time_energy += std::norm(v);
    }
    auto spec = data;
    fft::forward(spec);
    double freq_energy = 0.0;
    for (const auto& v : spec) freq_energy += std::norm(v);
    freq_energy /= static_cast<double>(n);
    CHECK(std::abs(freq_energy - time_energy) <= 1e-9 * time_energy);
}

TEST_CASE("frequency axis covers positive then negative bins") {
    CHECK(fft::bin_frequency_ghz(0, 64, 1.0) == doctest::Approx(0.0));
    CHECK(fft::bin_frequency_ghz(1, 64, 1.0) == doctest::Approx(15.625));
    CHECK(fft::bin_frequency_ghz(63, 64, 1.0) == doctest::Approx(-15.625));
    CHECK(fft::bin_frequency_ghz(32, 64, 1.0) == doctest::Approx(-500.0));
}

TEST_CASE("grid validation rejects bad shapes") {
    CHECK_THROWS_AS(validate_grid(GridSpec{100, 0.1, 0.0}), PreconditionError);
    CHECK_THROWS_AS(validate_grid(GridSpec{32, 0.1, 0.0}), PreconditionError);
    CHECK_THROWS_AS(validate_grid(GridSpec{128, 0.0, 0.0}), PreconditionError);
    CHECK_NOTHROW(validate_grid(GridSpec{128, 0.1, -6.4}));
}

TEST_CASE("Gaussian pulse has the requested area and widths") {
    const double width_ghz = 69.0;
    auto grid = GridSpec::centered(1024, 0.06);
    auto pulse = optics::gaussian_pulse(width_ghz, kPi, grid);

    CHECK(pulse.area() == doctest::Approx(kPi).epsilon(1e-9));

    const double expected_fwhm_ps = 2.0 * std::log(2.0) / (kPi * width_ghz * 1e-3);
    CHECK(intensity_fwhm_ps(pulse) == doctest::Approx(expected_fwhm_ps).epsilon(0.01));
    CHECK(spectral_intensity_fwhm_ghz(pulse) == doctest::Approx(width_ghz).epsilon(0.01));
}

TEST_CASE("Gaussian pulse rejects grids that cannot hold it") {
    CHECK_THROWS_AS(optics::gaussian_pulse(69.0, kPi, GridSpec::centered(64, 2.0)),
                    PreconditionError);
    CHECK_THROWS_AS(optics::gaussian_pulse(69.0, kPi, GridSpec::centered(64, 0.05)),
                    PreconditionError);
    auto zero = optics::gaussian_pulse(69.0, 0.0, GridSpec::centered(1024, 0.06));
    CHECK(zero.energy() == 0.0);
}

TEST_CASE("slit narrowing is monotone and composes to the narrower slit") {
    auto pulse = optics::gaussian_pulse(69.0, kPi, GridSpec::centered(1024, 0.06));

    auto wide = optics::slit_filter(pulse, {1e6, 0.0});
    for (std::size_t i = 0; i < pulse.size(); ++i) {
        CHECK(std::abs(wide.samples[i] - pulse.samples[i]) < 1e-12);
    }

    auto narrow = optics::slit_filter(pulse, {40.0, 0.0});
    auto narrower = optics::slit_filter(pulse, {25.0, 0.0});
    CHECK(narrow.energy() < pulse.energy());
    CHECK(narrower.energy() < narrow.energy());
    CHECK(narrower.energy() > 0.0);

    auto composed = optics::slit_filter(narrow, {25.0, 0.0});
    auto direct = narrower;
    for (std::size_t i = 0; i < pulse.size(); ++i) {
        CHECK(std::abs(composed.samples[i] - direct.samples[i]) < 1e-12);
    }

    CHECK(intensity_fwhm_ps(narrow) > intensity_fwhm_ps(pulse));
}

TEST_CASE("cavity mode transmission is linear, lossy and detuning-sensitive") {
    auto pulse = optics::gaussian_pulse(46.0, kPi, GridSpec::centered(1024, 0.08));
    optics::CavityMode on_resonance{optics::Polarization::H, 8400.0, 0.0, 0.939};
    optics::CavityMode detuned{optics::Polarization::V, 8400.0, 83.0, 0.939};

    auto through_h = optics::cavity_mode_filter(pulse, on_resonance, 884.5);
    auto through_v = optics::cavity_mode_filter(pulse, detuned, 884.5);
    CHECK(through_h.energy() < pulse.energy());
    CHECK(through_h.energy() > 0.5 * pulse.energy());
    CHECK(through_v.energy() < through_h.energy());

    auto doubled = pulse;
    for (auto& v : doubled.samples) v *= 2.0;
    auto through_doubled = optics::cavity_mode_filter(doubled, on_resonance, 884.5);
    for (std::size_t i = 0; i < pulse.size(); ++i) {
        CHECK(std::abs(through_doubled.samples[i] - 2.0 * through_h.samples[i]) < 1e-12);
    }
}

TEST_CASE("mode linewidth follows wavelength over Q") {
    CHECK(optics::linewidth_from_q(8400.0, 884.5) == doctest::Approx(40.35).epsilon(2e-4));
    CHECK(optics::linewidth_from_q(9000.0, 884.5) == doctest::Approx(37.66).epsilon(2e-4));
    const double splitting_ratio = 83.0 / optics::linewidth_from_q(8400.0, 884.5);
    CHECK(splitting_ratio == doctest::Approx(2.057).epsilon(1e-3));
}

TEST_CASE("drift response is Lorentzian and inverts from one calibration point") {
    CHECK(optics::purcell_vs_drift(18.0, 0.0, 0.531) == doctest::Approx(18.0));

    const double halfwidth = optics::purcell_drift_halfwidth(1.0, 0.22);
    CHECK(halfwidth == doctest::Approx(0.531085).epsilon(2e-4));
    CHECK(optics::purcell_vs_drift(18.0, halfwidth, halfwidth) == doctest::Approx(9.0));
    CHECK(optics::purcell_vs_drift(18.0, 1.0, halfwidth) ==
          doctest::Approx(18.0 * 0.22).epsilon(1e-9));
}
