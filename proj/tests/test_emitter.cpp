#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include <json.hpp>

#include "sps/emitter.hpp"
#include "sps/errors.hpp"
#include "sps/optics.hpp"
#include "sps/units.hpp"

using namespace sps;

namespace {

// Transform-limited Gaussian drive with a grid fine enough for scaled copies
// up to 2.05x the base area, matching the scan range of the maximum search.
emitter::DriveProfile clean_drive(double width_ghz, double area_rad) {
    const double fwhm_t = 2.0 * std::log(2.0) / (kPi * width_ghz * 1e-3);
    const double sigma_t = fwhm_t / (2.0 * std::sqrt(std::log(2.0)));
    const double omega_peak =
        2.05 * std::max(area_rad, kPi) / (sigma_t * std::sqrt(2.0 * kPi));
    const double dt =
        std::min({0.1 / (width_ghz * 1e-3), 0.05 / omega_peak, 0.02 / 0.019}) * 0.8;
    std::size_t count = 64;
    while (static_cast<double>(count) * dt < 8.2 * fwhm_t) count *= 2;
    auto grid = GridSpec::centered(count, dt);
    return emitter::DriveProfile::from_pulse(optics::gaussian_pulse(width_ghz, area_rad, grid));
}

double traj_variance(const emitter::EmissionOutcome& outcome) {
    double mean = 0.0;
    double second = 0.0;
    for (std::size_t n = 0; n < outcome.pn.size(); ++n) {
        mean += static_cast<double>(n) * outcome.pn[n];
        second += static_cast<double>(n * n) * outcome.pn[n];
    }
    return second - mean * mean;
}

}  // namespace

TEST_CASE("integration rejects grids that undersample the drive") {
    emitter::DriveProfile drive;
    drive.t0_ps = 0.0;
    drive.dt_ps = 1.0;
    drive.rabi.assign(128, std::complex<double>(0.5, 0.0));
    emitter::EmitterParams e;
    CHECK_THROWS_AS(emitter::bloch_integrate(drive, e), PreconditionError);
}

TEST_CASE("pulse area controls inversion when decay is negligible") {
    emitter::EmitterParams e;
    e.gamma_ns = 1e-6;
    e.gamma_dephase_ns = 0.0;

    auto base = clean_drive(69.0, kPi);
    auto pi_result = emitter::bloch_integrate(base, e);
    CHECK(pi_result.mean_photons == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(pi_result.max_trace_error <= 1e-9);

    auto two_pi = emitter::bloch_integrate(base.scaled(2.0), e);
    CHECK(two_pi.mean_photons <= 1e-4);

    for (double s : {0.3, 0.5, 0.7, 1.3}) {
        auto r = emitter::bloch_integrate(base.scaled(s), e);
        const double expected = std::sin(s * kPi / 2.0) * std::sin(s * kPi / 2.0);
        CHECK(r.mean_photons == doctest::Approx(expected).epsilon(5e-4));
    }
}

TEST_CASE("detuning suppresses excitation") {
    emitter::EmitterParams resonant;
    emitter::EmitterParams detuned;
    detuned.detuning_ghz = 500.0;
    auto base = clean_drive(69.0, kPi);
    auto on = emitter::bloch_integrate(base, resonant);
    auto off = emitter::bloch_integrate(base, detuned);
    CHECK(off.mean_photons < 0.1 * on.mean_photons);
}

TEST_CASE("dephasing fills in the two-pi null") {
    auto base = clean_drive(69.0, kPi);
    emitter::EmitterParams clean;
    emitter::EmitterParams noisy;
    noisy.gamma_dephase_ns = 5.0;
    auto r_clean = emitter::bloch_integrate(base.scaled(2.0), clean);
    auto r_noisy = emitter::bloch_integrate(base.scaled(2.0), noisy);
    CHECK(r_noisy.mean_photons > r_clean.mean_photons);
}

TEST_CASE("first emission maximum sits just above unit pulse area") {
    emitter::EmitterParams e;
    e.gamma_dephase_ns = 0.139;
    auto base = clean_drive(69.0, kPi);

    const double peak_scale = emitter::first_rabi_maximum(base, e);
    CHECK(peak_scale == doctest::Approx(1.0415).epsilon(5e-3));

    auto at_peak = emitter::bloch_integrate(base.scaled(peak_scale), e);
    CHECK(at_peak.mean_photons == doctest::Approx(1.0270).epsilon(4e-3));

    auto mean_at_peak = [&](double width) {
        auto b = clean_drive(width, kPi);
        double s = emitter::first_rabi_maximum(b, e);
        return emitter::bloch_integrate(b.scaled(s), e).mean_photons;
    };
    const double m46 = mean_at_peak(46.0);
    const double m96 = mean_at_peak(96.0);
    CHECK(m46 == doctest::Approx(1.0409).epsilon(4e-3));
    CHECK(m96 == doctest::Approx(1.0194).epsilon(4e-3));
    CHECK(m46 > at_peak.mean_photons);
    CHECK(at_peak.mean_photons > m96);
}

TEST_CASE("area scan bookkeeping is consistent") {
    auto base = clean_drive(69.0, kPi);
    emitter::EmitterParams e;
    std::vector<double> scales = {0.0, 0.5, 1.0, 1.5};
    auto points = emitter::rabi_sweep(base, scales, e);
    REQUIRE(points.size() == 4);
    CHECK(points[0].mean_photons == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(points[2].area_rad == doctest::Approx(base.area_rad()).epsilon(1e-12));
    CHECK(points[3].power_proxy == doctest::Approx(2.25 * points[2].power_proxy).epsilon(1e-12));
    CHECK(base.scaled(2.0).area_rad() == doctest::Approx(2.0 * base.area_rad()).epsilon(1e-12));
}

TEST_CASE("jump simulation agrees with the density matrix") {
    auto base = clean_drive(69.0, kPi);

    for (double dephase : {0.0, 2.0}) {
        CAPTURE(dephase);
        emitter::EmitterParams e;
        e.gamma_dephase_ns = dephase;
        auto bloch = emitter::bloch_integrate(base, e);
        auto jump = emitter::mcwf_simulate(base, e, 20000, 404);

        const double se = std::sqrt(traj_variance(jump) / 20000.0);
        CHECK(std::abs(jump.mean_photons() - bloch.mean_photons) <= 3.0 * se);

        // Ensemble-averaged excited population tracks the deterministic trace.
        REQUIRE(jump.excited_pop_trace.size() == bloch.excited_pop_trace.size());
        double worst = 0.0;
        for (std::size_t i = 0; i < bloch.excited_pop_trace.size(); ++i) {
            worst = std::max(worst,
                             std::abs(jump.excited_pop_trace[i] - bloch.excited_pop_trace[i]));
        }
        CHECK(worst < 0.02);
    }
}

TEST_CASE("jump records and photon-number distribution tell the same story") {
    auto base = clean_drive(69.0, kPi);
    emitter::EmitterParams e;
    auto jump = emitter::mcwf_simulate(base, e, 5000, 11);

    std::vector<double> pn_from_records(jump.pn.size(), 0.0);
    for (const auto& records : jump.jump_records_ps) {
        const std::size_t bin = std::min<std::size_t>(records.size(), jump.pn.size() - 1);
        pn_from_records[bin] += 1.0 / 5000.0;
        for (double t : records) CHECK(t >= 0.0);
    }
    for (std::size_t n = 0; n < jump.pn.size(); ++n) {
        CHECK(pn_from_records[n] == doctest::Approx(jump.pn[n]).epsilon(1e-12));
    }

    double total = 0.0;
    for (double p : jump.pn) total += p;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("jump simulation is reproducible and seed-sensitive") {
    auto base = clean_drive(96.0, kPi);
    emitter::EmitterParams e;
    auto a = emitter::mcwf_simulate(base, e, 500, 77);
    auto b = emitter::mcwf_simulate(base, e, 500, 77);
    CHECK(a.pn == b.pn);
    CHECK(a.jump_records_ps == b.jump_records_ps);
    auto c = emitter::mcwf_simulate(base, e, 500, 78);
    CHECK(a.jump_records_ps != c.jump_records_ps);
}

TEST_CASE("pair correlation from a photon-number distribution") {
    std::vector<double> pn = {0.9, 0.0, 0.1};
    CHECK(emitter::g2_from_pn(pn) == doctest::Approx(5.0).epsilon(1e-12));
    std::vector<double> single = {0.0, 1.0};
    CHECK(emitter::g2_from_pn(single) == doctest::Approx(0.0));
    CHECK(emitter::g2_se_from_pn(pn, 10000) > 0.0);
    CHECK(emitter::g2_se_from_pn(pn, 40000) ==
          doctest::Approx(0.5 * emitter::g2_se_from_pn(pn, 10000)).epsilon(1e-9));
}

TEST_CASE("emission report serialises the distribution") {
    auto base = clean_drive(96.0, kPi);
    emitter::EmitterParams e;
    auto jump = emitter::mcwf_simulate(base, e, 200, 5);
    auto j = nlohmann::json::parse(emitter::emission_json(jump));
    CHECK(j["n_trajectories"] == 200);
    CHECK(j["seed"] == 5);
    CHECK(j["pn"].size() == jump.pn.size());
    CHECK(!j.contains("jump_records_ps"));
    auto with_records = nlohmann::json::parse(emitter::emission_json(jump, true));
    CHECK(with_records["jump_records_ps"].size() == 200);
}

TEST_CASE("purity falls as the drive gets shorter") {
    emitter::EmitterParams e;
    e.gamma_dephase_ns = 0.139;
    emitter::ShapingChain chain = [](double width) { return clean_drive(width, kPi); };
    std::vector<double> widths = {96.0, 69.0, 46.0};
    auto points = emitter::purity_vs_width(widths, e, chain, 5000, 2024);
    REQUIRE(points.size() == 3);
    CHECK(points[0].g2 < points[1].g2);
    CHECK(points[1].g2 < points[2].g2);
    CHECK(points[2].g2 == doctest::Approx(0.0821).epsilon(0.3));
    for (const auto& p : points) {
        CHECK(p.mean_photons > 0.95);
        CHECK(p.pi_scale == doctest::Approx(1.04).epsilon(0.03));
    }

    std::vector<double> bad = {10.0};
    CHECK_THROWS_AS(emitter::purity_vs_width(bad, e, chain, 100, 1), PreconditionError);
}

TEST_CASE("detuned-mode filtering weakens the drive") {
    emitter::EmitterParams e;
    auto grid = GridSpec::centered(2048, 0.05);
    auto pulse = optics::gaussian_pulse(46.0, kPi, grid);
    optics::CavityMode v_mode{optics::Polarization::V, 8400.0, 83.0, 0.939};
    auto filtered = optics::cavity_mode_filter(pulse, v_mode, 884.5);

    auto direct = emitter::bloch_integrate(emitter::DriveProfile::from_pulse(pulse), e);
    auto through_v = emitter::bloch_integrate(emitter::DriveProfile::from_pulse(filtered), e);
    CHECK(through_v.mean_photons < 0.5 * direct.mean_photons);
}

TEST_CASE("wavepacket overlap follows the dephasing budget") {
    emitter::EmitterParams e;
    e.gamma_dephase_ns = 0.139;
    CHECK(emitter::indistinguishability(e, 0.0131) == doctest::Approx(0.985580).epsilon(2e-6));

    emitter::EmitterParams slow;
    slow.gamma_dephase_ns = 0.1;
    slow.gamma_sd_ns = 6.5;
    slow.tau_c_us = 54.0;
    const double near = emitter::indistinguishability(slow, 0.0131);
    const double far = emitter::indistinguishability(slow, 2.67);
    CHECK(near > far);
    CHECK(far > emitter::indistinguishability(slow, 1e9) - 1e-9);
}

TEST_CASE("dephasing calibration pins all reference points") {
    std::vector<emitter::DephasingFitPoint> points = {
        {0.0131, 0.9856}, {0.67, 0.985}, {1.31, 0.970}, {2.67, 0.959}};
    auto fit = emitter::fit_dephasing(points, 19.0);

    REQUIRE(fit.residuals.size() == 4);
    CHECK(fit.max_abs_residual <= 0.004);
    CHECK(fit.gamma_dephase_ns > 0.08);
    CHECK(fit.gamma_dephase_ns < 0.12);
    CHECK(fit.gamma_sd_ns > 3.0);
    CHECK(fit.tau_c_us > 20.0);
    CHECK(fit.tau_c_us <= 100.0);

    emitter::EmitterParams fitted;
    fitted.gamma_dephase_ns = fit.gamma_dephase_ns;
    fitted.gamma_sd_ns = fit.gamma_sd_ns;
    fitted.tau_c_us = fit.tau_c_us;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const double model = emitter::indistinguishability(fitted, points[i].delay_us);
        CHECK(model - points[i].visibility == doctest::Approx(fit.residuals[i]).epsilon(1e-9));
    }

    std::vector<emitter::DephasingFitPoint> too_few = {{0.1, 0.9}, {0.2, 0.8}};
    CHECK_THROWS_AS(emitter::fit_dephasing(too_few, 19.0), PreconditionError);
}
