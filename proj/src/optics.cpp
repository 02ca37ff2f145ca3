#include "sps/optics.hpp"

#include <cmath>
#include <string>

#include "sps/errors.hpp"
#include "sps/fft.hpp"
#include "sps/units.hpp"

namespace sps::optics {

PulseField gaussian_pulse(double fwhm_ghz, double area_rad, const GridSpec& grid) {
    validate_grid(grid);
    if (!(fwhm_ghz > 0.0))
        throw PreconditionError("spectral fwhm must be positive, got " + std::to_string(fwhm_ghz));
    if (area_rad < 0.0)
        throw PreconditionError("pulse area must be >= 0, got " + std::to_string(area_rad));

    // dt must resolve the spectral width: reject dt > 1/(10 fwhm).
    const double dt_limit_ps = 0.1 / (fwhm_ghz * kGhzToCyclesPerPs);
    if (grid.dt_ps > dt_limit_ps)
        throw PreconditionError("grid dt " + std::to_string(grid.dt_ps) +
                                " ps undersamples a " + std::to_string(fwhm_ghz) +
                                " GHz pulse; need dt <= " + std::to_string(dt_limit_ps) + " ps");

    // Transform-limited Gaussian: time-intensity FWHM = 2 ln2 / (pi dv).
    const double fwhm_t_ps = 2.0 * std::numbers::ln2 / (kPi * fwhm_ghz * kGhzToCyclesPerPs);
    if (grid.span_ps() < 8.0 * fwhm_t_ps)
        throw PreconditionError("grid span " + std::to_string(grid.span_ps()) +
                                " ps covers less than 8 temporal FWHMs (" +
                                std::to_string(fwhm_t_ps) + " ps each)");

    const double sigma_t = fwhm_t_ps / (2.0 * std::sqrt(std::numbers::ln2));
    const double t_center = grid.t0_ps + 0.5 * grid.span_ps();

    PulseField pulse;
    pulse.t0_ps = grid.t0_ps;
    pulse.dt_ps = grid.dt_ps;
    pulse.samples.resize(grid.count);

    double sum_abs = 0.0;
    for (std::size_t i = 0; i < grid.count; ++i) {
        const double t = grid.t0_ps + static_cast<double>(i) * grid.dt_ps;
        const double u = (t - t_center) / sigma_t;
        const double v = std::exp(-0.5 * u * u);
        pulse.samples[i] = v;
        sum_abs += v;
    }

    if (area_rad == 0.0) {
        for (auto& a : pulse.samples) a = 0.0;
        return pulse;
    }

    const double scale = area_rad / (sum_abs * grid.dt_ps);
    for (auto& a : pulse.samples) a *= scale;
    return pulse;
}

PulseField slit_filter(const PulseField& pulse, const FilterSpec& slit) {
    validate_grid(pulse.grid());
    if (slit.width_ghz < 0.0)
        throw PreconditionError("slit width must be >= 0, got " + std::to_string(slit.width_ghz));

    PulseField out = pulse;
    fft::forward(out.samples);
    const std::size_t n = out.size();
    const double half = 0.5 * slit.width_ghz;
    for (std::size_t k = 0; k < n; ++k) {
        const double f = fft::bin_frequency_ghz(k, n, out.dt_ps) + pulse.f_center_offset_ghz;
        if (std::abs(f - slit.center_offset_ghz) > half) out.samples[k] = 0.0;
    }
    fft::backward(out.samples);
    return out;
}

PulseField cavity_mode_filter(const PulseField& pulse, const CavityMode& mode,
                              double wavelength_nm) {
    validate_grid(pulse.grid());
    if (!(wavelength_nm > 0.0))
        throw PreconditionError("wavelength must be positive, got " +
                                std::to_string(wavelength_nm));

    const double dv = linewidth_from_q(mode.q_factor, wavelength_nm);

    PulseField out = pulse;
    fft::forward(out.samples);
    const std::size_t n = out.size();
    for (std::size_t k = 0; k < n; ++k) {
        const double f = fft::bin_frequency_ghz(k, n, out.dt_ps) + pulse.f_center_offset_ghz;
        const std::complex<double> h = 1.0 / std::complex<double>(1.0, 2.0 * (f - mode.center_offset_ghz) / dv);
        out.samples[k] *= h;
    }
    fft::backward(out.samples);
    return out;
}

double linewidth_from_q(double q_factor, double wavelength_nm) {
    if (!(q_factor > 0.0))
        throw PreconditionError("Q must be positive, got " + std::to_string(q_factor));
    if (!(wavelength_nm > 0.0))
        throw PreconditionError("wavelength must be positive, got " +
                                std::to_string(wavelength_nm));
    return frequency_ghz(wavelength_nm) / q_factor;
}

double purcell_vs_drift(double f_max, double drift_nm, double drift_halfwidth_nm) {
    if (!(f_max > 0.0))
        throw PreconditionError("peak Purcell factor must be positive");
    if (!(drift_halfwidth_nm > 0.0))
        throw PreconditionError("drift halfwidth must be positive");
    const double u = drift_nm / drift_halfwidth_nm;
    return f_max / (1.0 + u * u);
}

double purcell_drift_halfwidth(double drift_nm, double remaining_fraction) {
    if (!(drift_nm > 0.0))
        throw PreconditionError("calibration drift must be positive");
    if (!(remaining_fraction > 0.0 && remaining_fraction < 1.0))
        throw PreconditionError("remaining fraction must lie in (0, 1)");
    // f/f_max = 1/(1+u^2)  =>  halfwidth = d / sqrt(1/frac - 1)
    return drift_nm / std::sqrt(1.0 / remaining_fraction - 1.0);
}

}  // namespace sps::optics
