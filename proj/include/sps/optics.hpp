#pragma once

#include "sps/pulse.hpp"

namespace sps::optics {

enum class Polarization { H, V };

// Rectangular spectral window, e.g. the slit of a folded 4f pulse shaper.
struct FilterSpec {
    double width_ghz = 0.0;
    double center_offset_ghz = 0.0;  // relative to the emitter transition
};

// One polarisation mode of the microcavity, modelled as a single-pole
// Lorentzian transmission line centred at center_offset_ghz.
struct CavityMode {
    Polarization polarization = Polarization::H;
    double q_factor = 8400.0;
    double center_offset_ghz = 0.0;
    double eta_top = 0.939;  // fraction of cavity decay leaving through the top mirror
};

// Transform-limited Gaussian with the given spectral intensity FWHM, scaled so
// the temporal pulse area (sum |a| dt) equals area_rad. area_rad == 0 yields an
// all-zero field. Rejects grids that undersample (dt > 1/(10 fwhm)) or that
// span fewer than 8 temporal FWHMs.
PulseField gaussian_pulse(double fwhm_ghz, double area_rad, const GridSpec& grid);

// Zeroes every spectral component outside |f - center| <= width/2. Grid and
// sample count are unchanged.
PulseField slit_filter(const PulseField& pulse, const FilterSpec& slit);

// Single-pole Lorentzian amplitude response H(f) = 1 / (1 + 2i (f - f_c)/dv),
// unit transmission at the mode centre. The linewidth dv follows from the
// mode's Q at the given wavelength.
PulseField cavity_mode_filter(const PulseField& pulse, const CavityMode& mode,
                              double wavelength_nm);

// Cavity intensity FWHM in GHz: f(lambda)/Q.
double linewidth_from_q(double q_factor, double wavelength_nm);

// Purcell factor under mirror drift, Lorentzian in the drift coordinate:
// F(d) = f_max / (1 + (d / halfwidth)^2).
double purcell_vs_drift(double f_max, double drift_nm, double drift_halfwidth_nm);

// Halfwidth of the drift Lorentzian inferred from a single calibration point:
// a drift of drift_nm leaves remaining_fraction of the peak Purcell factor.
double purcell_drift_halfwidth(double drift_nm, double remaining_fraction);

}  // namespace sps::optics
