#pragma once

#include <numbers>

// Unit conventions used throughout:
//   time        ps
//   rates       ns^-1 at API boundaries, ps^-1 internally
//   frequency   GHz (ordinary frequency, not angular)
//   wavelength  nm
//   Rabi        rad/ps

namespace sps {

inline constexpr double kPi = std::numbers::pi;

// c = 299792458 m/s expressed in nm*GHz, so f[GHz] = kSpeedOfLight / lambda[nm].
inline constexpr double kSpeedOfLightNmGhz = 2.99792458e8;

// 1 GHz = 1e-3 cycles/ps
inline constexpr double kGhzToCyclesPerPs = 1e-3;

// 1 ns^-1 = 1e-3 ps^-1
inline constexpr double kPerNsToPerPs = 1e-3;

inline double frequency_ghz(double wavelength_nm) {
    return kSpeedOfLightNmGhz / wavelength_nm;
}

inline double angular_per_ps(double f_ghz) {
    return 2.0 * kPi * f_ghz * kGhzToCyclesPerPs;
}

}  // namespace sps
