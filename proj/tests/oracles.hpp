#pragma once

// Independent reference implementations used only by tests. Each one is a
// straightforward transcription of the defining formula, kept free of the
// library's numerical machinery so the two sides can disagree.

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace oracle {

// O(n^2) discrete Fourier transform, sign -1 forward.
inline std::vector<std::complex<double>> naive_dft(
    const std::vector<std::complex<double>>& in, int sign) {
    const std::size_t n = in.size();
    std::vector<std::complex<double>> out(n);
    const double two_pi = 6.283185307179586476925286766559;
    for (std::size_t k = 0; k < n; ++k) {
        std::complex<double> acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            double phase = static_cast<double>(sign) * two_pi * static_cast<double>(k) *
                           static_cast<double>(j) / static_cast<double>(n);
            acc += in[j] * std::complex<double>(std::cos(phase), std::sin(phase));
        }
        out[k] = acc;
    }
    return out;
}

// Quarter-wave stack reflectivity at the design wavelength from the
// admittance recursion: each quarter-wave layer maps Y to n^2/Y.
inline double quarter_wave_reflectivity(double n_ambient, double n_high, double n_low,
                                        double n_substrate, double pairs) {
    const double full_pairs = std::floor(pairs + 0.5 * 1e-9);
    const bool half = pairs - full_pairs > 0.25;
    const double ratio = n_high / n_low;
    double y = std::pow(ratio, 2.0 * full_pairs) * n_substrate;
    if (half) y = std::pow(ratio, 2.0 * full_pairs) * n_high * n_high / n_substrate;
    const double r = (n_ambient - y) / (n_ambient + y);
    return r * r;
}

// All-pairs coincidence histogram by brute force. Bin i covers
// [t_min + i*w, t_min + (i+1)*w).
inline std::vector<std::uint64_t> brute_force_coincidences(const std::vector<double>& a,
                                                           const std::vector<double>& b,
                                                           double bin_ps, double window_ps,
                                                           double t_min_ps,
                                                           std::size_t n_bins) {
    std::vector<std::uint64_t> counts(n_bins, 0);
    for (double ta : a) {
        for (double tb : b) {
            const double d = tb - ta;
            if (std::abs(d) > window_ps) continue;
            const double pos = (d - t_min_ps) / bin_ps;
            if (pos < 0.0) continue;
            const auto idx = static_cast<std::size_t>(pos);
            if (idx < n_bins) ++counts[idx];
        }
    }
    return counts;
}

// Mean and sample standard deviation.
struct MeanSd {
    double mean = 0.0;
    double sd = 0.0;
};

inline MeanSd mean_sd(const std::vector<double>& xs) {
    MeanSd out;
    if (xs.empty()) return out;
    double sum = 0.0;
    for (double x : xs) sum += x;
    out.mean = sum / static_cast<double>(xs.size());
    if (xs.size() < 2) return out;
    double ss = 0.0;
    for (double x : xs) ss += (x - out.mean) * (x - out.mean);
    out.sd = std::sqrt(ss / (static_cast<double>(xs.size()) - 1.0));
    return out;
}

}  // namespace oracle
