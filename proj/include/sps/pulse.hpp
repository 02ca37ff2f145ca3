#pragma once

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

namespace sps {

// Uniform time grid. Sample i sits at t0_ps + i*dt_ps. Counts are restricted
// to powers of two with at least 64 points so the frequency-domain filters
// operate on a fixed, exactly invertible transform size.
struct GridSpec {
    std::size_t count = 0;
    double dt_ps = 0.0;
    double t0_ps = 0.0;

    static GridSpec centered(std::size_t count, double dt_ps) {
        return GridSpec{count, dt_ps, -0.5 * static_cast<double>(count) * dt_ps};
    }

    double span_ps() const { return static_cast<double>(count) * dt_ps; }
};

// Complex field envelope sampled on a uniform grid. Frequencies are measured
// relative to the emitter transition; f_center_offset_ghz records where the
// envelope's carrier sits on that axis.
struct PulseField {
    double t0_ps = 0.0;
    double dt_ps = 0.0;
    double f_center_offset_ghz = 0.0;
    std::vector<std::complex<double>> samples;

    std::size_t size() const { return samples.size(); }
    double time_at(std::size_t i) const { return t0_ps + static_cast<double>(i) * dt_ps; }
    double span_ps() const { return static_cast<double>(samples.size()) * dt_ps; }

    // sum |a|^2 dt
    double energy() const;

    // sum |a| dt
    double area() const;

    GridSpec grid() const { return GridSpec{samples.size(), dt_ps, t0_ps}; }
};

// Throws PreconditionError unless count is a power of two and >= 64 and dt > 0.
void validate_grid(const GridSpec& grid);

// Full width at half maximum of |a|^2 against time, by linear interpolation
// between samples. Returns 0 for an all-zero field.
double intensity_fwhm_ps(const PulseField& pulse);

// CSV round trip. Header line `# dt_ps=<v> t0_ps=<v> f_center_ghz=<v>`,
// then `index,re,im` rows.
void write_pulse_csv(const PulseField& pulse, const std::string& path);
PulseField read_pulse_csv(const std::string& path);

}  // namespace sps
