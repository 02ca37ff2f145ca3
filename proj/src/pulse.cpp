#include "sps/pulse.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "sps/errors.hpp"

namespace sps {

namespace {

bool is_power_of_two(std::size_t n) {
    return n != 0 && (n & (n - 1)) == 0;
}

}  // namespace

double PulseField::energy() const {
    double acc = 0.0;
    for (const auto& a : samples) acc += std::norm(a);
    return acc * dt_ps;
}

double PulseField::area() const {
    double acc = 0.0;
    for (const auto& a : samples) acc += std::abs(a);
    return acc * dt_ps;
}

void validate_grid(const GridSpec& grid) {
    if (grid.count < 64 || !is_power_of_two(grid.count))
        throw PreconditionError("grid count must be a power of two >= 64, got " +
                                std::to_string(grid.count));
    if (!(grid.dt_ps > 0.0))
        throw PreconditionError("grid dt_ps must be positive, got " + std::to_string(grid.dt_ps));
}

double intensity_fwhm_ps(const PulseField& pulse) {
    const std::size_t n = pulse.size();
    if (n == 0) return 0.0;

    std::vector<double> intensity(n);
    double peak = 0.0;
    std::size_t peak_idx = 0;
    for (std::size_t i = 0; i < n; ++i) {
        intensity[i] = std::norm(pulse.samples[i]);
        if (intensity[i] > peak) {
            peak = intensity[i];
            peak_idx = i;
        }
    }
    if (peak <= 0.0) return 0.0;

    const double half = 0.5 * peak;

    // Walk outward from the peak to the first half crossings on each side.
    double t_left = pulse.time_at(0);
    for (std::size_t i = peak_idx; i > 0; --i) {
        if (intensity[i - 1] < half) {
            const double frac = (half - intensity[i - 1]) / (intensity[i] - intensity[i - 1]);
            t_left = pulse.time_at(i - 1) + frac * pulse.dt_ps;
            break;
        }
    }
    double t_right = pulse.time_at(n - 1);
    for (std::size_t i = peak_idx; i + 1 < n; ++i) {
        if (intensity[i + 1] < half) {
            const double frac = (intensity[i] - half) / (intensity[i] - intensity[i + 1]);
            t_right = pulse.time_at(i) + frac * pulse.dt_ps;
            break;
        }
    }
    return t_right - t_left;
}

void write_pulse_csv(const PulseField& pulse, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw PreconditionError("cannot open for writing: " + path);

    char line[160];
    std::snprintf(line, sizeof line, "# dt_ps=%.17g t0_ps=%.17g f_center_ghz=%.17g\n",
                  pulse.dt_ps, pulse.t0_ps, pulse.f_center_offset_ghz);
    out << line << "index,re,im\n";
    for (std::size_t i = 0; i < pulse.size(); ++i) {
        std::snprintf(line, sizeof line, "%zu,%.17g,%.17g\n", i, pulse.samples[i].real(),
                      pulse.samples[i].imag());
        out << line;
    }
    if (!out) throw PreconditionError("write failed: " + path);
}

PulseField read_pulse_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw PreconditionError("cannot open for reading: " + path);

    std::string header;
    std::getline(in, header);
    PulseField pulse;
    if (std::sscanf(header.c_str(), "# dt_ps=%lg t0_ps=%lg f_center_ghz=%lg", &pulse.dt_ps,
                    &pulse.t0_ps, &pulse.f_center_offset_ghz) != 3)
        throw PreconditionError("bad pulse header in " + path + ": " + header);

    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line == "index,re,im") continue;
        std::size_t idx;
        double re, im;
        if (std::sscanf(line.c_str(), "%zu,%lg,%lg", &idx, &re, &im) != 3)
            throw PreconditionError("bad pulse row in " + path + ": " + line);
        if (idx != pulse.samples.size())
            throw PreconditionError("non-contiguous pulse row index in " + path);
        pulse.samples.emplace_back(re, im);
    }
    validate_grid(pulse.grid());
    return pulse;
}

}  // namespace sps
