#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace sps::fft {

// In-place DFT, forward sign e^{-2 pi i k j / n}. Plans are cached per size
// and built with deterministic heuristics, so repeated runs are bit-identical.
void forward(std::vector<std::complex<double>>& data);

// Inverse transform including the 1/n normalisation, so backward(forward(x)) == x
// up to rounding.
void backward(std::vector<std::complex<double>>& data);

// Frequency of bin k on an n-point grid with spacing dt_ps, in GHz.
// Bins above n/2 map to negative frequencies.
double bin_frequency_ghz(std::size_t k, std::size_t n, double dt_ps);

}  // namespace sps::fft
