#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "sps/photonstream.hpp"

namespace sps::analysis {

// Clicks per contiguous time bin of bin_width_us starting at t = 0. With
// total_duration_ps > 0 the bin count is fixed to the full bins inside that
// duration and later records are dropped; otherwise enough bins are created
// to cover every record.
std::vector<std::uint64_t> bin_counts(const photonstream::TimestampStream& stream,
                                      double bin_width_us, double total_duration_ps = 0.0);

// Sub-Poissonian statistics of binned counts against the shot-noise and
// binomial references. squeezing_db = -10 log10(sigma / sigma_shot).
struct SqueezingReport {
    double mean = 0.0;
    double sigma = 0.0;         // sample standard deviation
    double sigma_shot = 0.0;    // sqrt(mean), Poissonian reference
    double ratio = 0.0;         // sigma / sigma_shot
    double squeezing_db = 0.0;
    double rho_hat = 0.0;            // mean / pulses_per_bin
    double predicted_ratio = 0.0;    // binomial: sqrt(1 - rho_hat)
    std::uint64_t n_bins = 0;
    std::uint32_t pulses_per_bin = 0;
};

SqueezingReport squeezing_report(std::span<const std::uint64_t> counts,
                                 std::uint32_t pulses_per_bin);

// Maximal consecutive-detection statistics. exact_counts[n] is the number of
// maximal runs of exactly n detections; at_least_counts[n] counts runs of
// length >= n. The geometric fit regresses ln(exact counts) on n over bins
// with at least 10 events and reports exp(slope) with a 95% interval.
struct RunLengthReport {
    std::vector<std::uint64_t> exact_counts;     // index 0 unused
    std::vector<std::uint64_t> at_least_counts;  // index 0 unused
    double fitted_rho = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    bool fit_valid = false;
    std::uint32_t fit_bins_used = 0;
};

RunLengthReport consecutive_runs(const std::vector<bool>& detected);

// Symmetric delay histogram. Bin i covers
// [t_min_ps + i*bin_width_ps, t_min_ps + (i+1)*bin_width_ps).
struct Histogram {
    double bin_width_ps = 0.0;
    double t_min_ps = 0.0;
    std::vector<std::uint64_t> counts;

    double bin_center_ps(std::size_t i) const {
        return t_min_ps + (static_cast<double>(i) + 0.5) * bin_width_ps;
    }
};

// Histogram of t_b - t_a over all pairs with |t_b - t_a| <= window_ns,
// built with a two-pointer sweep over the sorted streams.
Histogram coincidence_histogram(const photonstream::TimestampStream& a,
                                const photonstream::TimestampStream& b, double bin_width_ps,
                                double window_ns);

// Integrated peak areas of a pulsed correlation histogram: the center peak at
// zero delay and the side peaks at multiples of the period, each integrated
// over +-peak_halfwidth_ns. Side peaks within exclude_adjacent periods of
// zero are skipped, and only peaks fully inside the histogram are used.
struct PeakAreas {
    double center = 0.0;
    double side_mean = 0.0;
    std::uint32_t n_side_peaks = 0;
    std::vector<double> side;  // individual side-peak areas, ordered by k
};

PeakAreas peak_areas(const Histogram& hist, double period_ns, double peak_halfwidth_ns,
                     std::uint32_t exclude_adjacent = 1);

// Second-order correlation at zero delay: center-peak area over the mean
// side-peak area, with Poisson error propagation.
struct G2Result {
    double value = 0.0;
    double se = 0.0;
    double center_area = 0.0;
    double side_mean_area = 0.0;
    std::uint32_t n_side_peaks = 0;
};

G2Result g2_zero(const Histogram& hist, double period_ns, double peak_halfwidth_ns,
                 std::uint32_t exclude_adjacent = 1);

// Raw two-photon interference visibility from parallel- and cross-polarised
// coincidence histograms: 1 - (center/side)_par / (center/side)_cross.
double hom_visibility(const Histogram& parallel, const Histogram& cross, double period_ns,
                      double peak_halfwidth_ns, std::uint32_t exclude_adjacent = 1);

// Corrects a raw visibility for splitter imbalance and residual multi-photon
// emission: M = (r^2 + t^2)/(2 r t) * (v_raw + g2 (1 + v_raw)). physical is
// false when the corrected value falls outside [0, 1].
struct HomCorrection {
    double m = 0.0;
    double v_raw = 0.0;
    double g2 = 0.0;
    double r = 0.0;
    bool physical = false;
};

HomCorrection correct_indistinguishability(double v_raw, double g2, double r);

// Forward model of the interference measurement, for round-trip validation of
// the correction. Each pulse slot yields a photon pair that either
// coincides across the outputs or bunches into one of them, with the
// coincidence probability reduced by the wavepacket overlap; multi-photon
// accidentals add a forced pair on both detectors at a rate tied to g2.
struct HomSimOptions {
    double rep_rate_mhz = 76.13;
    double gamma_ns = 19.0;
    std::uint64_t n_pulses = 1000000;
};

struct HomStreams {
    photonstream::TimestampStream parallel_1, parallel_2;
    photonstream::TimestampStream cross_1, cross_2;
};

HomStreams hom_simulate(double mean_wavepacket_overlap, double g2, double r, std::uint64_t seed,
                        const HomSimOptions& options = {});

}  // namespace sps::analysis
