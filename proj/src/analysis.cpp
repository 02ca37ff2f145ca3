#include "sps/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "sps/errors.hpp"
#include "sps/rng.hpp"
#include "sps/units.hpp"

namespace sps::analysis {

using photonstream::TimestampRecord;
using photonstream::TimestampStream;

std::vector<std::uint64_t> bin_counts(const TimestampStream& stream, double bin_width_us,
                                      double total_duration_ps) {
    if (!(bin_width_us > 0.0)) throw PreconditionError("bin width must be positive");
    const double bin_ps = bin_width_us * 1e6;

    std::size_t n_bins;
    if (total_duration_ps > 0.0) {
        n_bins = static_cast<std::size_t>(total_duration_ps / bin_ps);
        if (n_bins == 0) throw PreconditionError("duration shorter than one bin");
    } else {
        double t_max = 0.0;
        for (const auto& r : stream.records) t_max = std::max(t_max, r.t_ps);
        n_bins = static_cast<std::size_t>(t_max / bin_ps) + 1;
    }

    std::vector<std::uint64_t> counts(n_bins, 0);
    for (const auto& r : stream.records) {
        if (r.t_ps < 0.0) continue;
        const auto idx = static_cast<std::size_t>(r.t_ps / bin_ps);
        if (idx < n_bins) ++counts[idx];
    }
    return counts;
}

SqueezingReport squeezing_report(std::span<const std::uint64_t> counts,
                                 std::uint32_t pulses_per_bin) {
    if (counts.size() < 2) throw PreconditionError("need at least 2 bins for statistics");
    if (pulses_per_bin == 0) throw PreconditionError("pulses per bin must be >= 1");

    const auto n = static_cast<double>(counts.size());
    double sum = 0.0;
    for (auto c : counts) sum += static_cast<double>(c);
    const double mean = sum / n;
    if (!(mean > 0.0)) throw PreconditionError("mean count is zero, statistics undefined");

    double ss = 0.0;
    for (auto c : counts) {
        const double d = static_cast<double>(c) - mean;
        ss += d * d;
    }
    const double sigma = std::sqrt(ss / (n - 1.0));

    SqueezingReport rep;
    rep.mean = mean;
    rep.sigma = sigma;
    rep.sigma_shot = std::sqrt(mean);
    rep.ratio = sigma / rep.sigma_shot;
    rep.squeezing_db = -10.0 * std::log10(rep.ratio);
    rep.rho_hat = mean / static_cast<double>(pulses_per_bin);
    rep.predicted_ratio = rep.rho_hat < 1.0 ? std::sqrt(1.0 - rep.rho_hat) : 0.0;
    rep.n_bins = counts.size();
    rep.pulses_per_bin = pulses_per_bin;
    return rep;
}

RunLengthReport consecutive_runs(const std::vector<bool>& detected) {
    if (detected.empty()) throw PreconditionError("need at least one pulse flag");

    std::vector<std::uint64_t> exact(1, 0);
    std::uint64_t run = 0;
    auto flush = [&]() {
        if (run == 0) return;
        if (exact.size() <= run) exact.resize(run + 1, 0);
        ++exact[run];
        run = 0;
    };
    for (bool hit : detected) {
        if (hit)
            ++run;
        else
            flush();
    }
    flush();

    RunLengthReport rep;
    rep.exact_counts = exact;
    rep.at_least_counts.assign(exact.size(), 0);
    std::uint64_t acc = 0;
    for (std::size_t n = exact.size(); n-- > 1;) {
        acc += exact[n];
        rep.at_least_counts[n] = acc;
    }

    // Geometric tail: counts(n) ~ rho^n, so ln(counts) is linear in n.
    std::vector<double> xs, ys;
    for (std::size_t n = 1; n < exact.size(); ++n) {
        if (exact[n] >= 10) {
            xs.push_back(static_cast<double>(n));
            ys.push_back(std::log(static_cast<double>(exact[n])));
        }
    }
    rep.fit_bins_used = static_cast<std::uint32_t>(xs.size());
    if (xs.size() >= 3) {
        const auto k = static_cast<double>(xs.size());
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            sx += xs[i];
            sy += ys[i];
            sxx += xs[i] * xs[i];
            sxy += xs[i] * ys[i];
        }
        const double denom = k * sxx - sx * sx;
        const double slope = (k * sxy - sx * sy) / denom;
        const double intercept = (sy - slope * sx) / k;

        double sse = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const double r = ys[i] - (intercept + slope * xs[i]);
            sse += r * r;
        }
        const double sxx_c = sxx - sx * sx / k;
        const double slope_se =
            xs.size() > 2 ? std::sqrt(sse / (k - 2.0) / sxx_c) : 0.0;

        rep.fitted_rho = std::exp(slope);
        rep.ci_low = std::exp(slope - 1.96 * slope_se);
        rep.ci_high = std::exp(slope + 1.96 * slope_se);
        rep.fit_valid = true;
    }
    return rep;
}

Histogram coincidence_histogram(const TimestampStream& a, const TimestampStream& b,
                                double bin_width_ps, double window_ns) {
    if (!(bin_width_ps > 0.0)) throw PreconditionError("histogram bin width must be positive");
    const double window_ps = window_ns * 1e3;
    if (!(window_ps >= bin_width_ps))
        throw PreconditionError("window must cover at least one bin");

    const auto half_bins = static_cast<std::size_t>(std::ceil(window_ps / bin_width_ps));
    const std::size_t n_bins = 2 * half_bins;
    if (n_bins > 50000000) throw PreconditionError("histogram would exceed 5e7 bins");

    Histogram hist;
    hist.bin_width_ps = bin_width_ps;
    hist.t_min_ps = -static_cast<double>(half_bins) * bin_width_ps;
    hist.counts.assign(n_bins, 0);

    const auto& ra = a.records;
    const auto& rb = b.records;
    std::size_t lo = 0;
    for (const auto& rec_a : ra) {
        const double t_lo = rec_a.t_ps - window_ps;
        const double t_hi = rec_a.t_ps + window_ps;
        while (lo < rb.size() && rb[lo].t_ps < t_lo) ++lo;
        for (std::size_t j = lo; j < rb.size() && rb[j].t_ps <= t_hi; ++j) {
            const double delta = rb[j].t_ps - rec_a.t_ps;
            const auto idx =
                static_cast<std::size_t>((delta - hist.t_min_ps) / bin_width_ps);
            if (idx < n_bins) ++hist.counts[idx];
        }
    }
    return hist;
}

PeakAreas peak_areas(const Histogram& hist, double period_ns, double peak_halfwidth_ns,
                     std::uint32_t exclude_adjacent) {
    if (!(period_ns > 0.0)) throw PreconditionError("period must be positive");
    if (!(peak_halfwidth_ns > 0.0) || peak_halfwidth_ns * 2.0 >= period_ns)
        throw PreconditionError("peak halfwidth must be positive and below half the period");

    const double period_ps = period_ns * 1e3;
    const double half_ps = peak_halfwidth_ns * 1e3;
    const double t_max = hist.t_min_ps + static_cast<double>(hist.counts.size()) * hist.bin_width_ps;

    // Highest side-peak order fully contained in the histogram.
    const auto k_max = static_cast<std::int64_t>((t_max - half_ps) / period_ps);
    if (k_max < static_cast<std::int64_t>(exclude_adjacent) + 1)
        throw PreconditionError("histogram window too narrow: no complete side peaks beyond "
                                "the excluded ones");

    auto area_at = [&](double center_ps) {
        double area = 0.0;
        for (std::size_t i = 0; i < hist.counts.size(); ++i) {
            const double c = hist.bin_center_ps(i);
            if (std::abs(c - center_ps) <= half_ps) area += static_cast<double>(hist.counts[i]);
        }
        return area;
    };

    PeakAreas areas;
    areas.center = area_at(0.0);
    for (std::int64_t k = -k_max; k <= k_max; ++k) {
        if (std::abs(k) <= static_cast<std::int64_t>(exclude_adjacent)) continue;
        areas.side.push_back(area_at(static_cast<double>(k) * period_ps));
    }
    areas.n_side_peaks = static_cast<std::uint32_t>(areas.side.size());
    if (areas.n_side_peaks < 4)
        throw PreconditionError("need at least 4 usable side peaks, got " +
                                std::to_string(areas.n_side_peaks));
    double sum = 0.0;
    for (double s : areas.side) sum += s;
    areas.side_mean = sum / static_cast<double>(areas.n_side_peaks);
    return areas;
}

G2Result g2_zero(const Histogram& hist, double period_ns, double peak_halfwidth_ns,
                 std::uint32_t exclude_adjacent) {
    const PeakAreas areas = peak_areas(hist, period_ns, peak_halfwidth_ns, exclude_adjacent);
    if (!(areas.side_mean > 0.0))
        throw PreconditionError("side peaks are empty, normalisation undefined");

    G2Result res;
    res.value = areas.center / areas.side_mean;
    res.center_area = areas.center;
    res.side_mean_area = areas.side_mean;
    res.n_side_peaks = areas.n_side_peaks;

    // Poisson counts in the center, averaged Poisson counts in the sides; a
    // zero center falls back to variance 1 so the error stays usable.
    const double var_center = std::max(areas.center, 1.0);
    const double var_side_mean = areas.side_mean / static_cast<double>(areas.n_side_peaks);
    res.se = std::sqrt(var_center / (areas.side_mean * areas.side_mean) +
                       res.value * res.value * var_side_mean /
                           (areas.side_mean * areas.side_mean));
    return res;
}

double hom_visibility(const Histogram& parallel, const Histogram& cross, double period_ns,
                      double peak_halfwidth_ns, std::uint32_t exclude_adjacent) {
    const PeakAreas par = peak_areas(parallel, period_ns, peak_halfwidth_ns, exclude_adjacent);
    const PeakAreas crs = peak_areas(cross, period_ns, peak_halfwidth_ns, exclude_adjacent);
    if (!(par.side_mean > 0.0) || !(crs.side_mean > 0.0))
        throw PreconditionError("side peaks are empty, normalisation undefined");
    if (!(crs.center > 0.0))
        throw PreconditionError("cross-polarised center peak is empty, visibility undefined");
    return 1.0 - (par.center / par.side_mean) / (crs.center / crs.side_mean);
}

HomCorrection correct_indistinguishability(double v_raw, double g2, double r) {
    if (!(r > 0.0 && r < 1.0)) throw PreconditionError("splitting ratio must lie in (0, 1)");
    if (g2 < 0.0) throw PreconditionError("g2 must be >= 0");
    if (v_raw <= -1.0 || v_raw > 1.0)
        throw PreconditionError("raw visibility must lie in (-1, 1]");

    const double t = 1.0 - r;
    HomCorrection c;
    c.v_raw = v_raw;
    c.g2 = g2;
    c.r = r;
    c.m = (r * r + t * t) / (2.0 * r * t) * (v_raw + g2 * (1.0 + v_raw));
    c.physical = c.m >= 0.0 && c.m <= 1.0;
    return c;
}

namespace {

constexpr std::uint64_t kSaltHomParallel = 0x70617234ULL;
constexpr std::uint64_t kSaltHomCross = 0x63727334ULL;

void hom_config(double overlap, double accidental, double r, std::uint64_t key,
                const HomSimOptions& opt, TimestampStream& det1, TimestampStream& det2) {
    const double t = 1.0 - r;
    const double s2 = r * r + t * t;
    const double p_coincide = s2 - 2.0 * r * t * overlap;
    const double p_bunch1 = r * t * (1.0 + overlap);
    const double period = 1e6 / opt.rep_rate_mhz;
    const double gamma_ps = opt.gamma_ns * kPerNsToPerPs;

    for (std::uint64_t i = 0; i < opt.n_pulses; ++i) {
        CounterRng rng(derive_key(key, i));
        const double base = static_cast<double>(i) * period;
        const double u = rng.u01();
        if (u < p_coincide) {
            det1.records.push_back(TimestampRecord{0, base + rng.exponential(gamma_ps)});
            det2.records.push_back(TimestampRecord{1, base + rng.exponential(gamma_ps)});
        } else if (u < p_coincide + p_bunch1) {
            det1.records.push_back(TimestampRecord{0, base + rng.exponential(gamma_ps)});
            det1.records.push_back(TimestampRecord{0, base + rng.exponential(gamma_ps)});
        } else {
            det2.records.push_back(TimestampRecord{1, base + rng.exponential(gamma_ps)});
            det2.records.push_back(TimestampRecord{1, base + rng.exponential(gamma_ps)});
        }
        if (rng.u01() < accidental) {
            det1.records.push_back(TimestampRecord{0, base + rng.exponential(gamma_ps)});
            det2.records.push_back(TimestampRecord{1, base + rng.exponential(gamma_ps)});
        }
    }
    for (auto* s : {&det1, &det2})
        std::sort(s->records.begin(), s->records.end(),
                  [](const TimestampRecord& a, const TimestampRecord& b) {
                      return a.t_ps < b.t_ps;
                  });
}

}  // namespace

HomStreams hom_simulate(double mean_wavepacket_overlap, double g2, double r, std::uint64_t seed,
                        const HomSimOptions& options) {
    if (mean_wavepacket_overlap < 0.0 || mean_wavepacket_overlap > 1.0)
        throw PreconditionError("wavepacket overlap must lie in [0, 1]");
    if (g2 < 0.0 || g2 >= 1.0) throw PreconditionError("g2 must lie in [0, 1)");
    if (!(r > 0.0 && r < 1.0)) throw PreconditionError("splitting ratio must lie in (0, 1)");
    if (options.n_pulses == 0) throw PreconditionError("need at least one pulse");
    if (!(options.rep_rate_mhz > 0.0)) throw PreconditionError("rep rate must be positive");
    if (!(options.gamma_ns > 0.0)) throw PreconditionError("decay rate must be positive");

    HomStreams hs;
    for (auto* s : {&hs.parallel_1, &hs.parallel_2, &hs.cross_1, &hs.cross_2}) {
        s->rep_rate_mhz = options.rep_rate_mhz;
        s->pick_factor = 1;
        s->seed = seed;
    }

    // Accidental coincidences from residual two-photon pulses add a forced
    // pair on both detectors. Interference concentrates the surviving
    // same-slot pair flux into opposite outputs, so the parallel
    // configuration carries twice the cross-polarised rate.
    const double t = 1.0 - r;
    const double s2 = r * r + t * t;
    const double acc_parallel = 2.0 * g2 * s2 / 3.0;
    const double acc_cross = g2 * s2 / 3.0;

    hom_config(mean_wavepacket_overlap, acc_parallel, r, derive_key(seed, kSaltHomParallel),
               options, hs.parallel_1, hs.parallel_2);
    hom_config(0.0, acc_cross, r, derive_key(seed, kSaltHomCross), options, hs.cross_1,
               hs.cross_2);
    return hs;
}

}  // namespace sps::analysis
