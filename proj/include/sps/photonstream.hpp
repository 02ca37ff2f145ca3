#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sps/rng.hpp"

namespace sps::photonstream {

// Excitation pulse train after pulse picking: effective period is
// pick_factor / rep_rate.
struct PulseTrain {
    double rep_rate_mhz = 76.13;
    std::uint32_t pick_factor = 1;
    std::uint64_t n_pulses = 0;

    double period_ps() const {
        return 1e6 / rep_rate_mhz * static_cast<double>(pick_factor);
    }
    void validate() const;
};

// Non-paralyzable click detector: efficiency thinning, Gaussian timing
// jitter, then a hard dead time per channel.
struct DetectorModel {
    double efficiency = 1.0;
    double dead_time_ns = 0.0;
    double jitter_sigma_ps = 0.0;

    void validate() const;
};

struct TimestampRecord {
    std::uint8_t channel = 0;
    double t_ps = 0.0;
};

// Time-ordered click records plus the provenance needed to regenerate them.
struct TimestampStream {
    std::vector<TimestampRecord> records;
    double rep_rate_mhz = 76.13;
    std::uint32_t pick_factor = 1;
    std::uint64_t seed = 0;

    std::size_t size() const { return records.size(); }

    // FNV-1a over the packed record layout; stable identity for reports.
    std::uint64_t digest() const;
};

// Per-pulse emission model. sample() returns how many photons the pulse
// yields and may append that many offsets (ps after the pulse arrival); when
// it appends none, the caller draws exponential offsets at the decay rate.
class PulseSource {
  public:
    virtual ~PulseSource() = default;
    virtual std::size_t sample(std::uint64_t pulse_index, CounterRng& rng,
                               std::vector<double>& offsets_ps) const = 0;
};

// At most one photon per pulse, emitted with probability p.
class BernoulliSource final : public PulseSource {
  public:
    explicit BernoulliSource(double p);
    std::size_t sample(std::uint64_t pulse_index, CounterRng& rng,
                       std::vector<double>& offsets_ps) const override;

  private:
    double p_;
};

// Photon number drawn from an explicit distribution p0..pn.
class DistributionSource final : public PulseSource {
  public:
    explicit DistributionSource(std::vector<double> pn);
    std::size_t sample(std::uint64_t pulse_index, CounterRng& rng,
                       std::vector<double>& offsets_ps) const override;

  private:
    std::vector<double> cdf_;
};

// Replays emission records from a trajectory ensemble: each pulse picks a
// uniformly random trajectory and emits at its recorded offsets.
class TrajectorySource final : public PulseSource {
  public:
    explicit TrajectorySource(std::vector<std::vector<double>> jump_records_ps);
    std::size_t sample(std::uint64_t pulse_index, CounterRng& rng,
                       std::vector<double>& offsets_ps) const override;

  private:
    std::vector<std::vector<double>> records_;
};

// Expands per-pulse emissions into an absolute-time click stream on channel 0.
// gamma_ns sets the exponential offset distribution used when the source does
// not supply offsets.
TimestampStream emit_stream(const PulseSource& source, const PulseTrain& train, double gamma_ns,
                            std::uint64_t seed);

// Bernoulli thinning with the given transmission.
TimestampStream apply_loss(const TimestampStream& stream, double transmission,
                           std::uint64_t seed);

// Routes each record to the first output with probability r, else the second.
// Record channels and ordering are preserved within each output.
std::pair<TimestampStream, TimestampStream> beamsplit(const TimestampStream& stream, double r,
                                                      std::uint64_t seed);

// Efficiency thinning, then timing jitter, then per-channel dead time, in
// that order.
TimestampStream detect(const TimestampStream& stream, const DetectorModel& detector,
                       std::uint64_t seed);

// CSV: header `# rep_rate_mhz=<v> pick_factor=<k> seed=<s>`, a `channel,t_ps`
// column line, then one row per record with t_ps at fixed 1e-3 ps resolution.
void write_timestamps_csv(const TimestampStream& stream, const std::string& path);
TimestampStream read_timestamps_csv(const std::string& path);

// Binary: magic "PFTS", then little-endian records of 1-byte channel and
// 8-byte unsigned picoseconds (rounded). Rejects negative timestamps.
void write_timestamps_binary(const TimestampStream& stream, const std::string& path);
TimestampStream read_timestamps_binary(const std::string& path);

}  // namespace sps::photonstream
