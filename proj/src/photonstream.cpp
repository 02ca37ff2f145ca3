#include "sps/photonstream.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>

#include "sps/errors.hpp"
#include "sps/units.hpp"

namespace sps::photonstream {

namespace {

constexpr std::uint64_t kSaltEmit = 0x656d6974ULL;
constexpr std::uint64_t kSaltLoss = 0x6c6f7373ULL;
constexpr std::uint64_t kSaltSplit = 0x73706c74ULL;
constexpr std::uint64_t kSaltThin = 0x7468696eULL;
constexpr std::uint64_t kSaltJitter = 0x6a697474ULL;

void sort_records(std::vector<TimestampRecord>& records) {
    std::sort(records.begin(), records.end(), [](const TimestampRecord& a, const TimestampRecord& b) {
        if (a.t_ps != b.t_ps) return a.t_ps < b.t_ps;
        return a.channel < b.channel;
    });
}

}  // namespace

void PulseTrain::validate() const {
    if (!(rep_rate_mhz > 0.0)) throw PreconditionError("rep rate must be positive");
    if (pick_factor == 0) throw PreconditionError("pick factor must be >= 1");
    if (n_pulses == 0) throw PreconditionError("pulse train must contain at least one pulse");
}

void DetectorModel::validate() const {
    if (efficiency < 0.0 || efficiency > 1.0)
        throw PreconditionError("detector efficiency must lie in [0, 1]");
    if (dead_time_ns < 0.0) throw PreconditionError("dead time must be >= 0");
    if (jitter_sigma_ps < 0.0) throw PreconditionError("jitter sigma must be >= 0");
}

std::uint64_t TimestampStream::digest() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](const unsigned char* p, std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) {
            h ^= p[i];
            h *= 0x100000001b3ULL;
        }
    };
    const std::uint64_t count = records.size();
    mix(reinterpret_cast<const unsigned char*>(&count), sizeof count);
    for (const auto& r : records) {
        mix(&r.channel, 1);
        mix(reinterpret_cast<const unsigned char*>(&r.t_ps), sizeof r.t_ps);
    }
    return h;
}

BernoulliSource::BernoulliSource(double p) : p_(p) {
    if (p < 0.0 || p > 1.0) throw PreconditionError("emission probability must lie in [0, 1]");
}

std::size_t BernoulliSource::sample(std::uint64_t, CounterRng& rng,
                                    std::vector<double>&) const {
    return rng.u01() < p_ ? 1 : 0;
}

DistributionSource::DistributionSource(std::vector<double> pn) {
    if (pn.empty()) throw PreconditionError("photon-number distribution must be non-empty");
    double total = 0.0;
    for (double p : pn) {
        if (p < 0.0) throw PreconditionError("photon-number probabilities must be >= 0");
        total += p;
        cdf_.push_back(total);
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw PreconditionError("photon-number distribution must sum to 1, got " +
                                std::to_string(total));
    cdf_.back() = 1.0;
}

std::size_t DistributionSource::sample(std::uint64_t, CounterRng& rng,
                                       std::vector<double>&) const {
    const double u = rng.u01();
    for (std::size_t n = 0; n < cdf_.size(); ++n)
        if (u < cdf_[n]) return n;
    return cdf_.size() - 1;
}

TrajectorySource::TrajectorySource(std::vector<std::vector<double>> jump_records_ps)
    : records_(std::move(jump_records_ps)) {
    if (records_.empty()) throw PreconditionError("trajectory source needs at least one record");
}

std::size_t TrajectorySource::sample(std::uint64_t, CounterRng& rng,
                                     std::vector<double>& offsets_ps) const {
    const auto idx = static_cast<std::size_t>(rng.next_bits() % records_.size());
    const auto& rec = records_[idx];
    offsets_ps.insert(offsets_ps.end(), rec.begin(), rec.end());
    return rec.size();
}

TimestampStream emit_stream(const PulseSource& source, const PulseTrain& train, double gamma_ns,
                            std::uint64_t seed) {
    train.validate();
    if (!(gamma_ns > 0.0)) throw PreconditionError("decay rate must be positive");

    const double period = train.period_ps();
    const double gamma_ps = gamma_ns * kPerNsToPerPs;
    const std::uint64_t root = derive_key(seed, kSaltEmit);

    TimestampStream stream;
    stream.rep_rate_mhz = train.rep_rate_mhz;
    stream.pick_factor = train.pick_factor;
    stream.seed = seed;
    stream.records.reserve(train.n_pulses);

    std::vector<double> offsets;
    bool ordered = true;
    double last_t = -1.0;
    for (std::uint64_t i = 0; i < train.n_pulses; ++i) {
        CounterRng rng(derive_key(root, i));
        offsets.clear();
        const std::size_t count = source.sample(i, rng, offsets);
        while (offsets.size() < count) offsets.push_back(rng.exponential(gamma_ps));
        std::sort(offsets.begin(), offsets.end());

        const double base = static_cast<double>(i) * period;
        for (std::size_t c = 0; c < count; ++c) {
            const double t = base + offsets[c];
            if (t < last_t) ordered = false;
            last_t = t;
            stream.records.push_back(TimestampRecord{0, t});
        }
    }
    // Offsets beyond one period (possible for slow decay) can interleave
    // neighbouring pulses.
    if (!ordered) sort_records(stream.records);
    return stream;
}

TimestampStream apply_loss(const TimestampStream& stream, double transmission,
                           std::uint64_t seed) {
    if (transmission < 0.0 || transmission > 1.0)
        throw PreconditionError("transmission must lie in [0, 1]");

    const std::uint64_t key = derive_key(seed, kSaltLoss);
    TimestampStream out;
    out.rep_rate_mhz = stream.rep_rate_mhz;
    out.pick_factor = stream.pick_factor;
    out.seed = stream.seed;
    out.records.reserve(stream.records.size());
    for (std::size_t i = 0; i < stream.records.size(); ++i)
        if (u01_at(key, i) < transmission) out.records.push_back(stream.records[i]);
    return out;
}

std::pair<TimestampStream, TimestampStream> beamsplit(const TimestampStream& stream, double r,
                                                      std::uint64_t seed) {
    if (r < 0.0 || r > 1.0) throw PreconditionError("splitting ratio must lie in [0, 1]");

    const std::uint64_t key = derive_key(seed, kSaltSplit);
    TimestampStream first, second;
    for (auto* s : {&first, &second}) {
        s->rep_rate_mhz = stream.rep_rate_mhz;
        s->pick_factor = stream.pick_factor;
        s->seed = stream.seed;
    }
    for (std::size_t i = 0; i < stream.records.size(); ++i) {
        if (u01_at(key, i) < r)
            first.records.push_back(stream.records[i]);
        else
            second.records.push_back(stream.records[i]);
    }
    return {std::move(first), std::move(second)};
}

TimestampStream detect(const TimestampStream& stream, const DetectorModel& detector,
                       std::uint64_t seed) {
    detector.validate();

    const std::uint64_t thin_key = derive_key(seed, kSaltThin);
    const std::uint64_t jitter_key = derive_key(seed, kSaltJitter);

    TimestampStream out;
    out.rep_rate_mhz = stream.rep_rate_mhz;
    out.pick_factor = stream.pick_factor;
    out.seed = stream.seed;
    out.records.reserve(stream.records.size());

    for (std::size_t i = 0; i < stream.records.size(); ++i) {
        if (u01_at(thin_key, i) >= detector.efficiency) continue;
        TimestampRecord rec = stream.records[i];
        if (detector.jitter_sigma_ps > 0.0) {
            const double u1 = u01_at(jitter_key, 2 * i);
            const double u2 = u01_at(jitter_key, 2 * i + 1);
            const double z = std::sqrt(-2.0 * std::log1p(-u1)) * std::cos(2.0 * kPi * u2);
            rec.t_ps += detector.jitter_sigma_ps * z;
        }
        out.records.push_back(rec);
    }
    if (detector.jitter_sigma_ps > 0.0) sort_records(out.records);

    if (detector.dead_time_ns > 0.0) {
        const double dead_ps = detector.dead_time_ns * 1e3;
        std::vector<double> last_kept(256, -std::numeric_limits<double>::infinity());
        std::size_t kept = 0;
        for (const auto& rec : out.records) {
            if (rec.t_ps - last_kept[rec.channel] >= dead_ps) {
                last_kept[rec.channel] = rec.t_ps;
                out.records[kept++] = rec;
            }
        }
        out.records.resize(kept);
    }
    return out;
}

void write_timestamps_csv(const TimestampStream& stream, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw PreconditionError("cannot open for writing: " + path);

    char line[96];
    std::snprintf(line, sizeof line, "# rep_rate_mhz=%.17g pick_factor=%u seed=%llu\n",
                  stream.rep_rate_mhz, stream.pick_factor,
                  static_cast<unsigned long long>(stream.seed));
    out << line << "channel,t_ps\n";
    for (const auto& r : stream.records) {
        std::snprintf(line, sizeof line, "%u,%.3f\n", static_cast<unsigned>(r.channel), r.t_ps);
        out << line;
    }
    if (!out) throw PreconditionError("write failed: " + path);
}

TimestampStream read_timestamps_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw PreconditionError("cannot open for reading: " + path);

    TimestampStream stream;
    std::string header;
    std::getline(in, header);
    unsigned pick = 0;
    unsigned long long seed = 0;
    if (std::sscanf(header.c_str(), "# rep_rate_mhz=%lg pick_factor=%u seed=%llu",
                    &stream.rep_rate_mhz, &pick, &seed) != 3)
        throw PreconditionError("bad timestamp header in " + path + ": " + header);
    stream.pick_factor = pick;
    stream.seed = seed;

    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line == "channel,t_ps") continue;
        unsigned ch;
        double t;
        if (std::sscanf(line.c_str(), "%u,%lg", &ch, &t) != 2)
            throw PreconditionError("bad timestamp row in " + path + ": " + line);
        if (ch > 255) throw PreconditionError("channel out of range in " + path);
        stream.records.push_back(TimestampRecord{static_cast<std::uint8_t>(ch), t});
    }
    return stream;
}

void write_timestamps_binary(const TimestampStream& stream, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw PreconditionError("cannot open for writing: " + path);

    out.write("PFTS", 4);
    for (const auto& r : stream.records) {
        if (r.t_ps < 0.0)
            throw PreconditionError("negative timestamp cannot be stored in binary format");
        const auto t = static_cast<std::uint64_t>(std::llround(r.t_ps));
        unsigned char buf[9];
        buf[0] = r.channel;
        for (int b = 0; b < 8; ++b) buf[1 + b] = static_cast<unsigned char>((t >> (8 * b)) & 0xff);
        out.write(reinterpret_cast<const char*>(buf), 9);
    }
    if (!out) throw PreconditionError("write failed: " + path);
}

TimestampStream read_timestamps_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw PreconditionError("cannot open for reading: " + path);

    char magic[4];
    in.read(magic, 4);
    if (in.gcount() != 4 || std::memcmp(magic, "PFTS", 4) != 0)
        throw PreconditionError("bad magic in " + path);

    TimestampStream stream;
    unsigned char buf[9];
    while (in.read(reinterpret_cast<char*>(buf), 9)) {
        std::uint64_t t = 0;
        for (int b = 0; b < 8; ++b) t |= static_cast<std::uint64_t>(buf[1 + b]) << (8 * b);
        stream.records.push_back(TimestampRecord{buf[0], static_cast<double>(t)});
    }
    if (in.gcount() != 0) throw PreconditionError("truncated record in " + path);
    return stream;
}

}  // namespace sps::photonstream
