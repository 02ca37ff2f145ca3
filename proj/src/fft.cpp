#include "sps/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>

namespace sps::fft {

namespace {

// One cached plan per (size, direction). FFTW_ESTIMATE picks the plan from
// fixed heuristics rather than timing runs, which keeps replanning
// deterministic. FFTW_UNALIGNED lets the plan execute on whatever buffer the
// caller hands over via fftw_execute_dft.
class PlanCache {
  public:
    fftw_plan get(std::size_t n, int sign) {
        std::lock_guard<std::mutex> lock(mutex_);
        auto key = std::make_pair(n, sign);
        auto it = plans_.find(key);
        if (it != plans_.end()) return it->second;

        std::vector<fftw_complex> scratch(n);
        fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(n), scratch.data(), scratch.data(),
                                          sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
        if (!plan) throw std::runtime_error("fftw plan creation failed");
        plans_.emplace(key, plan);
        return plan;
    }

  private:
    std::mutex mutex_;
    std::map<std::pair<std::size_t, int>, fftw_plan> plans_;
};

PlanCache& cache() {
    static PlanCache instance;
    return instance;
}

void execute(std::vector<std::complex<double>>& data, int sign) {
    if (data.empty()) return;
    fftw_plan plan = cache().get(data.size(), sign);
    auto* raw = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(plan, raw, raw);
}

}  // namespace

void forward(std::vector<std::complex<double>>& data) {
    execute(data, FFTW_FORWARD);
}

void backward(std::vector<std::complex<double>>& data) {
    execute(data, FFTW_BACKWARD);
    const double scale = 1.0 / static_cast<double>(data.size());
    for (auto& v : data) v *= scale;
}

double bin_frequency_ghz(std::size_t k, std::size_t n, double dt_ps) {
    const double df_cycles_per_ps = 1.0 / (static_cast<double>(n) * dt_ps);
    double idx = static_cast<double>(k);
    if (k >= n / 2) idx -= static_cast<double>(n);
    return idx * df_cycles_per_ps * 1e3;  // cycles/ps -> GHz
}

}  // namespace sps::fft
