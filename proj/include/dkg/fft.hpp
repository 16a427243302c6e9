#pragma once

// Thin FFTW wrapper. Plans are created once per (shape, direction) under a
// mutex; execution uses the new-array interface, which FFTW guarantees to be
// thread-safe for distinct arrays.

#include <fftw3.h>

#include <complex>
#include <map>
#include <mutex>
#include <vector>

namespace dkg::fft {

enum class Direction { forward, backward };

namespace detail {

struct PlanKey {
    int rank;
    int n;
    Direction dir;
    auto operator<=>(const PlanKey&) const = default;
};

class PlanCache {
public:
    static PlanCache& instance() {
        static PlanCache cache;
        return cache;
    }

    fftw_plan get(int rank, int n, Direction dir) {
        std::lock_guard lock(mutex_);
        PlanKey key{rank, n, dir};
        if (auto it = plans_.find(key); it != plans_.end()) return it->second;

        std::size_t total = 1;
        std::vector<int> dims(static_cast<std::size_t>(rank), n);
        for (int d : dims) total *= static_cast<std::size_t>(d);
        std::vector<std::complex<double>> scratch(total);
        auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
        const int sign = dir == Direction::forward ? FFTW_FORWARD : FFTW_BACKWARD;
        fftw_plan plan = fftw_plan_dft(rank, dims.data(), buf, buf, sign,
                                       FFTW_ESTIMATE | FFTW_UNALIGNED);
        plans_.emplace(key, plan);
        return plan;
    }

    PlanCache(const PlanCache&) = delete;
    PlanCache& operator=(const PlanCache&) = delete;

private:
    PlanCache() = default;
    ~PlanCache() {
        for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
    }

    std::mutex mutex_;
    std::map<PlanKey, fftw_plan> plans_;
};

}  // namespace detail

/// In-place unnormalized DFT over a rank-`rank` cube with `n` points per
/// axis (row-major). The backward transform is not divided by n^rank.
inline void execute(std::vector<std::complex<double>>& data, int rank, int n,
                    Direction dir) {
    fftw_plan plan = detail::PlanCache::instance().get(rank, n, dir);
    auto* buf = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(plan, buf, buf);
}

}  // namespace dkg::fft
