#pragma once

#include <cstdint>
#include <cmath>
#include <functional>
#include <thread>
#include <vector>

namespace torusfold {

// Counter-free splitmix64 generator. Used instead of std::mt19937 so that
// streams are reproducible bit-for-bit across platforms and standard
// libraries, and so that sub-streams can be derived cheaply per work chunk.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Marsaglia polar method; deterministic given the stream.
    double normal() {
        for (;;) {
            double u = 2.0 * uniform() - 1.0;
            double v = 2.0 * uniform() - 1.0;
            double s = u * u + v * v;
            if (s > 0.0 && s < 1.0) {
                return u * std::sqrt(-2.0 * std::log(s) / s);
            }
        }
    }

    // Sub-stream seed derived from (seed, index); independent of call order.
    static std::uint64_t derive(std::uint64_t seed, std::uint64_t index) {
        Rng r(seed ^ (0x517cc1b727220a95ull * (index + 1)));
        return r.next_u64();
    }

private:
    std::uint64_t state_;
};

// Runs fn(chunk_index, begin, end) over [0, total) split into fixed-size
// chunks. The chunk grid does not depend on the thread count, so any
// per-chunk RNG derivation gives identical results for 1 or N workers.
inline void parallel_chunks(std::size_t total, std::size_t chunk_size, unsigned threads,
                            const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
    if (total == 0) return;
    if (chunk_size == 0) chunk_size = 1;
    const std::size_t n_chunks = (total + chunk_size - 1) / chunk_size;
    if (threads == 0) threads = 1;
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, n_chunks));

    if (threads <= 1) {
        for (std::size_t c = 0; c < n_chunks; ++c) {
            fn(c, c * chunk_size, std::min(total, (c + 1) * chunk_size));
        }
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([=, &fn] {
            for (std::size_t c = t; c < n_chunks; c += threads) {
                fn(c, c * chunk_size, std::min(total, (c + 1) * chunk_size));
            }
        });
    }
    for (auto& th : pool) th.join();
}

inline unsigned default_threads() {
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

} // namespace torusfold
