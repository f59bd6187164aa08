#pragma once

#include <cstdint>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace bvqft {

// Worker cap from BVQFT_THREADS; defaults to single-threaded execution.
inline int worker_count() {
    if (const char* env = std::getenv("BVQFT_THREADS")) {
        int n = std::atoi(env);
        if (n > 0) return n;
    }
    return 1;
}

// Splits [0, n) across workers. Bodies must write to disjoint slots.
inline void parallel_for(int n, const std::function<void(int)>& body) {
    int workers = std::min(worker_count(), n);
    if (workers <= 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (int i = w; i < n; i += workers) body(i);
        });
    }
    for (auto& t : pool) t.join();
}

// Deterministic generator for test vectors and section perturbations.
struct Rng {
    uint64_t state;
    explicit Rng(uint64_t seed) : state(seed ? seed : 0x9e3779b97f4a7c15ull) {}
    uint64_t next() {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        return state;
    }
    // small integer in [-bound, bound]
    long small(long bound = 3) { return static_cast<long>(next() % (2 * bound + 1)) - bound; }
};

}  // namespace bvqft
