#pragma once

#include <algorithm>
#include <cstdlib>
#include <execution>
#include <optional>
#include <vector>

#include <tbb/global_control.h>

namespace isaacs::detail {

/// Worker cap from ISAACS_FD_MAX_THREADS; 0 means no cap requested.
inline int env_thread_cap() {
    if (const char* s = std::getenv("ISAACS_FD_MAX_THREADS")) {
        const int v = std::atoi(s);
        if (v >= 1) return v;
    }
    return 0;
}

/// Scoped application of the thread cap for the duration of a solve.
struct ThreadGuard {
    std::optional<tbb::global_control> control;
    bool parallel_enabled = true;

    ThreadGuard() {
        const int cap = env_thread_cap();
        if (cap == 1) parallel_enabled = false;
        if (cap > 1)
            control.emplace(tbb::global_control::max_allowed_parallelism,
                            static_cast<std::size_t>(cap));
    }
};

/// Point counts below this run serially; thread dispatch costs more than it
/// saves on desk-scale slices.
inline constexpr std::size_t kParallelGrain = 512;

template <typename Body>
void for_each_index(const std::vector<std::size_t>& indices, bool allow_parallel,
                    Body&& body) {
    if (allow_parallel && indices.size() >= kParallelGrain) {
        std::for_each(std::execution::par, indices.begin(), indices.end(), body);
    } else {
        for (std::size_t i : indices) body(i);
    }
}

}  // namespace isaacs::detail
