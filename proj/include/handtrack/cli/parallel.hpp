#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "handtrack/error.hpp"

namespace handtrack {

/// Runs fn(0..n-1) on up to `jobs` threads. Each index writes only its own
/// slot, so results do not depend on scheduling; the exception of the
/// lowest failing index is rethrown.
template <typename Fn>
void parallel_for(std::size_t n, int jobs, Fn&& fn) {
    if (jobs < 1) throw ConfigError("--jobs must be >= 1");
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(jobs), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < n;) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

/// Default worker count: HANDTRACK_JOBS if set, else 1.
inline int default_jobs() {
    const char* env = std::getenv("HANDTRACK_JOBS");
    if (!env || !*env) return 1;
    try {
        std::size_t used = 0;
        const int v = std::stoi(env, &used);
        if (used != std::string(env).size() || v < 1) throw std::invalid_argument("range");
        return v;
    } catch (const std::exception&) {
        throw ConfigError(std::string("HANDTRACK_JOBS must be a positive integer, got '") + env + "'");
    }
}

}  // namespace handtrack
