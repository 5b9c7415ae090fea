#pragma once

// Minimal blocking fork-join helper. Work is split into index-addressed
// parts so results land in preassigned slots; reductions stay sequential
// in the caller, which keeps outputs byte-identical for any part count.

#include <exception>
#include <thread>
#include <vector>

#include "errors.hpp"

namespace cospec {

// Runs f(0), .., f(parts-1); inline when parts == 1. The first captured
// worker exception is rethrown after all workers joined.
template <class F>
inline void run_partitioned(int parts, F&& f) {
    if (parts < 1) throw InvalidArgument("partition count must be >= 1");
    if (parts == 1) {
        f(0);
        return;
    }
    std::vector<std::thread> workers;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(parts));
    workers.reserve(static_cast<std::size_t>(parts));
    for (int p = 0; p < parts; ++p) {
        workers.emplace_back([&f, &errors, p] {
            try {
                f(p);
            } catch (...) {
                errors[static_cast<std::size_t>(p)] = std::current_exception();
            }
        });
    }
    for (auto& w : workers) w.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

inline int default_partitions(int requested) {
    if (requested > 0) return requested;
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

} // namespace cospec
