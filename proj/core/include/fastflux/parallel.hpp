#pragma once

#include <cstddef>
#include <functional>

namespace fastflux {

// Caps the worker pool used below the operation boundary; 0 restores the default (all cores).
void set_worker_count(std::size_t workers);
std::size_t worker_count();

// Calls body(begin, end) over disjoint chunks of [0, n). Results must not depend on the chunking.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace fastflux
