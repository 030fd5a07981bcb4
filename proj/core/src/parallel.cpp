#include "fastflux/parallel.hpp"

#include <tbb/blocked_range.h>
#include <tbb/global_control.h>
#include <tbb/info.h>
#include <tbb/parallel_for.h>

#include <memory>
#include <mutex>

namespace fastflux {

namespace {

std::mutex control_mutex;
std::unique_ptr<tbb::global_control> control;
std::size_t configured = 0;

}  // namespace

void set_worker_count(std::size_t workers)
{
    std::lock_guard lock(control_mutex);
    control.reset();
    configured = workers;
    if (workers > 0) control = std::make_unique<tbb::global_control>(tbb::global_control::max_allowed_parallelism, workers);
}

std::size_t worker_count()
{
    std::lock_guard lock(control_mutex);
    return configured > 0 ? configured : static_cast<std::size_t>(tbb::info::default_concurrency());
}

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body)
{
    if (n == 0) return;
    tbb::parallel_for(tbb::blocked_range<std::size_t>(0, n),
                      [&](const tbb::blocked_range<std::size_t>& r) { body(r.begin(), r.end()); });
}

}  // namespace fastflux
