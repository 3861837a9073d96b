#pragma once

#include <cstddef>
#include <functional>

namespace gvs {

// Number of workers used when jobs <= 0.
int default_jobs();

// Runs body(i) for i in [0, count) on up to `jobs` threads. Work is handed
// out by index; callers write results into slot i so output order never
// depends on scheduling. The first exception (lowest index) is rethrown.
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& body);

}  // namespace gvs
