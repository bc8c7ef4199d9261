// parallel.hpp
// Static-partition parallel loop over frequency bins. Workers write to
// disjoint per-bin slots, so results are identical for any thread count.
// BEAMKIT_THREADS caps the pool size.

#ifndef BEAMKIT_PARALLEL_HPP
#define BEAMKIT_PARALLEL_HPP

#include <functional>

namespace beamkit {

int worker_count();

// Runs fn(k) for k in [0, n). Exceptions from workers are rethrown on the
// calling thread (first one wins).
void parallel_for(int n, const std::function<void(int)>& fn);

}  // namespace beamkit

#endif  // BEAMKIT_PARALLEL_HPP
