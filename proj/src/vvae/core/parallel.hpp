#pragma once

#include <cstddef>
#include <functional>

namespace vvae {

// Process-wide worker count (>= 1). Defaults to hardware concurrency.
void set_threads(int n);
int threads();

// Runs fn over a static contiguous partition of [0, n). The split depends
// only on n, grain and the configured thread count, never on scheduling, so
// any value computed exactly once per index is reproducible.
void parallel_for(std::size_t n, std::size_t grain,
                  const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace vvae
