#pragma once

#include <cstddef>
#include <functional>

namespace invdes {

// Static-partition parallel loop. Workers write to disjoint per-index
// slots, so results never depend on the thread count.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace invdes
