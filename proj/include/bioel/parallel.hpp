#pragma once

#include <cstddef>
#include <functional>

namespace bioel {

int default_threads();

// Runs body(i) for i in [0, n) on up to `threads` workers. Work items must
// write to disjoint state; scheduling order is unspecified, so determinism
// comes from the items themselves, never from completion order.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body);

}  // namespace bioel
