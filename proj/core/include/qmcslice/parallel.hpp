#pragma once

#include <cstddef>
#include <functional>

namespace qmcslice {

// Splits [0, n) into `threads` contiguous chunks; fn(begin, end, chunk) runs
// on each. threads <= 1 runs inline. Exceptions are rethrown in chunk order.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t, std::size_t, int)>& fn);

}  // namespace qmcslice
