#include "qmcslice/parallel.hpp"

#include <algorithm>
#include <exception>
#include <thread>
#include <vector>

namespace qmcslice {

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t, std::size_t, int)>& fn) {
  if (n == 0) return;
  const std::size_t t = std::clamp<std::size_t>(threads < 1 ? 1 : static_cast<std::size_t>(threads), 1, n);
  if (t == 1) {
    fn(0, n, 0);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(t);
  for (std::size_t c = 0; c < t; ++c) {
    const std::size_t b = n * c / t, e = n * (c + 1) / t;
    pool.emplace_back([&, b, e, c] {
      try {
        fn(b, e, static_cast<int>(c));
      } catch (...) {
        errors[c] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace qmcslice
