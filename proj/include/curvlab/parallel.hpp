#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace curvlab {

/// Thread count from CURVLAB_THREADS, or 1 when unset or malformed.
inline int threads_from_env() {
  if (const char* v = std::getenv("CURVLAB_THREADS")) {
    try {
      const int t = std::stoi(v);
      if (t > 0) return t;
    } catch (...) {
    }
  }
  return 1;
}

/// Runs body(i) for i in [0, count) on up to `threads` workers. Each index is
/// handled exactly once; callers write into per-index slots and reduce in
/// index order, so results do not depend on the thread count. The first
/// exception (lowest index) is rethrown.
template <class Body>
void parallel_for(std::size_t count, int threads, Body&& body) {
  const auto workers = static_cast<std::size_t>(std::max(1, threads));
  if (workers == 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(count);
  std::vector<std::thread> pool;
  const std::size_t used = std::min(workers, count);
  for (std::size_t w = 0; w < used; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < count; i += used) {
        try {
          body(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace curvlab
