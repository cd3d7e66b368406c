#pragma once

// Data-parallel loops with results stored by index, so the merge order never
// depends on scheduling.

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace reebpa {

/// Worker count: the value set by set_default_workers, else REEBPA_WORKERS,
/// else the number of logical cores.
int default_workers();
void set_default_workers(int workers);

/// Calls f(i) for i in [0, n). The exception of the lowest failing index is rethrown.
template <class F>
void parallel_for(std::size_t n, F&& f, int workers = 0) {
  if (workers <= 0) workers = default_workers();
  const std::size_t w = std::min<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), n);
  if (w <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::vector<std::exception_ptr> errors(w);
  std::vector<std::thread> pool;
  pool.reserve(w);
  for (std::size_t c = 0; c < w; ++c) {
    pool.emplace_back([&, c] {
      const std::size_t begin = n * c / w;
      const std::size_t end = n * (c + 1) / w;
      for (std::size_t i = begin; i < end; ++i) {
        try {
          f(i);
        } catch (...) {
          errors[c] = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (std::size_t c = 0; c < w; ++c)
    if (errors[c]) std::rethrow_exception(errors[c]);
}

template <class T, class F>
std::vector<T> parallel_map(std::size_t n, F&& f, int workers = 0) {
  std::vector<T> out(n);
  parallel_for(n, [&](std::size_t i) { out[i] = f(i); }, workers);
  return out;
}

}  // namespace reebpa
