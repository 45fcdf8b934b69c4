#pragma once

#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace olab {

// Runs fn(i) for i in [0, count). Each index must be independent (seeded by
// counter splitting) and write only to its own output slot, so the result is
// identical for any job count; callers reduce the slots in index order. A
// throwing kernel aborts the sweep and rethrows on the calling thread (the
// exception from the lowest worker id wins, for a deterministic error).
inline void parallel_for(std::size_t count, int jobs,
                         const std::function<void(std::size_t)>& fn) {
  if (jobs <= 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  const int nthreads = std::min<std::size_t>(jobs, count);
  std::vector<std::thread> threads;
  std::vector<std::exception_ptr> errors(nthreads);
  threads.reserve(nthreads);
  for (int t = 0; t < nthreads; ++t) {
    threads.emplace_back([&, t]() {
      try {
        for (std::size_t i = t; i < count; i += nthreads) fn(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : threads) th.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

inline int default_jobs() {
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

}  // namespace olab
