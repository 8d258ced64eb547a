#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace ergo {

int workers();
void set_workers(int k);

// runs fn(i) for i in [0, n) over contiguous chunks; fn must only write to slot i
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, workers())), n);
  if (k <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::exception_ptr err;
  std::mutex mu;
  std::size_t chunk = (n + k - 1) / k;
  for (std::size_t t = 0; t < k; ++t) {
    std::size_t lo = t * chunk, hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&, lo, hi] {
      try {
        for (std::size_t i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> g(mu);
        if (!err) err = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace ergo
