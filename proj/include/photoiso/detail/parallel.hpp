#pragma once
#include <algorithm>
#include <atomic>
#include <future>
#include <optional>
#include <vector>

namespace photoiso {

template <class R, class F>
std::vector<R> parallel_map(int n, int threads, F fn) {
  std::vector<std::optional<R>> slots(n);
  if (threads <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) slots[i].emplace(fn(i));
  } else {
    std::atomic<int> next{0};
    auto worker = [&] {
      for (int i = next++; i < n; i = next++) slots[i].emplace(fn(i));
    };
    std::vector<std::future<void>> pool;
    for (int k = 0; k < std::min(threads, n); ++k) pool.push_back(std::async(std::launch::async, worker));
    // get() rethrows the first worker exception after all have stopped
    std::exception_ptr first;
    for (auto& f : pool) {
      try {
        f.get();
      } catch (...) {
        if (!first) first = std::current_exception();
      }
    }
    if (first) std::rethrow_exception(first);
  }
  std::vector<R> out;
  out.reserve(n);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace photoiso
