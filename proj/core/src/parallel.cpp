#include "seqdf/parallel.hpp"

#include <algorithm>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace seqdf {

int default_workers() {
  unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

void parallel_for_reps(std::size_t n, int workers,
                       const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  int w = workers <= 0 ? default_workers() : workers;
  w = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(w), n));

  if (w == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }

  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> threads;
  threads.reserve(static_cast<std::size_t>(w));

  // Contiguous blocks; block boundaries depend only on (n, w), never on
  // timing, and every rep writes results keyed by its own index.
  const std::size_t base = n / static_cast<std::size_t>(w);
  const std::size_t extra = n % static_cast<std::size_t>(w);
  std::size_t begin = 0;
  for (int wi = 0; wi < w; ++wi) {
    const std::size_t len = base + (static_cast<std::size_t>(wi) < extra ? 1 : 0);
    const std::size_t end = begin + len;
    threads.emplace_back([begin, end, &fn, &first_error, &error_mutex] {
      for (std::size_t i = begin; i < end; ++i) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    });
    begin = end;
  }
  for (auto& t : threads) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace seqdf
