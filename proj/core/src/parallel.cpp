#include "stablefield/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace stablefield {

std::size_t worker_count(std::size_t requested) {
  std::size_t workers = requested;
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  if (const char* cap = std::getenv("STABLEFIELD_THREADS")) {
    try {
      const long value = std::stol(cap);
      if (value > 0) workers = std::min(workers, static_cast<std::size_t>(value));
    } catch (const std::exception&) {
      // malformed cap is ignored
    }
  }
  return std::max<std::size_t>(1, workers);
}

void parallel_for(std::size_t n, std::size_t workers,
                  const std::function<void(std::size_t, std::size_t)>& body,
                  std::size_t chunk) {
  if (n == 0) return;
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (chunk == 0) chunk = std::max<std::size_t>(1, n / (workers * 8));
  if (workers == 1) {
    for (std::size_t begin = 0; begin < n; begin += chunk) body(begin, std::min(n, begin + chunk));
    return;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t begin = next.fetch_add(chunk);
      if (begin >= n) return;
      try {
        body(begin, std::min(n, begin + chunk));
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(n);
        return;
      }
    }
  };

  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  pool.clear();
  if (error) std::rethrow_exception(error);
}

}  // namespace stablefield
