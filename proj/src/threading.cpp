#include "se2lio/threading.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace se2lio {

int thread_count(int cap) {
  int n = static_cast<int>(std::thread::hardware_concurrency());
  if (n <= 0) n = 1;
  if (const char* env = std::getenv("SE2LIO_THREADS")) {
    const int e = std::atoi(env);
    if (e > 0) n = std::min(n, e);
  }
  if (cap > 0) n = std::min(n, cap);
  return std::max(1, n);
}

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body,
                  int cap) {
  if (n == 0) return;
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(thread_count(cap)), n);
  if (workers <= 1) {
    body(0, n);
    return;
  }
  const std::size_t chunk = (n + workers - 1) / workers;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t b = w * chunk;
    const std::size_t e = std::min(n, b + chunk);
    if (b >= e) break;
    pool.emplace_back([&body, b, e] { body(b, e); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace se2lio
