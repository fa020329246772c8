#include "graflow/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>

namespace graflow {

namespace {
constexpr std::size_t kBlock = 4096;  // fixed reduction block, independent of threads
}

int worker_count() {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw <= 0) hw = 1;
  if (const char* env = std::getenv("GRAFLOW_THREADS")) {
    char* end = nullptr;
    long cap = std::strtol(env, &end, 10);
    if (end != env && cap > 0) hw = std::min<long>(hw, cap);
  }
  return hw;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body) {
  if (n == 0) return;
  const int workers = std::min<std::size_t>(worker_count(), n);
  if (workers <= 1 || n < 2 * kBlock) {
    body(0, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const std::size_t lo = std::min(n, w * chunk);
    const std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&, lo, hi] { body(lo, hi); });
  }
  for (auto& t : pool) t.join();
}

double block_reduce(std::size_t n, const std::function<double(std::size_t, std::size_t)>& block_sum) {
  if (n == 0) return 0.0;
  const std::size_t nblocks = (n + kBlock - 1) / kBlock;
  std::vector<double> partial(nblocks, 0.0);
  parallel_for(nblocks, [&](std::size_t b0, std::size_t b1) {
    for (std::size_t b = b0; b < b1; ++b) {
      const std::size_t lo = b * kBlock;
      const std::size_t hi = std::min(n, lo + kBlock);
      partial[b] = block_sum(lo, hi);
    }
  });
  double total = 0.0;
  for (double p : partial) total += p;  // fixed order
  return total;
}

}  // namespace graflow
