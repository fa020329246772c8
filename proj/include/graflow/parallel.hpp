#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace graflow {

/// Worker count used by parallel_for / block_reduce. Resolves to
/// min(hardware_concurrency, GRAFLOW_THREADS) and is re-read on every call so
/// tests can pin the count via setenv.
int worker_count();

/// Static-partition parallel loop over [0, n). The callable receives
/// (begin, end) half-open index ranges. Output must be written to disjoint
/// locations; results are independent of the worker count.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

/// Deterministic parallel sum reduction: [0, n) is cut into fixed-size blocks
/// (independent of the worker count), each block is summed by `block_sum`,
/// and the block results are added in block order. Bit-identical for any
/// GRAFLOW_THREADS setting.
double block_reduce(std::size_t n, const std::function<double(std::size_t, std::size_t)>& block_sum);

}  // namespace graflow
