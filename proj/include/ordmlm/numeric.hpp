#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace ordmlm {

/// Pairwise (cascade) summation. The result depends only on the order of
/// `values`, never on how they were produced.
double pairwise_sum(std::span<const double> values);

/// Runs body(i) for i in [0, n) on up to `threads` workers using contiguous
/// static chunks. threads == 0 means hardware concurrency. Exceptions from
/// workers are rethrown on the calling thread (lowest index first).
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body);

}  // namespace ordmlm
