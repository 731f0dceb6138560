#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <thread>
#include <vector>

namespace rlab {

/// Runs fn(i) for i in [0, count) on up to `threads` workers with a static
/// contiguous partition. Each index must write only to its own output slot;
/// results are then independent of the worker count.
inline void parallel_for(std::size_t count, int threads,
                         const std::function<void(std::size_t)>& fn) {
  if (threads <= 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  const std::size_t workers = std::min<std::size_t>(threads, count);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = count * w / workers;
    const std::size_t hi = count * (w + 1) / workers;
    pool.emplace_back([lo, hi, &fn] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

/// Pairwise (cascade) summation: deterministic and accurate regardless of how
/// the inputs were produced.
inline double pairwise_sum(std::span<const double> xs) {
  if (xs.size() <= 8) {
    double acc = 0.0;
    for (double x : xs) acc += x;
    return acc;
  }
  const std::size_t half = xs.size() / 2;
  return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

struct MeanStderr {
  double mean = 0.0;
  double stderr_ = 0.0;   // stddev / sqrt(count)
  double variance = 0.0;  // unbiased sample variance
  std::size_t count = 0;
};

inline MeanStderr mean_stderr(std::span<const double> xs) {
  MeanStderr out;
  out.count = xs.size();
  if (xs.empty()) return out;
  out.mean = pairwise_sum(xs) / static_cast<double>(xs.size());
  if (xs.size() < 2) return out;
  std::vector<double> dev2(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double d = xs[i] - out.mean;
    dev2[i] = d * d;
  }
  out.variance = pairwise_sum(dev2) / static_cast<double>(xs.size() - 1);
  out.stderr_ = std::sqrt(out.variance / static_cast<double>(xs.size()));
  return out;
}

}  // namespace rlab
