#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <span>
#include <thread>
#include <type_traits>
#include <vector>

namespace relloc {

using Rng = std::mt19937_64;

/// Independent stream for trajectory `index` under `master`.
Rng trajectory_rng(std::uint64_t master, std::uint64_t index);

/// Uniform double in [0, 1) from the top 53 bits of one draw.
double uniform01(Rng& rng);

/// Index drawn with probability proportional to `weights` (nonnegative,
/// not necessarily normalized). Throws std::domain_error if all are zero.
std::size_t sample_discrete(std::span<const double> weights, Rng& rng);

/// Evaluates f(0..count-1) on worker threads. Results land at their own
/// index, so the output does not depend on scheduling.
template <class F>
auto parallel_map(std::size_t count, F f, unsigned threads = 0) {
  using R = std::invoke_result_t<F&, std::size_t>;
  std::vector<R> out(count);
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) out[i] = f(i);
    return out;
  }
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      for (std::size_t i = t; i < count; i += threads) out[i] = f(i);
    });
  }
  for (auto& th : pool) th.join();
  return out;
}

}  // namespace relloc
