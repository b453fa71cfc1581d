#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <exception>
#include <limits>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "levysieve/errors.hpp"

namespace levysieve {

/// 0 means one worker per hardware thread.
unsigned resolve_threads(unsigned requested);

/// Runs fn(r) for r = 0..reps-1 on a pool of workers and returns the results
/// indexed by replication, so any reduction over them is independent of
/// scheduling. A failure aborts the run and reports the lowest failing id.
template <class Result, class Fn>
std::vector<Result> run_replications(std::size_t reps, unsigned threads, Fn&& fn) {
  std::vector<std::optional<Result>> slots(reps);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex error_mutex;
  std::size_t error_rep = std::numeric_limits<std::size_t>::max();
  std::string error_text;

  auto worker = [&] {
    for (;;) {
      const std::size_t r = next.fetch_add(1);
      if (r >= reps || failed.load()) return;
      try {
        slots[r].emplace(fn(r));
      } catch (const std::exception& e) {
        std::lock_guard lock(error_mutex);
        failed = true;
        if (r < error_rep) {
          error_rep = r;
          error_text = e.what();
        }
      }
    }
  };

  const unsigned n = std::min<unsigned>(resolve_threads(threads),
                                        static_cast<unsigned>(std::max<std::size_t>(reps, 1)));
  if (n <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(n);
    for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
  }
  if (failed) {
    throw Error("replication " + std::to_string(error_rep) + " failed: " + error_text);
  }
  std::vector<Result> out;
  out.reserve(reps);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

/// Sample mean with its standard error; se and sd are NaN when fewer than two values.
struct MeanSe {
  double mean = 0.0;
  double sd = std::numeric_limits<double>::quiet_NaN();
  double se = std::numeric_limits<double>::quiet_NaN();
  std::size_t count = 0;

  bool has_se() const { return !std::isnan(se); }
};

MeanSe summarize(std::span<const double> values);

}  // namespace levysieve
