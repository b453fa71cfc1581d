#pragma once

#include <cstddef>
#include <vector>

#include "levysieve/model.hpp"
#include "levysieve/rng.hpp"

namespace levysieve {

struct Jump {
  double time = 0.0;  // in (0, T]
  double size = 0.0;  // in D
};

/// Realized Poisson point pattern of (time, size) pairs on [0, T] x D,
/// sorted by time.
struct JumpSample {
  double horizon = 0.0;
  std::vector<Jump> jumps;

  std::size_t count() const { return jumps.size(); }
};

/// Increments of the path X(t) = b t + sigma B(t) + sum of jumps on the grid
/// k T / n, together with the jumps that produced them.
struct IncrementSample {
  double horizon = 0.0;
  std::size_t n = 0;
  std::vector<double> increments;
  JumpSample jumps;
  double terminal_value = 0.0;  // X(T), accumulated independently of the increments

  double step() const { return horizon / static_cast<double>(n); }
};

/// Exact sampler for the jump measure restricted to [0, T] x D.
///
/// Sizes come from the model's inverse CDF when it has one; otherwise from
/// rejection against a 256-piece piecewise-constant majorant of p built on
/// a dense grid.
class JumpSampler {
 public:
  explicit JumpSampler(LevyModel model);

  const LevyModel& model() const { return model_; }
  double rho() const { return rho_; }
  bool uses_rejection() const { return !model_.inverse_cdf(); }

  double draw_size(Engine& eng) const;
  JumpSample sample(double horizon, Engine& eng) const;
  JumpSample sample(double horizon, const RngStream& rng) const;

 private:
  LevyModel model_;
  double rho_ = 0.0;
  std::vector<double> edges_;
  std::vector<double> heights_;
  std::vector<double> cumulative_;  // normalized envelope mass up to piece j
};

JumpSample sample_jumps(const LevyModel& model, double horizon, const RngStream& rng);

/// Grid cell ((k-1)h, kh] holding time t, returned 0-based.
std::size_t grid_cell(double t, double horizon, std::size_t n);

/// Builds increments from a given jump sample, drawing the Gaussian part from `eng`.
IncrementSample increments_from_jumps(const JumpSample& jumps, double sigma, double drift,
                                      std::size_t n, Engine& eng);

IncrementSample sample_increments(const JumpSampler& sampler, double horizon, std::size_t n,
                                  const RngStream& rng);
IncrementSample sample_increments(const LevyModel& model, double horizon, std::size_t n,
                                  const RngStream& rng);

}  // namespace levysieve
