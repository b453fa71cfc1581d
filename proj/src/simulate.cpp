#include "levysieve/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "levysieve/errors.hpp"

namespace levysieve {

namespace {

constexpr std::size_t kEnvelopePieces = 256;
constexpr std::size_t kEnvelopeGrid = 100000;

}  // namespace

JumpSampler::JumpSampler(LevyModel model) : model_(std::move(model)) {
  rho_ = model_constants(model_).rho;
  if (!(rho_ > 0.0) || !std::isfinite(rho_)) {
    throw ModelError("jump sampling needs 0 < nu(D) < inf, got " + std::to_string(rho_));
  }
  if (model_.inverse_cdf()) return;

  const auto& m = model_.measure();
  const double lo = m.lo();
  const double width = m.width();
  const std::size_t per_piece = kEnvelopeGrid / kEnvelopePieces;
  const auto kinks = model_.kinks();
  edges_.resize(kEnvelopePieces + 1);
  heights_.resize(kEnvelopePieces);
  for (std::size_t j = 0; j <= kEnvelopePieces; ++j) {
    edges_[j] = j == kEnvelopePieces
                    ? m.hi()
                    : lo + width * static_cast<double>(j) / static_cast<double>(kEnvelopePieces);
  }
  auto density = [&](double x) {
    if (x == 0.0) return 0.0;
    const double v = model_.p(x);
    if (!std::isfinite(v) || v < 0.0) {
      throw ModelError("Levy density is not bounded on the window (p(" + std::to_string(x) +
                       ") = " + std::to_string(v) + ")");
    }
    return v;
  };
  for (std::size_t j = 0; j < kEnvelopePieces; ++j) {
    const double a = edges_[j];
    const double b = edges_[j + 1];
    double peak = 0.0;
    double slack = 0.0;
    double prev = density(a);
    peak = prev;
    for (std::size_t i = 1; i <= per_piece; ++i) {
      const double x = i == per_piece ? b : a + (b - a) * static_cast<double>(i) / per_piece;
      const double v = density(x);
      peak = std::max(peak, v);
      slack = std::max(slack, std::abs(v - prev));
      prev = v;
    }
    for (double k : kinks) {
      if (k >= a && k <= b) peak = std::max(peak, density(k));
    }
    // The grid max can miss a peak between grid points by at most one step's variation.
    heights_[j] = peak + slack;
  }
  cumulative_.resize(kEnvelopePieces);
  double total = 0.0;
  for (std::size_t j = 0; j < kEnvelopePieces; ++j) {
    total += heights_[j] * (edges_[j + 1] - edges_[j]);
    cumulative_[j] = total;
  }
  if (!(total > 0.0)) throw ModelError("rejection envelope has zero mass");
  for (double& c : cumulative_) c /= total;
  cumulative_.back() = 1.0;
}

double JumpSampler::draw_size(Engine& eng) const {
  if (const auto& inv = model_.inverse_cdf()) return inv(uniform01(eng));
  for (;;) {
    const double u = uniform01(eng);
    const auto j = static_cast<std::size_t>(
        std::upper_bound(cumulative_.begin(), cumulative_.end(), u) - cumulative_.begin());
    const std::size_t piece = std::min(j, kEnvelopePieces - 1);
    const double a = edges_[piece];
    const double b = edges_[piece + 1];
    const double x = a + (b - a) * uniform01(eng);
    if (x == 0.0) continue;
    if (uniform01(eng) * heights_[piece] < model_.p(x)) return x;
  }
}

JumpSample JumpSampler::sample(double horizon, Engine& eng) const {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw ValidationError("horizon T must be positive and finite");
  }
  std::poisson_distribution<long long> count_dist(horizon * rho_);
  const auto count = static_cast<std::size_t>(count_dist(eng));
  JumpSample out;
  out.horizon = horizon;
  out.jumps.resize(count);
  for (auto& jump : out.jumps) {
    jump.time = horizon * (1.0 - uniform01(eng));
    jump.size = draw_size(eng);
  }
  std::sort(out.jumps.begin(), out.jumps.end(),
            [](const Jump& a, const Jump& b) { return a.time < b.time; });
  return out;
}

JumpSample JumpSampler::sample(double horizon, const RngStream& rng) const {
  Engine eng = rng.engine();
  return sample(horizon, eng);
}

JumpSample sample_jumps(const LevyModel& model, double horizon, const RngStream& rng) {
  return JumpSampler(model).sample(horizon, rng);
}

std::size_t grid_cell(double t, double horizon, std::size_t n) {
  const double h = horizon / static_cast<double>(n);
  auto k = static_cast<std::size_t>(std::max(0.0, std::ceil(t / h) - 1.0));
  k = std::min(k, n - 1);
  // Resolve rounding at cell edges against the edges k h themselves.
  while (k > 0 && t <= static_cast<double>(k) * h) --k;
  while (k + 1 < n && t > static_cast<double>(k + 1) * h) ++k;
  return k;
}

IncrementSample increments_from_jumps(const JumpSample& jumps, double sigma, double drift,
                                      std::size_t n, Engine& eng) {
  if (n == 0) throw ValidationError("increment grid needs n >= 1");
  if (!(sigma >= 0.0)) throw ValidationError("sigma must be non-negative");
  IncrementSample out;
  out.horizon = jumps.horizon;
  out.n = n;
  out.jumps = jumps;
  out.increments.assign(n, 0.0);
  const double h = out.step();
  double terminal = drift * jumps.horizon;
  if (sigma > 0.0 || drift != 0.0) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double sd = sigma * std::sqrt(h);
    for (auto& inc : out.increments) {
      const double z = sigma > 0.0 ? sd * gauss(eng) : 0.0;
      inc = drift * h + z;
      terminal += z;
    }
  }
  for (const auto& jump : jumps.jumps) {
    out.increments[grid_cell(jump.time, jumps.horizon, n)] += jump.size;
    terminal += jump.size;
  }
  out.terminal_value = terminal;
  return out;
}

IncrementSample sample_increments(const JumpSampler& sampler, double horizon, std::size_t n,
                                  const RngStream& rng) {
  if (n == 0) throw ValidationError("increment grid needs n >= 1");
  Engine eng = rng.engine();
  const auto jumps = sampler.sample(horizon, eng);
  const auto& m = sampler.model();
  return increments_from_jumps(jumps, m.gaussian_sigma(), m.drift(), n, eng);
}

IncrementSample sample_increments(const LevyModel& model, double horizon, std::size_t n,
                                  const RngStream& rng) {
  return sample_increments(JumpSampler(model), horizon, n, rng);
}

}  // namespace levysieve
