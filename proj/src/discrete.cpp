#include "levysieve/discrete.hpp"

#include <cmath>
#include <vector>

#include "levysieve/errors.hpp"

namespace levysieve {

ThresholdRule ThresholdRule::power(double kappa, double gamma) {
  if (!(kappa >= 0.0) || !std::isfinite(kappa)) {
    throw ValidationError("threshold kappa must be finite and non-negative");
  }
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ValidationError("threshold gamma must lie in [0, 1)");
  return ThresholdRule(kappa, gamma);
}

double ThresholdRule::operator()(double step) const {
  if (kappa_ == 0.0) return 0.0;
  return kappa_ * std::pow(step, gamma_);
}

double integral_stat(const IncrementSample& incr, const RealFunction& f) {
  double total = 0.0;
  for (double d : incr.increments) {
    if (d != 0.0) total += f(d);
  }
  return total;
}

double thresholded_stat(const IncrementSample& incr, const RealFunction& f,
                        const ThresholdRule& rule) {
  const double h = incr.step();
  double total = 0.0;
  for (double d : incr.increments) {
    if (rule.passes(d, h)) total += f(d);
  }
  return total;
}

ProjectionEstimate fit_projection_discrete(const IncrementSample& incr, ModelPtr model,
                                           const ThresholdRule& rule) {
  if (!(incr.horizon > 0.0)) throw ValidationError("increment sample horizon must be positive");
  const double h = incr.step();
  const auto& measure = model->measure();
  const std::size_t n = model->local_dimension();
  ProjectionEstimate est;
  est.beta_hat.assign(model->dimension(), 0.0);
  std::vector<double> local(n);
  for (double d : incr.increments) {
    if (!rule.passes(d, h) || d < measure.lo() || d > measure.hi()) continue;
    const std::size_t j = model->eval_at(d, local);
    for (std::size_t l = 0; l < n; ++l) est.beta_hat[j * n + l] += local[l];
  }
  for (double& b : est.beta_hat) b /= incr.horizon;
  est.model = std::move(model);
  est.horizon = incr.horizon;
  return est;
}

bool cells_isolate_jumps(const IncrementSample& incr) {
  std::vector<unsigned char> seen(incr.n, 0);
  for (const auto& jump : incr.jumps.jumps) {
    auto& slot = seen[grid_cell(jump.time, incr.horizon, incr.n)];
    if (slot) return false;
    slot = 1;
  }
  return true;
}

double discrete_continuous_gap(const IncrementSample& incr, const ModelPtr& model,
                               const ThresholdRule& rule) {
  const auto discrete = fit_projection_discrete(incr, model, rule);
  const auto continuous = fit_projection(incr.jumps, model);
  double gap = 0.0;
  for (std::size_t i = 0; i < discrete.beta_hat.size(); ++i) {
    const double d = discrete.beta_hat[i] - continuous.beta_hat[i];
    gap += d * d;
  }
  return gap;
}

double false_detection_rate(const IncrementSample& incr, const ThresholdRule& rule) {
  std::vector<unsigned char> has_jump(incr.n, 0);
  for (const auto& jump : incr.jumps.jumps) {
    has_jump[grid_cell(jump.time, incr.horizon, incr.n)] = 1;
  }
  const double h = incr.step();
  std::size_t quiet = 0;
  std::size_t passed = 0;
  for (std::size_t k = 0; k < incr.n; ++k) {
    if (has_jump[k]) continue;
    ++quiet;
    if (rule.passes(incr.increments[k], h)) ++passed;
  }
  return quiet == 0 ? 0.0 : static_cast<double>(passed) / static_cast<double>(quiet);
}

}  // namespace levysieve
