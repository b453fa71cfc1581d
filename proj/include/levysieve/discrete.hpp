#pragma once

#include <cstddef>

#include "levysieve/estimate.hpp"
#include "levysieve/model.hpp"
#include "levysieve/simulate.hpp"

namespace levysieve {

/// Jump-detection threshold r(h) = kappa * h^gamma.
///
/// kappa = 0 gives r == 0 (every nonzero increment passes); gamma = 0 gives a
/// constant threshold. The consistent family has kappa > 0, gamma in (0, 1).
class ThresholdRule {
 public:
  static ThresholdRule power(double kappa, double gamma);
  static ThresholdRule constant(double r) { return power(r, 0.0); }
  static ThresholdRule none() { return power(0.0, 0.0); }

  double kappa() const { return kappa_; }
  double gamma() const { return gamma_; }
  double operator()(double step) const;
  bool passes(double increment, double step) const {
    return increment * increment > (*this)(step);
  }

 private:
  ThresholdRule(double kappa, double gamma) : kappa_(kappa), gamma_(gamma) {}
  double kappa_;
  double gamma_;
};

/// I_n(f) = sum_k f(Delta_k X), skipping increments equal to 0.
double integral_stat(const IncrementSample& incr, const RealFunction& f);

/// sum_k f(Delta_k X) 1[(Delta_k X)^2 > r(h)].
double thresholded_stat(const IncrementSample& incr, const RealFunction& f,
                        const ThresholdRule& rule);

/// beta_i = (1/T) sum_k phi_i(Delta_k X) 1[(Delta_k X)^2 > r(h)] 1[Delta_k X in D].
ProjectionEstimate fit_projection_discrete(const IncrementSample& incr, ModelPtr model,
                                           const ThresholdRule& rule);

/// True when no grid cell holds more than one jump.
bool cells_isolate_jumps(const IncrementSample& incr);

/// Paired comparison of discrete and continuous estimates on the same path:
/// ||s_hat_discrete - s_hat_continuous||^2 = sum_i (beta_d - beta_c)^2.
double discrete_continuous_gap(const IncrementSample& incr, const ModelPtr& model,
                               const ThresholdRule& rule);

/// Fraction of jump-free grid cells whose increment passes the threshold.
double false_detection_rate(const IncrementSample& incr, const ThresholdRule& rule);

}  // namespace levysieve
