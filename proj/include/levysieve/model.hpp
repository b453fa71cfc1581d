#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "levysieve/measure.hpp"

namespace levysieve {

using RealFunction = std::function<double(double)>;

struct QuadratureOptions {
  int order = 10;
  std::size_t panels = 64;
  int grading_levels = 20;  // graded refinement around kinks
};

/// Composite Gauss-Legendre approximation of the eta-integral of f over the
/// window, with extra panel edges at `breaks` (kinks of f).
double eta_integral(const RealFunction& f, const ReferenceMeasure& measure,
                    QuadratureOptions opts = {}, std::span<const double> breaks = {});

/// Same, restricted to [lo, hi] inside the window.
double eta_integral(const RealFunction& f, const ReferenceMeasure& measure, double lo, double hi,
                    QuadratureOptions opts = {}, std::span<const double> breaks = {});

struct ModelConstants {
  double rho = 0.0;     // nu(D) = int_D s d(eta)
  double s_sup = 0.0;   // sup_D s
  double s_l2sq = 0.0;  // int_D s^2 d(eta)
};

/// Ground-truth Levy model restricted to the estimation window.
///
/// The target is s = d(nu)/d(eta); the Levy density with respect to dx is
/// p = s * w. Diffusion parameters are carried for increment simulation only.
class LevyModel {
 public:
  struct Definition {
    std::string name;
    RealFunction target;  // s
    double smoothness_alpha = 1.0;
    double gaussian_sigma = 0.0;
    double drift = 0.0;
    std::optional<ModelConstants> closed_form;
    std::vector<double> kinks;
    /// Optional inverse of the size CDF u in [0,1) -> x in D for density p / rho.
    RealFunction inverse_cdf;
  };

  LevyModel(Definition def, ReferenceMeasure measure);

  const std::string& name() const { return def_.name; }
  const ReferenceMeasure& measure() const { return measure_; }
  double s(double x) const { return def_.target(x); }
  double p(double x) const { return def_.target(x) * measure_.weight(x); }
  const RealFunction& target() const { return def_.target; }
  double smoothness_alpha() const { return def_.smoothness_alpha; }
  double gaussian_sigma() const { return def_.gaussian_sigma; }
  double drift() const { return def_.drift; }
  const std::optional<ModelConstants>& closed_form() const { return def_.closed_form; }
  std::span<const double> kinks() const { return def_.kinks; }
  const RealFunction& inverse_cdf() const { return def_.inverse_cdf; }

  /// Kinks of s together with breakpoints of the weight.
  std::vector<double> breakpoints() const;

  LevyModel with_diffusion(double sigma, double drift) const;

 private:
  Definition def_;
  ReferenceMeasure measure_;
};

/// rho, sup s and ||s||^2; closed form when the model carries it, otherwise
/// quadrature and a dense-grid sup (1e5 points plus endpoints and kinks).
ModelConstants model_constants(const LevyModel& model);
ModelConstants numeric_model_constants(const LevyModel& model, QuadratureOptions opts = {});

/// Sum of two models on the same window and measure (superposition of the
/// jump measures).
LevyModel superpose(const LevyModel& a, const LevyModel& b);

namespace catalog {

/// s = lambda on a Lebesgue window.
LevyModel constant(double lambda, double lo = 0.0, double hi = 1.0);
/// s linear from `start` at lo to `end` at hi.
LevyModel linear_ramp(double start, double end, double lo = 0.0, double hi = 1.0);
/// s = scale * exp(-rate * x).
LevyModel truncated_exponential(double scale, double rate = 1.0, double lo = 0.0,
                                double hi = 1.0);
/// s = base + slope * |x - kink|; Lipschitz, smoothness 1.
LevyModel lipschitz_kink(double base, double slope, double kink, double lo = 0.0,
                         double hi = 1.0);
/// s = base + scale * |x - center|^alpha, 0 < alpha <= 1.
LevyModel holder(double alpha, double base, double scale, double center, double lo = 0.0,
                 double hi = 1.0);
/// p = c / |x| against eta(dx) = x^-2 dx, so s = c |x|.
LevyModel inverse_square_compensated(double c, double lo = 1.0, double hi = 2.0);

/// Catalog ids accepted by `make`.
std::vector<std::string> ids();

/// Build a catalog model from an id and a parameter map (missing parameters
/// take their defaults; unknown ids throw ValidationError listing valid ones).
LevyModel make(const std::string& id, const std::map<std::string, double>& params, double lo,
               double hi);

}  // namespace catalog

}  // namespace levysieve
