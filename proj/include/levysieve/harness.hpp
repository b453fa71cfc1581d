#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "levysieve/bases.hpp"
#include "levysieve/config.hpp"
#include "levysieve/discrete.hpp"
#include "levysieve/estimate.hpp"
#include "levysieve/model.hpp"
#include "levysieve/parallel.hpp"

namespace levysieve {

inline constexpr const char* kVersion = "1.0.0";

struct ExperimentConfig {
  std::string experiment = "risk";  // risk | rate | concentration | discrete
  std::string model_name = "constant";
  std::map<std::string, double> model_params;
  double window_lo = 0.0;
  double window_hi = 1.0;
  std::optional<std::string> measure;  // checked against the catalog model when given
  int degree = 0;
  std::size_t mmax = 64;
  PenaltyConfig penalty;
  std::vector<double> t_grid{100.0};
  bool rate_tail_only = false;  // fit the slope on the three largest T
  double oracle_max_ratio = 4.0;
  std::size_t reps = 2000;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  std::filesystem::path out_dir = "out";

  // concentration
  double conc_lambda = 10.0;
  double conc_horizon = 1.0;
  std::vector<double> u_grid{0.5, 1.0, 2.0, 4.0};
  double epsilon = 1.0;

  // discrete
  std::vector<std::size_t> discrete_n{256, 1024, 4096};
  std::size_t discrete_m = 4;
  std::string discrete_f = "square";
  double sigma = 0.0;
  double drift = 0.0;
  double threshold_kappa = 1.0;
  double threshold_gamma = 0.9;

  /// Validates and reads every known key; unknown keys are an error.
  static ExperimentConfig from_flat(const FlatConfig& flat);
  static std::vector<std::string> experiments();

  LevyModel levy_model() const;
  ThresholdRule threshold() const;
};

struct ModelRisk {
  std::size_t m = 0;
  std::size_t dimension = 0;
  double sup_constant = 0.0;
  MeanSe risk;               // ||s - s_hat_m||^2
  double bias_sq = 0.0;
  MeanSe chi;                // ||s_hat_m - s_perp||^2
  double chi_expected = 0.0; // E[chi^2] by quadrature
  double pen_mean = 0.0;
  double select_freq = 0.0;
};

struct RiskReport {
  double horizon = 0.0;
  std::size_t reps = 0;
  std::vector<ModelRisk> models;  // models in M_T
  std::vector<std::size_t> excluded;
  MeanSe ppe_risk;
  MeanSe ppe_m_hat;
  std::size_t oracle_m = 0;  // argmin of mean risk
  double min_risk = 0.0;
  double min_risk_se = 0.0;
  CollectionConstants constants;
  std::vector<std::string> diagnostics;

  const ModelRisk& at(std::size_t m) const;
};

struct RiskSetup {
  const LevyModel& levy;
  const ModelCollection& collection;
  PenaltyConfig penalty;
  std::size_t reps = 2000;
  std::uint64_t seed = 1;
  unsigned threads = 0;
};

RiskReport risk_mc(const RiskSetup& setup, double horizon);
RiskReport risk_mc(const ExperimentConfig& config);

struct OracleCheck {
  double ratio = 0.0;           // ppe risk / min_m risk
  double additive_slack = 0.0;  // (ppe risk - min_m risk) T
  bool pass = false;
};

OracleCheck oracle_check(const RiskReport& report, double max_ratio = 4.0);

struct RatePoint {
  double horizon = 0.0;
  MeanSe ppe_risk;
  double mean_m_hat = 0.0;
};

struct RateResult {
  std::vector<RatePoint> points;
  double slope = 0.0;
  double slope_se = 0.0;
  double intercept = 0.0;
  double target_slope = 0.0;  // -2a/(2a+1) with a = min(alpha, k+1)
  bool skipped = false;
  std::string notice;
};

RateResult rate_experiment(const RiskSetup& setup, const std::vector<double>& t_grid,
                           bool tail_only = false);
RateResult rate_experiment(const ExperimentConfig& config);

/// Least-squares slope of log(mean risk) on log T, with the standard error
/// propagated from the per-point standard errors.
RateResult fit_rate(std::vector<RatePoint> points, bool tail_only);

struct ConcentrationRow {
  double u = 0.0;
  double threshold = 0.0;     // sqrt(2 Lambda u) + u / 3
  double exceed_freq = 0.0;   // P_hat[N - Lambda >= threshold]
  double exceed_exact = 0.0;  // exact Poisson tail
  double bound = 0.0;         // e^-u
  double binomial_se = 0.0;   // sqrt(e^-u (1 - e^-u) / R)
  double hold_freq = 0.0;     // P_hat[(1+eps)(N + (1/(2eps) + 5/6) u) >= Lambda]
  double hold_exact = 0.0;
  double hold_bound = 0.0;    // 1 - e^-u
};

struct ConcentrationReport {
  double mass = 0.0;  // Lambda = lambda T
  double epsilon = 0.0;
  std::size_t reps = 0;
  std::vector<ConcentrationRow> rows;
};

ConcentrationReport concentration_check(double lambda, double horizon,
                                        const std::vector<double>& u_grid, std::size_t reps,
                                        double epsilon, std::uint64_t seed, unsigned threads = 0);

/// P[N >= k] for N ~ Poisson(mean), by summing the probability mass function.
double poisson_upper_tail(double mean, long long k);

struct GridCheck {
  std::size_t points = 0;
  std::size_t violations = 0;
  double worst_margin = 0.0;  // min over the grid of lhs - rhs
};

/// a - sqrt(2ab) - b/3 >= a/(1+eps) - (1/(2eps) + 5/6) b on the 50 x 50 grid
/// (0, 10]^2 for eps in {0.1, 0.5, 1, 2, 5}.
GridCheck deviation_grid_check();

struct TailIntegralResult {
  double expected_z = 0.0;  // E[h(E)] = 2a + b for E ~ Exp(1)
  double bound = 0.0;       // K int_0^inf e^-u h(u) du = K (2a + b)
  bool holds = false;
};

/// Z = h(E), h(x) = a x^2 + b x, against the tail-integral bound.
TailIntegralResult tail_integral_check(double a, double b, double k_const);

struct DiscreteRow {
  std::size_t n = 0;
  double step = 0.0;
  MeanSe stat;          // I_n(f)
  double stat_var = 0.0;
  MeanSe thresholded;   // thresholded statistic
  double target_mean = 0.0;  // T int f p
  double target_var = 0.0;   // T int f^2 p
  MeanSe coef_gap;      // ||s_hat_discrete - s_hat_continuous||^2
  double false_detection = 0.0;
};

struct DiscreteReport {
  double horizon = 0.0;
  std::size_t reps = 0;
  std::vector<DiscreteRow> rows;
};

struct DiscreteSetup {
  const LevyModel& levy;  // carries sigma and drift
  ModelPtr model;
  ThresholdRule rule;
  RealFunction f;
  double horizon = 1.0;
  std::vector<std::size_t> grid;
  std::size_t reps = 1000;
  std::uint64_t seed = 1;
  unsigned threads = 0;
};

DiscreteReport discrete_experiment(const DiscreteSetup& setup);

// CSV emission. Doubles use the shortest round-trip form; NaN prints as NA.
std::string format_number(double v);
void write_risk_csv(std::ostream& out, const RiskReport& report);
void write_rate_csv(std::ostream& out, const RateResult& result);
void write_concentration_csv(std::ostream& out, const ConcentrationReport& report);
void write_discrete_csv(std::ostream& out, const DiscreteReport& report);

struct RunOverrides {
  std::optional<std::filesystem::path> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> reps;
  std::optional<unsigned> threads;
};

/// Parses the config, runs the experiment, writes its CSV and manifest.txt.
/// Returns 0 on success; errors go to `err` with a nonzero return.
int run(const std::filesystem::path& config_path, const RunOverrides& overrides, std::ostream& log,
        std::ostream& err);

}  // namespace levysieve
