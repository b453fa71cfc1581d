#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "levysieve/bases.hpp"
#include "levysieve/model.hpp"
#include "levysieve/simulate.hpp"

namespace levysieve {

using ModelPtr = std::shared_ptr<const LinearModel>;

/// s_hat = sum_i beta_hat_i phi_i on one linear model.
struct ProjectionEstimate {
  ModelPtr model;
  std::vector<double> beta_hat;
  double horizon = 0.0;

  double operator()(double x) const;
  /// ||s_hat||^2 in coordinates.
  double norm_sq() const;
};

/// beta_hat_i = (1/T) sum_j phi_i(x_j).
ProjectionEstimate fit_projection(const JumpSample& jumps, ModelPtr model);

/// V_hat = (1/T) sum_j sum_i phi_i(x_j)^2.
double vhat(const JumpSample& jumps, const LinearModel& model);

/// gamma_D(f) = -(2/T) sum_j f(x_j) + ||f||^2 for f = sum_i coefs_i phi_i.
double contrast(std::span<const double> coefs, const JumpSample& jumps, const LinearModel& model);

struct TargetProjection {
  std::vector<double> coefs;  // int phi_i s d(eta)
  double bias_sq = 0.0;       // ||s - s_perp||^2
};

TargetProjection project_density(const LevyModel& levy, const LinearModel& model);

struct ChiSquaredExpectation {
  double value = 0.0;  // (1/T) sum_i int phi_i^2 s d(eta)
  double bound = 0.0;  // ||s||_inf d_m / T
};

ChiSquaredExpectation chi_squared_expectation(const LevyModel& levy, const LinearModel& model,
                                              double horizon);

struct L2Error {
  double total = 0.0;    // ||s - s_hat||^2 by quadrature
  double bias_sq = 0.0;  // ||s - s_perp||^2
  double chi_sq = 0.0;   // ||s_hat - s_perp||^2
};

/// Precomputes the target projection and quadrature tables for repeated risk
/// evaluation of estimates on one linear model.
class RiskEvaluator {
 public:
  RiskEvaluator(const LevyModel& levy, ModelPtr model);

  const TargetProjection& projection() const { return projection_; }
  const ModelPtr& model() const { return model_; }
  L2Error evaluate(const ProjectionEstimate& est) const;

 private:
  ModelPtr model_;
  TargetProjection projection_;
  NodeSet nodes_;
  std::vector<double> s_values_;
  std::vector<double> basis_values_;  // nodes x (k+1)
};

L2Error l2_error(const ProjectionEstimate& est, const LevyModel& levy);

enum class PenaltyForm { a, b, c, raw32 };

std::string to_string(PenaltyForm form);
PenaltyForm parse_penalty_form(const std::string& text);

/// Penalty constants; c > 1 strictly, c1 (c') and c2 (c'') positive where used.
struct PenaltyConfig {
  PenaltyForm form = PenaltyForm::c;
  double c = 2.0;
  double c1 = 1.0;
  double c2 = 1.0;
  double offset = 0.0;  // constant added to every pen(m)

  void validate() const;
};

/// pen(m) from the sufficient statistics of a sample: jump count N and V_hat.
double penalty(const PenaltyConfig& config, const LinearModel& model, std::size_t jump_count,
               double vhat_value, double horizon);
double penalty(const PenaltyConfig& config, const LinearModel& model, const JumpSample& jumps);

struct SelectionRow {
  std::size_t m = 0;
  std::size_t dimension = 0;
  double sup_constant = 0.0;
  double neg_norm_sq = 0.0;  // -||s_hat_m||^2
  double pen = 0.0;
  double criterion = 0.0;
};

struct SelectionResult {
  std::size_t m_hat = 0;
  ProjectionEstimate ppe;
  std::vector<SelectionRow> table;          // models in M_T, increasing m
  std::vector<ProjectionEstimate> fits;     // aligned with table
  std::vector<std::size_t> excluded;        // m with D_m > T
};

/// Membership in M_T = {m : D_m <= T}. D_m comes from a dense-grid sup, so
/// the comparison allows a relative slack of 1e-9 (e.g. D_m = m for k = 0 may
/// come out one ulp above m).
bool within_horizon(const LinearModel& model, double horizon);

/// argmin over M_T = {m : D_m <= T} of -||s_hat_m||^2 + pen(m); ties go to
/// the smaller dimension.
SelectionResult select_model(const JumpSample& jumps, const ModelCollection& coll,
                             const PenaltyConfig& config);

}  // namespace levysieve
