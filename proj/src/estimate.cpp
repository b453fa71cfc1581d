#include "levysieve/estimate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "levysieve/errors.hpp"

namespace levysieve {

namespace {

bool in_window(const LinearModel& model, double x) {
  return x >= model.measure().lo() && x <= model.measure().hi();
}

// One pass over the jumps: sum_j phi_i(x_j) into `sums` and sum_j sumsq(x_j).
double accumulate(const JumpSample& jumps, const LinearModel& model, std::vector<double>& sums) {
  const std::size_t n = model.local_dimension();
  sums.assign(model.dimension(), 0.0);
  std::array<double, kMaxDegree + 1> local{};
  double sq_total = 0.0;
  for (const auto& jump : jumps.jumps) {
    if (!in_window(model, jump.size)) continue;
    const std::size_t j = model.eval_at(jump.size, std::span<double>(local.data(), n));
    for (std::size_t l = 0; l < n; ++l) {
      sums[j * n + l] += local[l];
      sq_total += local[l] * local[l];
    }
  }
  return sq_total;
}

void require_horizon(double horizon) {
  if (!(horizon > 0.0)) throw ValidationError("jump sample horizon must be positive");
}

}  // namespace

double ProjectionEstimate::operator()(double x) const {
  const std::size_t n = model->local_dimension();
  std::array<double, kMaxDegree + 1> local{};
  const std::size_t j = model->eval_at(x, std::span<double>(local.data(), n));
  double v = 0.0;
  for (std::size_t l = 0; l < n; ++l) v += beta_hat[j * n + l] * local[l];
  return v;
}

double ProjectionEstimate::norm_sq() const {
  double s = 0.0;
  for (double b : beta_hat) s += b * b;
  return s;
}

ProjectionEstimate fit_projection(const JumpSample& jumps, ModelPtr model) {
  require_horizon(jumps.horizon);
  ProjectionEstimate est;
  accumulate(jumps, *model, est.beta_hat);
  for (double& b : est.beta_hat) b /= jumps.horizon;
  est.model = std::move(model);
  est.horizon = jumps.horizon;
  return est;
}

double vhat(const JumpSample& jumps, const LinearModel& model) {
  require_horizon(jumps.horizon);
  std::vector<double> sums;
  return accumulate(jumps, model, sums) / jumps.horizon;
}

double contrast(std::span<const double> coefs, const JumpSample& jumps, const LinearModel& model) {
  require_horizon(jumps.horizon);
  if (coefs.size() != model.dimension()) {
    throw ValidationError("coefficient vector length does not match the model dimension");
  }
  const std::size_t n = model.local_dimension();
  std::array<double, kMaxDegree + 1> local{};
  double linear = 0.0;
  for (const auto& jump : jumps.jumps) {
    if (!in_window(model, jump.size)) continue;
    const std::size_t j = model.eval_at(jump.size, std::span<double>(local.data(), n));
    for (std::size_t l = 0; l < n; ++l) linear += coefs[j * n + l] * local[l];
  }
  double norm = 0.0;
  for (double c : coefs) norm += c * c;
  return -2.0 * linear / jumps.horizon + norm;
}

RiskEvaluator::RiskEvaluator(const LevyModel& levy, ModelPtr model) : model_(std::move(model)) {
  if (!model_->measure().matches(levy.measure())) {
    throw ValidationError("linear model and Levy model use different reference measures");
  }
  nodes_ = cell_nodes(*model_, levy.kinks());
  const std::size_t n = model_->local_dimension();
  const std::size_t count = nodes_.x.size();
  s_values_.resize(count);
  basis_values_.resize(count * n);
  projection_.coefs.assign(model_->dimension(), 0.0);
  double s_norm = 0.0;
  for (std::size_t q = 0; q < count; ++q) {
    const double x = nodes_.x[q];
    const double sv = levy.s(x);
    if (!std::isfinite(sv)) throw EvaluationError("non-finite target density at a node", x);
    s_values_[q] = sv;
    const std::size_t j = nodes_.cell[q];
    model_->eval_local(j, x, std::span<double>(basis_values_).subspan(q * n, n));
    for (std::size_t l = 0; l < n; ++l) {
      projection_.coefs[j * n + l] += nodes_.weight[q] * basis_values_[q * n + l] * sv;
    }
    s_norm += nodes_.weight[q] * sv * sv;
  }
  double proj_norm = 0.0;
  for (double c : projection_.coefs) proj_norm += c * c;
  const double bias = s_norm - proj_norm;
  if (bias < -1e-9) {
    throw NumericalConsistencyError("negative bias term " + std::to_string(bias) +
                                    " for model with m = " +
                                    std::to_string(model_->partitions()));
  }
  projection_.bias_sq = std::max(bias, 0.0);
}

L2Error RiskEvaluator::evaluate(const ProjectionEstimate& est) const {
  if (est.beta_hat.size() != model_->dimension()) {
    throw ValidationError("estimate does not belong to this linear model");
  }
  const std::size_t n = model_->local_dimension();
  L2Error out;
  out.bias_sq = projection_.bias_sq;
  for (std::size_t i = 0; i < est.beta_hat.size(); ++i) {
    const double d = est.beta_hat[i] - projection_.coefs[i];
    out.chi_sq += d * d;
  }
  double total = 0.0;
  for (std::size_t q = 0; q < nodes_.x.size(); ++q) {
    const std::size_t j = nodes_.cell[q];
    double fit = 0.0;
    for (std::size_t l = 0; l < n; ++l) fit += est.beta_hat[j * n + l] * basis_values_[q * n + l];
    const double r = s_values_[q] - fit;
    total += nodes_.weight[q] * r * r;
  }
  out.total = total;
  const double gap = std::abs(total - (out.bias_sq + out.chi_sq));
  if (gap > 1e-6 * std::max(1.0, total)) {
    throw NumericalConsistencyError("risk decomposition mismatch of " + std::to_string(gap));
  }
  return out;
}

TargetProjection project_density(const LevyModel& levy, const LinearModel& model) {
  return RiskEvaluator(levy, std::make_shared<const LinearModel>(model)).projection();
}

L2Error l2_error(const ProjectionEstimate& est, const LevyModel& levy) {
  return RiskEvaluator(levy, est.model).evaluate(est);
}

ChiSquaredExpectation chi_squared_expectation(const LevyModel& levy, const LinearModel& model,
                                              double horizon) {
  require_horizon(horizon);
  ChiSquaredExpectation out;
  out.value = expected_vhat(model, levy) / horizon;
  out.bound = model_constants(levy).s_sup * static_cast<double>(model.dimension()) / horizon;
  return out;
}

std::string to_string(PenaltyForm form) {
  switch (form) {
    case PenaltyForm::a:
      return "a";
    case PenaltyForm::b:
      return "b";
    case PenaltyForm::c:
      return "c";
    case PenaltyForm::raw32:
      return "raw32";
  }
  return "?";
}

PenaltyForm parse_penalty_form(const std::string& text) {
  if (text == "a") return PenaltyForm::a;
  if (text == "b") return PenaltyForm::b;
  if (text == "c") return PenaltyForm::c;
  if (text == "raw32" || text == "raw-3.2") return PenaltyForm::raw32;
  throw ValidationError("unknown penalty form '" + text + "'; valid forms: a, b, c, raw32");
}

void PenaltyConfig::validate() const {
  if (!std::isfinite(offset)) throw ValidationError("penalty offset must be finite");
  if (form == PenaltyForm::raw32) return;
  if (!(c > 1.0) || !std::isfinite(c)) throw ValidationError("penalty constant c must exceed 1");
  if ((form == PenaltyForm::a || form == PenaltyForm::c) && (!(c1 > 0.0) || !std::isfinite(c1))) {
    throw ValidationError("penalty constant c1 must be positive");
  }
  if (form == PenaltyForm::c && (!(c2 > 0.0) || !std::isfinite(c2))) {
    throw ValidationError("penalty constant c2 must be positive");
  }
}

double penalty(const PenaltyConfig& config, const LinearModel& model, std::size_t jump_count,
               double vhat_value, double horizon) {
  config.validate();
  require_horizon(horizon);
  const double dm = static_cast<double>(model.dimension());
  const double sup = model.sup_constant();
  double pen = 0.0;
  switch (config.form) {
    case PenaltyForm::a:
      pen = config.c * sup * static_cast<double>(jump_count) / (horizon * horizon) +
            config.c1 * dm / horizon;
      break;
    case PenaltyForm::b:
      pen = config.c * vhat_value / horizon;
      break;
    case PenaltyForm::c:
      pen = config.c * vhat_value / horizon + config.c1 * sup / horizon + config.c2 * dm / horizon;
      break;
    case PenaltyForm::raw32:
      pen = 2.0 * vhat_value / horizon;
      break;
  }
  return pen + config.offset;
}

double penalty(const PenaltyConfig& config, const LinearModel& model, const JumpSample& jumps) {
  return penalty(config, model, jumps.count(), vhat(jumps, model), jumps.horizon);
}

bool within_horizon(const LinearModel& model, double horizon) {
  return model.sup_constant() <= horizon * (1.0 + 1e-9);
}

SelectionResult select_model(const JumpSample& jumps, const ModelCollection& coll,
                             const PenaltyConfig& config) {
  config.validate();
  require_horizon(jumps.horizon);
  const double horizon = jumps.horizon;
  SelectionResult out;
  double min_sup = std::numeric_limits<double>::infinity();
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_index = 0;
  std::vector<double> sums;
  for (std::size_t m = 1; m <= coll.mmax(); ++m) {
    const auto& model = coll.model(m);
    min_sup = std::min(min_sup, model.sup_constant());
    if (!within_horizon(model, horizon)) {
      out.excluded.push_back(m);
      continue;
    }
    const double v = accumulate(jumps, model, sums) / horizon;
    ProjectionEstimate est;
    est.model = coll.shared(m);
    est.horizon = horizon;
    est.beta_hat = sums;
    for (double& b : est.beta_hat) b /= horizon;

    SelectionRow row;
    row.m = m;
    row.dimension = model.dimension();
    row.sup_constant = model.sup_constant();
    row.neg_norm_sq = -est.norm_sq();
    row.pen = penalty(config, model, jumps.count(), v, horizon);
    row.criterion = row.neg_norm_sq + row.pen;
    if (row.criterion < best) {
      best = row.criterion;
      best_index = out.table.size();
    }
    out.table.push_back(row);
    out.fits.push_back(std::move(est));
  }
  if (out.table.empty()) {
    throw HorizonTooSmallError("no model has D_m <= T = " + std::to_string(horizon) +
                                   "; smallest D_m is " + std::to_string(min_sup),
                               min_sup);
  }
  out.m_hat = out.table[best_index].m;
  out.ppe = out.fits[best_index];
  return out;
}

}  // namespace levysieve
