#include "levysieve/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "levysieve/errors.hpp"
#include "levysieve/quadrature.hpp"

namespace levysieve {

namespace {

constexpr std::size_t kSupGridPoints = 100000;

std::vector<double> merged_breaks(const ReferenceMeasure& measure, std::span<const double> breaks) {
  std::vector<double> all(breaks.begin(), breaks.end());
  const auto mb = measure.breakpoints();
  all.insert(all.end(), mb.begin(), mb.end());
  return all;
}

std::string format_point(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

}  // namespace

double eta_integral(const RealFunction& f, const ReferenceMeasure& measure, double lo, double hi,
                    QuadratureOptions opts, std::span<const double> breaks) {
  if (opts.order < 2) throw ValidationError("quadrature order must be >= 2");
  if (lo < measure.lo() || hi > measure.hi()) {
    throw DomainError("integration interval leaves the window");
  }
  const GaussLegendre rule(opts.order);
  const auto all_breaks = merged_breaks(measure, breaks);
  const auto edges = panel_edges(lo, hi, opts.panels, all_breaks, opts.grading_levels);
  const auto nodes = rule.nodes();
  const auto weights = rule.weights();
  double total = 0.0;
  for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
    const double half = 0.5 * (edges[p + 1] - edges[p]);
    const double mid = 0.5 * (edges[p + 1] + edges[p]);
    double panel = 0.0;
    for (std::size_t q = 0; q < nodes.size(); ++q) {
      const double x = mid + half * nodes[q];
      const double fx = f(x);
      if (!std::isfinite(fx)) {
        throw EvaluationError("non-finite integrand value at x = " + format_point(x), x);
      }
      panel += weights[q] * fx * measure.weight(x);
    }
    total += half * panel;
  }
  return total;
}

double eta_integral(const RealFunction& f, const ReferenceMeasure& measure,
                    QuadratureOptions opts, std::span<const double> breaks) {
  return eta_integral(f, measure, measure.lo(), measure.hi(), opts, breaks);
}

LevyModel::LevyModel(Definition def, ReferenceMeasure measure)
    : def_(std::move(def)), measure_(std::move(measure)) {
  if (!def_.target) throw ValidationError("Levy model '" + def_.name + "' has no target density");
  if (!(def_.smoothness_alpha > 0.0)) {
    throw ValidationError("smoothness alpha must be positive");
  }
  if (!(def_.gaussian_sigma >= 0.0) || !std::isfinite(def_.gaussian_sigma) ||
      !std::isfinite(def_.drift)) {
    throw ValidationError("diffusion parameters must be finite with sigma >= 0");
  }
  for (double k : def_.kinks) {
    if (!(k >= measure_.lo() && k <= measure_.hi())) {
      throw ValidationError("kink outside the window");
    }
  }
  // s must be positive and finite on D.
  constexpr int kChecks = 1000;
  for (int i = 0; i <= kChecks; ++i) {
    const double x = measure_.lo() + measure_.width() * i / kChecks;
    if (x == 0.0) continue;
    const double v = def_.target(x);
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw ValidationError("target density of '" + def_.name +
                            "' must be positive and finite on the window; s(" + format_point(x) +
                            ") = " + format_point(v));
    }
  }
}

std::vector<double> LevyModel::breakpoints() const {
  return merged_breaks(measure_, def_.kinks);
}

LevyModel LevyModel::with_diffusion(double sigma, double drift) const {
  Definition def = def_;
  def.gaussian_sigma = sigma;
  def.drift = drift;
  return LevyModel(std::move(def), measure_);
}

ModelConstants numeric_model_constants(const LevyModel& model, QuadratureOptions opts) {
  const auto breaks = model.kinks();
  ModelConstants c;
  c.rho = eta_integral(model.target(), model.measure(), opts, breaks);
  c.s_l2sq = eta_integral([&](double x) { const double v = model.s(x); return v * v; },
                          model.measure(), opts, breaks);
  const double lo = model.measure().lo();
  const double width = model.measure().width();
  double sup = 0.0;
  const double inward = lo < 0.0 ? -1.0 : 1.0;
  auto visit = [&](double x) {
    // a window may end at 0, which carries no mass; approach it from inside
    if (x == 0.0) x = std::nextafter(0.0, inward);
    sup = std::max(sup, model.s(x));
  };
  for (std::size_t i = 0; i <= kSupGridPoints; ++i) {
    visit(i == kSupGridPoints ? model.measure().hi()
                              : lo + width * static_cast<double>(i) / kSupGridPoints);
  }
  for (double k : breaks) visit(k);
  c.s_sup = sup;
  return c;
}

ModelConstants model_constants(const LevyModel& model) {
  if (model.closed_form()) return *model.closed_form();
  return numeric_model_constants(model);
}

LevyModel superpose(const LevyModel& a, const LevyModel& b) {
  const auto& ma = a.measure();
  const auto& mb = b.measure();
  if (!ma.matches(mb)) {
    throw ValidationError("superpose: models must share window and reference measure");
  }
  LevyModel::Definition def;
  def.name = a.name() + "+" + b.name();
  def.target = [sa = a.target(), sb = b.target()](double x) { return sa(x) + sb(x); };
  def.smoothness_alpha = std::min(a.smoothness_alpha(), b.smoothness_alpha());
  std::set<double> kinks(a.kinks().begin(), a.kinks().end());
  kinks.insert(b.kinks().begin(), b.kinks().end());
  def.kinks.assign(kinks.begin(), kinks.end());
  if (a.closed_form() && b.closed_form()) {
    // rho is additive; the other two are not, so they go through quadrature.
    const auto num = numeric_model_constants(LevyModel(def, ma));
    def.closed_form = ModelConstants{a.closed_form()->rho + b.closed_form()->rho, num.s_sup,
                                     num.s_l2sq};
  }
  return LevyModel(std::move(def), ma);
}

namespace catalog {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool ok, const std::string& what) {
  if (!ok) throw ValidationError(what);
}

void require_finite(std::initializer_list<double> values, const char* model) {
  for (double v : values) {
    require(std::isfinite(v), std::string(model) + ": parameters must be finite");
  }
}

// int_0^len (base + scale u^alpha)^k du for k = 1, 2.
double power_piece(double base, double scale, double alpha, double len) {
  return base * len + scale * std::pow(len, alpha + 1.0) / (alpha + 1.0);
}
double power_piece_sq(double base, double scale, double alpha, double len) {
  return base * base * len + 2.0 * base * scale * std::pow(len, alpha + 1.0) / (alpha + 1.0) +
         scale * scale * std::pow(len, 2.0 * alpha + 1.0) / (2.0 * alpha + 1.0);
}

}  // namespace

LevyModel constant(double lambda, double lo, double hi) {
  require_finite({lambda}, "constant");
  require(lambda > 0.0, "constant: lambda must be positive");
  auto measure = ReferenceMeasure::lebesgue(lo, hi);
  const double len = hi - lo;
  LevyModel::Definition def;
  def.name = "constant";
  def.target = [lambda](double) { return lambda; };
  def.smoothness_alpha = kInf;
  def.closed_form = ModelConstants{lambda * len, lambda, lambda * lambda * len};
  def.inverse_cdf = [lo, len](double u) { return lo + len * u; };
  return LevyModel(std::move(def), measure);
}

LevyModel linear_ramp(double start, double end, double lo, double hi) {
  require_finite({start, end}, "linear-ramp");
  require(start > 0.0 && end > 0.0, "linear-ramp: end values must be positive");
  auto measure = ReferenceMeasure::lebesgue(lo, hi);
  const double len = hi - lo;
  LevyModel::Definition def;
  def.name = "linear-ramp";
  def.target = [=](double x) { return start + (end - start) * (x - lo) / len; };
  def.smoothness_alpha = kInf;
  def.closed_form = ModelConstants{len * (start + end) / 2.0, std::max(start, end),
                                   len * (start * start + start * end + end * end) / 3.0};
  // Solves start t + (end - start) t^2 / 2 = u (start + end) / 2 for t in [0, 1]
  // in the cancellation-free form.
  def.inverse_cdf = [=](double u) {
    const double t = u * (start + end) /
                     (start + std::sqrt(start * start + (end * end - start * start) * u));
    return lo + len * t;
  };
  return LevyModel(std::move(def), measure);
}

LevyModel truncated_exponential(double scale, double rate, double lo, double hi) {
  require_finite({scale, rate}, "truncated-exponential");
  require(scale > 0.0, "truncated-exponential: scale must be positive");
  require(rate > 0.0, "truncated-exponential: rate must be positive");
  auto measure = ReferenceMeasure::lebesgue(lo, hi);
  const double ea = std::exp(-rate * lo);
  const double eb = std::exp(-rate * hi);
  LevyModel::Definition def;
  def.name = "truncated-exponential";
  def.target = [=](double x) { return scale * std::exp(-rate * x); };
  def.smoothness_alpha = kInf;
  def.closed_form = ModelConstants{scale * (ea - eb) / rate, scale * ea,
                                   scale * scale * (ea * ea - eb * eb) / (2.0 * rate)};
  def.inverse_cdf = [=](double u) {
    const double x = -std::log(ea - u * (ea - eb)) / rate;
    return std::clamp(x, lo, hi);
  };
  return LevyModel(std::move(def), measure);
}

LevyModel lipschitz_kink(double base, double slope, double kink, double lo, double hi) {
  require_finite({base, slope, kink}, "lipschitz-kink");
  require(base > 0.0, "lipschitz-kink: base must be positive");
  require(slope >= 0.0, "lipschitz-kink: slope must be non-negative");
  require(kink >= lo && kink <= hi, "lipschitz-kink: kink must lie in the window");
  auto measure = ReferenceMeasure::lebesgue(lo, hi);
  const double left = kink - lo;
  const double right = hi - kink;
  LevyModel::Definition def;
  def.name = "lipschitz-kink";
  def.target = [=](double x) { return base + slope * std::abs(x - kink); };
  def.smoothness_alpha = 1.0;
  def.kinks = {kink};
  def.closed_form = ModelConstants{
      power_piece(base, slope, 1.0, left) + power_piece(base, slope, 1.0, right),
      base + slope * std::max(left, right),
      power_piece_sq(base, slope, 1.0, left) + power_piece_sq(base, slope, 1.0, right)};
  return LevyModel(std::move(def), measure);
}

LevyModel holder(double alpha, double base, double scale, double center, double lo, double hi) {
  require_finite({alpha, base, scale, center}, "holder");
  require(alpha > 0.0 && alpha <= 1.0, "holder: alpha must lie in (0, 1]");
  require(base > 0.0, "holder: base must be positive");
  require(scale >= 0.0, "holder: scale must be non-negative");
  require(center >= lo && center <= hi, "holder: center must lie in the window");
  auto measure = ReferenceMeasure::lebesgue(lo, hi);
  const double left = center - lo;
  const double right = hi - center;
  LevyModel::Definition def;
  def.name = "holder";
  def.target = [=](double x) { return base + scale * std::pow(std::abs(x - center), alpha); };
  def.smoothness_alpha = alpha;
  def.kinks = {center};
  def.closed_form = ModelConstants{
      power_piece(base, scale, alpha, left) + power_piece(base, scale, alpha, right),
      base + scale * std::pow(std::max(left, right), alpha),
      power_piece_sq(base, scale, alpha, left) + power_piece_sq(base, scale, alpha, right)};
  return LevyModel(std::move(def), measure);
}

LevyModel inverse_square_compensated(double c, double lo, double hi) {
  require_finite({c}, "inverse-square-compensated");
  require(c > 0.0, "inverse-square-compensated: c must be positive");
  auto measure = ReferenceMeasure::inverse_square(lo, hi);
  const double near = std::min(std::abs(lo), std::abs(hi));
  const double far = std::max(std::abs(lo), std::abs(hi));
  const double sign = lo > 0.0 ? 1.0 : -1.0;
  LevyModel::Definition def;
  def.name = "inverse-square-compensated";
  def.target = [c](double x) { return c * std::abs(x); };
  def.smoothness_alpha = kInf;
  def.closed_form = ModelConstants{c * std::log(far / near), c * far, c * c * (hi - lo)};
  // |x| has density proportional to 1/|x| on [near, far].
  def.inverse_cdf = [=](double u) {
    return std::clamp(sign * near * std::pow(far / near, u), lo, hi);
  };
  return LevyModel(std::move(def), measure);
}

std::vector<std::string> ids() {
  return {"constant",       "linear-ramp", "truncated-exponential",
          "lipschitz-kink", "holder",      "inverse-square-compensated"};
}

LevyModel make(const std::string& id, const std::map<std::string, double>& params, double lo,
               double hi) {
  std::set<std::string> used;
  auto get = [&](const std::string& key, double fallback) {
    used.insert(key);
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
  };
  auto check_unused = [&]() {
    for (const auto& [key, value] : params) {
      if (!used.count(key)) {
        throw ValidationError("model '" + id + "' has no parameter '" + key + "'");
      }
    }
  };
  const double width = hi - lo;
  std::optional<LevyModel> out;
  if (id == "constant") {
    out = constant(get("lambda", 10.0), lo, hi);
  } else if (id == "linear-ramp") {
    out = linear_ramp(get("start", 2.0), get("end", 12.0), lo, hi);
  } else if (id == "truncated-exponential") {
    out = truncated_exponential(get("scale", 10.0), get("rate", 1.0), lo, hi);
  } else if (id == "lipschitz-kink") {
    out = lipschitz_kink(get("base", 1.0), get("slope", 10.0), get("kink", lo + 0.4 * width), lo,
                         hi);
  } else if (id == "holder") {
    out = holder(get("alpha", 0.5), get("base", 1.0), get("scale", 10.0),
                 get("center", lo + 0.4 * width), lo, hi);
  } else if (id == "inverse-square-compensated") {
    out = inverse_square_compensated(get("c", 1.0), lo, hi);
  } else {
    std::string valid;
    for (const auto& v : ids()) valid += (valid.empty() ? "" : ", ") + v;
    throw ValidationError("unknown model '" + id + "'; valid models: " + valid);
  }
  check_unused();
  return *out;
}

}  // namespace catalog

}  // namespace levysieve
