#include "levysieve/bases.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "levysieve/errors.hpp"
#include "levysieve/quadrature.hpp"

namespace levysieve {

namespace {

constexpr std::size_t kSupGridPerCell = 10000;
constexpr double kMaxGramCondition = 1e12;

double horner(std::span<const double> c, double t) {
  double v = 0.0;
  for (std::size_t i = c.size(); i-- > 0;) v = v * t + c[i];
  return v;
}

std::size_t panels_per_cell(std::size_t panels, std::size_t partitions) {
  return std::max<std::size_t>(1, (panels + partitions - 1) / partitions);
}

}  // namespace

LinearModel::LinearModel(int degree, std::size_t partitions, ReferenceMeasure measure)
    : degree_(degree), partitions_(partitions), measure_(std::move(measure)) {}

double LinearModel::edge(std::size_t j) const {
  if (j >= partitions_) return measure_.hi();
  return measure_.lo() +
         measure_.width() * static_cast<double>(j) / static_cast<double>(partitions_);
}

std::size_t LinearModel::cell_of(double x) const {
  if (!(x >= measure_.lo() && x <= measure_.hi())) {
    throw DomainError("point " + std::to_string(x) + " lies outside the window");
  }
  const double scaled = (x - measure_.lo()) / measure_.width() * static_cast<double>(partitions_);
  auto j = static_cast<std::size_t>(std::max(0.0, std::ceil(scaled) - 1.0));
  j = std::min(j, partitions_ - 1);
  while (j > 0 && x <= edge(j)) --j;
  while (j + 1 < partitions_ && x > edge(j + 1)) ++j;
  return j;
}

double LinearModel::local_t(std::size_t j, double x) const {
  const double a = edge(j);
  const double b = edge(j + 1);
  return (2.0 * x - a - b) / (b - a);
}

void LinearModel::eval_local(std::size_t j, double x, std::span<double> out) const {
  const double t = local_t(j, x);
  const std::size_t n = local_dimension();
  for (std::size_t l = 0; l < n; ++l) {
    out[l] = horner(coefficients(j * n + l), t);
  }
}

std::size_t LinearModel::eval_at(double x, std::span<double> out) const {
  const std::size_t j = cell_of(x);
  eval_local(j, x, out);
  return j;
}

double LinearModel::eval(std::size_t i, double x) const {
  if (i >= dimension()) throw DomainError("basis index out of range");
  const std::size_t j = cell_of(x);
  if (j != cell_of_basis(i)) return 0.0;
  return horner(coefficients(i), local_t(j, x));
}

double LinearModel::sumsq(double x) const {
  const std::size_t j = cell_of(x);
  return horner(sumsq_coefficients(j), local_t(j, x));
}

std::span<const double> LinearModel::sumsq_coefficients(std::size_t j) const {
  const std::size_t width = 2 * static_cast<std::size_t>(degree_) + 1;
  return std::span<const double>(sumsq_).subspan(j * width, width);
}

std::span<const double> LinearModel::coefficients(std::size_t i) const {
  const std::size_t n = local_dimension();
  return std::span<const double>(coeffs_).subspan(i * n, n);
}

LinearModel build_model(int degree, std::size_t partitions, const ReferenceMeasure& measure,
                        QuadratureOptions opts) {
  if (degree < 0) throw ValidationError("degree must be non-negative");
  if (degree > kMaxDegree) {
    throw DegreeTooHighError("degree " + std::to_string(degree) + " exceeds the supported maximum " +
                             std::to_string(kMaxDegree));
  }
  if (partitions == 0) throw ValidationError("need at least one partition");

  LinearModel model(degree, partitions, measure);
  const std::size_t n = model.local_dimension();
  const std::size_t nsq = 2 * n - 1;
  model.coeffs_.assign(model.dimension() * n, 0.0);
  model.sumsq_.assign(partitions * nsq, 0.0);

  const GaussLegendre rule(opts.order);
  const std::size_t ppc = panels_per_cell(opts.panels, partitions);
  for (std::size_t j = 0; j < partitions; ++j) {
    const double a = model.edge(j);
    const double b = model.edge(j + 1);
    const auto edges = panel_edges(a, b, ppc, measure.breakpoints());
    const auto cr = composite_rule(edges, rule);

    // Gram matrix of the monomials t^p under eta restricted to the cell.
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                                 static_cast<Eigen::Index>(n));
    for (std::size_t q = 0; q < cr.nodes.size(); ++q) {
      const double x = cr.nodes[q];
      const double w = cr.weights[q] * measure.weight(x);
      const double t = (2.0 * x - a - b) / (b - a);
      double tp = 1.0;
      std::vector<double> powers(2 * n - 1);
      for (auto& p : powers) {
        p = tp;
        tp *= t;
      }
      for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
          gram(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) += w * powers[r + c];
        }
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
    const double lmin = eig.eigenvalues().minCoeff();
    const double lmax = eig.eigenvalues().maxCoeff();
    if (!(lmin > 0.0) || lmax / lmin > kMaxGramCondition) {
      throw DegreeTooHighError("Gram matrix of degree-" + std::to_string(degree) +
                               " monomials on cell " + std::to_string(j) +
                               " is numerically singular");
    }

    // Modified Gram-Schmidt with one reorthogonalization pass.
    auto inner = [&](const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
      return u.dot(gram * v);
    };
    std::vector<Eigen::VectorXd> basis;
    for (std::size_t p = 0; p < n; ++p) {
      Eigen::VectorXd v = Eigen::VectorXd::Unit(static_cast<Eigen::Index>(n),
                                                static_cast<Eigen::Index>(p));
      for (int pass = 0; pass < 2; ++pass) {
        for (const auto& qv : basis) v -= inner(v, qv) * qv;
      }
      const double norm2 = inner(v, v);
      if (!(norm2 > 0.0)) {
        throw DegreeTooHighError("Gram-Schmidt breakdown on cell " + std::to_string(j));
      }
      v /= std::sqrt(norm2);
      basis.push_back(v);
    }
    for (std::size_t l = 0; l < n; ++l) {
      for (std::size_t p = 0; p < n; ++p) {
        model.coeffs_[(j * n + l) * n + p] = basis[l](static_cast<Eigen::Index>(p));
      }
      for (std::size_t p = 0; p < n; ++p) {
        for (std::size_t r = 0; r < n; ++r) {
          model.sumsq_[j * nsq + p + r] += basis[l](static_cast<Eigen::Index>(p)) *
                                           basis[l](static_cast<Eigen::Index>(r));
        }
      }
    }
  }
  model.sup_constant_ = sum_squares_sup(model);
  return model;
}

double eval_basis(const LinearModel& model, std::size_t i, double x) {
  return model.eval(i, x);
}

double sum_squares_sup(const LinearModel& model) {
  double sup = 0.0;
  for (std::size_t j = 0; j < model.partitions(); ++j) {
    const auto c = model.sumsq_coefficients(j);
    for (std::size_t i = 0; i <= kSupGridPerCell; ++i) {
      const double t = -1.0 + 2.0 * static_cast<double>(i) / kSupGridPerCell;
      sup = std::max(sup, horner(c, t));
    }
  }
  return sup;
}

NodeSet cell_nodes(const LinearModel& model, std::span<const double> breaks,
                   QuadratureOptions opts) {
  const auto& measure = model.measure();
  std::vector<double> all(breaks.begin(), breaks.end());
  const auto mb = measure.breakpoints();
  all.insert(all.end(), mb.begin(), mb.end());
  const GaussLegendre rule(opts.order);
  const std::size_t ppc = panels_per_cell(opts.panels, model.partitions());
  NodeSet out;
  for (std::size_t j = 0; j < model.partitions(); ++j) {
    const auto edges =
        panel_edges(model.edge(j), model.edge(j + 1), ppc, all, opts.grading_levels);
    const auto cr = composite_rule(edges, rule);
    for (std::size_t q = 0; q < cr.nodes.size(); ++q) {
      out.x.push_back(cr.nodes[q]);
      out.weight.push_back(cr.weights[q] * measure.weight(cr.nodes[q]));
      out.cell.push_back(j);
    }
  }
  return out;
}

double expected_vhat(const LinearModel& model, const LevyModel& levy) {
  if (!model.measure().matches(levy.measure())) {
    throw ValidationError("linear model and Levy model use different reference measures");
  }
  const auto nodes = cell_nodes(model, levy.kinks());
  double total = 0.0;
  for (std::size_t q = 0; q < nodes.x.size(); ++q) {
    const std::size_t j = nodes.cell[q];
    const double a = model.edge(j);
    const double b = model.edge(j + 1);
    const double t = (2.0 * nodes.x[q] - a - b) / (b - a);
    double sq = 0.0;
    const auto c = model.sumsq_coefficients(j);
    for (std::size_t i = c.size(); i-- > 0;) sq = sq * t + c[i];
    total += nodes.weight[q] * sq * levy.s(nodes.x[q]);
  }
  return total;
}

ModelCollection::ModelCollection(int degree, std::size_t mmax, const ReferenceMeasure& measure,
                                 QuadratureOptions opts)
    : degree_(degree) {
  if (mmax == 0) throw ValidationError("collection needs mmax >= 1");
  models_.reserve(mmax);
  for (std::size_t m = 1; m <= mmax; ++m) {
    models_.push_back(std::make_shared<const LinearModel>(build_model(degree, m, measure, opts)));
  }
}

bool ModelCollection::satisfies_complexity_bound() const {
  std::map<std::size_t, std::size_t> per_dimension;
  for (const auto& m : models_) ++per_dimension[m->dimension()];
  for (const auto& [dim, count] : per_dimension) {
    if (static_cast<double>(count) > gamma * std::pow(static_cast<double>(dim), r_exponent)) {
      return false;
    }
  }
  return true;
}

CollectionConstants collection_constants(const ModelCollection& coll, const LevyModel& levy) {
  CollectionConstants out;
  out.beta = std::numeric_limits<double>::infinity();
  out.phi_inf = std::numeric_limits<double>::infinity();
  for (std::size_t m = 1; m <= coll.mmax(); ++m) {
    const auto& model = coll.model(m);
    out.beta = std::min(out.beta, expected_vhat(model, levy) / model.sup_constant());
    out.phi_inf = std::min(out.phi_inf,
                           model.sup_constant() / static_cast<double>(model.dimension()));
  }
  return out;
}

}  // namespace levysieve
