#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "levysieve/measure.hpp"
#include "levysieve/model.hpp"

namespace levysieve {

inline constexpr int kMaxDegree = 5;

/// Piecewise polynomials of degree <= k on the regular partition of D into m
/// cells, with a basis orthonormal in L2(eta).
///
/// Cells are half-open, (e_{j-1}, e_j], except the first which is closed on
/// the left. Basis function i lives on cell i / (k+1); on its cell it is a
/// polynomial in the local variable t = (x - mid) / half in [-1, 1].
class LinearModel {
 public:
  int degree() const { return degree_; }
  std::size_t partitions() const { return partitions_; }
  std::size_t dimension() const { return partitions_ * static_cast<std::size_t>(degree_ + 1); }
  std::size_t local_dimension() const { return static_cast<std::size_t>(degree_ + 1); }
  /// D_m = sup_x sum_i phi_i(x)^2.
  double sup_constant() const { return sup_constant_; }
  const ReferenceMeasure& measure() const { return measure_; }

  double edge(std::size_t j) const;
  /// Cell index of x under the half-open convention; DomainError outside D.
  std::size_t cell_of(double x) const;
  std::size_t cell_of_basis(std::size_t i) const { return i / local_dimension(); }

  /// Values of the k+1 basis functions of cell j at x (x assumed in the cell).
  void eval_local(std::size_t j, double x, std::span<double> out) const;
  /// Cell of x, with the local basis values written to `out`.
  std::size_t eval_at(double x, std::span<double> out) const;

  double eval(std::size_t i, double x) const;
  double sumsq(double x) const;
  /// sum_i phi_i^2 on cell j as polynomial coefficients in t (degree 2k).
  std::span<const double> sumsq_coefficients(std::size_t j) const;
  /// Coefficients in t of basis function i on its cell.
  std::span<const double> coefficients(std::size_t i) const;

 private:
  friend LinearModel build_model(int degree, std::size_t partitions,
                                 const ReferenceMeasure& measure, QuadratureOptions opts);
  LinearModel(int degree, std::size_t partitions, ReferenceMeasure measure);

  double local_t(std::size_t j, double x) const;

  int degree_;
  std::size_t partitions_;
  ReferenceMeasure measure_;
  double sup_constant_ = 0.0;
  std::vector<double> coeffs_;  // dimension() x (k+1), row-major
  std::vector<double> sumsq_;   // partitions() x (2k+1)
};

/// Per-cell Gram-Schmidt on monomials with eta inner products.
/// Throws DegreeTooHighError for k > 5 or a numerically singular Gram matrix.
LinearModel build_model(int degree, std::size_t partitions, const ReferenceMeasure& measure,
                        QuadratureOptions opts = {});

/// phi_i(x) (0-based i); DomainError for x outside D or i out of range.
double eval_basis(const LinearModel& model, std::size_t i, double x);

/// Dense-grid sup of sum_i phi_i^2: 1e4 points per cell plus cell endpoints.
double sum_squares_sup(const LinearModel& model);

/// Quadrature nodes aligned with the cells of a model; weights include the
/// eta density, so sum_q weight[q] f(x[q]) approximates int f d(eta).
struct NodeSet {
  std::vector<double> x;
  std::vector<double> weight;
  std::vector<std::size_t> cell;
};

NodeSet cell_nodes(const LinearModel& model, std::span<const double> breaks = {},
                   QuadratureOptions opts = {});

/// int sum_i phi_i^2 s d(eta) = E[V_m] for T = 1 units.
double expected_vhat(const LinearModel& model, const LevyModel& levy);

/// The sieve {S_m^k : m = 1..mmax} for a fixed degree.
class ModelCollection {
 public:
  ModelCollection(int degree, std::size_t mmax, const ReferenceMeasure& measure,
                  QuadratureOptions opts = {});

  int degree() const { return degree_; }
  std::size_t mmax() const { return models_.size(); }
  const LinearModel& model(std::size_t m) const { return *models_.at(m - 1); }
  const std::shared_ptr<const LinearModel>& shared(std::size_t m) const { return models_.at(m - 1); }
  const ReferenceMeasure& measure() const { return models_.front()->measure(); }

  // Complexity constants: at most Gamma * n^R models of dimension n.
  static constexpr double gamma = 1.0;
  static constexpr double r_exponent = 0.0;
  bool satisfies_complexity_bound() const;

 private:
  int degree_;
  std::vector<std::shared_ptr<const LinearModel>> models_;
};

struct CollectionConstants {
  double beta = 0.0;     // min_m E[V_m] / D_m
  double phi_inf = 0.0;  // min_m D_m / d_m
};

CollectionConstants collection_constants(const ModelCollection& coll, const LevyModel& levy);

}  // namespace levysieve
