#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace levysieve {

/// Gauss-Legendre nodes and weights on [-1, 1].
///
/// Nodes are found by Newton iteration on the Legendre recurrence and are
/// returned in increasing order. An n-point rule integrates polynomials of
/// degree up to 2n-1 exactly.
class GaussLegendre {
 public:
  explicit GaussLegendre(int order);

  int order() const { return static_cast<int>(nodes_.size()); }
  std::span<const double> nodes() const { return nodes_; }
  std::span<const double> weights() const { return weights_; }

 private:
  std::vector<double> nodes_;
  std::vector<double> weights_;
};

/// Flattened node/weight list of a composite rule over a set of panels.
struct CompositeRule {
  std::vector<double> nodes;
  std::vector<double> weights;  // dx weights, the reference measure is applied by the caller
};

/// Sorted panel edges: `panels` equal pieces of [lo, hi] with every element
/// of `breaks` lying strictly inside (lo, hi) inserted as an extra edge.
/// With `grading_levels` > 0 each break also gets geometrically graded edges
/// b +- w 2^-j (w the regular panel width), which keeps the rule accurate for
/// integrands like |x - b|^alpha.
std::vector<double> panel_edges(double lo, double hi, std::size_t panels,
                                std::span<const double> breaks = {}, int grading_levels = 0);

CompositeRule composite_rule(std::span<const double> edges, const GaussLegendre& rule);

}  // namespace levysieve
