#include "levysieve/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "levysieve/errors.hpp"

namespace levysieve {

GaussLegendre::GaussLegendre(int order) {
  if (order < 1) throw ValidationError("Gauss-Legendre order must be >= 1");
  const auto n = static_cast<std::size_t>(order);
  nodes_.resize(n);
  weights_.resize(n);
  if (n == 1) {
    nodes_[0] = 0.0;
    weights_[0] = 2.0;
    return;
  }
  for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
    // Tricomi's initial guess for the i-th root, then Newton.
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                        (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (std::size_t k = 2; k <= n; ++k) {
        const double kd = static_cast<double>(k);
        const double p2 = ((2.0 * kd - 1.0) * x * p1 - (kd - 1.0) * p0) / kd;
        p0 = p1;
        p1 = p2;
      }
      dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    nodes_[i] = -x;
    nodes_[n - 1 - i] = x;
    weights_[i] = w;
    weights_[n - 1 - i] = w;
  }
}

std::vector<double> panel_edges(double lo, double hi, std::size_t panels,
                                std::span<const double> breaks, int grading_levels) {
  if (!(lo < hi)) throw ValidationError("panel_edges: empty interval");
  if (panels == 0) throw ValidationError("panel_edges: need at least one panel");
  std::vector<double> edges;
  edges.reserve(panels + 1 + breaks.size());
  const double width = hi - lo;
  for (std::size_t j = 0; j <= panels; ++j) {
    edges.push_back(j == panels ? hi
                                : lo + width * static_cast<double>(j) / static_cast<double>(panels));
  }
  const double panel_width = width / static_cast<double>(panels);
  for (double b : breaks) {
    if (b >= lo && b <= hi) {
      edges.push_back(b);
      for (int j = 1; j <= grading_levels; ++j) {
        const double off = std::ldexp(panel_width, -j);
        if (b - off > lo) edges.push_back(b - off);
        if (b + off < hi) edges.push_back(b + off);
      }
    }
  }
  edges.erase(std::remove_if(edges.begin(), edges.end(),
                             [&](double e) { return e < lo || e > hi; }),
              edges.end());
  std::sort(edges.begin(), edges.end());
  // Drop slivers created by a break that nearly coincides with a grid edge.
  const double eps = 1e-14 * std::max(1.0, std::max(std::abs(lo), std::abs(hi)));
  std::vector<double> out;
  out.reserve(edges.size());
  for (double e : edges) {
    if (out.empty() || e - out.back() > eps) {
      out.push_back(e);
    } else if (e == hi) {
      out.back() = hi;
    }
  }
  return out;
}

CompositeRule composite_rule(std::span<const double> edges, const GaussLegendre& rule) {
  CompositeRule out;
  if (edges.size() < 2) return out;
  const auto nodes = rule.nodes();
  const auto weights = rule.weights();
  out.nodes.reserve((edges.size() - 1) * nodes.size());
  out.weights.reserve(out.nodes.capacity());
  for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
    const double half = 0.5 * (edges[p + 1] - edges[p]);
    const double mid = 0.5 * (edges[p + 1] + edges[p]);
    for (std::size_t q = 0; q < nodes.size(); ++q) {
      out.nodes.push_back(mid + half * nodes[q]);
      out.weights.push_back(half * weights[q]);
    }
  }
  return out;
}

}  // namespace levysieve
