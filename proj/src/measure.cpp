#include "levysieve/measure.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "levysieve/errors.hpp"

namespace levysieve {

std::string_view to_string(MeasureKind kind) {
  switch (kind) {
    case MeasureKind::lebesgue:
      return "lebesgue";
    case MeasureKind::inverse_square:
      return "inverse-square";
    case MeasureKind::custom_grid:
      return "custom-grid";
  }
  return "unknown";
}

ReferenceMeasure::ReferenceMeasure(MeasureKind kind, double lo, double hi)
    : kind_(kind), lo_(lo), hi_(hi) {
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi)) {
    throw ValidationError("window must satisfy lo < hi with finite ends");
  }
  if (lo < 0.0 && hi > 0.0) {
    throw ValidationError("window [" + std::to_string(lo) + ", " + std::to_string(hi) +
                          "] contains the origin");
  }
}

ReferenceMeasure ReferenceMeasure::lebesgue(double lo, double hi) {
  return ReferenceMeasure(MeasureKind::lebesgue, lo, hi);
}

ReferenceMeasure ReferenceMeasure::inverse_square(double lo, double hi) {
  ReferenceMeasure m(MeasureKind::inverse_square, lo, hi);
  if (lo <= 0.0 && hi >= 0.0) {
    throw ValidationError("inverse-square measure needs a window bounded away from 0");
  }
  return m;
}

ReferenceMeasure ReferenceMeasure::custom_grid(double lo, double hi, std::vector<double> grid,
                                               std::vector<double> values) {
  ReferenceMeasure m(MeasureKind::custom_grid, lo, hi);
  if (grid.size() < 2 || grid.size() != values.size()) {
    throw ValidationError("custom-grid measure needs matching grid and values, at least 2 points");
  }
  if (!std::is_sorted(grid.begin(), grid.end()) ||
      std::adjacent_find(grid.begin(), grid.end()) != grid.end()) {
    throw ValidationError("custom-grid nodes must be strictly increasing");
  }
  if (grid.front() > lo || grid.back() < hi) {
    throw ValidationError("custom-grid nodes must cover the window");
  }
  for (double v : values) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw ValidationError("custom-grid weights must be positive and finite");
    }
  }
  for (double g : grid) {
    if (g > lo && g < hi) m.breaks_.push_back(g);
  }
  m.grid_ = std::move(grid);
  m.values_ = std::move(values);
  return m;
}

double ReferenceMeasure::weight(double x) const {
  switch (kind_) {
    case MeasureKind::lebesgue:
      return 1.0;
    case MeasureKind::inverse_square:
      return 1.0 / (x * x);
    case MeasureKind::custom_grid: {
      auto it = std::upper_bound(grid_.begin(), grid_.end(), x);
      if (it == grid_.begin()) return values_.front();
      if (it == grid_.end()) return values_.back();
      const auto j = static_cast<std::size_t>(it - grid_.begin());
      const double t = (x - grid_[j - 1]) / (grid_[j] - grid_[j - 1]);
      return values_[j - 1] + t * (values_[j] - values_[j - 1]);
    }
  }
  return 1.0;
}

}  // namespace levysieve
