#pragma once

#include <span>
#include <string_view>
#include <vector>

namespace levysieve {

enum class MeasureKind { lebesgue, inverse_square, custom_grid };

std::string_view to_string(MeasureKind kind);

/// Reference measure eta(dx) = w(x) dx on a window D = [lo, hi].
///
/// The window may not straddle the origin. Lebesgue and custom-grid windows
/// may end at 0 (the point 0 carries no jumps); the inverse-square weight
/// needs 0 outside [lo, hi] so that eta(D) is finite.
class ReferenceMeasure {
 public:
  static ReferenceMeasure lebesgue(double lo, double hi);
  static ReferenceMeasure inverse_square(double lo, double hi);
  /// Weight given by linear interpolation of positive values on a grid that
  /// spans the window.
  static ReferenceMeasure custom_grid(double lo, double hi, std::vector<double> grid,
                                      std::vector<double> values);

  MeasureKind kind() const { return kind_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  double width() const { return hi_ - lo_; }

  double weight(double x) const;
  bool contains(double x) const { return x >= lo_ && x <= hi_ && x != 0.0; }

  /// Same kind, window and weight table.
  bool matches(const ReferenceMeasure& other) const {
    return kind_ == other.kind_ && lo_ == other.lo_ && hi_ == other.hi_ && grid_ == other.grid_ &&
           values_ == other.values_;
  }

  /// Points where w is not smooth; quadrature splits panels there.
  std::span<const double> breakpoints() const { return breaks_; }

 private:
  ReferenceMeasure(MeasureKind kind, double lo, double hi);

  MeasureKind kind_;
  double lo_;
  double hi_;
  std::vector<double> grid_;
  std::vector<double> values_;
  std::vector<double> breaks_;
};

}  // namespace levysieve
