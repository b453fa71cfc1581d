#include "levysieve/parallel.hpp"

namespace levysieve {

unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

MeanSe summarize(std::span<const double> values) {
  MeanSe out;
  out.count = values.size();
  if (values.empty()) {
    out.mean = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  // Two-pass in index order so the result does not depend on scheduling.
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(values.size());
  if (values.size() < 2) return out;
  double ss = 0.0;
  for (double v : values) ss += (v - out.mean) * (v - out.mean);
  out.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  out.se = out.sd / std::sqrt(static_cast<double>(values.size()));
  return out;
}

}  // namespace levysieve
