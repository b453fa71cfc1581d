#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>

#include "levysieve/bases.hpp"
#include "levysieve/discrete.hpp"
#include "levysieve/estimate.hpp"
#include "levysieve/model.hpp"
#include "levysieve/parallel.hpp"
#include "levysieve/rng.hpp"
#include "levysieve/simulate.hpp"

using namespace levysieve;

namespace {

IncrementSample fixed_increments(std::vector<double> d) {
  IncrementSample s;
  s.horizon = 1.0;
  s.n = d.size();
  s.increments = std::move(d);
  s.jumps.horizon = 1.0;
  return s;
}

std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    for (std::size_t t = i; t <= j; ++t) r[idx[t]] = 0.5 * (i + j) + 1.0;
    i = j + 1;
  }
  return r;
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  const auto rx = ranks(x);
  const auto ry = ranks(y);
  const double n = static_cast<double>(x.size());
  const double mean = (n + 1.0) / 2.0;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (rx[i] - mean) * (ry[i] - mean);
    sxx += (rx[i] - mean) * (rx[i] - mean);
    syy += (ry[i] - mean) * (ry[i] - mean);
  }
  return sxy / std::sqrt(sxx * syy);
}

const RealFunction square = [](double x) { return x * x; };

}  // namespace

TEST_CASE("threshold rule") {
  const auto r = ThresholdRule::power(1.0, 0.9);
  CHECK(r(0.5) == doctest::Approx(std::pow(0.5, 0.9)));
  CHECK(ThresholdRule::none()(0.01) == 0.0);
  CHECK(ThresholdRule::constant(0.05)(0.3) == 0.05);
  CHECK_THROWS(ThresholdRule::power(1.0, 1.0));
  CHECK_THROWS(ThresholdRule::power(-1.0, 0.5));
  // h / r(h) -> 0 and r(h) -> 0
  CHECK(r(1e-8) < r(1e-4));
  CHECK(1e-8 / r(1e-8) < 1e-4 / r(1e-4));
}

TEST_CASE("integral statistic hand examples") {
  CHECK(integral_stat(fixed_increments({0.1, -0.2, 0.3}), square) ==
        doctest::Approx(0.14).epsilon(1e-14));
  CHECK(integral_stat(fixed_increments({0.0, 0.0, 0.0}), square) == 0.0);
  // exact zeros are skipped even when f(0) != 0
  CHECK(integral_stat(fixed_increments({0.0, 0.5}), [](double) { return 1.0; }) == 1.0);
}

TEST_CASE("thresholded statistic hand examples") {
  const auto incr = fixed_increments({0.1, -0.2, 0.3});
  CHECK(thresholded_stat(incr, square, ThresholdRule::constant(0.05)) ==
        doctest::Approx(0.09).epsilon(1e-14));
  const auto noisy = fixed_increments({0.1, 0.0, -0.2, 1e-9});
  CHECK(thresholded_stat(noisy, square, ThresholdRule::none()) == integral_stat(noisy, square));
}

TEST_CASE("mean of I_n(x) for the constant model") {
  const JumpSampler sampler(catalog::constant(10.0));
  std::vector<double> stat(10000);
  for (std::size_t r = 0; r < stat.size(); ++r) {
    const auto incr = sample_increments(sampler, 1.0, 256, RngStream{71, r});
    stat[r] = integral_stat(incr, [](double x) { return x; });
  }
  const auto s = summarize(stat);
  CHECK(std::abs(s.mean - 5.0) <= 3.0 * s.se);
}

TEST_CASE("threshold isolates a single jump under small diffusion") {
  JumpSample one{1.0, {{0.41, 0.8}}};
  const auto rule = ThresholdRule::power(1.0, 0.9);
  std::size_t close = 0;
  const std::size_t reps = 10000;
  for (std::size_t r = 0; r < reps; ++r) {
    Engine eng = RngStream{73, r}.engine();
    const auto incr = increments_from_jumps(one, 0.1, 0.0, 1024, eng);
    close += std::abs(thresholded_stat(incr, square, rule) - 0.64) <= 0.015;
  }
  CHECK(static_cast<double>(close) / reps >= 0.99);
}

TEST_CASE("discrete projection reproduces the continuous one when cells isolate jumps") {
  const auto levy = catalog::constant(10.0);
  const auto model = std::make_shared<const LinearModel>(build_model(1, 5, levy.measure()));
  const JumpSampler sampler(levy);
  std::size_t isolated = 0;
  for (std::size_t r = 0; r < 200; ++r) {
    const auto incr = sample_increments(sampler, 10.0, 1u << 14, RngStream{79, r});
    if (!cells_isolate_jumps(incr)) continue;
    ++isolated;
    const auto d = fit_projection_discrete(incr, model, ThresholdRule::none());
    const auto c = fit_projection(incr.jumps, model);
    for (std::size_t i = 0; i < c.beta_hat.size(); ++i) {
      CHECK(std::abs(d.beta_hat[i] - c.beta_hat[i]) <= 1e-12);
    }
  }
  CHECK(isolated > 100);
}

TEST_CASE("two jumps in one cell alias into a single increment") {
  const auto model = std::make_shared<const LinearModel>(
      build_model(0, 4, ReferenceMeasure::lebesgue(0.0, 1.0)));
  JumpSample two{1.0, {{0.1, 0.2}, {0.2, 0.25}}};
  Engine eng = RngStream{1, 0}.engine();
  const auto incr = increments_from_jumps(two, 0.0, 0.0, 4, eng);
  CHECK_FALSE(cells_isolate_jumps(incr));
  CHECK(incr.increments[0] == doctest::Approx(0.45));
  const auto d = fit_projection_discrete(incr, model, ThresholdRule::none());
  const auto c = fit_projection(two, model);
  CHECK(d.beta_hat[1] == doctest::Approx(2.0));  // 0.45 sits in the second cell
  CHECK(c.beta_hat[0] == doctest::Approx(4.0));  // both jumps sit in the first
  CHECK(discrete_continuous_gap(incr, model, ThresholdRule::none()) ==
        doctest::Approx(4.0 * 4.0 + 2.0 * 2.0));
}

TEST_CASE("discrete and continuous estimates merge as the grid refines") {
  const auto levy = catalog::constant(10.0).with_diffusion(0.1, 0.0);
  const auto model = std::make_shared<const LinearModel>(build_model(0, 4, levy.measure()));
  const JumpSampler sampler(levy);
  const auto rule = ThresholdRule::power(1.0, 0.9);
  const std::size_t grid[] = {50u << 8, 50u << 9, 50u << 10};
  std::vector<double> x;
  std::vector<double> y;
  double means[3] = {0.0, 0.0, 0.0};
  const std::size_t reps = 200;
  for (std::size_t r = 0; r < reps; ++r) {
    Engine eng = RngStream{83, r}.engine();
    const auto jumps = sampler.sample(50.0, eng);
    for (std::size_t g = 0; g < 3; ++g) {
      Engine diffusion = RngStream{mix64(83 + grid[g]), r}.engine();
      const auto incr = increments_from_jumps(jumps, 0.1, 0.0, grid[g], diffusion);
      const double gap = discrete_continuous_gap(incr, model, rule);
      x.push_back(std::log(static_cast<double>(grid[g])));
      y.push_back(gap);
      means[g] += gap / reps;
    }
  }
  const double rho = spearman(x, y);
  // one-sided p < 0.01 for n = 600 pairs needs rho < -2.326 / sqrt(599)
  CHECK(rho < -2.326 / std::sqrt(static_cast<double>(x.size() - 1)));
  CHECK(means[2] < means[1]);
  CHECK(means[1] < means[0]);
}

TEST_CASE("moments of I_n(f) approach their continuous-time limits") {
  const auto levy = catalog::constant(10.0);
  const JumpSampler sampler(levy);
  const RealFunction quartic = [](double x) { return x * x * x * x; };
  const double target_var = 10.0 / 9.0;  // T int x^8 p dx, T = 1
  const std::size_t reps = 20000;
  std::vector<double> log_n;
  std::vector<double> mean_gap;
  std::vector<double> var_gap;
  for (int e = 4; e <= 12; ++e) {
    const std::size_t n = std::size_t{1} << e;
    std::vector<double> gap(reps);
    std::vector<double> stat(reps);
    for (std::size_t r = 0; r < reps; ++r) {
      const auto incr = sample_increments(sampler, 1.0, n, RngStream{89, r});
      double exact = 0.0;
      for (const auto& j : incr.jumps.jumps) exact += quartic(j.size);
      stat[r] = integral_stat(incr, quartic);
      gap[r] = stat[r] - exact;
    }
    const auto g = summarize(gap);
    log_n.push_back(static_cast<double>(e));
    mean_gap.push_back(g.mean);
    const auto s = summarize(stat);
    var_gap.push_back(std::abs(s.sd * s.sd - target_var));
  }
  CHECK(spearman(log_n, mean_gap) <= -0.9);
  CHECK(spearman(log_n, var_gap) <= -0.9);
  CHECK(var_gap.back() < 0.1 * var_gap.front());
  CHECK(mean_gap.back() < mean_gap.front());
}

TEST_CASE("false detections fade as the grid refines") {
  const auto levy = catalog::constant(10.0).with_diffusion(1.0, 0.0);
  const auto rule = ThresholdRule::power(1.0, 0.9);
  const JumpSampler sampler(levy);
  std::vector<double> log_n;
  std::vector<double> rate;
  for (int e = 4; e <= 12; ++e) {
    const std::size_t n = std::size_t{1} << e;
    double acc = 0.0;
    const std::size_t reps = 2000;
    for (std::size_t r = 0; r < reps; ++r) {
      acc += false_detection_rate(sample_increments(sampler, 1.0, n, RngStream{97, r}), rule);
    }
    log_n.push_back(e);
    rate.push_back(acc / reps);
  }
  CHECK(spearman(log_n, rate) <= -0.9);
  CHECK(rate.back() < rate.front());
}
