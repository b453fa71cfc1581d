#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/poisson.hpp>

#include "levysieve/model.hpp"
#include "levysieve/parallel.hpp"
#include "levysieve/rng.hpp"
#include "levysieve/simulate.hpp"

using namespace levysieve;

namespace {

// Two-sided exact Poisson test: P[N <= k] and P[N >= k] under the null.
bool poisson_compatible(double mean, double observed_sum, std::size_t reps, double level) {
  boost::math::poisson_distribution<> total(mean * static_cast<double>(reps));
  const double k = observed_sum;
  const double lower = boost::math::cdf(total, k);
  const double upper = boost::math::cdf(boost::math::complement(total, k - 1));
  return 2.0 * std::min(lower, upper) > level;
}

}  // namespace

TEST_CASE("jump counts have Poisson moments") {
  const auto model = catalog::constant(10.0);
  const JumpSampler sampler(model);
  const std::size_t reps = 10000;
  std::vector<double> counts(reps);
  for (std::size_t r = 0; r < reps; ++r) {
    counts[r] = static_cast<double>(sampler.sample(50.0, RngStream{11, r}).count());
  }
  const auto s = summarize(counts);
  CHECK(std::abs(s.mean - 500.0) <= 3.0 * s.se);
  // sd of the sample variance for Poisson(500) is about sqrt(2 * 500^2 / R)
  const double var = s.sd * s.sd;
  const double var_se = std::sqrt((2.0 * 500.0 * 500.0 + 500.0) / static_cast<double>(reps));
  CHECK(std::abs(var - 500.0) <= 3.0 * var_se);
}

TEST_CASE("tiny horizons almost never produce jumps") {
  const JumpSampler sampler(catalog::constant(10.0));
  std::size_t nonzero = 0;
  for (std::size_t r = 0; r < 1000; ++r) nonzero += sampler.sample(1e-9, RngStream{3, r}).count();
  CHECK(nonzero == 0);
}

TEST_CASE("sample invariants") {
  for (const auto& model : {catalog::lipschitz_kink(1.0, 10.0, 0.4),
                            catalog::holder(0.5, 1.0, 10.0, 0.4),
                            catalog::inverse_square_compensated(2.0, 1.0, 3.0)}) {
    const auto s = sample_jumps(model, 20.0, RngStream{5, 0});
    CHECK(s.count() > 0);
    for (std::size_t i = 0; i < s.count(); ++i) {
      CHECK(model.measure().contains(s.jumps[i].size));
      CHECK(s.jumps[i].time > 0.0);
      CHECK(s.jumps[i].time <= 20.0);
      if (i > 0) CHECK(s.jumps[i].time > s.jumps[i - 1].time);
    }
  }
}

TEST_CASE("constant model sizes are uniform") {
  const JumpSampler sampler(catalog::constant(10.0));
  Engine eng = RngStream{17, 0}.engine();
  const std::size_t bins = 50;
  const std::size_t draws = 100000;
  std::vector<double> hist(bins, 0.0);
  for (std::size_t i = 0; i < draws; ++i) {
    const double x = sampler.draw_size(eng);
    hist[std::min(bins - 1, static_cast<std::size_t>(x * bins))] += 1.0;
  }
  const double expected = static_cast<double>(draws) / bins;
  double stat = 0.0;
  for (double h : hist) stat += (h - expected) * (h - expected) / expected;
  boost::math::chi_squared_distribution<> chi(bins - 1);
  CHECK(boost::math::cdf(boost::math::complement(chi, stat)) > 0.001);
}

TEST_CASE("rejection sampler follows the target density") {
  const auto model = catalog::holder(0.5, 1.0, 10.0, 0.4);
  const JumpSampler sampler(model);
  CHECK(sampler.uses_rejection());
  Engine eng = RngStream{19, 0}.engine();
  const std::size_t bins = 40;
  const std::size_t draws = 100000;
  std::vector<double> hist(bins, 0.0);
  for (std::size_t i = 0; i < draws; ++i) {
    hist[std::min(bins - 1, static_cast<std::size_t>(sampler.draw_size(eng) * bins))] += 1.0;
  }
  const double rho = model_constants(model).rho;
  double stat = 0.0;
  for (std::size_t b = 0; b < bins; ++b) {
    const double lo = static_cast<double>(b) / bins;
    const double mass = eta_integral(model.target(), model.measure(), lo, lo + 1.0 / bins, {},
                                     model.breakpoints()) / rho;
    const double expected = mass * static_cast<double>(draws);
    stat += (hist[b] - expected) * (hist[b] - expected) / expected;
  }
  boost::math::chi_squared_distribution<> chi(bins - 1);
  CHECK(boost::math::cdf(boost::math::complement(chi, stat)) > 0.001);
}

TEST_CASE("inverse cdf sampler for the inverse-square model") {
  const auto model = catalog::inverse_square_compensated(1.0, 1.0, 4.0);
  const JumpSampler sampler(model);
  CHECK_FALSE(sampler.uses_rejection());
  Engine eng = RngStream{23, 0}.engine();
  // size density is (1/x) / ln 4 on [1,4]: P[x <= 2] = 1/2
  std::size_t below = 0;
  const std::size_t draws = 40000;
  for (std::size_t i = 0; i < draws; ++i) below += sampler.draw_size(eng) <= 2.0;
  const double p = static_cast<double>(below) / draws;
  CHECK(std::abs(p - 0.5) <= 3.0 * std::sqrt(0.25 / draws));
}

TEST_CASE("superposed model has Poisson(T(l1+l2)) counts") {
  const auto merged = superpose(catalog::constant(3.0), catalog::constant(4.0));
  const JumpSampler sampler(merged);
  const std::size_t reps = 10000;
  double total = 0.0;
  for (std::size_t r = 0; r < reps; ++r) total += sampler.sample(2.0, RngStream{29, r}).count();
  CHECK(poisson_compatible(14.0, total, reps, 1e-3));
}

TEST_CASE("identical streams reproduce identical samples") {
  const auto model = catalog::lipschitz_kink(1.0, 10.0, 0.4);
  const auto a = sample_jumps(model, 30.0, RngStream{99, 4});
  const auto b = sample_jumps(model, 30.0, RngStream{99, 4});
  REQUIRE(a.count() == b.count());
  for (std::size_t i = 0; i < a.count(); ++i) {
    CHECK(a.jumps[i].time == b.jumps[i].time);
    CHECK(a.jumps[i].size == b.jumps[i].size);
  }
  const auto c = sample_jumps(model, 30.0, RngStream{99, 5});
  CHECK((c.count() != a.count() || c.jumps.front().size != a.jumps.front().size));
}

TEST_CASE("increments from a fixed jump set") {
  Engine eng = RngStream{1, 0}.engine();
  JumpSample one{1.0, {{0.3, 0.5}}};
  const auto a = increments_from_jumps(one, 0.0, 0.0, 2, eng);
  REQUIRE(a.increments.size() == 2);
  CHECK(a.increments[0] == 0.5);
  CHECK(a.increments[1] == 0.0);

  JumpSample none{1.0, {}};
  const auto b = increments_from_jumps(none, 0.0, 1.0, 4, eng);
  for (double d : b.increments) CHECK(d == 0.25);

  JumpSample edge{1.0, {{0.5, 0.7}}};
  const auto c = increments_from_jumps(edge, 0.0, 0.0, 2, eng);
  CHECK(c.increments[0] == 0.7);
}

TEST_CASE("grid cells are half open on the left") {
  CHECK(grid_cell(0.5, 1.0, 2) == 0);
  CHECK(grid_cell(0.5000001, 1.0, 2) == 1);
  CHECK(grid_cell(1.0, 1.0, 2) == 1);
  CHECK(grid_cell(0.25, 1.0, 4) == 0);
  CHECK(grid_cell(0.75, 1.0, 4) == 2);
  CHECK(grid_cell(1e-12, 1.0, 4) == 0);
}

TEST_CASE("increments telescope and carry exactly the sampled jumps") {
  const auto model = catalog::constant(10.0).with_diffusion(0.3, 0.7);
  for (std::size_t r = 0; r < 20; ++r) {
    const auto incr = sample_increments(model, 5.0, 1000, RngStream{31, r});
    const double sum = std::accumulate(incr.increments.begin(), incr.increments.end(), 0.0);
    CHECK(std::abs(sum - incr.terminal_value) <= 1e-12 * std::max(1.0, std::abs(sum)));
  }
  const auto pure = catalog::constant(10.0);
  for (std::size_t r = 0; r < 20; ++r) {
    const auto incr = sample_increments(pure, 5.0, 64, RngStream{37, r});
    double jumps = 0.0;
    for (const auto& j : incr.jumps.jumps) jumps += j.size;
    const double sum = std::accumulate(incr.increments.begin(), incr.increments.end(), 0.0);
    CHECK(std::abs(sum - jumps) <= 1e-12);
    CHECK(incr.increments.size() == 64);
  }
}
