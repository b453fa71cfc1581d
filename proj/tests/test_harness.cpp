#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include <boost/math/special_functions/gamma.hpp>

#include "levysieve/errors.hpp"
#include "levysieve/harness.hpp"

using namespace levysieve;
namespace fs = std::filesystem;

namespace {

FlatConfig parse(const std::string& text) {
  std::istringstream in(text);
  return FlatConfig::parse(in);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("levysieve_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

const char* kRiskConfig =
    "experiment = risk\n"
    "model.name = constant\n"
    "model.lambda = 10\n"
    "window.lo = 0\n"
    "window.hi = 1\n"
    "basis.k = 0\n"
    "basis.mmax = 16\n"
    "penalty.form = c\n"
    "penalty.c = 2\n"
    "penalty.c1 = 1\n"
    "penalty.c2 = 1\n"
    "t = 100\n"
    "reps = 50\n"
    "seed = 5\n";

struct CliResult {
  int status;
  std::string err;
};

CliResult cli(const fs::path& dir, const std::string& args) {
  const auto err_file = dir / "stderr.txt";
  const std::string cmd =
      std::string("\"") + LEVY_SIEVE_EXE + "\" " + args + " > /dev/null 2> \"" + err_file.string() + "\"";
  const int status = std::system(cmd.c_str());
  return {status, slurp(err_file)};
}

}  // namespace

TEST_CASE("flat config parsing") {
  const auto flat = parse("# comment\na = 1\nb = \"two words\"\nlist = [1, 2.5, 4]\n\n");
  CHECK(flat.get_double("a") == 1.0);
  CHECK(flat.get_string("b") == "two words");
  CHECK(flat.get_list("list") == std::vector<double>{1.0, 2.5, 4.0});
  CHECK(flat.unused_keys().empty());
  CHECK_THROWS_AS(parse("a = 1\na = 2\n"), ConfigError);
  CHECK_THROWS_AS(parse("no equals sign\n"), ConfigError);
  try {
    flat.get_double("missing");
    FAIL("expected an error");
  } catch (const ConfigError& e) {
    CHECK(e.key() == "missing");
  }
  CHECK_THROWS_AS(parse("a = x\n").get_double("a"), ConfigError);
}

TEST_CASE("experiment config validation") {
  const auto ok = ExperimentConfig::from_flat(parse(kRiskConfig));
  CHECK(ok.experiment == "risk");
  CHECK(ok.mmax == 16);
  CHECK(ok.t_grid == std::vector<double>{100.0});

  auto without = [](const std::string& key) {
    std::string text = kRiskConfig;
    const auto pos = text.find(key + " =");
    text.erase(pos, text.find('\n', pos) - pos + 1);
    return parse(text);
  };
  try {
    ExperimentConfig::from_flat(without("penalty.c"));
    FAIL("expected an error");
  } catch (const ConfigError& e) {
    CHECK(e.key() == "penalty.c");
  }
  CHECK_THROWS_AS(ExperimentConfig::from_flat(parse(std::string(kRiskConfig) + "typo.key = 1\n")),
                  ConfigError);
  try {
    ExperimentConfig::from_flat(parse("experiment = bogus\n"));
    FAIL("expected an error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("concentration") != std::string::npos);
  }
  CHECK_THROWS_AS(ExperimentConfig::from_flat(parse(std::string(kRiskConfig) + "t.grid = 50, 40\n")),
                  ConfigError);
  auto zero_reps = without("reps");
  zero_reps.set("reps", "0");
  CHECK_THROWS_AS(ExperimentConfig::from_flat(zero_reps), ConfigError);
}

TEST_CASE("risk report for the constant model") {
  const auto levy = catalog::constant(10.0);
  const ModelCollection coll(0, 64, levy.measure());
  PenaltyConfig pen;
  const RiskSetup setup{levy, coll, pen, 2000, 1, 0};
  const auto report = risk_mc(setup, 100.0);
  CHECK(report.oracle_m == 1);
  CHECK(report.at(1).bias_sq <= 1e-9);
  for (std::size_t m = 1; m <= 32; ++m) {
    CHECK(report.at(2 * m).risk.mean > report.at(m).risk.mean - 3.0 * report.at(m).risk.se);
  }
  double max_risk = 0.0;
  double min_risk = INFINITY;
  for (const auto& r : report.models) {
    CHECK(std::abs(r.risk.mean - (r.bias_sq + r.chi.mean)) <= 3.0 * r.risk.se);
    CHECK(r.chi.mean == doctest::Approx(r.chi_expected).epsilon(0.2));
    max_risk = std::max(max_risk, r.risk.mean);
    min_risk = std::min(min_risk, r.risk.mean);
  }
  CHECK(report.ppe_risk.mean <= max_risk + 3.0 * report.ppe_risk.se);
  CHECK(report.ppe_risk.mean >= min_risk - 3.0 * report.ppe_risk.se);
  double freq = 0.0;
  for (const auto& r : report.models) freq += r.select_freq;
  CHECK(freq == doctest::Approx(1.0));
}

TEST_CASE("single replication has no standard errors") {
  const auto levy = catalog::constant(10.0);
  const ModelCollection coll(0, 8, levy.measure());
  const RiskSetup setup{levy, coll, PenaltyConfig{}, 1, 3, 1};
  const auto report = risk_mc(setup, 50.0);
  CHECK_FALSE(report.ppe_risk.has_se());
  CHECK(std::isfinite(report.ppe_risk.mean));
  std::ostringstream csv;
  write_risk_csv(csv, report);
  CHECK(csv.str().find(",NA,") != std::string::npos);
  CHECK(format_number(std::nan("")) == "NA");
  CHECK(format_number(0.1) == "0.1");
}

TEST_CASE("risk_mc is deterministic and independent of the thread count") {
  const auto levy = catalog::lipschitz_kink(1.0, 10.0, 0.4);
  const ModelCollection coll(1, 12, levy.measure());
  const RiskSetup one{levy, coll, PenaltyConfig{}, 64, 9, 1};
  const RiskSetup many{levy, coll, PenaltyConfig{}, 64, 9, 4};
  std::ostringstream a;
  std::ostringstream b;
  std::ostringstream c;
  write_risk_csv(a, risk_mc(one, 60.0));
  write_risk_csv(b, risk_mc(many, 60.0));
  write_risk_csv(c, risk_mc(one, 60.0));
  CHECK(a.str() == b.str());
  CHECK(a.str() == c.str());
}

TEST_CASE("oracle check") {
  RiskReport report;
  report.horizon = 10.0;
  for (std::size_t m = 1; m <= 4; ++m) {
    ModelRisk r;
    r.m = m;
    r.risk.mean = 1.0 + std::abs(static_cast<double>(m) - 2.0);
    report.models.push_back(r);
  }
  report.ppe_risk.mean = 1.0;  // always picks m = 2
  const auto exact = oracle_check(report);
  CHECK(exact.ratio == 1.0);
  CHECK(exact.additive_slack == 0.0);
  CHECK(exact.pass);

  report.ppe_risk.mean = 2.5;
  const auto before = oracle_check(report);
  std::reverse(report.models.begin(), report.models.end());
  for (std::size_t i = 0; i < report.models.size(); ++i) report.models[i].m = i + 1;
  const auto after = oracle_check(report);
  CHECK(before.ratio == after.ratio);
  CHECK(before.ratio == 2.5);
  CHECK(before.additive_slack == doctest::Approx(15.0));
  CHECK_FALSE(oracle_check(report, 2.0).pass);
}

TEST_CASE("rate fit on exact power laws") {
  std::vector<RatePoint> pts;
  for (double t : {50.0, 100.0, 200.0, 400.0, 800.0}) {
    RatePoint p;
    p.horizon = t;
    p.ppe_risk.mean = 3.0 * std::pow(t, -2.0 / 3.0);
    p.ppe_risk.se = 0.01 * p.ppe_risk.mean;
    pts.push_back(p);
  }
  const auto fit = fit_rate(pts, false);
  CHECK(fit.slope == doctest::Approx(-2.0 / 3.0).epsilon(1e-12));
  CHECK(fit.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-12));
  CHECK(fit.slope_se > 0.0);
  CHECK(fit_rate(pts, true).slope == doctest::Approx(-2.0 / 3.0).epsilon(1e-12));
  pts[2].ppe_risk.mean = 0.0;
  CHECK(fit_rate(pts, false).skipped);
}

TEST_CASE("rate experiment preconditions and replication scaling") {
  const auto levy = catalog::constant(10.0);
  const ModelCollection coll(0, 64, levy.measure());
  const RiskSetup small{levy, coll, PenaltyConfig{}, 200, 13, 0};
  CHECK_THROWS_AS(rate_experiment(small, {50, 100, 200}), ValidationError);
  CHECK_THROWS_AS(rate_experiment(small, {50, 60, 70, 80}), ValidationError);
  CHECK_THROWS_AS(rate_experiment(small, {50, 40, 700, 800}), ValidationError);

  const RiskSetup big{levy, coll, PenaltyConfig{}, 400, 13, 0};
  const std::vector<double> grid{50, 100, 200, 400, 800};
  const auto half = rate_experiment(small, grid);
  const auto full = rate_experiment(big, grid);
  CHECK(full.target_slope == -1.0);
  const double joint = std::sqrt(half.slope_se * half.slope_se + full.slope_se * full.slope_se);
  CHECK(std::abs(half.slope - full.slope) <= joint);
  CHECK(half.slope_se / full.slope_se == doctest::Approx(std::sqrt(2.0)).epsilon(0.3));
}

TEST_CASE("Poisson tail oracle") {
  for (double mean : {0.5, 10.0, 73.0}) {
    for (long long k : {0LL, 1LL, 5LL, 15LL, 60LL, 90LL}) {
      const double expected = k == 0 ? 1.0 : boost::math::gamma_p(static_cast<double>(k), mean);
      CHECK(poisson_upper_tail(mean, k) == doctest::Approx(expected).epsilon(1e-10));
    }
  }
  CHECK(poisson_upper_tail(10.0, 15) == doctest::Approx(0.0834584).epsilon(1e-5));
}

TEST_CASE("concentration report") {
  const auto rep = concentration_check(10.0, 1.0, {1e-6, 1.0, 4.0}, 5000, 1.0, 21);
  REQUIRE(rep.rows.size() == 3);
  CHECK(rep.mass == 10.0);
  CHECK(rep.rows[0].bound == doctest::Approx(1.0).epsilon(1e-5));
  for (const auto& r : rep.rows) {
    CHECK(r.exceed_freq >= 0.0);
    CHECK(r.exceed_freq <= 1.0);
    CHECK(r.hold_freq >= 0.0);
    CHECK(r.hold_freq <= 1.0);
    CHECK(r.exceed_exact <= r.bound);
    CHECK(r.hold_exact >= r.hold_bound);
  }
  CHECK_THROWS_AS(concentration_check(0.0, 1.0, {1.0}, 10, 1.0, 1), ValidationError);
  CHECK_THROWS_AS(concentration_check(1.0, 1.0, {-1.0}, 10, 1.0, 1), ValidationError);
}

TEST_CASE("closed-form inequality checks") {
  const auto grid = deviation_grid_check();
  CHECK(grid.points == 12500);
  CHECK(grid.violations == 0);

  auto a = tail_integral_check(0.0, 1.0, 1.0);
  CHECK(a.expected_z == 1.0);
  CHECK(a.bound == 1.0);
  CHECK(a.holds);
  auto b = tail_integral_check(1.0, 0.0, 1.0);
  CHECK(b.expected_z == 2.0);
  CHECK(b.bound == 2.0);
  CHECK(b.holds);
  auto c = tail_integral_check(1.0, 1.0, 3.0);
  CHECK(c.expected_z == 3.0);
  CHECK(c.bound == 9.0);
  CHECK(c.holds);
  CHECK_THROWS_AS(tail_integral_check(0.0, 0.0, 1.0), ValidationError);
  CHECK_THROWS_AS(tail_integral_check(-1.0, 1.0, 1.0), ValidationError);
  CHECK_THROWS_AS(tail_integral_check(1.0, 1.0, 0.5), ValidationError);
}

TEST_CASE("discrete experiment sanity") {
  const auto levy = catalog::constant(10.0);
  const auto model = std::make_shared<const LinearModel>(build_model(0, 4, levy.measure()));
  const DiscreteSetup setup{levy, model, ThresholdRule::none(),
                            [](double x) { return x; }, 1.0, {64, 256}, 2000, 3, 0};
  const auto rep = discrete_experiment(setup);
  REQUIRE(rep.rows.size() == 2);
  for (const auto& r : rep.rows) {
    CHECK(r.target_mean == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(std::abs(r.stat.mean - 5.0) <= 3.0 * r.stat.se);
  }
  // f(x) = x sums all jumps whatever the grid, so both rows agree exactly
  CHECK(rep.rows[0].stat.mean == doctest::Approx(rep.rows[1].stat.mean).epsilon(1e-12));
}

TEST_CASE("command line runs") {
  const auto dir = scratch("cli");
  const auto cfg = dir / "risk.cfg";
  std::ofstream(cfg) << kRiskConfig;

  const auto first = cli(dir, "run --config \"" + cfg.string() + "\" --out \"" + (dir / "a").string() + "\"");
  REQUIRE(first.status == 0);
  const auto csv = slurp(dir / "a" / "risk.csv");
  CHECK(csv.rfind("m,d_m,D_m,risk_mean,risk_se,bias_sq,chi_mean,pen_mean,select_freq\n", 0) == 0);
  const auto manifest = slurp(dir / "a" / "manifest.txt");
  CHECK(manifest.find("seed = 5") != std::string::npos);
  CHECK(manifest.find(std::string("version = ") + kVersion) != std::string::npos);

  const auto second = cli(dir, "run --config \"" + cfg.string() + "\" --out \"" + (dir / "b").string() +
                                   "\" --threads 3");
  REQUIRE(second.status == 0);
  CHECK(slurp(dir / "b" / "risk.csv") == csv);
  CHECK(slurp(dir / "b" / "manifest.txt") == manifest);

  const auto reseeded = cli(dir, "run --config \"" + cfg.string() + "\" --out \"" +
                                     (dir / "c").string() + "\" --seed 6");
  REQUIRE(reseeded.status == 0);
  CHECK(slurp(dir / "c" / "risk.csv") != csv);

  std::string text = kRiskConfig;
  const auto pos = text.find("penalty.c = 2\n");
  text.erase(pos, std::string("penalty.c = 2\n").size());
  const auto bad = dir / "bad.cfg";
  std::ofstream(bad) << text;
  const auto failed = cli(dir, "run --config \"" + bad.string() + "\" --out \"" + (dir / "d").string() + "\"");
  CHECK(failed.status != 0);
  CHECK(failed.err.find("penalty.c") != std::string::npos);

  const auto bogus = dir / "bogus.cfg";
  std::ofstream(bogus) << "experiment = simulate\n";
  const auto unknown = cli(dir, "run --config \"" + bogus.string() + "\"");
  CHECK(unknown.status != 0);
  CHECK(unknown.err.find("risk, rate, concentration, discrete") != std::string::npos);

  CHECK(cli(dir, "run --config \"" + (dir / "absent.cfg").string() + "\"").status != 0);
}

TEST_CASE("every experiment kind writes its table") {
  const auto dir = scratch("kinds");
  const std::pair<std::string, std::string> runs[] = {
      {"rate.csv",
       "experiment = rate\nmodel.name = lipschitz-kink\nbasis.k = 0\npenalty.form = c\n"
       "penalty.c = 2\npenalty.c1 = 1\npenalty.c2 = 1\nt.grid = 50, 100, 200, 500\nreps = 20\n"},
      {"concentration.csv",
       "experiment = concentration\nconcentration.lambda = 10\nconcentration.u_grid = 0.5, 1, 2, 4\n"
       "reps = 1000\n"},
      {"discrete.csv",
       "experiment = discrete\nmodel.name = constant\nt = 1\nsigma = 0.1\ndiscrete.n = 64, 256\n"
       "reps = 50\n"},
  };
  for (const auto& [name, text] : runs) {
    CAPTURE(name);
    const auto cfg = dir / (name + ".cfg");
    std::ofstream(cfg) << text;
    std::ostringstream log;
    std::ostringstream err;
    RunOverrides o;
    o.out_dir = dir / name;
    CHECK(run(cfg, o, log, err) == 0);
    CHECK(err.str().empty());
    CHECK(fs::exists(dir / name / name));
    CHECK(fs::exists(dir / name / "manifest.txt"));
  }
}
