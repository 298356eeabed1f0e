#include <doctest.h>

#include <cmath>

#include "taushape/errors.hpp"
#include "taushape/shape_model.hpp"
#include "taushape/summaries.hpp"

using namespace taushape;

namespace {

TauSample uniform_tau_sample(const std::string& key, int n, int m,
                             std::uint64_t seed) {
  TauSample ts;
  ts.scenario.key = key;
  ts.scenario.model.kind = ModelKind::BetaBinomial;
  ts.scenario.model.beta = {0.0};
  ts.scenario.model.eta = 0.0;
  ts.scenario.n = n;
  ts.scenario.M = m;
  RngStream rng(seed, 0);
  ts.taus.resize(m);
  for (auto& t : ts.taus) t = rng.uniform();
  return ts;
}

// Row whose quantiles are the exact theoretical quantiles of beta(a, b).
QuantileRow synthetic_row(const std::string& key, double n, double delta,
                          double a, double b, const QuantileGrid& grid) {
  QuantileRow row;
  row.key = key;
  row.n = n;
  row.delta = delta;
  for (double p : grid.probs) row.q.push_back(beta_quantile(p, {a, b}));
  return row;
}

double median_of(const std::vector<double>& v) {
  return credible_summary(v).median;
}

}  // namespace

TEST_CASE("quantile matrix from a uniform null sample") {
  QuantileGrid grid = QuantileGrid::default_grid();
  TauSample ts = uniform_tau_sample("null", 100, 100000, 21);
  QuantileMatrix qm = build_quantile_matrix({ts}, grid, 0.0);
  REQUIRE(qm.rows.size() == 1);
  CHECK(qm.rows[0].is_null());
  for (int j = 0; j < grid.size(); ++j)
    CHECK(std::fabs(qm.rows[0].q[j] - grid.probs[j]) < 0.005);
}

TEST_CASE("quantile matrix of a degenerate sample and validation") {
  QuantileGrid grid = QuantileGrid::default_grid();
  TauSample ones = uniform_tau_sample("ones", 50, 2000, 1);
  for (auto& t : ones.taus) t = 1.0;
  QuantileMatrix qm = build_quantile_matrix({ones}, grid, 0.0);
  for (double q : qm.rows[0].q) CHECK(q == 1.0);

  TauSample small = uniform_tau_sample("small", 50, 500, 2);
  CHECK_THROWS_AS(build_quantile_matrix({small}, grid, 0.0), InvalidParameter);

  TauSample a = uniform_tau_sample("dup", 50, 2000, 3);
  TauSample b = uniform_tau_sample("dup", 60, 2000, 4);
  CHECK_THROWS_AS(build_quantile_matrix({a, b}, grid, 0.0), DuplicateScenario);
}

TEST_CASE("quantile rows reproduce an independent type-7 recomputation") {
  QuantileGrid grid = QuantileGrid::default_grid();
  TauSample ts = uniform_tau_sample("exact", 200, 100000, 5);
  QuantileMatrix qm = build_quantile_matrix({ts}, grid, 0.0);
  std::vector<double> again = empirical_quantiles(ts.taus, grid.probs);
  for (int j = 0; j < grid.size(); ++j) CHECK(qm.rows[0].q[j] == again[j]);
}

TEST_CASE("stage-1 recovers the generating shape") {
  QuantileGrid grid = QuantileGrid::default_grid();
  Stage1Options opt;

  SUBCASE("uniform null row concentrates near a = 1") {
    QuantileRow row = synthetic_row("r", 100, 0.0, 1.0, 1.0, grid);
    Stage1Entry e = stage1_fit(row, grid, Hypothesis::Null, opt, RngStream(31, 0));
    double med = std::exp(median_of(e.log_a));
    CHECK(med > 0.9);
    CHECK(med < 1.1);
    CHECK(e.converged);
  }
  SUBCASE("alternative row from beta(5, 1/5)") {
    QuantileRow row = synthetic_row("r", 100, 2.0, 5.0, 0.2, grid);
    Stage1Entry e = stage1_fit(row, grid, Hypothesis::Alt, opt, RngStream(32, 0));
    double med = std::exp(median_of(e.log_a));
    CHECK(med > 4.5);
    CHECK(med < 5.5);
  }
  SUBCASE("null row from beta(3,3)") {
    QuantileRow row = synthetic_row("r", 100, 0.0, 3.0, 3.0, grid);
    Stage1Entry e = stage1_fit(row, grid, Hypothesis::Null, opt, RngStream(33, 0));
    double med = std::exp(median_of(e.log_a));
    CHECK(med > 2.7);
    CHECK(med < 3.3);
  }
}

TEST_CASE("stage-1 identifiability across the shape range") {
  QuantileGrid grid = QuantileGrid::default_grid();
  Stage1Options opt;
  int idx = 0;
  for (double a : {0.5, 1.0, 3.0, 10.0}) {
    QuantileRow row = synthetic_row("r", 100, 0.0, a, a, grid);
    Stage1Entry e =
        stage1_fit(row, grid, Hypothesis::Null, opt, RngStream(34, idx++));
    double med = std::exp(median_of(e.log_a));
    CHECK(med > 0.9 * a);
    CHECK(med < 1.1 * a);
  }
}

TEST_CASE("asymmetric-null escape hatch fits independent shapes") {
  QuantileGrid grid = QuantileGrid::default_grid();
  Stage1Options opt;
  opt.asymmetric_null = true;
  QuantileRow row = synthetic_row("r", 100, 0.0, 2.0, 1.0, grid);
  Stage1Entry e = stage1_fit(row, grid, Hypothesis::Null, opt, RngStream(35, 0));
  REQUIRE(!e.log_b.empty());
  double med_a = std::exp(median_of(e.log_a));
  double med_b = std::exp(median_of(e.log_b));
  CHECK(med_a > 1.6);
  CHECK(med_a < 2.4);
  CHECK(med_b > 0.8);
  CHECK(med_b < 1.25);
}

namespace {

Stage1Posterior synthetic_stage1_null(const std::vector<double>& ns, double a1,
                                      double a2, double s0, int draws,
                                      std::uint64_t seed) {
  Stage1Posterior s1;
  s1.hypothesis = Hypothesis::Null;
  RngStream rng(seed, 0);
  for (std::size_t i = 0; i < ns.size(); ++i) {
    Stage1Entry e;
    e.key = "n" + std::to_string(i);
    e.n = ns[i];
    e.delta = 0.0;
    double m = a1 / ns[i] + a2 / (ns[i] * ns[i]);
    for (int s = 0; s < draws; ++s) e.log_a.push_back(rng.normal(m, s0));
    s1.entries.push_back(std::move(e));
  }
  return s1;
}

Stage1Posterior synthetic_stage1_alt(const std::vector<double>& deltas,
                                     double p1, double p2, double s1v,
                                     int draws, std::uint64_t seed) {
  Stage1Posterior s1;
  s1.hypothesis = Hypothesis::Alt;
  RngStream rng(seed, 0);
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    Stage1Entry e;
    e.key = "d" + std::to_string(i);
    e.n = 100;
    e.delta = deltas[i];
    double m = p1 * deltas[i] + p2 * deltas[i] * deltas[i];
    for (int s = 0; s < draws; ++s) e.log_a.push_back(rng.normal(m, s1v));
    s1.entries.push_back(std::move(e));
  }
  return s1;
}

}  // namespace

TEST_CASE("stage-2 null self-recovery") {
  std::vector<double> ns = {20,  40,  60,  80,  100, 120, 160,
                            200, 300, 400, 500, 600, 800, 1000};
  // 1/n^2 is nearly collinear with 1/n on this design, so alpha2 needs many
  // stage-1 draws before its posterior tightens to the 20% band.
  Stage1Posterior s1 = synthetic_stage1_null(ns, 5.0, -20.0, 0.1, 5000, 41);
  Stage2Config cfg;
  cfg.thin_per_row = 5000;
  NullShapePosterior fit = stage2_fit_null(s1, cfg, RngStream(42, 0));
  double a1 = median_of(std::vector<double>(
      fit.a.draws.col(0).data(), fit.a.draws.col(0).data() + fit.a.size()));
  double a2 = median_of(std::vector<double>(
      fit.a.draws.col(1).data(), fit.a.draws.col(1).data() + fit.a.size()));
  double s0 = median_of(std::vector<double>(
      fit.a.draws.col(2).data(), fit.a.draws.col(2).data() + fit.a.size()));
  CHECK(std::fabs(a1 - 5.0) < 1.0);
  CHECK(std::fabs(a2 + 20.0) < 4.0);
  CHECK(std::fabs(s0 - 0.1) < 0.02);
}

TEST_CASE("stage-2 with all-zero draws concentrates the coefficients at zero") {
  std::vector<double> ns = {20, 50, 100, 500};
  Stage1Posterior s1 = synthetic_stage1_null(ns, 0.0, 0.0, 1e-30, 50, 43);
  for (auto& e : s1.entries)
    for (auto& z : e.log_a) z = 0.0;
  NullShapePosterior fit = stage2_fit_null(s1, Stage2Config{}, RngStream(44, 0));
  double a1 = median_of(std::vector<double>(
      fit.a.draws.col(0).data(), fit.a.draws.col(0).data() + fit.a.size()));
  CHECK(std::fabs(a1) < 0.05);
}

TEST_CASE("stage-2 insufficient design") {
  Stage1Posterior s1 = synthetic_stage1_null({20, 40}, 1.0, 0.0, 0.1, 50, 45);
  CHECK_THROWS_AS(stage2_fit_null(s1, Stage2Config{}, RngStream(46, 0)),
                  InsufficientDesign);
  Stage1Posterior alt = synthetic_stage1_alt({1.0, 2.0}, 1.0, 0.0, 0.1, 50, 47);
  CHECK_THROWS_AS(stage2_fit_alt(alt, Stage2Config{}, RngStream(48, 0)),
                  InsufficientDesign);
}

TEST_CASE("stage-2 alt self-recovery on a 12-point delta grid") {
  std::vector<double> deltas;
  for (int i = 1; i <= 12; ++i) deltas.push_back(i);
  Stage1Posterior s1 = synthetic_stage1_alt(deltas, 1.2, 0.05, 0.1, 50, 49);
  AltShapePosterior fit = stage2_fit_alt(s1, Stage2Config{}, RngStream(50, 0));
  double p1 = median_of(std::vector<double>(
      fit.phi.draws.col(0).data(), fit.phi.draws.col(0).data() + fit.phi.size()));
  double p2 = median_of(std::vector<double>(
      fit.phi.draws.col(1).data(), fit.phi.draws.col(1).data() + fit.phi.size()));
  double s0 = median_of(std::vector<double>(
      fit.phi.draws.col(2).data(), fit.phi.draws.col(2).data() + fit.phi.size()));
  CHECK(std::fabs(p1 - 1.2) < 0.24);
  CHECK(std::fabs(p2 - 0.05) < 0.01);
  CHECK(std::fabs(s0 - 0.1) < 0.02);
}

TEST_CASE("predictive shapes from point-mass hyperparameters") {
  NullShapePosterior null_pm = NullShapePosterior::point_mass(0.0, 0.0, 0.0);
  for (const auto& p : predictive_shape(null_pm, 50.0, 32, RngStream(51, 0))) {
    CHECK(p.a == doctest::Approx(1.0));
    CHECK(p.b == doctest::Approx(1.0));
  }
  AltShapePosterior alt_pm = AltShapePosterior::point_mass(1.0, 0.0, 0.0);
  for (const auto& p : predictive_shape(alt_pm, 2.0, 32, RngStream(52, 0))) {
    CHECK(p.a == doctest::Approx(std::exp(2.0)));
    CHECK(p.b == doctest::Approx(std::exp(-2.0)));
  }
}

TEST_CASE("predictive draws stay within the log-shape clamp") {
  AltShapePosterior alt_pm = AltShapePosterior::point_mass(1.0, 0.5, 0.3);
  for (const auto& p : predictive_shape(alt_pm, 1000.0, 64, RngStream(53, 0))) {
    CHECK(p.a <= 1.0000001e12);
    CHECK(p.b >= 0.999999e-12);
  }
}

TEST_CASE("alt skewness: left-skewed draws under positive coefficients") {
  // exact for point-mass hyperparameters
  AltShapePosterior pm = AltShapePosterior::point_mass(1.1, 0.04, 0.0);
  for (double delta : {0.5, 1.0, 3.0, 10.0})
    for (const auto& p : predictive_shape(pm, delta, 16, RngStream(54, 0)))
      CHECK(p.a > p.b);
  // statistically for a dispersed hyper model
  AltShapePosterior noisy = AltShapePosterior::point_mass(1.1, 0.04, 0.2);
  int left = 0;
  const int k = 4000;
  for (const auto& p : predictive_shape(noisy, 1.0, k, RngStream(55, 0)))
    left += p.a > p.b ? 1 : 0;
  CHECK(left >= static_cast<int>(0.97 * k));
}

TEST_CASE("mixture moments: null symmetry and uniform limit") {
  NullShapePosterior pm = NullShapePosterior::point_mass(0.0, 0.0, 0.0);
  MixtureMoments m = null_mixture_moments(pm, 100.0);
  CHECK(m.mean == 0.5);
  CHECK(m.variance == doctest::Approx(1.0 / 12.0).epsilon(1e-12));

  NullShapePosterior fittedish = NullShapePosterior::point_mass(5.0, -20.0, 0.1);
  MixtureMoments big = null_mixture_moments(fittedish, 1e8);
  CHECK(big.mean == 0.5);
  CHECK(std::fabs(big.variance - 1.0 / 12.0) < 1e-3);
}

TEST_CASE("mixture moments: alt limits and the delta = 0 boundary") {
  AltShapePosterior pm = AltShapePosterior::point_mass(1.0, 0.0, 0.0);
  MixtureMoments lim = alt_mixture_moments(pm, 1000.0);
  CHECK(lim.mean >= 1.0 - 1e-6);
  CHECK(lim.variance <= 1e-4);

  // mean function vanishes at delta = 0: continuous with beta(1,1)
  AltShapePosterior noisy = AltShapePosterior::point_mass(1.0, 0.05, 0.25);
  MixtureMoments zero = alt_mixture_moments(noisy, 0.0);
  CHECK(zero.mean == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("asymmetric null stage-2 and moments") {
  // synthetic stage-1 draws with distinct a and b levels
  std::vector<double> ns = {20, 50, 100, 400};
  Stage1Posterior s1;
  s1.hypothesis = Hypothesis::Null;
  s1.asymmetric = true;
  RngStream rng(56, 0);
  for (std::size_t i = 0; i < ns.size(); ++i) {
    Stage1Entry e;
    e.key = "n" + std::to_string(i);
    e.n = ns[i];
    for (int s = 0; s < 50; ++s) {
      e.log_a.push_back(rng.normal(10.0 / ns[i], 0.05));
      e.log_b.push_back(rng.normal(-6.0 / ns[i], 0.05));
    }
    s1.entries.push_back(std::move(e));
  }
  NullShapePosterior fit = stage2_fit_null(s1, Stage2Config{}, RngStream(57, 0));
  REQUIRE(fit.b.has_value());
  auto shapes = predictive_shape(fit, 20.0, 500, RngStream(58, 0));
  double mean_a = 0.0, mean_b = 0.0;
  for (const auto& p : shapes) {
    mean_a += std::log(p.a);
    mean_b += std::log(p.b);
  }
  mean_a /= shapes.size();
  mean_b /= shapes.size();
  CHECK(mean_a == doctest::Approx(0.5).epsilon(0.2));
  CHECK(mean_b == doctest::Approx(-0.3).epsilon(0.25));
  MixtureMoments m = null_mixture_moments(fit, 20.0);
  CHECK(m.mean > 0.5);  // a > b tilts the mean above one half
}
