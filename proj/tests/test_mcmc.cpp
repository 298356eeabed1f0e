#include <doctest.h>

#include <cmath>
#include <limits>

#include "taushape/errors.hpp"
#include "taushape/mcmc.hpp"
#include "taushape/rng.hpp"
#include "taushape/summaries.hpp"

using namespace taushape;

namespace {

TargetDensity std_normal() {
  return {1, [](const std::vector<double>& x) { return -0.5 * x[0] * x[0]; }};
}

}  // namespace

TEST_CASE("standard normal target: moments and quantiles") {
  ChainConfig cfg;
  PosteriorDraws out = sample(std_normal(), cfg, RngStream(1, 0));
  std::vector<double> draws = out.column(0);
  CHECK(std::fabs(mean(draws)) < 0.05);
  CHECK(variance(draws) == doctest::Approx(1.0).epsilon(0.1));
  CHECK_FALSE(out.convergence_warning);
  for (double r : out.rhat) CHECK(r < 1.05);

  CredibleSummary s = credible_summary(draws, 0.95);
  CHECK(std::fabs(s.lo + 1.96) < 0.1);
  CHECK(std::fabs(s.hi - 1.96) < 0.1);

  // lag-1 autocorrelation of kept draws stays informative
  double m = mean(draws);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i + 1 < draws.size(); ++i)
    num += (draws[i] - m) * (draws[i + 1] - m);
  for (double d : draws) den += (d - m) * (d - m);
  CHECK(num / den < 0.99);
}

TEST_CASE("shifted scaled normal target") {
  TargetDensity t{1, [](const std::vector<double>& x) {
                    double z = (x[0] - 3.0) / 2.0;
                    return -0.5 * z * z;
                  }};
  ChainConfig cfg;
  cfg.keep = 2000;
  PosteriorDraws out = sample(t, cfg, RngStream(2, 0));
  CHECK(mean(out.column(0)) == doctest::Approx(3.0).epsilon(0.04));
}

TEST_CASE("bounded uniform target") {
  TargetDensity t{1, [](const std::vector<double>& x) {
                    if (x[0] < 0.0 || x[0] > 1.0)
                      return -std::numeric_limits<double>::infinity();
                    return 0.0;
                  }};
  ChainConfig cfg;
  cfg.init = {0.5};
  cfg.keep = 2000;
  PosteriorDraws out = sample(t, cfg, RngStream(3, 0));
  CHECK(ks_uniform(out.column(0)) < 0.05);
}

TEST_CASE("determinism: same target, cfg, stream") {
  ChainConfig cfg;
  cfg.n_chains = 2;
  PosteriorDraws a = sample(std_normal(), cfg, RngStream(7, 3));
  PosteriorDraws b = sample(std_normal(), cfg, RngStream(7, 3));
  REQUIRE(a.draws.rows() == b.draws.rows());
  CHECK((a.draws - b.draws).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("initialization failure raises") {
  TargetDensity t{1, [](const std::vector<double>&) {
                    return -std::numeric_limits<double>::infinity();
                  }};
  CHECK_THROWS_AS(sample(t, ChainConfig{}, RngStream(1, 1)),
                  InitializationError);
}

TEST_CASE("non-convergence is a warning, not an error") {
  // Far-separated bimodal target that RWM cannot traverse in a short run:
  // chains land in different modes, split-Rhat blows up.
  TargetDensity t{1, [](const std::vector<double>& x) {
                    double a = x[0] - 60.0, b = x[0] + 60.0;
                    return std::log(std::exp(-0.5 * a * a * 40.0) +
                                    std::exp(-0.5 * b * b * 40.0) + 1e-300);
                  }};
  ChainConfig cfg;
  cfg.n_chains = 4;
  cfg.warmup = 200;
  cfg.keep = 200;
  cfg.init_jitter = 80.0;
  PosteriorDraws out = sample(t, cfg, RngStream(11, 0));
  CHECK(out.convergence_warning);
  CHECK(!out.warning.empty());
}

TEST_CASE("adaptation is frozen after warmup") {
  ChainConfig cfg;
  cfg.n_chains = 3;
  PosteriorDraws out = sample(std_normal(), cfg, RngStream(5, 0));
  REQUIRE(out.step_size.size() == 3);
  // the frozen per-chain step is reported and finite
  for (double s : out.step_size) {
    CHECK(std::isfinite(s));
    CHECK(s > 0.0);
  }
  // acceptance steered toward the target during warmup
  for (double a : out.accept_rate) CHECK(std::fabs(a - cfg.target_accept) < 0.15);
}

TEST_CASE("laplace fit of gaussian targets is exact") {
  LaplaceFit fit = laplace_fit(std_normal(), {0.7});
  CHECK(std::fabs(fit.mode[0]) < 1e-6);
  CHECK(fit.covariance(0, 0) == doctest::Approx(1.0).epsilon(1e-4));

  TargetDensity t2{2, [](const std::vector<double>& x) {
                     double a = x[0] - 1.0, b = x[1] - 2.0;
                     return -0.5 * (a * a / 4.0 + b * b / 9.0);
                   }};
  LaplaceFit f2 = laplace_fit(t2, {0.0, 0.0});
  CHECK(f2.mode[0] == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(f2.mode[1] == doctest::Approx(2.0).epsilon(1e-5));
  CHECK(f2.covariance(0, 0) == doctest::Approx(4.0).epsilon(1e-3));
  CHECK(f2.covariance(1, 1) == doctest::Approx(9.0).epsilon(1e-3));
  CHECK(std::fabs(f2.covariance(0, 1)) < 1e-3);
}

TEST_CASE("laplace rejects non-concave curvature") {
  TargetDensity t{1, [](const std::vector<double>& x) {
                    return 0.5 * x[0] * x[0] - 0.02 * std::pow(x[0], 4);
                  }};
  // gradient vanishes at 0 but the curvature there is positive
  CHECK_THROWS_AS(laplace_fit(t, {0.0}), CurvatureError);
}
