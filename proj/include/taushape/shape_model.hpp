#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "taushape/mcmc.hpp"
#include "taushape/rng.hpp"
#include "taushape/special.hpp"
#include "taushape/trial.hpp"

namespace taushape {

// Probabilities at which empirical and theoretical quantiles are matched.
// The default emphasizes the upper tail, where decision thresholds live.
struct QuantileGrid {
  std::vector<double> probs;
  static QuantileGrid default_grid();
  void validate() const;
  int size() const { return static_cast<int>(probs.size()); }
};

struct QuantileRow {
  std::string key;
  double n = 0.0;      // total sample size of the scenario
  double delta = 0.0;  // sqrt(n) * normalized marginal effect; 0 under the null
  std::vector<double> q;

  bool is_null() const { return delta == 0.0; }
};

struct QuantileMatrix {
  QuantileGrid grid;
  std::vector<QuantileRow> rows;
};

// One row per TauSample: type-7 empirical quantiles plus the scenario's
// effect distance. Each sample needs M >= 1000 draws.
QuantileMatrix build_quantile_matrix(const std::vector<TauSample>& samples,
                                     const QuantileGrid& grid, double psi0);

enum class Hypothesis { Null, Alt };

struct Stage1Options {
  double sigma_eps = 1e-4;      // Gibbs-posterior loss scale
  double prior_sd = 10.0;       // prior sd of log a
  bool asymmetric_null = false; // independent (a, b) under the null
  ChainConfig chain = ChainConfig{2, 600, 500, 0.3, 0.5, {}};
};

struct Stage1Entry {
  std::string key;
  double n = 0.0;
  double delta = 0.0;
  std::vector<double> log_a;
  std::vector<double> log_b;  // filled only for the asymmetric-null fit
  double rhat = 1.0;
  bool converged = true;
};

struct Stage1Posterior {
  Hypothesis hypothesis = Hypothesis::Null;
  bool asymmetric = false;
  double sigma_eps = 0.0;
  std::vector<Stage1Entry> entries;
};

// Quantile-matching Gibbs posterior of log a for one scenario row.
Stage1Entry stage1_fit(const QuantileRow& row, const QuantileGrid& grid,
                       Hypothesis hyp, const Stage1Options& opt,
                       RngStream stream);

// Fits every matching row (null: delta == 0; alt: delta > 0) concurrently.
Stage1Posterior stage1_fit_all(const QuantileMatrix& qm, Hypothesis hyp,
                               const Stage1Options& opt, RngStream stream,
                               int threads = 1);

struct Stage2Config {
  int thin_per_row = 50;          // stage-1 draws entering the likelihood
  double coef_prior_sd = 100.0;   // alpha / phi prior sd
  double sigma_prior_scale = 1.0; // half-normal scale for sigma
  ChainConfig chain = ChainConfig{4, 1500, 1000, 0.3, 0.5, {}};
};

// Posterior draws of one log-normal hyper model: coefficient pair plus
// sigma, with the mean function chosen by the hypothesis.
struct HyperDraws {
  Eigen::MatrixXd draws;  // K x 3: (c1, c2, sigma)
  std::vector<double> rhat;
  std::vector<double> ess;
  bool convergence_warning = false;

  long size() const { return draws.rows(); }
  static HyperDraws point_mass(double c1, double c2, double sigma);
};

// log a0(n) ~ N(alpha1/n + alpha2/n^2, sigma0^2); second block present only
// for the asymmetric-null escape hatch (independent log b model of the same
// form).
struct NullShapePosterior {
  HyperDraws a;
  std::optional<HyperDraws> b;

  static NullShapePosterior point_mass(double a1, double a2, double s0);
  static double mean_log_a(double c1, double c2, double n) {
    return c1 / n + c2 / (n * n);
  }
};

// log aA(delta) ~ N(phi1*delta + phi2*delta^2, sigma1^2), delta =
// sqrt(n)(psi* - psi0).
struct AltShapePosterior {
  HyperDraws phi;

  static AltShapePosterior point_mass(double p1, double p2, double s1);
  static double mean_log_a(double c1, double c2, double delta) {
    return c1 * delta + c2 * delta * delta;
  }
};

NullShapePosterior stage2_fit_null(const Stage1Posterior& stage1,
                                   const Stage2Config& cfg, RngStream stream);
AltShapePosterior stage2_fit_alt(const Stage1Posterior& stage1,
                                 const Stage2Config& cfg, RngStream stream);

// K predictive beta-parameter draws at sample size n (null) or effect
// distance delta (alt). Hyperparameter draws are cycled; one log-normal draw
// each. log a is clamped to +/- ln(1e12), beyond which tail probabilities
// are 0/1 to below every tolerance in use.
std::vector<BetaParams> predictive_shape(const NullShapePosterior& model,
                                         double n, int k, RngStream stream);
std::vector<BetaParams> predictive_shape(const AltShapePosterior& model,
                                         double delta, int k, RngStream stream);

// Exact mixture moments (Gauss-Hermite over log a, averaged over
// hyperparameter draws); log-scale arithmetic, no clamping.
struct MixtureMoments {
  double mean;
  double variance;
};
MixtureMoments null_mixture_moments(const NullShapePosterior& model, double n);
MixtureMoments alt_mixture_moments(const AltShapePosterior& model,
                                   double delta);

double max_log_shape();  // ln(1e12) clamp bound

}  // namespace taushape
