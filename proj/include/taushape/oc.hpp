#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "taushape/rng.hpp"
#include "taushape/shape_model.hpp"
#include "taushape/summaries.hpp"

namespace taushape {

// Design prior over the effect at the planning stage. Values on the
// conditional-effect scale are pushed to the estimand scale through the
// supplied transform before the shape model is consulted.
struct DesignPrior {
  enum class Kind { PointMass, Normal, WeightedGrid };
  enum class Scale { MarginalEstimand, ConditionalEffect };

  Kind kind = Kind::PointMass;
  Scale scale = Scale::MarginalEstimand;
  std::string name;
  double value = 0.0;     // point mass
  double mu = 0.0;        // normal
  double sigma2 = 0.0;    // normal
  std::vector<double> values;   // weighted grid
  std::vector<double> weights;  // weighted grid, sums to 1
  std::function<double(double)> transform;  // conditional -> estimand

  void validate() const;
  // One draw on the estimand scale.
  double draw_estimand(RngStream& rng) const;
  // Point-mass value on the estimand scale.
  double point_estimand() const;
};

struct OCEstimate {
  enum class Kind { Type1, Power, Assurance };
  Kind kind = Kind::Type1;
  double n = 0.0;
  std::optional<double> psi;  // effect for power rows
  double u = 0.0;
  CredibleSummary summary{0, 0, 0, 0.95};
  int K = 0;

  static std::string kind_name(Kind k);
};

// Per-draw upper tail 1 - I_u(a, b).
std::vector<double> tail_probability(const std::vector<BetaParams>& shapes,
                                     double u);

// Expected tail probability under one hyperparameter draw, integrating the
// log-normal shape mixture by Gauss-Hermite quadrature.
double expected_tail_null(double c1, double c2, double sigma, double n,
                          double u);
double expected_tail_alt(double c1, double c2, double sigma, double delta,
                         double u);

// Type I error curve: per n, the credible summary over hyperparameter draws
// of the expected null tail probability at u.
std::vector<OCEstimate> type1_curve(const NullShapePosterior& model,
                                    const std::vector<double>& n_grid, double u,
                                    int k_draws = 4000);

// Conditional power at one effect distance delta.
OCEstimate power_at(const AltShapePosterior& model, double delta, double n,
                    double u, int k_draws = 4000);

struct PowerSurface {
  std::vector<OCEstimate> estimates;  // psi-major, n-minor order
  std::vector<std::string> warnings;  // monotonicity diagnostics
};

// Power over a grid of effects (normalized scale: alternative means
// psi > psi0) and sample sizes. Effects on the wrong side of psi0 raise
// DirectionError.
PowerSurface power_surface(const AltShapePosterior& model,
                           const std::vector<double>& psi_grid,
                           const std::vector<double>& n_grid, double u,
                           double psi0 = 0.0, int k_draws = 4000);

struct AssuranceConfig {
  int hyper_draws = 500;   // hyperparameter draws behind the credible band
  int prior_draws = 4000;  // design-prior draws averaged per hyper draw
};

// Assurance evaluator sharing one set of design-prior draws and shape noise
// across every (n, u) it is asked for, so changing u re-runs only beta tail
// evaluations and results are comparable across n.
class AssuranceEvaluator {
 public:
  AssuranceEvaluator(const AltShapePosterior& model, const DesignPrior& prior,
                     const AssuranceConfig& cfg, RngStream stream,
                     double psi0 = 0.0);

  OCEstimate at(double n, double u);
  // Per-hyper-draw assurance values (the band population) at (n, u).
  std::vector<double> hyper_values(double n, double u);

 private:
  const AltShapePosterior& model_;
  DesignPrior prior_;
  AssuranceConfig cfg_;
  double psi0_;
  bool point_mass_;
  std::vector<double> psi_draws_;          // estimand scale
  std::vector<double> noise_;              // hyper-major (k * R + r)
  std::map<double, std::vector<double>> log_a_cache_;  // per n

  const std::vector<double>& log_a_for(double n);
};

OCEstimate assurance(const AltShapePosterior& model, const DesignPrior& prior,
                     double n, double u, const AssuranceConfig& cfg,
                     RngStream stream, double psi0 = 0.0);

// Outer nuisance-grid integration: weighted average of per-model assurance,
// bands taken over index-paired hyperparameter draws.
OCEstimate assurance_nuisance_grid(
    const std::vector<const AltShapePosterior*>& models,
    const std::vector<double>& weights, const DesignPrior& prior, double n,
    double u, const AssuranceConfig& cfg, RngStream stream, double psi0 = 0.0);

struct SampleSizeResult {
  int n;
  std::vector<std::pair<int, double>> evaluations;  // (n, assurance median)
};

// Smallest n in [n_range.first, n_range.second] whose assurance median
// reaches the target; bisection with shared prior draws across candidates.
SampleSizeResult find_sample_size(const AltShapePosterior& model,
                                  const DesignPrior& prior, double u,
                                  double target, std::pair<int, int> n_range,
                                  const AssuranceConfig& cfg, RngStream stream,
                                  double psi0 = 0.0);

}  // namespace taushape
