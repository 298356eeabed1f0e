#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "taushape/mcmc.hpp"
#include "taushape/rng.hpp"

namespace taushape {

enum class ModelKind { LogisticAdjusted, LogisticUnadjusted, BetaBinomial };
enum class Estimand { RiskDifference, LogRelativeRisk };
enum class Direction { Greater, Less };
enum class FitMethod { Mcmc, Laplace };

std::string to_string(ModelKind k);
std::string to_string(Estimand e);
std::string to_string(Direction d);
std::string to_string(FitMethod m);
ModelKind model_kind_from_string(const std::string& s);
Estimand estimand_from_string(const std::string& s);
Direction direction_from_string(const std::string& s);
FitMethod fit_method_from_string(const std::string& s);

// One covariate column: an independent Bernoulli/Normal draw, or the square
// of an earlier column.
struct CovariateGenerator {
  enum class Type { Bernoulli, Normal, SquareOf };
  Type type;
  double p1 = 0.0;  // Bernoulli p, or Normal mean
  double p2 = 1.0;  // Normal sd
  int source = -1;  // column index for SquareOf
};

struct CovariateSpec {
  std::vector<CovariateGenerator> gens;

  // Surrogate baseline-covariate model: two binaries, one standard normal
  // with its square, one more standard normal.
  static CovariateSpec surrogate_default();
  int dim() const { return static_cast<int>(gens.size()); }
  void draw_row(RngStream& rng, double* out) const;
};

// Data-generating (and analysis) model description.
struct DataModel {
  ModelKind kind = ModelKind::LogisticAdjusted;
  std::vector<double> beta;  // intercept first
  double eta = 0.0;          // conditional treatment effect (log-odds)
  CovariateSpec covariates = CovariateSpec::surrogate_default();
  double alloc_ratio = 0.5;

  void validate() const;
  // Event probabilities for the beta-binomial (intercept-only) model.
  double control_rate() const;
  double treated_rate() const;
};

struct Dataset {
  std::vector<int> arm;
  Eigen::MatrixXd x;  // leading intercept column
  std::vector<int> y;
  int n() const { return static_cast<int>(arm.size()); }
};

struct Scenario {
  std::string key;
  DataModel model;
  std::optional<ModelKind> analysis;  // analysis model; data model's when unset
  int n = 0;                          // total sample size
  double psi0 = 0.0;
  Estimand estimand = Estimand::RiskDifference;
  Direction direction = Direction::Greater;
  int M = 0;

  ModelKind analysis_kind() const { return analysis.value_or(model.kind); }
  void validate() const;
};

struct TauMeta {
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
  FitMethod method = FitMethod::Laplace;
  int failures = 0;
  int separation_flags = 0;
};

struct TauSample {
  Scenario scenario;
  std::vector<double> taus;
  TauMeta meta;
};

// A ~ Bernoulli(alloc_ratio), X from the covariate spec, Y ~ Bernoulli of
// the inverse-logit linear predictor.
Dataset simulate_dataset(const DataModel& model, int n, RngStream& rng);

struct PosteriorFit {
  Eigen::MatrixXd coef_draws;  // columns: [eta, beta0, beta1, ...]
  bool separation_flag = false;
};

// Bayesian logistic fit under independent Normal(0, prior_sd^2) coefficient
// priors. Complete separation is flagged but sampling proceeds (the prior
// keeps the posterior proper).
PosteriorFit fit_posterior(const Dataset& data, ModelKind analysis,
                           double prior_sd, FitMethod method, RngStream& rng,
                           int n_draws = 2000);

// Bayesian G-computation: per coefficient draw, standardize the predicted
// risks over the observed covariate rows under each assigned arm.
std::vector<double> g_compute(const Eigen::MatrixXd& coef_draws,
                              const Eigen::MatrixXd& x_obs, Estimand estimand);

// Fraction of draws strictly on the alternative side of psi0.
double decision_summary(const std::vector<double>& psi_draws, double psi0,
                        Direction direction);

// M simulated trials, one tau each. Iterations are partitioned by derived
// stream id, so the result is identical for every thread count.
TauSample run_scenario(const Scenario& s, FitMethod method, RngStream stream,
                       int threads = 1);

// Marginal effect psi* implied by the model: exact for the beta-binomial
// model, Monte Carlo standardization over the covariate distribution for
// logistic models (deterministic internal stream; memoized).
double marginal_effect(const DataModel& model, Estimand estimand,
                       long mc_draws = 1000000);

// Direction-normalized effect distance psi~ = +/-(psi* - psi0), positive
// under the alternative.
double normalized_effect(const Scenario& s);

double inverse_logit(double z);

}  // namespace taushape
