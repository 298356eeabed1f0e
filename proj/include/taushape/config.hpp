#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "taushape/oc.hpp"
#include "taushape/shape_model.hpp"
#include "taushape/trial.hpp"

namespace taushape {

struct FitConfig {
  QuantileGrid grid = QuantileGrid::default_grid();
  double sigma_eps = 1e-4;
  double prior_sd = 10.0;
  bool asymmetric_null = false;
  int stage1_chains = 2, stage1_warmup = 600, stage1_keep = 500;
  int stage2_chains = 4, stage2_warmup = 1500, stage2_keep = 1000;
  int stage2_thin = 50;
  int posterior_draws = 2000;

  Stage1Options stage1_options() const;
  Stage2Config stage2_config() const;
};

struct DesignPriorSpec {
  std::string name;
  DesignPrior::Kind kind = DesignPrior::Kind::PointMass;
  DesignPrior::Scale scale = DesignPrior::Scale::MarginalEstimand;
  double value = 0.0;
  double mu = 0.0;
  double sigma2 = 0.0;
  std::vector<double> values;
  std::vector<double> weights;
};

struct AssuranceBlock {
  int hyper_draws = 500;
  int prior_draws = 4000;
  std::optional<double> target;
  std::vector<double> n_grid;
};

struct OcConfig {
  std::vector<double> u = {0.975};
  std::vector<double> n_grid;
  std::vector<double> psi_grid;  // normalized estimand scale (>= psi0)
  int k_draws = 4000;
  AssuranceBlock assurance;
  std::vector<DesignPriorSpec> design_priors;
};

struct ValidateConfig {
  int m_iterations = 2000;
  double u = 0.975;
  double control_rate = 0.3;
};

struct RunConfig {
  std::uint64_t seed = 0;
  std::string out = ".";
  int threads = 1;
  DataModel data_model;
  std::vector<double> effects;  // beta-binomial risk-difference effects
  std::vector<double> etas;     // logistic conditional effects
  std::vector<int> n_list;
  int m_iterations = 0;
  Estimand estimand = Estimand::RiskDifference;
  Direction direction = Direction::Greater;
  double psi0 = 0.0;
  FitMethod method = FitMethod::Laplace;
  std::optional<ModelKind> analysis;
  FitConfig fit;
  OcConfig oc;
  ValidateConfig validate;

  // One scenario per (effect, n) pair, keys "e<i>_n<n>".
  std::vector<Scenario> scenarios() const;
};

// Parse and strictly validate a JSON config file. Unknown keys raise
// SchemaError naming the offending path; seed is mandatory.
RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& json_text, const std::string& origin);

}  // namespace taushape
