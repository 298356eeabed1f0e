#include "taushape/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "taushape/errors.hpp"

namespace taushape {

using nlohmann::json;

namespace {

double logit(double p) { return std::log(p / (1.0 - p)); }

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw SchemaError("config " + path + ": " + what);
}

void check_keys(const json& obj, const std::string& path,
                const std::set<std::string>& allowed) {
  if (!obj.is_object()) fail(path, "expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key())) fail(path + "." + it.key(), "unknown key");
}

template <typename T>
T require(const json& obj, const std::string& path, const std::string& key) {
  if (!obj.contains(key)) fail(path + "." + key, "missing required field");
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    fail(path + "." + key, "wrong type");
  }
}

template <typename T>
T optional_field(const json& obj, const std::string& path,
                 const std::string& key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    fail(path + "." + key, "wrong type");
  }
}

CovariateSpec parse_covariates(const json& arr, const std::string& path) {
  if (!arr.is_array()) fail(path, "expected an array");
  CovariateSpec spec;
  spec.gens.clear();
  int idx = 0;
  for (const auto& item : arr) {
    std::string p = path + "[" + std::to_string(idx) + "]";
    std::string type = require<std::string>(item, p, "type");
    CovariateGenerator g;
    if (type == "bernoulli") {
      check_keys(item, p, {"type", "p"});
      g.type = CovariateGenerator::Type::Bernoulli;
      g.p1 = require<double>(item, p, "p");
    } else if (type == "normal") {
      check_keys(item, p, {"type", "mean", "sd"});
      g.type = CovariateGenerator::Type::Normal;
      g.p1 = optional_field<double>(item, p, "mean", 0.0);
      g.p2 = optional_field<double>(item, p, "sd", 1.0);
    } else if (type == "square_of") {
      check_keys(item, p, {"type", "source"});
      g.type = CovariateGenerator::Type::SquareOf;
      g.source = require<int>(item, p, "source");
    } else {
      fail(p + ".type", "unknown covariate type: " + type);
    }
    spec.gens.push_back(g);
    ++idx;
  }
  return spec;
}

DesignPriorSpec parse_prior(const json& obj, const std::string& path) {
  DesignPriorSpec spec;
  spec.name = require<std::string>(obj, path, "name");
  std::string kind = require<std::string>(obj, path, "kind");
  std::string scale =
      optional_field<std::string>(obj, path, "scale", "marginal-estimand");
  if (scale == "marginal-estimand")
    spec.scale = DesignPrior::Scale::MarginalEstimand;
  else if (scale == "conditional-effect")
    spec.scale = DesignPrior::Scale::ConditionalEffect;
  else
    fail(path + ".scale", "unknown scale: " + scale);
  if (kind == "point-mass") {
    check_keys(obj, path, {"name", "kind", "scale", "value"});
    spec.kind = DesignPrior::Kind::PointMass;
    spec.value = require<double>(obj, path, "value");
  } else if (kind == "normal") {
    check_keys(obj, path, {"name", "kind", "scale", "mu", "sigma2"});
    spec.kind = DesignPrior::Kind::Normal;
    spec.mu = require<double>(obj, path, "mu");
    spec.sigma2 = require<double>(obj, path, "sigma2");
    if (!(spec.sigma2 > 0.0)) fail(path + ".sigma2", "must be positive");
  } else if (kind == "weighted-grid") {
    check_keys(obj, path, {"name", "kind", "scale", "values", "weights"});
    spec.kind = DesignPrior::Kind::WeightedGrid;
    spec.values = require<std::vector<double>>(obj, path, "values");
    spec.weights = require<std::vector<double>>(obj, path, "weights");
  } else {
    fail(path + ".kind", "unknown prior kind: " + kind);
  }
  return spec;
}

}  // namespace

Stage1Options FitConfig::stage1_options() const {
  Stage1Options opt;
  opt.sigma_eps = sigma_eps;
  opt.prior_sd = prior_sd;
  opt.asymmetric_null = asymmetric_null;
  opt.chain = ChainConfig{stage1_chains, stage1_warmup, stage1_keep, 0.3, 0.5, {}};
  return opt;
}

Stage2Config FitConfig::stage2_config() const {
  Stage2Config cfg;
  cfg.thin_per_row = stage2_thin;
  cfg.chain = ChainConfig{stage2_chains, stage2_warmup, stage2_keep, 0.3, 0.5, {}};
  return cfg;
}

std::vector<Scenario> RunConfig::scenarios() const {
  std::vector<Scenario> out;
  const bool conjugate = data_model.kind == ModelKind::BetaBinomial;
  const std::vector<double>& grid = conjugate ? effects : etas;
  for (std::size_t e = 0; e < grid.size(); ++e) {
    for (int n : n_list) {
      Scenario s;
      s.model = data_model;
      if (conjugate) {
        // Effect given as a control-minus-treated risk difference.
        double p0 = data_model.control_rate();
        double p1 = p0 - grid[e];
        if (!(p1 > 0.0 && p1 < 1.0))
          throw SchemaError("effect " + std::to_string(grid[e]) +
                            " leaves (0,1) at control rate " +
                            std::to_string(p0));
        s.model.eta = logit(p1) - logit(p0);
      } else {
        s.model.eta = grid[e];
      }
      s.analysis = analysis;
      s.n = n;
      s.psi0 = psi0;
      s.estimand = estimand;
      s.direction = direction;
      s.M = m_iterations;
      s.key = "e" + std::to_string(e) + "_n" + std::to_string(n);
      out.push_back(std::move(s));
    }
  }
  return out;
}

RunConfig parse_config(const std::string& text, const std::string& origin) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw SchemaError("config " + origin + ": invalid JSON: " + e.what());
  }
  check_keys(root, origin,
             {"schema", "seed", "out", "threads", "data_model", "scenarios",
              "fit", "oc", "validate"});
  int schema = require<int>(root, origin, "schema");
  if (schema != 1) fail(origin + ".schema", "unsupported schema version");

  RunConfig cfg;
  if (!root.contains("seed")) fail(origin + ".seed", "seed is mandatory");
  cfg.seed = require<std::uint64_t>(root, origin, "seed");
  cfg.out = optional_field<std::string>(root, origin, "out", ".");
  cfg.threads = optional_field<int>(root, origin, "threads", 1);

  const json& dm = root.value("data_model", json::object());
  check_keys(dm, origin + ".data_model",
             {"kind", "beta", "control_rate", "alloc_ratio", "covariates",
              "analysis"});
  std::string kind =
      optional_field<std::string>(dm, origin + ".data_model", "kind",
                                  "beta-binomial");
  cfg.data_model.kind = model_kind_from_string(kind);
  if (dm.contains("covariates"))
    cfg.data_model.covariates =
        parse_covariates(dm.at("covariates"), origin + ".data_model.covariates");
  if (cfg.data_model.kind == ModelKind::BetaBinomial) {
    double rate =
        require<double>(dm, origin + ".data_model", "control_rate");
    if (!(rate > 0.0 && rate < 1.0))
      fail(origin + ".data_model.control_rate", "must lie in (0,1)");
    cfg.data_model.beta = {logit(rate)};
  } else {
    cfg.data_model.beta =
        require<std::vector<double>>(dm, origin + ".data_model", "beta");
  }
  cfg.data_model.alloc_ratio =
      optional_field<double>(dm, origin + ".data_model", "alloc_ratio", 0.5);
  if (dm.contains("analysis"))
    cfg.analysis = model_kind_from_string(
        require<std::string>(dm, origin + ".data_model", "analysis"));

  const json& sc = root.value("scenarios", json::object());
  check_keys(sc, origin + ".scenarios",
             {"n", "effects", "eta", "M", "estimand", "psi0", "direction",
              "method"});
  cfg.n_list = optional_field<std::vector<int>>(sc, origin + ".scenarios", "n", {});
  cfg.effects = optional_field<std::vector<double>>(sc, origin + ".scenarios",
                                                    "effects", {});
  cfg.etas =
      optional_field<std::vector<double>>(sc, origin + ".scenarios", "eta", {});
  cfg.m_iterations =
      optional_field<int>(sc, origin + ".scenarios", "M", 0);
  if (sc.contains("M") && cfg.m_iterations < 100)
    fail(origin + ".scenarios.M", "M must be >= 100");
  cfg.estimand = estimand_from_string(optional_field<std::string>(
      sc, origin + ".scenarios", "estimand", "risk-difference"));
  cfg.psi0 = optional_field<double>(sc, origin + ".scenarios", "psi0", 0.0);
  cfg.direction = direction_from_string(optional_field<std::string>(
      sc, origin + ".scenarios", "direction", "greater"));
  cfg.method = fit_method_from_string(optional_field<std::string>(
      sc, origin + ".scenarios", "method", "laplace"));

  const json& fit = root.value("fit", json::object());
  check_keys(fit, origin + ".fit",
             {"quantile_grid", "sigma_eps", "prior_sd", "asymmetric_null",
              "stage1_chains", "stage1_warmup", "stage1_keep", "stage2_chains",
              "stage2_warmup", "stage2_keep", "stage2_thin",
              "posterior_draws"});
  if (fit.contains("quantile_grid"))
    cfg.fit.grid.probs =
        require<std::vector<double>>(fit, origin + ".fit", "quantile_grid");
  cfg.fit.grid.validate();
  cfg.fit.sigma_eps =
      optional_field<double>(fit, origin + ".fit", "sigma_eps", 1e-4);
  if (!(cfg.fit.sigma_eps > 0.0))
    fail(origin + ".fit.sigma_eps", "must be positive");
  cfg.fit.prior_sd = optional_field<double>(fit, origin + ".fit", "prior_sd", 10.0);
  cfg.fit.asymmetric_null =
      optional_field<bool>(fit, origin + ".fit", "asymmetric_null", false);
  cfg.fit.stage1_chains =
      optional_field<int>(fit, origin + ".fit", "stage1_chains", 2);
  cfg.fit.stage1_warmup =
      optional_field<int>(fit, origin + ".fit", "stage1_warmup", 600);
  cfg.fit.stage1_keep =
      optional_field<int>(fit, origin + ".fit", "stage1_keep", 500);
  cfg.fit.stage2_chains =
      optional_field<int>(fit, origin + ".fit", "stage2_chains", 4);
  cfg.fit.stage2_warmup =
      optional_field<int>(fit, origin + ".fit", "stage2_warmup", 1500);
  cfg.fit.stage2_keep =
      optional_field<int>(fit, origin + ".fit", "stage2_keep", 1000);
  cfg.fit.stage2_thin =
      optional_field<int>(fit, origin + ".fit", "stage2_thin", 50);
  cfg.fit.posterior_draws =
      optional_field<int>(fit, origin + ".fit", "posterior_draws", 2000);

  const json& oc = root.value("oc", json::object());
  check_keys(oc, origin + ".oc",
             {"u", "n_grid", "psi_grid", "k_draws", "assurance",
              "design_priors"});
  cfg.oc.u = optional_field<std::vector<double>>(oc, origin + ".oc", "u",
                                                 {0.975});
  for (double u : cfg.oc.u)
    if (!(u > 0.0 && u < 1.0)) fail(origin + ".oc.u", "u must lie in (0,1)");
  cfg.oc.n_grid =
      optional_field<std::vector<double>>(oc, origin + ".oc", "n_grid", {});
  cfg.oc.psi_grid =
      optional_field<std::vector<double>>(oc, origin + ".oc", "psi_grid", {});
  cfg.oc.k_draws = optional_field<int>(oc, origin + ".oc", "k_draws", 4000);
  if (oc.contains("assurance")) {
    const json& as = oc.at("assurance");
    check_keys(as, origin + ".oc.assurance",
               {"hyper_draws", "prior_draws", "target", "n_grid"});
    cfg.oc.assurance.hyper_draws =
        optional_field<int>(as, origin + ".oc.assurance", "hyper_draws", 500);
    cfg.oc.assurance.prior_draws =
        optional_field<int>(as, origin + ".oc.assurance", "prior_draws", 4000);
    if (as.contains("target"))
      cfg.oc.assurance.target =
          require<double>(as, origin + ".oc.assurance", "target");
    cfg.oc.assurance.n_grid = optional_field<std::vector<double>>(
        as, origin + ".oc.assurance", "n_grid", {});
  }
  if (oc.contains("design_priors")) {
    const json& priors = oc.at("design_priors");
    if (!priors.is_array()) fail(origin + ".oc.design_priors", "expected array");
    int idx = 0;
    for (const auto& p : priors) {
      cfg.oc.design_priors.push_back(parse_prior(
          p, origin + ".oc.design_priors[" + std::to_string(idx) + "]"));
      ++idx;
    }
  }

  const json& val = root.value("validate", json::object());
  check_keys(val, origin + ".validate", {"M", "u", "control_rate"});
  cfg.validate.m_iterations =
      optional_field<int>(val, origin + ".validate", "M", 2000);
  if (cfg.validate.m_iterations < 100)
    fail(origin + ".validate.M", "M must be >= 100");
  cfg.validate.u = optional_field<double>(val, origin + ".validate", "u", 0.975);
  cfg.validate.control_rate =
      optional_field<double>(val, origin + ".validate", "control_rate", 0.3);

  // Cross-field checks mirroring the type invariants.
  if (cfg.data_model.kind == ModelKind::BetaBinomial && !cfg.etas.empty())
    fail(origin + ".scenarios.eta", "beta-binomial scenarios use 'effects'");
  if (cfg.data_model.kind != ModelKind::BetaBinomial && !cfg.effects.empty())
    fail(origin + ".scenarios.effects", "logistic scenarios use 'eta'");
  cfg.data_model.validate();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot read config: " + path);
  std::ostringstream buf;
  buf << f.rdbuf();
  return parse_config(buf.str(), path);
}

}  // namespace taushape
