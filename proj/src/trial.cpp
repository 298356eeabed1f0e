#include "taushape/trial.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <sstream>

#include "taushape/conjugate.hpp"
#include "taushape/errors.hpp"
#include "taushape/parallel.hpp"
#include "taushape/special.hpp"

namespace taushape {

std::string to_string(ModelKind k) {
  switch (k) {
    case ModelKind::LogisticAdjusted: return "logistic-adjusted";
    case ModelKind::LogisticUnadjusted: return "logistic-unadjusted";
    case ModelKind::BetaBinomial: return "beta-binomial";
  }
  return "?";
}

std::string to_string(Estimand e) {
  return e == Estimand::RiskDifference ? "risk-difference" : "log-relative-risk";
}

std::string to_string(Direction d) {
  return d == Direction::Greater ? "greater" : "less";
}

std::string to_string(FitMethod m) {
  return m == FitMethod::Mcmc ? "mcmc" : "laplace";
}

ModelKind model_kind_from_string(const std::string& s) {
  if (s == "logistic-adjusted") return ModelKind::LogisticAdjusted;
  if (s == "logistic-unadjusted") return ModelKind::LogisticUnadjusted;
  if (s == "beta-binomial") return ModelKind::BetaBinomial;
  throw SchemaError("unknown model kind: " + s);
}

Estimand estimand_from_string(const std::string& s) {
  if (s == "risk-difference") return Estimand::RiskDifference;
  if (s == "log-relative-risk") return Estimand::LogRelativeRisk;
  throw SchemaError("unknown estimand: " + s);
}

Direction direction_from_string(const std::string& s) {
  if (s == "greater") return Direction::Greater;
  if (s == "less") return Direction::Less;
  throw SchemaError("unknown direction: " + s);
}

FitMethod fit_method_from_string(const std::string& s) {
  if (s == "mcmc") return FitMethod::Mcmc;
  if (s == "laplace") return FitMethod::Laplace;
  throw SchemaError("unknown fit method: " + s);
}

double inverse_logit(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

CovariateSpec CovariateSpec::surrogate_default() {
  CovariateSpec spec;
  spec.gens = {
      {CovariateGenerator::Type::Bernoulli, 0.5, 0.0, -1},
      {CovariateGenerator::Type::Bernoulli, 0.3, 0.0, -1},
      {CovariateGenerator::Type::Normal, 0.0, 1.0, -1},
      {CovariateGenerator::Type::SquareOf, 0.0, 0.0, 2},
      {CovariateGenerator::Type::Normal, 0.0, 1.0, -1},
  };
  return spec;
}

void CovariateSpec::draw_row(RngStream& rng, double* out) const {
  for (std::size_t j = 0; j < gens.size(); ++j) {
    const auto& g = gens[j];
    switch (g.type) {
      case CovariateGenerator::Type::Bernoulli:
        out[j] = rng.bernoulli(g.p1) ? 1.0 : 0.0;
        break;
      case CovariateGenerator::Type::Normal:
        out[j] = rng.normal(g.p1, g.p2);
        break;
      case CovariateGenerator::Type::SquareOf:
        if (g.source < 0 || g.source >= static_cast<int>(j))
          throw InvalidParameter("covariate SquareOf must reference an earlier column");
        out[j] = out[g.source] * out[g.source];
        break;
    }
  }
}

void DataModel::validate() const {
  std::size_t expect =
      kind == ModelKind::LogisticAdjusted ? covariates.gens.size() + 1 : 1;
  if (beta.size() != expect)
    throw InvalidParameter("beta length must be " + std::to_string(expect) +
                           " for model kind " + to_string(kind));
  for (double b : beta)
    if (!std::isfinite(b)) throw InvalidParameter("beta must be finite");
  if (!std::isfinite(eta)) throw InvalidParameter("eta must be finite");
  if (!(alloc_ratio > 0.0 && alloc_ratio < 1.0))
    throw InvalidParameter("alloc_ratio must lie in (0,1)");
}

double DataModel::control_rate() const { return inverse_logit(beta.at(0)); }
double DataModel::treated_rate() const {
  return inverse_logit(beta.at(0) + eta);
}

void Scenario::validate() const {
  model.validate();
  if (key.empty() || key.find_first_of(" \t\n") != std::string::npos)
    throw SchemaError("scenario key must be non-empty without whitespace");
  if (n < 2) throw SchemaError("scenario " + key + ": n must be >= 2");
  if (M < 100) throw SchemaError("scenario " + key + ": M must be >= 100");
  if (model.kind == ModelKind::BetaBinomial && psi0 != 0.0)
    throw SchemaError("beta-binomial scenarios require psi0 = 0");
  if (model.kind == ModelKind::BetaBinomial &&
      analysis_kind() != ModelKind::BetaBinomial)
    throw SchemaError("beta-binomial data requires the conjugate analysis");
}

Dataset simulate_dataset(const DataModel& model, int n, RngStream& rng) {
  model.validate();
  bool adjusted = model.kind == ModelKind::LogisticAdjusted;
  int p = adjusted ? model.covariates.dim() : 0;
  Dataset d;
  d.arm.resize(n);
  d.y.resize(n);
  d.x.resize(n, 1 + p);
  std::vector<double> row(p);
  for (int i = 0; i < n; ++i) {
    d.arm[i] = rng.bernoulli(model.alloc_ratio) ? 1 : 0;
    d.x(i, 0) = 1.0;
    if (adjusted) {
      model.covariates.draw_row(rng, row.data());
      for (int j = 0; j < p; ++j) d.x(i, j + 1) = row[j];
    }
    double z = model.eta * d.arm[i];
    for (int j = 0; j <= p; ++j) z += d.x(i, j) * model.beta[j];
    d.y[i] = rng.bernoulli(inverse_logit(z)) ? 1 : 0;
  }
  return d;
}

namespace {

// Log posterior of the logistic model; coefficients [eta, beta...].
TargetDensity logistic_target(const Dataset& data, const Eigen::MatrixXd& x,
                              double prior_sd) {
  int dim = 1 + static_cast<int>(x.cols());
  auto logp = [&data, &x, prior_sd, dim](const std::vector<double>& theta) {
    double lp = 0.0;
    for (int j = 0; j < dim; ++j)
      lp += log_norm_pdf(theta[j], 0.0, prior_sd);
    for (int i = 0; i < data.n(); ++i) {
      double z = theta[0] * data.arm[i];
      for (long j = 0; j < x.cols(); ++j) z += x(i, j) * theta[j + 1];
      // y*z - log(1 + e^z), stable on both branches
      double log1pe = z > 0.0 ? z + std::log1p(std::exp(-z))
                              : std::log1p(std::exp(z));
      lp += data.y[i] * z - log1pe;
    }
    return lp;
  };
  return TargetDensity{dim, std::move(logp)};
}

bool detect_separation(const Dataset& data, const Eigen::MatrixXd& x,
                       const Eigen::VectorXd& center) {
  double zmax = 0.0;
  for (int i = 0; i < data.n(); ++i) {
    double z = center[0] * data.arm[i];
    for (long j = 0; j < x.cols(); ++j) z += x(i, j) * center[j + 1];
    zmax = std::max(zmax, std::fabs(z));
  }
  return zmax > std::log(4.0 * data.n());
}

}  // namespace

PosteriorFit fit_posterior(const Dataset& data, ModelKind analysis,
                           double prior_sd, FitMethod method, RngStream& rng,
                           int n_draws) {
  if (analysis == ModelKind::BetaBinomial)
    throw InvalidParameter("fit_posterior is for logistic analyses");
  if (data.n() == 0) throw EmptyInput("fit_posterior: empty dataset");
  bool has0 = false, has1 = false;
  for (int a : data.arm) (a ? has1 : has0) = true;
  if (!has0 || !has1)
    throw InvalidParameter("fit_posterior: dataset must contain both arms");
  if (!(prior_sd > 0.0)) throw InvalidParameter("prior_sd must be positive");

  const Eigen::MatrixXd x = analysis == ModelKind::LogisticAdjusted
                                ? data.x
                                : Eigen::MatrixXd(data.x.col(0));
  TargetDensity target = logistic_target(data, x, prior_sd);

  PosteriorFit out;
  if (method == FitMethod::Laplace) {
    LaplaceFit fit = laplace_fit(target, {});
    Eigen::LLT<Eigen::MatrixXd> llt(fit.covariance);
    if (llt.info() != Eigen::Success)
      throw CurvatureError("fit_posterior: covariance not positive definite");
    Eigen::MatrixXd chol = llt.matrixL();
    out.coef_draws.resize(n_draws, target.dim);
    Eigen::VectorXd z(target.dim);
    for (int s = 0; s < n_draws; ++s) {
      for (int j = 0; j < target.dim; ++j) z[j] = rng.normal();
      out.coef_draws.row(s) = (fit.mode + chol * z).transpose();
    }
    out.separation_flag = detect_separation(data, x, fit.mode);
  } else {
    ChainConfig cfg;
    cfg.n_chains = 2;
    cfg.warmup = 600;
    cfg.keep = (n_draws + cfg.n_chains - 1) / cfg.n_chains;
    PosteriorDraws draws = sample(target, cfg, rng.derive(0xFEED));
    out.coef_draws = draws.draws.topRows(n_draws);
    Eigen::VectorXd center = out.coef_draws.colwise().mean().transpose();
    out.separation_flag = detect_separation(data, x, center);
  }
  return out;
}

std::vector<double> g_compute(const Eigen::MatrixXd& coef_draws,
                              const Eigen::MatrixXd& x_obs, Estimand estimand) {
  long n = x_obs.rows(), k = coef_draws.rows();
  if (n == 0 || k == 0) throw EmptyInput("g_compute: empty input");
  if (coef_draws.cols() != x_obs.cols() + 1)
    throw InvalidParameter("g_compute: draws do not match covariate matrix");

  // z0 = X * beta' per draw in one product; arm effect added per column.
  Eigen::MatrixXd z0 =
      x_obs * coef_draws.rightCols(coef_draws.cols() - 1).transpose();
  std::vector<double> psi(k);
  for (long s = 0; s < k; ++s) {
    double eta = coef_draws(s, 0);
    double p0 = 0.0, p1 = 0.0;
    for (long i = 0; i < n; ++i) {
      p0 += inverse_logit(z0(i, s));
      p1 += inverse_logit(z0(i, s) + eta);
    }
    p0 /= static_cast<double>(n);
    p1 /= static_cast<double>(n);
    psi[s] = estimand == Estimand::RiskDifference ? p0 - p1 : std::log(p1 / p0);
  }
  return psi;
}

double decision_summary(const std::vector<double>& psi_draws, double psi0,
                        Direction direction) {
  if (psi_draws.empty()) throw EmptyInput("decision_summary: no draws");
  long count = 0;
  for (double v : psi_draws)
    if (direction == Direction::Greater ? v > psi0 : v < psi0) ++count;
  return static_cast<double>(count) / static_cast<double>(psi_draws.size());
}

namespace {

// True when the alternative event {psi~ > 0} coincides with {p0 > p1}.
bool alt_is_control_exceeds(const Scenario& s) {
  bool rd = s.estimand == Estimand::RiskDifference;
  bool greater = s.direction == Direction::Greater;
  return rd == greater;
}

double one_tau(const Scenario& s, FitMethod method, RngStream rng,
               int* separation) {
  if (s.model.kind == ModelKind::BetaBinomial) {
    // Fixed equal allocation, matching the enumeration oracle.
    int n1 = s.n / 2, n0 = s.n - s.n / 2;
    int y1 = rng.binomial(n1, s.model.treated_rate());
    int y0 = rng.binomial(n0, s.model.control_rate());
    double t = exact_tau_conjugate(y1, n1, y0, n0);
    return alt_is_control_exceeds(s) ? t : 1.0 - t;
  }
  Dataset data = simulate_dataset(s.model, s.n, rng);
  PosteriorFit fit = fit_posterior(data, s.analysis_kind(), 10.0, method, rng);
  if (fit.separation_flag && separation) ++(*separation);
  const Eigen::MatrixXd x_obs = s.analysis_kind() == ModelKind::LogisticAdjusted
                                    ? data.x
                                    : Eigen::MatrixXd(data.x.col(0));
  std::vector<double> psi = g_compute(fit.coef_draws, x_obs, s.estimand);
  return decision_summary(psi, s.psi0, s.direction);
}

}  // namespace

TauSample run_scenario(const Scenario& s, FitMethod method, RngStream stream,
                       int threads) {
  s.validate();
  TauSample out;
  out.scenario = s;
  out.taus.assign(s.M, 0.0);
  out.meta.seed = stream.seed();
  out.meta.stream_id = stream.stream_id();
  out.meta.method = method;

  std::vector<int> separations(s.M, 0);
  std::vector<int> failures(s.M, 0);
  parallel_for(static_cast<std::size_t>(s.M), threads, [&](std::size_t i) {
    // Deterministic retries on iteration failure keep the vector length M.
    for (int attempt = 0;; ++attempt) {
      try {
        out.taus[i] = one_tau(s, method,
                              stream.derive(i).derive(attempt), &separations[i]);
        break;
      } catch (const Error&) {
        ++failures[i];
        if (attempt >= 2) throw;
      }
    }
  });
  for (int f : failures) out.meta.failures += f;
  for (int f : separations) out.meta.separation_flags += f;
  if (out.meta.failures > s.M / 100)
    throw Error("run_scenario: more than 1% of iterations failed");
  return out;
}

namespace {

std::string effect_cache_key(const DataModel& m, Estimand e, long draws) {
  std::ostringstream os;
  os.precision(17);
  os << to_string(m.kind) << '|' << to_string(e) << '|' << m.eta << '|' << draws;
  for (double b : m.beta) os << ',' << b;
  for (const auto& g : m.covariates.gens)
    os << ';' << static_cast<int>(g.type) << ':' << g.p1 << ':' << g.p2 << ':'
       << g.source;
  return os.str();
}

}  // namespace

double marginal_effect(const DataModel& model, Estimand estimand,
                       long mc_draws) {
  model.validate();
  double p0, p1;
  if (model.kind != ModelKind::LogisticAdjusted) {
    p0 = model.control_rate();
    p1 = model.treated_rate();
  } else {
    static std::map<std::string, double> cache;
    static std::mutex cache_mutex;
    const std::string key = effect_cache_key(model, estimand, mc_draws);
    {
      std::lock_guard<std::mutex> lock(cache_mutex);
      auto it = cache.find(key);
      if (it != cache.end()) return it->second;
    }
    // Monte Carlo standardization over the covariate distribution, fixed
    // internal stream so the cached value is deterministic.
    RngStream rng(0x7A55EEDULL, 0);
    int p = model.covariates.dim();
    std::vector<double> row(p);
    double s0 = 0.0, s1 = 0.0;
    for (long i = 0; i < mc_draws; ++i) {
      model.covariates.draw_row(rng, row.data());
      double z = model.beta[0];
      for (int j = 0; j < p; ++j) z += row[j] * model.beta[j + 1];
      s0 += inverse_logit(z);
      s1 += inverse_logit(z + model.eta);
    }
    p0 = s0 / static_cast<double>(mc_draws);
    p1 = s1 / static_cast<double>(mc_draws);
    double value = estimand == Estimand::RiskDifference ? p0 - p1
                                                        : std::log(p1 / p0);
    {
      std::lock_guard<std::mutex> lock(cache_mutex);
      cache[key] = value;
    }
    return value;
  }
  return estimand == Estimand::RiskDifference ? p0 - p1 : std::log(p1 / p0);
}

double normalized_effect(const Scenario& s) {
  double psi = marginal_effect(s.model, s.estimand);
  return s.direction == Direction::Greater ? psi - s.psi0 : s.psi0 - psi;
}

}  // namespace taushape
