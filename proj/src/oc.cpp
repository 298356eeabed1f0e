#include "taushape/oc.hpp"

#include <algorithm>
#include <cmath>

#include "taushape/errors.hpp"

namespace taushape {

namespace {

const GaussHermite& gauss_hermite() {
  static const GaussHermite gh(31);
  return gh;
}

double clamp_log_shape(double z) {
  return std::clamp(z, -max_log_shape(), max_log_shape());
}

double tail_at_log_shape_sym(double z, double u) {
  double a = std::exp(clamp_log_shape(z));
  return 1.0 - reg_inc_beta(u, BetaParams(a, a));
}

double tail_at_log_shape_alt(double z, double u) {
  double a = std::exp(clamp_log_shape(z));
  return 1.0 - reg_inc_beta(u, BetaParams(a, 1.0 / a));
}

void check_u(double u) {
  if (!(u > 0.0 && u < 1.0))
    throw InvalidParameter("decision threshold u must lie in (0,1)");
}

// Monotone tail lookup for the (a, 1/a) family at fixed u: linear
// interpolation of tail(log a) on a uniform grid dense enough that the
// interpolation error (< 3e-5) is far below the Monte Carlo noise it feeds.
class TailCache {
 public:
  TailCache(double z_lo, double z_hi, double u, int nodes = 2048)
      : lo_(z_lo), hi_(std::max(z_hi, z_lo + 1e-9)) {
    step_ = (hi_ - lo_) / (nodes - 1);
    values_.resize(nodes);
    for (int i = 0; i < nodes; ++i)
      values_[i] = tail_at_log_shape_alt(lo_ + step_ * i, u);
  }

  double operator()(double z) const {
    if (z <= lo_) return values_.front();
    if (z >= hi_) return values_.back();
    double t = (z - lo_) / step_;
    std::size_t i = static_cast<std::size_t>(t);
    double f = t - static_cast<double>(i);
    return values_[i] + f * (values_[i + 1] - values_[i]);
  }

 private:
  double lo_, hi_, step_;
  std::vector<double> values_;
};

}  // namespace

void DesignPrior::validate() const {
  switch (kind) {
    case Kind::PointMass:
      break;
    case Kind::Normal:
      if (!(sigma2 > 0.0))
        throw InvalidParameter("design prior: sigma2 must be positive");
      break;
    case Kind::WeightedGrid: {
      if (values.empty() || values.size() != weights.size())
        throw InvalidParameter("design prior: values/weights size mismatch");
      double s = 0.0;
      for (double w : weights) {
        if (w < 0.0) throw InvalidParameter("design prior: negative weight");
        s += w;
      }
      if (std::fabs(s - 1.0) > 1e-9)
        throw InvalidParameter("design prior: weights must sum to 1");
      break;
    }
  }
  if (scale == Scale::ConditionalEffect && !transform)
    throw ConfigurationError(
        "design prior on the conditional-effect scale needs a transform");
}

double DesignPrior::draw_estimand(RngStream& rng) const {
  double v = 0.0;
  switch (kind) {
    case Kind::PointMass:
      v = value;
      break;
    case Kind::Normal:
      v = rng.normal(mu, std::sqrt(sigma2));
      break;
    case Kind::WeightedGrid: {
      double t = rng.uniform(), acc = 0.0;
      v = values.back();
      for (std::size_t i = 0; i < values.size(); ++i) {
        acc += weights[i];
        if (t < acc) {
          v = values[i];
          break;
        }
      }
      break;
    }
  }
  return scale == Scale::ConditionalEffect ? transform(v) : v;
}

double DesignPrior::point_estimand() const {
  if (kind != Kind::PointMass)
    throw InvalidParameter("point_estimand: not a point-mass prior");
  return scale == Scale::ConditionalEffect ? transform(value) : value;
}

std::string OCEstimate::kind_name(Kind k) {
  switch (k) {
    case Kind::Type1: return "type1";
    case Kind::Power: return "power";
    case Kind::Assurance: return "assurance";
  }
  return "?";
}

std::vector<double> tail_probability(const std::vector<BetaParams>& shapes,
                                     double u) {
  check_u(u);
  std::vector<double> out;
  out.reserve(shapes.size());
  for (const auto& p : shapes) out.push_back(1.0 - reg_inc_beta(u, p));
  return out;
}

double expected_tail_null(double c1, double c2, double sigma, double n,
                          double u) {
  double m = NullShapePosterior::mean_log_a(c1, c2, n);
  if (sigma <= 0.0) return tail_at_log_shape_sym(m, u);
  return gauss_hermite().expect(
      [u](double z) { return tail_at_log_shape_sym(z, u); }, m, sigma);
}

double expected_tail_alt(double c1, double c2, double sigma, double delta,
                         double u) {
  double m = AltShapePosterior::mean_log_a(c1, c2, delta);
  if (sigma <= 0.0) return tail_at_log_shape_alt(m, u);
  return gauss_hermite().expect(
      [u](double z) { return tail_at_log_shape_alt(z, u); }, m, sigma);
}

namespace {

double expected_tail_null_asym(const NullShapePosterior& model, long r,
                               double n, double u) {
  const GaussHermite& gh = gauss_hermite();
  double ma = NullShapePosterior::mean_log_a(model.a.draws(r, 0),
                                             model.a.draws(r, 1), n);
  double mb = NullShapePosterior::mean_log_a(model.b->draws(r, 0),
                                             model.b->draws(r, 1), n);
  double sa = model.a.draws(r, 2), sb = model.b->draws(r, 2);
  return gh.expect(
      [&](double za) {
        return gh.expect(
            [&](double zb) {
              double a = std::exp(clamp_log_shape(za));
              double b = std::exp(clamp_log_shape(zb));
              return 1.0 - reg_inc_beta(u, BetaParams(a, b));
            },
            mb, sb);
      },
      ma, sa);
}

}  // namespace

std::vector<OCEstimate> type1_curve(const NullShapePosterior& model,
                                    const std::vector<double>& n_grid, double u,
                                    int k_draws) {
  check_u(u);
  std::vector<OCEstimate> out;
  long rows = model.a.size();
  for (double n : n_grid) {
    if (!(n > 0.0)) throw InvalidParameter("type1_curve: n must be positive");
    std::vector<double> oc(k_draws);
    for (int k = 0; k < k_draws; ++k) {
      long r = k % rows;
      oc[k] = model.b ? expected_tail_null_asym(model, r, n, u)
                      : expected_tail_null(model.a.draws(r, 0),
                                           model.a.draws(r, 1),
                                           model.a.draws(r, 2), n, u);
    }
    out.push_back(OCEstimate{OCEstimate::Kind::Type1, n, std::nullopt, u,
                             credible_summary(oc), k_draws});
  }
  return out;
}

OCEstimate power_at(const AltShapePosterior& model, double delta, double n,
                    double u, int k_draws) {
  check_u(u);
  long rows = model.phi.size();
  std::vector<double> oc(k_draws);
  for (int k = 0; k < k_draws; ++k) {
    long r = k % rows;
    oc[k] = expected_tail_alt(model.phi.draws(r, 0), model.phi.draws(r, 1),
                              model.phi.draws(r, 2), delta, u);
  }
  return OCEstimate{OCEstimate::Kind::Power, n, std::nullopt, u,
                    credible_summary(oc), k_draws};
}

PowerSurface power_surface(const AltShapePosterior& model,
                           const std::vector<double>& psi_grid,
                           const std::vector<double>& n_grid, double u,
                           double psi0, int k_draws) {
  check_u(u);
  PowerSurface out;
  std::vector<std::pair<double, double>> by_delta;  // (delta, median)
  for (double psi : psi_grid) {
    if (psi < psi0)
      throw DirectionError("power_surface: effect " + std::to_string(psi) +
                           " lies on the null side of psi0");
    for (double n : n_grid) {
      if (!(n > 0.0))
        throw InvalidParameter("power_surface: n must be positive");
      double delta = std::sqrt(n) * (psi - psi0);
      OCEstimate est = power_at(model, delta, n, u, k_draws);
      est.psi = psi;
      by_delta.emplace_back(delta, est.summary.median);
      out.estimates.push_back(est);
    }
  }
  std::sort(by_delta.begin(), by_delta.end());
  for (std::size_t i = 1; i < by_delta.size(); ++i) {
    if (by_delta[i].second < by_delta[i - 1].second - 1e-12) {
      out.warnings.push_back(
          "power median decreases between delta=" +
          std::to_string(by_delta[i - 1].first) +
          " and delta=" + std::to_string(by_delta[i].first));
    }
  }
  return out;
}

AssuranceEvaluator::AssuranceEvaluator(const AltShapePosterior& model,
                                       const DesignPrior& prior,
                                       const AssuranceConfig& cfg,
                                       RngStream stream, double psi0)
    : model_(model), prior_(prior), cfg_(cfg), psi0_(psi0) {
  prior_.validate();
  point_mass_ = prior_.kind == DesignPrior::Kind::PointMass;
  if (point_mass_) return;
  RngStream psi_rng = stream.derive(1);
  RngStream noise_rng = stream.derive(2);
  psi_draws_.resize(cfg_.prior_draws);
  for (int r = 0; r < cfg_.prior_draws; ++r)
    psi_draws_[r] = prior_.draw_estimand(psi_rng);
  noise_.resize(static_cast<std::size_t>(cfg_.hyper_draws) * cfg_.prior_draws);
  for (auto& e : noise_) e = noise_rng.normal();
}

const std::vector<double>& AssuranceEvaluator::log_a_for(double n) {
  auto it = log_a_cache_.find(n);
  if (it != log_a_cache_.end()) return it->second;
  long rows = model_.phi.size();
  std::vector<double> z(noise_.size());
  std::size_t idx = 0;
  double sqrt_n = std::sqrt(n);
  for (int k = 0; k < cfg_.hyper_draws; ++k) {
    long r = k % rows;
    double c1 = model_.phi.draws(r, 0), c2 = model_.phi.draws(r, 1);
    double sigma = model_.phi.draws(r, 2);
    for (int j = 0; j < cfg_.prior_draws; ++j, ++idx) {
      double delta = sqrt_n * (psi_draws_[j] - psi0_);
      z[idx] = clamp_log_shape(AltShapePosterior::mean_log_a(c1, c2, delta) +
                               sigma * noise_[idx]);
    }
  }
  return log_a_cache_.emplace(n, std::move(z)).first->second;
}

std::vector<double> AssuranceEvaluator::hyper_values(double n, double u) {
  check_u(u);
  if (!(n > 0.0)) throw InvalidParameter("assurance: n must be positive");
  if (point_mass_) {
    double delta = std::sqrt(n) * (prior_.point_estimand() - psi0_);
    long rows = model_.phi.size();
    std::vector<double> oc(cfg_.hyper_draws);
    for (int k = 0; k < cfg_.hyper_draws; ++k) {
      long r = k % rows;
      oc[k] = expected_tail_alt(model_.phi.draws(r, 0), model_.phi.draws(r, 1),
                                model_.phi.draws(r, 2), delta, u);
    }
    return oc;
  }
  const std::vector<double>& z = log_a_for(n);
  auto [zmin, zmax] = std::minmax_element(z.begin(), z.end());
  TailCache tail(*zmin, *zmax, u);
  std::vector<double> oc(cfg_.hyper_draws);
  std::size_t idx = 0;
  for (int k = 0; k < cfg_.hyper_draws; ++k) {
    double s = 0.0;
    for (int j = 0; j < cfg_.prior_draws; ++j, ++idx) s += tail(z[idx]);
    oc[k] = s / static_cast<double>(cfg_.prior_draws);
  }
  return oc;
}

OCEstimate AssuranceEvaluator::at(double n, double u) {
  std::vector<double> oc = hyper_values(n, u);
  return OCEstimate{OCEstimate::Kind::Assurance, n, std::nullopt, u,
                    credible_summary(oc), cfg_.hyper_draws};
}

OCEstimate assurance(const AltShapePosterior& model, const DesignPrior& prior,
                     double n, double u, const AssuranceConfig& cfg,
                     RngStream stream, double psi0) {
  AssuranceEvaluator eval(model, prior, cfg, stream, psi0);
  return eval.at(n, u);
}

OCEstimate assurance_nuisance_grid(
    const std::vector<const AltShapePosterior*>& models,
    const std::vector<double>& weights, const DesignPrior& prior, double n,
    double u, const AssuranceConfig& cfg, RngStream stream, double psi0) {
  if (models.empty() || models.size() != weights.size())
    throw ConfigurationError(
        "assurance_nuisance_grid: model/weight grids do not match");
  double wsum = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw ConfigurationError("assurance_nuisance_grid: negative weight");
    wsum += w;
  }
  if (!(wsum > 0.0))
    throw ConfigurationError("assurance_nuisance_grid: zero total weight");

  std::vector<double> combined(cfg.hyper_draws, 0.0);
  for (std::size_t g = 0; g < models.size(); ++g) {
    // Same stream for every grid point: common prior draws and shape noise.
    AssuranceEvaluator eval(*models[g], prior, cfg, stream, psi0);
    std::vector<double> vals = eval.hyper_values(n, u);
    for (int k = 0; k < cfg.hyper_draws; ++k)
      combined[k] += weights[g] / wsum * vals[k];
  }
  return OCEstimate{OCEstimate::Kind::Assurance, n, std::nullopt, u,
                    credible_summary(combined), cfg.hyper_draws};
}

SampleSizeResult find_sample_size(const AltShapePosterior& model,
                                  const DesignPrior& prior, double u,
                                  double target, std::pair<int, int> n_range,
                                  const AssuranceConfig& cfg, RngStream stream,
                                  double psi0) {
  if (n_range.first < 2 || n_range.second < n_range.first)
    throw InvalidParameter("find_sample_size: bad n range");
  if (!(target >= 0.0 && target <= 1.0))
    throw InvalidParameter("find_sample_size: target must lie in [0,1]");

  AssuranceEvaluator eval(model, prior, cfg, stream, psi0);
  SampleSizeResult result;
  auto median_at = [&](int n) {
    double med = eval.at(static_cast<double>(n), u).summary.median;
    result.evaluations.emplace_back(n, med);
    return med;
  };

  double at_lo = median_at(n_range.first);
  if (at_lo >= target) {
    result.n = n_range.first;
    return result;
  }
  double at_hi = median_at(n_range.second);
  if (at_hi < target)
    throw UnreachableTarget(
        "find_sample_size: target " + std::to_string(target) +
            " not reached at n = " + std::to_string(n_range.second),
        at_hi);

  int lo = n_range.first, hi = n_range.second;
  while (hi - lo > 1) {
    int mid = lo + (hi - lo) / 2;
    if (median_at(mid) >= target)
      hi = mid;
    else
      lo = mid;
  }
  result.n = hi;
  return result;
}

}  // namespace taushape
