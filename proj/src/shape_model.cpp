#include "taushape/shape_model.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "taushape/errors.hpp"
#include "taushape/parallel.hpp"
#include "taushape/summaries.hpp"

namespace taushape {

namespace {

constexpr double kMaxLogShape = 27.631021115928547;  // ln(1e12)
constexpr double kSigmaFloor = 1e-8;

const GaussHermite& gauss_hermite() {
  static const GaussHermite gh(31);
  return gh;
}

// E(tau | a, b) for tau ~ beta(a=e^za, b=e^zb), overflow-safe.
double shape_mean(double za, double zb) {
  // a/(a+b) = 1/(1 + e^(zb-za))
  double d = zb - za;
  return d >= 0.0 ? std::exp(-d) / (1.0 + std::exp(-d))
                  : 1.0 / (1.0 + std::exp(d));
}

// Var(tau | a, b) = ab/((a+b)^2 (a+b+1)), overflow-safe via logs.
double shape_var(double za, double zb) {
  double m = std::max(za, zb);
  if (m > 300.0) return 0.0;
  double a = std::exp(za), b = std::exp(zb);
  double s = a + b;
  return a * b / (s * s * (s + 1.0));
}

}  // namespace

double max_log_shape() { return kMaxLogShape; }

QuantileGrid QuantileGrid::default_grid() {
  return QuantileGrid{{0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.975, 0.99}};
}

void QuantileGrid::validate() const {
  if (probs.empty()) throw InvalidParameter("quantile grid is empty");
  for (std::size_t j = 0; j < probs.size(); ++j) {
    if (!(probs[j] > 0.0 && probs[j] < 1.0))
      throw InvalidParameter("quantile grid values must lie in (0,1)");
    if (j > 0 && !(probs[j] > probs[j - 1]))
      throw InvalidParameter("quantile grid must be strictly increasing");
  }
}

QuantileMatrix build_quantile_matrix(const std::vector<TauSample>& samples,
                                     const QuantileGrid& grid, double psi0) {
  grid.validate();
  QuantileMatrix qm;
  qm.grid = grid;
  std::set<std::string> seen;
  for (const auto& ts : samples) {
    if (static_cast<int>(ts.taus.size()) < 1000)
      throw InvalidParameter("build_quantile_matrix: need M >= 1000 (scenario " +
                             ts.scenario.key + ")");
    if (!seen.insert(ts.scenario.key).second)
      throw DuplicateScenario("duplicate scenario key: " + ts.scenario.key);
    Scenario sc = ts.scenario;
    sc.psi0 = psi0;
    QuantileRow row;
    row.key = sc.key;
    row.n = static_cast<double>(sc.n);
    double effect = normalized_effect(sc);
    row.delta = effect == 0.0 ? 0.0 : std::sqrt(row.n) * effect;
    row.q = empirical_quantiles(ts.taus, grid.probs);
    qm.rows.push_back(std::move(row));
  }
  return qm;
}

namespace {

TargetDensity stage1_target(const QuantileRow& row, const QuantileGrid& grid,
                            Hypothesis hyp, const Stage1Options& opt) {
  const bool asym = hyp == Hypothesis::Null && opt.asymmetric_null;
  const int dim = asym ? 2 : 1;
  auto logp = [&row, &grid, hyp, asym, &opt](const std::vector<double>& v) {
    double za = v[0];
    double zb;
    if (asym)
      zb = v[1];
    else
      zb = hyp == Hypothesis::Null ? za : -za;
    if (std::fabs(za) > 60.0 || std::fabs(zb) > 60.0)
      return -std::numeric_limits<double>::infinity();
    BetaParams p(std::exp(za), std::exp(zb));
    double loss = 0.0;
    for (std::size_t j = 0; j < grid.probs.size(); ++j) {
      double qa = beta_quantile(grid.probs[j], p);
      double d = row.q[j] - qa;
      loss += d * d;
    }
    double lp = -loss / opt.sigma_eps + log_norm_pdf(za, 0.0, opt.prior_sd);
    if (asym) lp += log_norm_pdf(zb, 0.0, opt.prior_sd);
    return lp;
  };
  return TargetDensity{dim, std::move(logp)};
}

}  // namespace

Stage1Entry stage1_fit(const QuantileRow& row, const QuantileGrid& grid,
                       Hypothesis hyp, const Stage1Options& opt,
                       RngStream stream) {
  if (row.q.size() != grid.probs.size())
    throw InvalidParameter("stage1_fit: row/grid size mismatch");
  if (!(opt.sigma_eps > 0.0))
    throw InvalidParameter("stage1_fit: sigma_eps must be positive");
  for (std::size_t j = 1; j < row.q.size(); ++j)
    if (row.q[j] < row.q[j - 1])
      throw InvalidParameter("stage1_fit: row quantiles must be non-decreasing");

  TargetDensity target = stage1_target(row, grid, hyp, opt);
  PosteriorDraws draws = sample(target, opt.chain, stream);

  Stage1Entry entry;
  entry.key = row.key;
  entry.n = row.n;
  entry.delta = row.delta;
  entry.log_a = draws.column(0);
  if (target.dim == 2) entry.log_b = draws.column(1);
  entry.rhat = *std::max_element(draws.rhat.begin(), draws.rhat.end());
  entry.converged = !draws.convergence_warning;
  return entry;
}

Stage1Posterior stage1_fit_all(const QuantileMatrix& qm, Hypothesis hyp,
                               const Stage1Options& opt, RngStream stream,
                               int threads) {
  std::vector<const QuantileRow*> rows;
  for (const auto& row : qm.rows) {
    bool take = hyp == Hypothesis::Null ? row.is_null() : row.delta > 0.0;
    if (take) rows.push_back(&row);
  }
  Stage1Posterior out;
  out.hypothesis = hyp;
  out.asymmetric = hyp == Hypothesis::Null && opt.asymmetric_null;
  out.sigma_eps = opt.sigma_eps;
  out.entries.resize(rows.size());
  parallel_for(rows.size(), threads, [&](std::size_t i) {
    out.entries[i] = stage1_fit(*rows[i], qm.grid, hyp, opt, stream.derive(i));
  });
  return out;
}

HyperDraws HyperDraws::point_mass(double c1, double c2, double sigma) {
  HyperDraws hd;
  hd.draws.resize(1, 3);
  hd.draws << c1, c2, sigma;
  hd.rhat = {1.0, 1.0, 1.0};
  hd.ess = {1.0, 1.0, 1.0};
  return hd;
}

NullShapePosterior NullShapePosterior::point_mass(double a1, double a2,
                                                  double s0) {
  return NullShapePosterior{HyperDraws::point_mass(a1, a2, s0), std::nullopt};
}

AltShapePosterior AltShapePosterior::point_mass(double p1, double p2,
                                                double s1) {
  return AltShapePosterior{HyperDraws::point_mass(p1, p2, s1)};
}

namespace {

struct Stage2Data {
  std::vector<double> x;  // n (null) or delta (alt), one entry per observation
  std::vector<double> z;  // thinned stage-1 draws of log a (or log b)
};

Stage2Data thin_stage1(const Stage1Posterior& stage1, const Stage2Config& cfg,
                       bool use_b) {
  Stage2Data data;
  for (const auto& entry : stage1.entries) {
    const std::vector<double>& src = use_b ? entry.log_b : entry.log_a;
    int take = std::min<int>(cfg.thin_per_row, static_cast<int>(src.size()));
    double step = static_cast<double>(src.size()) / take;
    for (int s = 0; s < take; ++s) {
      data.x.push_back(stage1.hypothesis == Hypothesis::Null ? entry.n
                                                             : entry.delta);
      data.z.push_back(src[static_cast<std::size_t>(s * step)]);
    }
  }
  return data;
}

HyperDraws stage2_sample(const Stage2Data& data, Hypothesis hyp,
                         const Stage2Config& cfg, RngStream stream) {
  auto mean_fn = [hyp](double c1, double c2, double x) {
    return hyp == Hypothesis::Null ? c1 / x + c2 / (x * x)
                                   : c1 * x + c2 * x * x;
  };
  auto logp = [&data, &cfg, mean_fn](const std::vector<double>& v) {
    double c1 = v[0], c2 = v[1], t = v[2];
    double sigma = std::exp(t);
    if (sigma < kSigmaFloor || !std::isfinite(sigma))
      return -std::numeric_limits<double>::infinity();
    double lp = 0.0;
    double inv2 = 0.5 / (sigma * sigma);
    for (std::size_t i = 0; i < data.z.size(); ++i) {
      double r = data.z[i] - mean_fn(c1, c2, data.x[i]);
      lp -= r * r * inv2;
    }
    lp -= static_cast<double>(data.z.size()) * t;
    lp += log_norm_pdf(c1, 0.0, cfg.coef_prior_sd);
    lp += log_norm_pdf(c2, 0.0, cfg.coef_prior_sd);
    // half-normal prior on sigma plus the log|d sigma / d t| Jacobian
    lp += -0.5 * sigma * sigma / (cfg.sigma_prior_scale * cfg.sigma_prior_scale) + t;
    return lp;
  };

  ChainConfig chain = cfg.chain;
  if (chain.init.empty()) chain.init = {0.0, 0.0, std::log(0.5)};
  PosteriorDraws draws = sample(TargetDensity{3, logp}, chain, stream);

  HyperDraws hd;
  hd.draws.resize(draws.draws.rows(), 3);
  hd.draws.col(0) = draws.draws.col(0);
  hd.draws.col(1) = draws.draws.col(1);
  hd.draws.col(2) = draws.draws.col(2).array().exp();
  hd.rhat = draws.rhat;
  hd.ess = draws.ess;
  hd.convergence_warning = draws.convergence_warning;
  return hd;
}

void check_design(const Stage1Posterior& stage1, Hypothesis hyp) {
  std::set<double> xs;
  for (const auto& e : stage1.entries)
    xs.insert(hyp == Hypothesis::Null ? e.n : e.delta);
  if (xs.size() < 3)
    throw InsufficientDesign(
        std::string("stage-2 fit needs >= 3 distinct ") +
        (hyp == Hypothesis::Null ? "n" : "delta") + " values, got " +
        std::to_string(xs.size()));
}

}  // namespace

NullShapePosterior stage2_fit_null(const Stage1Posterior& stage1,
                                   const Stage2Config& cfg, RngStream stream) {
  if (stage1.hypothesis != Hypothesis::Null)
    throw InvalidParameter("stage2_fit_null: stage-1 posterior is not null");
  check_design(stage1, Hypothesis::Null);
  NullShapePosterior out;
  out.a = stage2_sample(thin_stage1(stage1, cfg, false), Hypothesis::Null, cfg,
                        stream.derive(0));
  if (stage1.asymmetric)
    out.b = stage2_sample(thin_stage1(stage1, cfg, true), Hypothesis::Null, cfg,
                          stream.derive(1));
  return out;
}

AltShapePosterior stage2_fit_alt(const Stage1Posterior& stage1,
                                 const Stage2Config& cfg, RngStream stream) {
  if (stage1.hypothesis != Hypothesis::Alt)
    throw InvalidParameter("stage2_fit_alt: stage-1 posterior is not alt");
  check_design(stage1, Hypothesis::Alt);
  return AltShapePosterior{
      stage2_sample(thin_stage1(stage1, cfg, false), Hypothesis::Alt, cfg,
                    stream.derive(0))};
}

std::vector<BetaParams> predictive_shape(const NullShapePosterior& model,
                                         double n, int k, RngStream stream) {
  if (!(n > 0.0)) throw InvalidParameter("predictive_shape: n must be positive");
  std::vector<BetaParams> out;
  out.reserve(k);
  long rows = model.a.size();
  for (int i = 0; i < k; ++i) {
    long r = i % rows;
    double za = stream.normal(
        NullShapePosterior::mean_log_a(model.a.draws(r, 0), model.a.draws(r, 1), n),
        model.a.draws(r, 2));
    za = std::clamp(za, -kMaxLogShape, kMaxLogShape);
    double zb = za;
    if (model.b) {
      zb = stream.normal(
          NullShapePosterior::mean_log_a(model.b->draws(r, 0),
                                         model.b->draws(r, 1), n),
          model.b->draws(r, 2));
      zb = std::clamp(zb, -kMaxLogShape, kMaxLogShape);
    }
    out.emplace_back(std::exp(za), std::exp(zb));
  }
  return out;
}

std::vector<BetaParams> predictive_shape(const AltShapePosterior& model,
                                         double delta, int k, RngStream stream) {
  std::vector<BetaParams> out;
  out.reserve(k);
  long rows = model.phi.size();
  for (int i = 0; i < k; ++i) {
    long r = i % rows;
    double za = stream.normal(
        AltShapePosterior::mean_log_a(model.phi.draws(r, 0),
                                      model.phi.draws(r, 1), delta),
        model.phi.draws(r, 2));
    za = std::clamp(za, -kMaxLogShape, kMaxLogShape);
    out.emplace_back(std::exp(za), std::exp(-za));
  }
  return out;
}

MixtureMoments null_mixture_moments(const NullShapePosterior& model, double n) {
  const GaussHermite& gh = gauss_hermite();
  long rows = model.a.size();
  if (!model.b) {
    // Symmetric shapes: E(tau) = 1/2 identically; only the spread varies.
    double var = 0.0;
    for (long r = 0; r < rows; ++r) {
      double m = NullShapePosterior::mean_log_a(model.a.draws(r, 0),
                                                model.a.draws(r, 1), n);
      var += gh.expect([](double z) { return shape_var(z, z); }, m,
                       model.a.draws(r, 2));
    }
    return MixtureMoments{0.5, var / static_cast<double>(rows)};
  }
  double m1 = 0.0, m2 = 0.0;
  for (long r = 0; r < rows; ++r) {
    double ma = NullShapePosterior::mean_log_a(model.a.draws(r, 0),
                                               model.a.draws(r, 1), n);
    double mb = NullShapePosterior::mean_log_a(model.b->draws(r, 0),
                                               model.b->draws(r, 1), n);
    double sa = model.a.draws(r, 2), sb = model.b->draws(r, 2);
    double e1 = gh.expect(
        [&](double za) {
          return gh.expect([&](double zb) { return shape_mean(za, zb); }, mb, sb);
        },
        ma, sa);
    double e2 = gh.expect(
        [&](double za) {
          return gh.expect(
              [&](double zb) {
                double mu = shape_mean(za, zb);
                return shape_var(za, zb) + mu * mu;
              },
              mb, sb);
        },
        ma, sa);
    m1 += e1;
    m2 += e2;
  }
  m1 /= static_cast<double>(rows);
  m2 /= static_cast<double>(rows);
  return MixtureMoments{m1, m2 - m1 * m1};
}

MixtureMoments alt_mixture_moments(const AltShapePosterior& model,
                                   double delta) {
  const GaussHermite& gh = gauss_hermite();
  long rows = model.phi.size();
  double m1 = 0.0, m2 = 0.0;
  for (long r = 0; r < rows; ++r) {
    double m = AltShapePosterior::mean_log_a(model.phi.draws(r, 0),
                                             model.phi.draws(r, 1), delta);
    double s = model.phi.draws(r, 2);
    m1 += gh.expect([](double z) { return shape_mean(z, -z); }, m, s);
    m2 += gh.expect(
        [](double z) {
          double mu = shape_mean(z, -z);
          return shape_var(z, -z) + mu * mu;
        },
        m, s);
  }
  m1 /= static_cast<double>(rows);
  m2 /= static_cast<double>(rows);
  return MixtureMoments{m1, m2 - m1 * m1};
}

}  // namespace taushape
