#include "taushape/mcmc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "taushape/errors.hpp"

namespace taushape {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct ChainResult {
  Eigen::MatrixXd draws;  // keep x dim
  double accept_rate;
  double step_size;
};

ChainResult run_chain(const TargetDensity& target, const ChainConfig& cfg,
                      RngStream rng) {
  const int dim = target.dim;
  std::vector<double> base = cfg.init;
  if (base.empty()) base.assign(dim, 0.0);

  // Initial point: jitter around base until the density is finite.
  std::vector<double> x;
  double lp = kNegInf;
  for (int attempt = 0; attempt < 100 && !std::isfinite(lp); ++attempt) {
    x = base;
    if (attempt > 0)
      for (int d = 0; d < dim; ++d) x[d] += cfg.init_jitter * rng.normal();
    lp = target.log_density(x);
  }
  if (!std::isfinite(lp))
    throw InitializationError(
        "mcmc: all proposed initial points have -inf density");

  double log_step = std::log(2.38 / std::sqrt(static_cast<double>(dim)));
  std::vector<double> scale(dim, 1.0);

  // Welford accumulators for per-dimension proposal scales.
  std::vector<double> w_mean(dim, 0.0), w_m2(dim, 0.0);
  long w_count = 0;

  std::vector<double> prop(dim);
  Eigen::MatrixXd kept(cfg.keep, dim);
  long accepted_keep = 0;

  const int total = cfg.warmup + cfg.keep;
  for (int t = 0; t < total; ++t) {
    for (int d = 0; d < dim; ++d)
      prop[d] = x[d] + std::exp(log_step) * scale[d] * rng.normal();
    double lp_prop = target.log_density(prop);
    double log_alpha = lp_prop - lp;
    double alpha = std::isfinite(log_alpha)
                       ? std::min(1.0, std::exp(std::min(0.0, log_alpha)))
                       : 0.0;
    bool accept = std::log(rng.uniform()) < log_alpha;
    if (accept) {
      x = prop;
      lp = lp_prop;
    }

    if (t < cfg.warmup) {
      // Robbins-Monro on the log step size toward the target rate.
      double gamma = std::pow(static_cast<double>(t) + 10.0, -0.7);
      log_step += gamma * (alpha - cfg.target_accept);
      if (t >= cfg.warmup / 4) {
        ++w_count;
        for (int d = 0; d < dim; ++d) {
          double delta = x[d] - w_mean[d];
          w_mean[d] += delta / static_cast<double>(w_count);
          w_m2[d] += delta * (x[d] - w_mean[d]);
        }
        bool refresh = (t == cfg.warmup / 2) || (t == (3 * cfg.warmup) / 4);
        if (refresh && w_count > 10) {
          for (int d = 0; d < dim; ++d) {
            double var = w_m2[d] / static_cast<double>(w_count - 1);
            if (var > 0.0) scale[d] = std::sqrt(var);
          }
        }
      }
    } else {
      int k = t - cfg.warmup;
      for (int d = 0; d < dim; ++d) kept(k, d) = x[d];
      if (accept) ++accepted_keep;
    }
  }

  return ChainResult{std::move(kept),
                     static_cast<double>(accepted_keep) / cfg.keep,
                     std::exp(log_step)};
}

// Split-Rhat over 2*n_chains half-sequences.
double split_rhat(const std::vector<Eigen::VectorXd>& seqs) {
  std::size_t m = seqs.size();
  long n = seqs.front().size();
  if (n < 2) return 1.0;
  std::vector<double> means(m), vars(m);
  for (std::size_t j = 0; j < m; ++j) {
    means[j] = seqs[j].mean();
    vars[j] = (seqs[j].array() - means[j]).square().sum() /
              static_cast<double>(n - 1);
  }
  double grand = 0.0;
  for (double v : means) grand += v;
  grand /= static_cast<double>(m);
  double b = 0.0;
  for (double v : means) b += (v - grand) * (v - grand);
  b *= static_cast<double>(n) / static_cast<double>(m - 1);
  double w = 0.0;
  for (double v : vars) w += v;
  w /= static_cast<double>(m);
  if (w <= 0.0) return 1.0;
  double var_plus =
      (static_cast<double>(n - 1) / n) * w + b / static_cast<double>(n);
  return std::sqrt(var_plus / w);
}

// Effective sample size with Geyer's initial-positive-pair truncation, chain
// autocorrelations averaged across chains.
double effective_sample_size(const std::vector<Eigen::VectorXd>& chains) {
  long n = chains.front().size();
  std::size_t m = chains.size();
  double total = static_cast<double>(n) * static_cast<double>(m);
  std::vector<Eigen::VectorXd> centered;
  std::vector<double> var0(m);
  for (std::size_t c = 0; c < m; ++c) {
    Eigen::VectorXd v = chains[c].array() - chains[c].mean();
    var0[c] = v.squaredNorm() / static_cast<double>(n);
    centered.push_back(std::move(v));
  }
  double w = 0.0;
  for (double v : var0) w += v;
  w /= static_cast<double>(m);
  if (w <= 0.0) return total;

  auto rho = [&](long lag) {
    double acc = 0.0;
    for (std::size_t c = 0; c < m; ++c) {
      double s = 0.0;
      for (long t = 0; t + lag < n; ++t)
        s += centered[c][t] * centered[c][t + lag];
      acc += s / static_cast<double>(n);
    }
    return acc / (static_cast<double>(m) * w);
  };

  double tau = 1.0;
  for (long lag = 1; lag + 1 < n; lag += 2) {
    double pair = rho(lag) + rho(lag + 1);
    if (pair <= 0.0) break;
    tau += 2.0 * pair;
  }
  return std::min(total, total / tau);
}

}  // namespace

std::vector<double> PosteriorDraws::column(int d) const {
  std::vector<double> out(draws.rows());
  for (long i = 0; i < draws.rows(); ++i) out[i] = draws(i, d);
  return out;
}

PosteriorDraws sample(const TargetDensity& target, const ChainConfig& cfg,
                      RngStream stream) {
  if (target.dim < 1 || target.dim > 50)
    throw InvalidParameter("mcmc: target dim must lie in [1, 50]");
  if (cfg.n_chains < 1 || cfg.warmup < 1 || cfg.keep < 1)
    throw InvalidParameter("mcmc: chain counts must be positive");

  std::vector<ChainResult> chains;
  chains.reserve(cfg.n_chains);
  for (int c = 0; c < cfg.n_chains; ++c)
    chains.push_back(run_chain(target, cfg, stream.derive(c)));

  PosteriorDraws out;
  out.draws.resize(static_cast<long>(cfg.n_chains) * cfg.keep, target.dim);
  for (int c = 0; c < cfg.n_chains; ++c) {
    out.draws.block(static_cast<long>(c) * cfg.keep, 0, cfg.keep, target.dim) =
        chains[c].draws;
    out.accept_rate.push_back(chains[c].accept_rate);
    out.step_size.push_back(chains[c].step_size);
  }

  long half = cfg.keep / 2;
  for (int d = 0; d < target.dim; ++d) {
    std::vector<Eigen::VectorXd> halves, whole;
    for (int c = 0; c < cfg.n_chains; ++c) {
      Eigen::VectorXd col = chains[c].draws.col(d);
      whole.push_back(col);
      if (half >= 2) {
        halves.push_back(col.head(half));
        halves.push_back(col.tail(half));
      }
    }
    out.rhat.push_back(half >= 2 ? split_rhat(halves) : 1.0);
    out.ess.push_back(effective_sample_size(whole));
  }

  for (int d = 0; d < target.dim; ++d) {
    if (out.rhat[d] > 1.05) {
      out.convergence_warning = true;
      out.warning = "split-Rhat > 1.05 on dimension " + std::to_string(d);
      break;
    }
  }
  return out;
}

namespace {

Eigen::VectorXd fd_gradient(const TargetDensity& target,
                            const Eigen::VectorXd& x, double fscale) {
  const double eps = std::numeric_limits<double>::epsilon();
  double base_h = std::cbrt(eps * std::max(1.0, fscale));
  int dim = target.dim;
  std::vector<double> p(x.data(), x.data() + dim);
  Eigen::VectorXd g(dim);
  for (int i = 0; i < dim; ++i) {
    double h = base_h * (1.0 + std::fabs(x[i]));
    double orig = p[i];
    p[i] = orig + h;
    double fp = target.log_density(p);
    p[i] = orig - h;
    double fm = target.log_density(p);
    p[i] = orig;
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

Eigen::MatrixXd fd_hessian(const TargetDensity& target,
                           const Eigen::VectorXd& x, double fscale) {
  const double eps = std::numeric_limits<double>::epsilon();
  double base_h = std::pow(eps * std::max(1.0, fscale), 0.25);
  int dim = target.dim;
  std::vector<double> p(x.data(), x.data() + dim);
  double f0 = target.log_density(p);
  Eigen::MatrixXd hess(dim, dim);
  std::vector<double> h(dim);
  for (int i = 0; i < dim; ++i) h[i] = base_h * (1.0 + std::fabs(x[i]));

  auto eval = [&](int i, double si, int j, double sj) {
    p[i] += si * h[i];
    p[j] += sj * h[j];
    double f = target.log_density(p);
    p[i] -= si * h[i];
    p[j] -= sj * h[j];
    return f;
  };

  for (int i = 0; i < dim; ++i) {
    double fp = eval(i, 1, i, 0), fm = eval(i, -1, i, 0);
    hess(i, i) = (fp + fm - 2.0 * f0) / (h[i] * h[i]);
    for (int j = i + 1; j < dim; ++j) {
      double fpp = eval(i, 1, j, 1), fpm = eval(i, 1, j, -1);
      double fmp = eval(i, -1, j, 1), fmm = eval(i, -1, j, -1);
      hess(i, j) = hess(j, i) = (fpp - fpm - fmp + fmm) / (4.0 * h[i] * h[j]);
    }
  }
  return hess;
}

}  // namespace

LaplaceFit laplace_fit(const TargetDensity& target, std::vector<double> init) {
  const int dim = target.dim;
  if (init.empty()) init.assign(dim, 0.0);
  if (static_cast<int>(init.size()) != dim)
    throw InvalidParameter("laplace_fit: init size does not match dim");

  Eigen::VectorXd x = Eigen::Map<Eigen::VectorXd>(init.data(), dim);
  std::vector<double> xv(init);
  double f = target.log_density(xv);
  if (!std::isfinite(f))
    throw InitializationError("laplace_fit: -inf density at init");

  Eigen::MatrixXd hinv = Eigen::MatrixXd::Identity(dim, dim);
  Eigen::VectorXd g = fd_gradient(target, x, std::fabs(f));

  const int max_iter = 1000;
  bool converged = false;
  for (int it = 0; it < max_iter; ++it) {
    if (g.norm() <= 1e-6) {
      converged = true;
      break;
    }
    Eigen::VectorXd dir = hinv * g;  // ascent direction
    if (dir.dot(g) <= 0.0) {
      hinv = Eigen::MatrixXd::Identity(dim, dim);
      dir = g;
    }
    double step = 1.0;
    Eigen::VectorXd xn;
    double fn = -std::numeric_limits<double>::infinity();
    for (int ls = 0; ls < 60; ++ls) {
      xn = x + step * dir;
      std::vector<double> xnv(xn.data(), xn.data() + dim);
      fn = target.log_density(xnv);
      if (std::isfinite(fn) && fn >= f + 1e-4 * step * dir.dot(g)) break;
      step *= 0.5;
    }
    if (!(fn > f)) {
      // No uphill progress; treat the current point as the mode.
      break;
    }
    Eigen::VectorXd gn = fd_gradient(target, xn, std::fabs(fn));
    Eigen::VectorXd s = xn - x;
    Eigen::VectorXd yk = g - gn;  // gradient change of -f
    double sy = s.dot(yk);
    if (sy > 1e-12) {
      // BFGS update of the inverse Hessian of -f.
      Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(dim, dim);
      Eigen::MatrixXd left = eye - s * yk.transpose() / sy;
      hinv = left * hinv * left.transpose() + s * s.transpose() / sy;
    }
    x = xn;
    f = fn;
    g = gn;
    if (g.norm() <= 1e-6) {
      converged = true;
      break;
    }
  }
  if (!converged && g.norm() > 1e-4)
    throw CurvatureError("laplace_fit: gradient ascent did not converge");

  Eigen::MatrixXd hess = fd_hessian(target, x, std::fabs(f));
  Eigen::MatrixXd neg = -0.5 * (hess + hess.transpose());
  Eigen::LLT<Eigen::MatrixXd> llt(neg);
  if (llt.info() != Eigen::Success)
    throw CurvatureError("laplace_fit: Hessian not negative definite at mode");
  Eigen::MatrixXd cov =
      llt.solve(Eigen::MatrixXd::Identity(dim, dim));
  return LaplaceFit{x, 0.5 * (cov + cov.transpose())};
}

}  // namespace taushape
