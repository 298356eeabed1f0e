#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "taushape/rng.hpp"

namespace taushape {

// Unnormalized log density on R^dim. Must return -inf (not throw) outside
// the support.
struct TargetDensity {
  int dim;
  std::function<double(const std::vector<double>&)> log_density;
};

struct ChainConfig {
  int n_chains = 4;
  int warmup = 1000;
  int keep = 1000;
  double target_accept = 0.3;
  double init_jitter = 1.0;
  std::vector<double> init;  // optional; zeros when empty
};

struct PosteriorDraws {
  Eigen::MatrixXd draws;  // (n_chains * keep) x dim
  std::vector<double> rhat;         // split-Rhat per dimension
  std::vector<double> ess;          // effective sample size per dimension
  std::vector<double> accept_rate;  // per chain, kept phase
  std::vector<double> step_size;    // per chain, frozen after warmup
  bool convergence_warning = false;
  std::string warning;

  std::vector<double> column(int d) const;
};

// Adaptive random-walk Metropolis. The diagonal-proposal step size follows a
// Robbins-Monro recursion toward target_accept during warmup and is frozen
// afterwards, so kept draws form a Markov chain. Non-convergence (split-Rhat
// > 1.05) sets convergence_warning instead of failing.
PosteriorDraws sample(const TargetDensity& target, const ChainConfig& cfg,
                      RngStream stream);

struct LaplaceFit {
  Eigen::VectorXd mode;
  Eigen::MatrixXd covariance;
};

// Quasi-Newton ascent to the mode (finite-difference gradients), then the
// inverse negative finite-difference Hessian. Throws CurvatureError when the
// negative Hessian is not positive definite at convergence.
LaplaceFit laplace_fit(const TargetDensity& target, std::vector<double> init);

}  // namespace taushape
