#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "taushape/conjugate.hpp"
#include "taushape/oc.hpp"
#include "taushape/pipeline.hpp"
#include "taushape/shape_model.hpp"
#include "taushape/special.hpp"
#include "taushape/summaries.hpp"
#include "taushape/trial.hpp"

namespace py = pybind11;
using namespace taushape;

namespace {

double logit(double p) { return std::log(p / (1.0 - p)); }

Scenario conjugate_scenario(int n_per_arm, double control_rate, double effect,
                            int m) {
  Scenario s;
  s.key = "py";
  s.model.kind = ModelKind::BetaBinomial;
  s.model.beta = {logit(control_rate)};
  double p1 = control_rate - effect;
  s.model.eta = logit(p1) - logit(control_rate);
  s.n = 2 * n_per_arm;
  s.M = m;
  return s;
}

std::vector<double> run_conjugate_scenario(int n_per_arm, double control_rate,
                                           double effect, int m,
                                           std::uint64_t seed, int threads) {
  Scenario s = conjugate_scenario(n_per_arm, control_rate, effect, m);
  return run_scenario(s, FitMethod::Laplace, RngStream(seed, 0), threads).taus;
}

// (n_total, taus) rows -> fitted null shape model
NullShapePosterior fit_null_shape(
    const std::vector<std::pair<double, std::vector<double>>>& samples,
    double sigma_eps, std::uint64_t seed, int threads) {
  std::vector<TauSample> ts;
  int idx = 0;
  for (const auto& [n, taus] : samples) {
    TauSample t;
    t.scenario.key = "null" + std::to_string(idx++);
    t.scenario.model.kind = ModelKind::BetaBinomial;
    t.scenario.model.beta = {0.0};
    t.scenario.model.eta = 0.0;
    t.scenario.n = static_cast<int>(n);
    t.scenario.M = static_cast<int>(taus.size());
    t.taus = taus;
    ts.push_back(std::move(t));
  }
  QuantileMatrix qm =
      build_quantile_matrix(ts, QuantileGrid::default_grid(), 0.0);
  Stage1Options opt;
  opt.sigma_eps = sigma_eps;
  RngStream root(seed, 0x9B);
  Stage1Posterior s1 =
      stage1_fit_all(qm, Hypothesis::Null, opt, root.derive(0), threads);
  return stage2_fit_null(s1, Stage2Config{}, root.derive(1));
}

// (n_total, effect, taus) rows -> fitted alternative shape model
AltShapePosterior fit_alt_shape(
    const std::vector<std::tuple<double, double, std::vector<double>>>& samples,
    double control_rate, double sigma_eps, std::uint64_t seed, int threads) {
  std::vector<TauSample> ts;
  int idx = 0;
  for (const auto& [n, effect, taus] : samples) {
    TauSample t;
    t.scenario = conjugate_scenario(static_cast<int>(n) / 2, control_rate,
                                    effect, static_cast<int>(taus.size()));
    t.scenario.key = "alt" + std::to_string(idx++);
    t.taus = taus;
    ts.push_back(std::move(t));
  }
  QuantileMatrix qm =
      build_quantile_matrix(ts, QuantileGrid::default_grid(), 0.0);
  Stage1Options opt;
  opt.sigma_eps = sigma_eps;
  RngStream root(seed, 0x9C);
  Stage1Posterior s1 =
      stage1_fit_all(qm, Hypothesis::Alt, opt, root.derive(0), threads);
  return stage2_fit_alt(s1, Stage2Config{}, root.derive(1));
}

py::dict estimate_to_dict(const OCEstimate& e) {
  py::dict d;
  d["kind"] = OCEstimate::kind_name(e.kind);
  d["n"] = e.n;
  if (e.psi) d["psi"] = *e.psi;
  d["u"] = e.u;
  d["median"] = e.summary.median;
  d["lo"] = e.summary.lo;
  d["hi"] = e.summary.hi;
  d["K"] = e.K;
  return d;
}

DesignPrior normal_prior(double mu, double sigma2) {
  DesignPrior p;
  p.kind = DesignPrior::Kind::Normal;
  p.mu = mu;
  p.sigma2 = sigma2;
  return p;
}

}  // namespace

PYBIND11_MODULE(_taushape, m) {
  m.doc() =
      "Beta shape models for the sampling distribution of Bayesian decision "
      "summaries";

  py::register_exception<Error>(m, "TaushapeError");

  m.def(
      "reg_inc_beta",
      [](double x, double a, double b) { return reg_inc_beta(x, {a, b}); },
      py::arg("x"), py::arg("a"), py::arg("b"),
      "Regularized incomplete beta I_x(a, b)");
  m.def(
      "beta_quantile",
      [](double prob, double a, double b) {
        return beta_quantile(prob, {a, b});
      },
      py::arg("prob"), py::arg("a"), py::arg("b"));
  m.def("empirical_quantiles", &empirical_quantiles, py::arg("draws"),
        py::arg("grid"), "Type-7 empirical quantiles");
  m.def("exact_tau_conjugate", &exact_tau_conjugate, py::arg("y1"),
        py::arg("n1"), py::arg("y0"), py::arg("n0"), py::arg("prior_a") = 1.0,
        py::arg("prior_b") = 1.0,
        "P(p0 > p1 | data) for independent beta-binomial arms");
  m.def("exact_tail_probability", &exact_tail_probability, py::arg("n_per_arm"),
        py::arg("p1"), py::arg("p0"), py::arg("u"),
        "Exact P(tau > u) for the two-arm beta-binomial sampling distribution");
  m.def(
      "enumerate_sampling_distribution",
      [](int n_per_arm, double p1, double p0) {
        ExactTauDistribution d =
            enumerate_sampling_distribution(n_per_arm, p1, p0);
        std::vector<std::pair<double, double>> out;
        out.reserve(d.atoms.size());
        for (const auto& a : d.atoms) out.emplace_back(a.tau, a.prob);
        return out;
      },
      py::arg("n_per_arm"), py::arg("p1"), py::arg("p0"),
      "All (tau, probability) atoms of the exact sampling distribution");
  m.def("run_conjugate_scenario", &run_conjugate_scenario, py::arg("n_per_arm"),
        py::arg("control_rate"), py::arg("effect"), py::arg("m"),
        py::arg("seed"), py::arg("threads") = 1,
        "Monte Carlo draws of tau for a two-arm beta-binomial scenario");

  py::class_<NullShapePosterior>(m, "NullShapeModel")
      .def_static("point_mass", &NullShapePosterior::point_mass,
                  py::arg("alpha1"), py::arg("alpha2"), py::arg("sigma0"))
      .def_property_readonly(
          "hyper_draws",
          [](const NullShapePosterior& s) {
            std::vector<std::vector<double>> out;
            for (long i = 0; i < s.a.size(); ++i)
              out.push_back({s.a.draws(i, 0), s.a.draws(i, 1), s.a.draws(i, 2)});
            return out;
          })
      .def("type1",
           [](const NullShapePosterior& s, const std::vector<double>& n_grid,
              double u, int k) {
             py::list out;
             for (const auto& e : type1_curve(s, n_grid, u, k))
               out.append(estimate_to_dict(e));
             return out;
           },
           py::arg("n_grid"), py::arg("u"), py::arg("k_draws") = 4000)
      .def("moments",
           [](const NullShapePosterior& s, double n) {
             MixtureMoments mm = null_mixture_moments(s, n);
             return std::make_pair(mm.mean, mm.variance);
           },
           py::arg("n"));

  py::class_<AltShapePosterior>(m, "AltShapeModel")
      .def_static("point_mass", &AltShapePosterior::point_mass, py::arg("phi1"),
                  py::arg("phi2"), py::arg("sigma1"))
      .def_property_readonly(
          "hyper_draws",
          [](const AltShapePosterior& s) {
            std::vector<std::vector<double>> out;
            for (long i = 0; i < s.phi.size(); ++i)
              out.push_back({s.phi.draws(i, 0), s.phi.draws(i, 1),
                             s.phi.draws(i, 2)});
            return out;
          })
      .def("power",
           [](const AltShapePosterior& s, double psi, double n, double u,
              int k) {
             return estimate_to_dict(
                 power_at(s, std::sqrt(n) * psi, n, u, k));
           },
           py::arg("psi"), py::arg("n"), py::arg("u"), py::arg("k_draws") = 4000)
      .def("assurance",
           [](const AltShapePosterior& s, double mu, double sigma2, double n,
              double u, std::uint64_t seed, int hyper_draws, int prior_draws) {
             AssuranceConfig cfg{hyper_draws, prior_draws};
             return estimate_to_dict(assurance(s, normal_prior(mu, sigma2), n,
                                               u, cfg, RngStream(seed, 0)));
           },
           py::arg("mu"), py::arg("sigma2"), py::arg("n"), py::arg("u"),
           py::arg("seed") = 1, py::arg("hyper_draws") = 500,
           py::arg("prior_draws") = 4000,
           "Assurance under a normal design prior on the normalized estimand")
      .def("moments",
           [](const AltShapePosterior& s, double delta) {
             MixtureMoments mm = alt_mixture_moments(s, delta);
             return std::make_pair(mm.mean, mm.variance);
           },
           py::arg("delta"));

  m.def("fit_null_shape", &fit_null_shape, py::arg("samples"),
        py::arg("sigma_eps") = 1e-4, py::arg("seed") = 1,
        py::arg("threads") = 1,
        "Two-stage fit of the null shape model from (n_total, taus) rows");
  m.def("fit_alt_shape", &fit_alt_shape, py::arg("samples"),
        py::arg("control_rate") = 0.3, py::arg("sigma_eps") = 1e-4,
        py::arg("seed") = 1, py::arg("threads") = 1,
        "Two-stage fit of the alternative shape model from "
        "(n_total, effect, taus) rows");
}
