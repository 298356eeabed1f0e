#include "taushape/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "taushape/conjugate.hpp"
#include "taushape/errors.hpp"
#include "taushape/svg.hpp"
#include "taushape/text_table.hpp"

namespace taushape {

namespace fs = std::filesystem;

namespace {

double logit(double p) { return std::log(p / (1.0 - p)); }

std::string u_tag(double u) {
  std::ostringstream os;
  os << "u" << u;
  return os.str();
}

Scenario conjugate_scenario(const std::string& key, double p0, double effect,
                            int n_per_arm, int m) {
  Scenario s;
  s.key = key;
  s.model.kind = ModelKind::BetaBinomial;
  s.model.beta = {logit(p0)};
  double p1 = p0 - effect;
  if (!(p1 > 0.0 && p1 < 1.0))
    throw InvalidParameter("conjugate effect leaves (0,1)");
  s.model.eta = logit(p1) - logit(p0);
  s.n = 2 * n_per_arm;
  s.M = m;
  return s;
}

}  // namespace

Manifest run_simulate(const RunConfig& cfg, const std::string& out_dir) {
  std::vector<Scenario> scenarios = cfg.scenarios();
  if (scenarios.empty())
    throw SchemaError("simulate: config defines no scenarios");
  fs::create_directories(out_dir);

  Manifest manifest;
  manifest.seed = cfg.seed;
  manifest.method = to_string(cfg.method);
  std::ostringstream timings;
  timings << "# wall-clock diagnostics; not covered by the determinism contract\n";

  RngStream root(cfg.seed, 0x51D);
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    const Scenario& s = scenarios[i];
    auto t0 = std::chrono::steady_clock::now();
    TauSample sample = run_scenario(s, cfg.method, root.derive(i), cfg.threads);
    auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                  std::chrono::steady_clock::now() - t0)
                  .count();
    std::string file = "tau_" + s.key + ".txt";
    save_tau_sample(sample, (fs::path(out_dir) / file).string());
    manifest.entries.push_back(ManifestEntry{
        file, s.key, static_cast<double>(s.n), static_cast<double>(s.M),
        static_cast<double>(sample.meta.failures),
        static_cast<double>(sample.meta.separation_flags)});
    timings << file << " wall_ms=" << ms << '\n';
  }
  save_manifest(manifest, (fs::path(out_dir) / "manifest.txt").string());
  std::ofstream tf(fs::path(out_dir) / "timings.txt");
  tf << timings.str();
  return manifest;
}

FitOutputs run_fit(const RunConfig& cfg, const std::string& dir) {
  Manifest manifest = load_manifest((fs::path(dir) / "manifest.txt").string());
  std::vector<TauSample> samples = load_manifest_samples(manifest, dir);

  FitOutputs out;
  out.matrix = build_quantile_matrix(samples, cfg.fit.grid, cfg.psi0);
  save_quantile_matrix(out.matrix, (fs::path(dir) / "quantiles.txt").string());

  bool has_null = false, has_alt = false;
  for (const auto& row : out.matrix.rows) {
    if (row.is_null()) has_null = true;
    if (row.delta > 0.0) has_alt = true;
    if (row.delta < 0.0)
      out.warnings.push_back("scenario " + row.key +
                             " has a negative effect distance; excluded");
  }
  if (!has_null && !has_alt)
    throw InsufficientDesign("fit: no null or alternative scenarios");

  RngStream root(cfg.seed, 0xF17);
  if (has_null) {
    Stage1Posterior s1 = stage1_fit_all(out.matrix, Hypothesis::Null,
                                        cfg.fit.stage1_options(),
                                        root.derive(1), cfg.threads);
    NullShapePosterior model =
        stage2_fit_null(s1, cfg.fit.stage2_config(), root.derive(2));
    save_stage1(s1, (fs::path(dir) / "stage1_null.txt").string());
    save_null_posterior(model, (fs::path(dir) / "null_posterior.txt").string());
    for (const auto& e : s1.entries)
      if (!e.converged)
        out.warnings.push_back("stage-1 non-convergence on row " + e.key);
    if (model.a.convergence_warning || (model.b && model.b->convergence_warning))
      out.diagnostics_ok = false;
    out.stage1_null = std::move(s1);
    out.null_model = std::move(model);
  }
  if (has_alt) {
    Stage1Posterior s1 = stage1_fit_all(out.matrix, Hypothesis::Alt,
                                        cfg.fit.stage1_options(),
                                        root.derive(3), cfg.threads);
    AltShapePosterior model =
        stage2_fit_alt(s1, cfg.fit.stage2_config(), root.derive(4));
    save_stage1(s1, (fs::path(dir) / "stage1_alt.txt").string());
    save_alt_posterior(model, (fs::path(dir) / "alt_posterior.txt").string());
    for (const auto& e : s1.entries)
      if (!e.converged)
        out.warnings.push_back("stage-1 non-convergence on row " + e.key);
    if (model.phi.convergence_warning) out.diagnostics_ok = false;
    out.stage1_alt = std::move(s1);
    out.alt_model = std::move(model);
  }
  return out;
}

std::function<double(double)> make_conditional_transform(
    const DataModel& model, Estimand estimand, Direction direction,
    double psi0, double eta_lo, double eta_hi) {
  const int kNodes = 33;
  const long kDraws = 200000;
  auto etas = std::make_shared<std::vector<double>>();
  auto psis = std::make_shared<std::vector<double>>();
  for (int i = 0; i < kNodes; ++i) {
    double eta = eta_lo + (eta_hi - eta_lo) * i / (kNodes - 1);
    DataModel m = model;
    m.eta = eta;
    double psi = marginal_effect(m, estimand, kDraws);
    etas->push_back(eta);
    psis->push_back(direction == Direction::Greater ? psi - psi0 : psi0 - psi);
  }
  return [etas, psis](double eta) {
    const auto& x = *etas;
    const auto& y = *psis;
    std::size_t hi = 1;
    while (hi + 1 < x.size() && x[hi] < eta) ++hi;
    double t = (eta - x[hi - 1]) / (x[hi] - x[hi - 1]);
    return y[hi - 1] + t * (y[hi] - y[hi - 1]);  // linear, extrapolating
  };
}

DesignPrior make_design_prior(const DesignPriorSpec& spec,
                              const RunConfig& cfg) {
  DesignPrior p;
  p.kind = spec.kind;
  p.scale = spec.scale;
  p.name = spec.name;
  if (spec.scale == DesignPrior::Scale::ConditionalEffect) {
    double lo = 0.0, hi = 0.0;
    switch (spec.kind) {
      case DesignPrior::Kind::PointMass:
        lo = spec.value - 1.0;
        hi = spec.value + 1.0;
        break;
      case DesignPrior::Kind::Normal: {
        double sd = std::sqrt(spec.sigma2);
        lo = spec.mu - 8.0 * sd;
        hi = spec.mu + 8.0 * sd;
        break;
      }
      case DesignPrior::Kind::WeightedGrid:
        lo = *std::min_element(spec.values.begin(), spec.values.end()) - 0.5;
        hi = *std::max_element(spec.values.begin(), spec.values.end()) + 0.5;
        break;
    }
    p.transform = make_conditional_transform(cfg.data_model, cfg.estimand,
                                             cfg.direction, cfg.psi0, lo, hi);
    p.value = spec.value;
    p.mu = spec.mu;
    p.sigma2 = spec.sigma2;
    p.values = spec.values;
    p.weights = spec.weights;
  } else {
    // Normalize marginal-scale parameters so the alternative is positive.
    double sign = cfg.direction == Direction::Greater ? 1.0 : -1.0;
    p.value = sign * (spec.value - cfg.psi0);
    p.mu = sign * (spec.mu - cfg.psi0);
    p.sigma2 = spec.sigma2;
    p.values = spec.values;
    for (double& v : p.values) v = sign * (v - cfg.psi0);
    p.weights = spec.weights;
  }
  p.validate();
  return p;
}

namespace {

// Linear interpolation of the smallest n where the curve reaches target.
std::optional<double> crossing_n(const std::vector<double>& n_grid,
                                 const std::vector<double>& medians,
                                 double target) {
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    if (medians[i] >= target) {
      if (i == 0) return n_grid[0];
      double t = (target - medians[i - 1]) / (medians[i] - medians[i - 1]);
      return n_grid[i - 1] + t * (n_grid[i] - n_grid[i - 1]);
    }
  }
  return std::nullopt;
}

}  // namespace

OcOutputs run_oc(const RunConfig& cfg, const std::string& dir) {
  OcOutputs out;
  fs::path base(dir);
  std::optional<NullShapePosterior> null_model;
  std::optional<AltShapePosterior> alt_model;
  if (fs::exists(base / "null_posterior.txt"))
    null_model = load_null_posterior((base / "null_posterior.txt").string());
  if (fs::exists(base / "alt_posterior.txt"))
    alt_model = load_alt_posterior((base / "alt_posterior.txt").string());
  if (!null_model && !alt_model)
    throw IoError("oc: no fitted posteriors found in " + dir);

  auto emit = [&](const std::string& name) {
    out.files.push_back(name);
    return (base / name).string();
  };

  for (double u : cfg.oc.u) {
    if (null_model && !cfg.oc.n_grid.empty()) {
      std::vector<OCEstimate> curve =
          type1_curve(*null_model, cfg.oc.n_grid, u, cfg.oc.k_draws);
      save_oc_csv(curve, emit("type1_" + u_tag(u) + ".csv"));
      SvgSeries s;
      s.label = "type I error";
      for (const auto& e : curve) {
        s.x.push_back(e.n);
        s.y.push_back(e.summary.median);
        s.lo.push_back(e.summary.lo);
        s.hi.push_back(e.summary.hi);
      }
      SvgPlot plot;
      plot.title = "Type I error rate, u=" + std::to_string(u);
      plot.x_label = "sample size";
      plot.y_label = "P(tau > u)";
      plot.log_x = true;
      plot.series.push_back(std::move(s));
      plot.save(emit("type1_" + u_tag(u) + ".svg"));
    }
    if (alt_model && !cfg.oc.psi_grid.empty() && !cfg.oc.n_grid.empty()) {
      PowerSurface surf = power_surface(*alt_model, cfg.oc.psi_grid,
                                        cfg.oc.n_grid, u, 0.0, cfg.oc.k_draws);
      for (const auto& w : surf.warnings) out.warnings.push_back(w);
      save_oc_csv(surf.estimates, emit("power_" + u_tag(u) + ".csv"));
      SvgPlot plot;
      plot.title = "Power, u=" + std::to_string(u);
      plot.x_label = "sample size";
      plot.y_label = "P(tau > u)";
      plot.log_x = true;
      std::size_t idx = 0;
      for (double psi : cfg.oc.psi_grid) {
        SvgSeries s;
        std::ostringstream label;
        label << "effect " << psi;
        s.label = label.str();
        for (double n : cfg.oc.n_grid) {
          const OCEstimate& e = surf.estimates[idx++];
          s.x.push_back(n);
          s.y.push_back(e.summary.median);
          s.lo.push_back(e.summary.lo);
          s.hi.push_back(e.summary.hi);
        }
        plot.series.push_back(std::move(s));
      }
      plot.save(emit("power_" + u_tag(u) + ".svg"));
    }
  }

  if (alt_model && !cfg.oc.design_priors.empty() &&
      !cfg.oc.assurance.n_grid.empty()) {
    AssuranceConfig acfg{cfg.oc.assurance.hyper_draws,
                         cfg.oc.assurance.prior_draws};
    for (double u : cfg.oc.u) {
      SvgPlot plot;
      plot.title = "Bayesian assurance, u=" + std::to_string(u);
      plot.x_label = "sample size";
      plot.y_label = "assurance";
      bool first_u = u == cfg.oc.u.front();
      for (std::size_t pi = 0; pi < cfg.oc.design_priors.size(); ++pi) {
        DesignPrior prior = make_design_prior(cfg.oc.design_priors[pi], cfg);
        AssuranceEvaluator eval(*alt_model, prior, acfg,
                                RngStream(cfg.seed, 0xBA5E + pi), 0.0);
        std::vector<OCEstimate> curve;
        std::vector<double> medians;
        for (double n : cfg.oc.assurance.n_grid) {
          curve.push_back(eval.at(n, u));
          medians.push_back(curve.back().summary.median);
        }
        save_oc_csv(curve, emit("assurance_" + prior.name + "_" + u_tag(u) +
                                ".csv"));
        SvgSeries s;
        s.label = prior.name;
        s.dashed = pi % 2 == 1;
        for (std::size_t i = 0; i < curve.size(); ++i) {
          s.x.push_back(curve[i].n);
          s.y.push_back(curve[i].summary.median);
          s.lo.push_back(curve[i].summary.lo);
          s.hi.push_back(curve[i].summary.hi);
        }
        plot.series.push_back(std::move(s));
        if (cfg.oc.assurance.target) {
          auto cross =
              crossing_n(cfg.oc.assurance.n_grid, medians,
                         *cfg.oc.assurance.target);
          if (cross) {
            std::ostringstream label;
            label << prior.name << " n=" << static_cast<long>(std::ceil(*cross));
            plot.vlines.emplace_back(*cross, label.str());
            if (first_u) out.crossings.emplace_back(prior.name, *cross);
          } else if (first_u) {
            out.warnings.push_back("assurance target not reached for prior " +
                                   prior.name);
          }
        }
      }
      plot.save(emit("assurance_" + u_tag(u) + ".svg"));
    }
  }
  return out;
}

SampleSizeResult run_ssd(const RunConfig& cfg, const std::string& dir) {
  fs::path base(dir);
  if (!fs::exists(base / "alt_posterior.txt"))
    throw IoError("ssd: no fitted alternative model in " + dir);
  AltShapePosterior model =
      load_alt_posterior((base / "alt_posterior.txt").string());
  if (!cfg.oc.assurance.target)
    throw SchemaError("ssd: oc.assurance.target is required");
  if (cfg.oc.assurance.n_grid.size() < 2)
    throw SchemaError("ssd: oc.assurance.n_grid must give a search range");
  if (cfg.oc.design_priors.empty())
    throw SchemaError("ssd: a design prior is required");
  DesignPrior prior = make_design_prior(cfg.oc.design_priors.front(), cfg);
  AssuranceConfig acfg{cfg.oc.assurance.hyper_draws,
                       cfg.oc.assurance.prior_draws};
  auto [lo, hi] = std::minmax_element(cfg.oc.assurance.n_grid.begin(),
                                      cfg.oc.assurance.n_grid.end());
  return find_sample_size(model, prior, cfg.oc.u.front(),
                          *cfg.oc.assurance.target,
                          {static_cast<int>(*lo), static_cast<int>(*hi)}, acfg,
                          RngStream(cfg.seed, 0x55D), 0.0);
}

std::vector<OracleGridRow> ConjugateOracleSpec::default_power_rows() {
  return {
      {0.25, {10, 30, 50}, {20, 40, 60, 80, 100, 150, 200}},
      {0.20, {20, 60, 100}, {30, 40, 50, 80, 150, 200, 250}},
      {0.15, {50, 150, 250}, {60, 80, 100, 200, 300, 400, 500}},
      {0.10, {100, 300, 500}, {40, 60, 80, 150, 200, 250, 400}},
  };
}

ValidationReport validate_conjugate(const ConjugateOracleSpec& spec,
                                    const FitConfig& fit, std::uint64_t seed,
                                    int threads) {
  const double p0 = spec.control_rate;
  std::vector<TauSample> null_samples, alt_samples;
  RngStream root(seed, 0x0AC1E);
  std::size_t sim_idx = 0;

  for (int n_arm : spec.null_train_per_arm) {
    Scenario s = conjugate_scenario("null_n" + std::to_string(n_arm), p0, 0.0,
                                    n_arm, spec.m_iterations);
    null_samples.push_back(
        run_scenario(s, FitMethod::Laplace, root.derive(sim_idx++), threads));
  }
  for (const auto& row : spec.power_rows) {
    for (int n_arm : row.train_per_arm) {
      std::ostringstream key;
      key << "alt_d" << row.effect << "_n" << n_arm;
      Scenario s = conjugate_scenario(key.str(), p0, row.effect, n_arm,
                                      spec.m_iterations);
      alt_samples.push_back(
          run_scenario(s, FitMethod::Laplace, root.derive(sim_idx++), threads));
    }
  }

  ValidationReport report;

  // Null path: fit on training n, predict held-out type I error.
  if (!null_samples.empty()) {
    QuantileMatrix qm = build_quantile_matrix(null_samples, fit.grid, 0.0);
    Stage1Posterior s1 = stage1_fit_all(qm, Hypothesis::Null,
                                        fit.stage1_options(),
                                        root.derive(9001), threads);
    NullShapePosterior model =
        stage2_fit_null(s1, fit.stage2_config(), root.derive(9002));
    std::vector<double> n_grid;
    for (int n_arm : spec.null_test_per_arm)
      n_grid.push_back(2.0 * n_arm);
    std::vector<OCEstimate> curve = type1_curve(model, n_grid, spec.u);
    for (std::size_t i = 0; i < curve.size(); ++i) {
      int n_arm = spec.null_test_per_arm[i];
      double exact = exact_tail_probability(n_arm, p0, p0, spec.u);
      double pred = curve[i].summary.median;
      bool pass = std::fabs(pred - exact) <= spec.type1_tolerance;
      report.rows.push_back(ValidationRow{"type1", static_cast<double>(n_arm),
                                          0.0, pred, exact,
                                          spec.type1_tolerance, pass});
      report.pass = report.pass && pass;
    }
    report.null_model = std::move(model);
  }

  // Alternative path: fit the training grid, predict held-out power.
  if (!alt_samples.empty()) {
    QuantileMatrix qm = build_quantile_matrix(alt_samples, fit.grid, 0.0);
    Stage1Posterior s1 = stage1_fit_all(qm, Hypothesis::Alt,
                                        fit.stage1_options(),
                                        root.derive(9003), threads);
    AltShapePosterior model =
        stage2_fit_alt(s1, fit.stage2_config(), root.derive(9004));
    double bias_small = 0.0, bias_large = 0.0;
    int cnt_small = 0, cnt_large = 0;
    for (const auto& row : spec.power_rows) {
      for (int n_arm : row.test_per_arm) {
        double n_total = 2.0 * n_arm;
        double delta = std::sqrt(n_total) * row.effect;
        double pred = power_at(model, delta, n_total, spec.u).summary.median;
        double exact =
            exact_tail_probability(n_arm, p0 - row.effect, p0, spec.u);
        bool pass = std::fabs(pred - exact) <= spec.power_tolerance;
        report.rows.push_back(ValidationRow{"power",
                                            static_cast<double>(n_arm),
                                            row.effect, pred, exact,
                                            spec.power_tolerance, pass});
        report.pass = report.pass && pass;
        if (n_arm <= 100) {
          bias_small += pred - exact;
          ++cnt_small;
        } else {
          bias_large += pred - exact;
          ++cnt_large;
        }
      }
    }
    std::ostringstream note;
    note << "informational bias: mean(pred - exact) = "
         << (cnt_small ? bias_small / cnt_small : 0.0) << " for n/arm <= 100, "
         << (cnt_large ? bias_large / cnt_large : 0.0) << " for n/arm > 100";
    report.bias_note = note.str();
    report.alt_model = std::move(model);
  }
  return report;
}

std::string report_to_string(const ValidationReport& report) {
  std::ostringstream os;
  os << "kind    effect  n/arm  predicted  exact      |diff|     tol    result\n";
  for (const auto& r : report.rows) {
    char line[160];
    std::snprintf(line, sizeof(line),
                  "%-7s %-7.3g %-6g %-10.5f %-10.5f %-10.5f %-6.3g %s\n",
                  r.kind.c_str(), r.effect, r.n_per_arm, r.predicted, r.exact,
                  std::fabs(r.predicted - r.exact), r.tolerance,
                  r.pass ? "pass" : "FAIL");
    os << line;
  }
  os << report.bias_note << '\n';
  os << (report.pass ? "validation: PASS" : "validation: FAIL") << '\n';
  return os.str();
}

}  // namespace taushape
