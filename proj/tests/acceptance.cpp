// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Heavier than the unit tests; several minutes end to end.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "taushape/conjugate.hpp"
#include "taushape/oc.hpp"
#include "taushape/pipeline.hpp"
#include "taushape/special.hpp"

using namespace taushape;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;
std::vector<std::string> g_lines;

void report(int criterion, const std::string& what, bool pass,
            const std::string& detail) {
  std::ostringstream os;
  os << (pass ? "[PASS] " : "[FAIL] ") << "criterion " << criterion << ": "
     << what << " -- " << detail;
  g_lines.push_back(os.str());
  std::printf("%s\n", os.str().c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

const int kThreads = 2;
const std::uint64_t kSeed = 8675309;

// ---------------------------------------------------------------------------
// Criterion 1: held-out type I error vs the enumeration oracle.
// Criterion 2 reuses the same machinery with the power grids.
// Criteria 3 and 4 evaluate the fitted models from 1 and 2.

ValidationReport run_criterion_1_and_4() {
  auto t0 = std::chrono::steady_clock::now();
  ConjugateOracleSpec spec;
  spec.m_iterations = 5000;
  spec.power_rows.clear();  // null path only
  ValidationReport rep = validate_conjugate(spec, FitConfig{}, kSeed, kThreads);
  double elapsed = seconds_since(t0);

  double worst = 0.0;
  bool pass = true;
  for (const auto& r : rep.rows) {
    worst = std::max(worst, std::fabs(r.predicted - r.exact));
    pass = pass && r.pass;
  }
  std::ostringstream detail;
  detail << "max |predicted - exact| = " << worst << " (tol 0.01) over n/arm "
         << "{20, 60, 200}, " << elapsed << " s";
  report(1, "oracle type-I equivalence at held-out n", pass && elapsed < 600,
         detail.str());

  if (rep.null_model) {
    std::vector<OCEstimate> tail =
        type1_curve(*rep.null_model, {1e6}, spec.u, 4000);
    double med = tail[0].summary.median;
    report(4, "nominal convergence at n = 1e6",
           std::fabs(med - 0.025) <= 0.002,
           "median = " + std::to_string(med) + " vs 0.025 +/- 0.002");
  } else {
    report(4, "nominal convergence at n = 1e6", false, "null fit missing");
  }
  return rep;
}

ValidationReport run_criterion_2() {
  auto t0 = std::chrono::steady_clock::now();
  ConjugateOracleSpec spec;
  spec.m_iterations = 5000;
  spec.null_train_per_arm.clear();
  spec.null_test_per_arm.clear();
  ValidationReport rep = validate_conjugate(spec, FitConfig{}, kSeed + 1, kThreads);
  double elapsed = seconds_since(t0);

  double worst = 0.0;
  int n_rows = 0;
  bool pass = true;
  for (const auto& r : rep.rows) {
    if (r.kind != "power") continue;
    ++n_rows;
    worst = std::max(worst, std::fabs(r.predicted - r.exact));
    pass = pass && r.pass;
  }
  std::ostringstream detail;
  detail << "max |predicted - exact| = " << worst << " (tol 0.05) over "
         << n_rows << " held-out scenarios, " << elapsed << " s; "
         << rep.bias_note;
  report(2, "power bias/RMSE on the train/test split",
         pass && n_rows == 28 && elapsed < 1200, detail.str());
  return rep;
}

void run_criterion_3(const ValidationReport& null_rep,
                     const ValidationReport& alt_rep) {
  bool ok = true;
  std::ostringstream detail;
  if (null_rep.null_model) {
    MixtureMoments m = null_mixture_moments(*null_rep.null_model, 1e8);
    bool mean_ok = m.mean == 0.5;
    bool var_ok = std::fabs(m.variance - 1.0 / 12.0) <= 1e-3;
    detail << "null at n=1e8: E = " << m.mean << ", Var = " << m.variance;
    ok = ok && mean_ok && var_ok;
  } else {
    ok = false;
  }
  if (alt_rep.alt_model) {
    MixtureMoments m = alt_mixture_moments(*alt_rep.alt_model, 1e3);
    detail << "; alt at delta=1e3: E = " << m.mean << ", Var = " << m.variance;
    ok = ok && m.mean >= 0.999 && m.variance <= 1e-4;
  } else {
    ok = false;
  }
  // point-mass arithmetic sanity alongside the fitted models
  MixtureMoments pm = null_mixture_moments(
      NullShapePosterior::point_mass(0.0, 0.0, 0.0), 1e8);
  ok = ok && pm.mean == 0.5 && std::fabs(pm.variance - 1.0 / 12.0) < 1e-12;
  report(3, "asymptotic mixture moments (exact model arithmetic)", ok,
         detail.str());
}

// ---------------------------------------------------------------------------
// Criterion 5: assurance behavior on the conjugate surrogate.

void run_criterion_5() {
  const double p0 = 0.3, u = 0.975;
  const std::vector<double> effects = {0.05, 0.10, 0.15, 0.20};
  const std::vector<double> n_grid = {250, 500, 1000, 2000, 3000};

  auto t0 = std::chrono::steady_clock::now();
  std::vector<TauSample> samples;
  RngStream root(kSeed + 2, 0xBA);
  std::size_t idx = 0;
  for (double d : effects) {
    for (double n : n_grid) {
      std::ostringstream key;
      key << "ba_d" << d << "_n" << n;
      Scenario s = [&] {
        Scenario sc;
        sc.key = key.str();
        sc.model.kind = ModelKind::BetaBinomial;
        sc.model.beta = {std::log(p0 / (1 - p0))};
        double p1 = p0 - d;
        sc.model.eta = std::log(p1 / (1 - p1)) - std::log(p0 / (1 - p0));
        sc.n = static_cast<int>(n);
        sc.M = 5000;
        return sc;
      }();
      samples.push_back(
          run_scenario(s, FitMethod::Laplace, root.derive(idx++), kThreads));
    }
  }
  FitConfig fit;
  QuantileMatrix qm = build_quantile_matrix(samples, fit.grid, 0.0);
  Stage1Posterior s1 = stage1_fit_all(qm, Hypothesis::Alt, fit.stage1_options(),
                                      root.derive(500), kThreads);
  AltShapePosterior model =
      stage2_fit_alt(s1, fit.stage2_config(), root.derive(501));
  const double t_base = seconds_since(t0);

  // point-mass design prior reproduces conditional power
  DesignPrior point;
  point.kind = DesignPrior::Kind::PointMass;
  point.value = 0.10;
  AssuranceConfig acfg{500, 4000};
  OCEstimate a_point =
      assurance(model, point, 1000.0, u, acfg, RngStream(kSeed, 0xAA));
  OCEstimate p_ref = power_at(model, std::sqrt(1000.0) * 0.10, 1000.0, u, 500);
  bool point_ok =
      std::fabs(a_point.summary.median - p_ref.summary.median) <= 0.005;

  // monotone assurance curves for the two normal design priors
  DesignPrior optimistic;
  optimistic.kind = DesignPrior::Kind::Normal;
  optimistic.name = "optimistic";
  optimistic.mu = 0.12;
  optimistic.sigma2 = 0.0004;
  DesignPrior conservative;
  conservative.kind = DesignPrior::Kind::Normal;
  conservative.name = "conservative";
  conservative.mu = 0.09;
  conservative.sigma2 = 0.0016;

  AssuranceEvaluator eval_opt(model, optimistic, acfg, RngStream(kSeed, 0xAB));
  AssuranceEvaluator eval_con(model, conservative, acfg, RngStream(kSeed, 0xAC));
  bool monotone = true, ordered = true;
  double prev_opt = -1.0, prev_con = -1.0;
  for (double n : n_grid) {
    double mo = eval_opt.at(n, u).summary.median;
    double mc = eval_con.at(n, u).summary.median;
    monotone = monotone && mo >= prev_opt && mc >= prev_con;
    ordered = ordered && mo >= mc;
    prev_opt = mo;
    prev_con = mc;
  }

  // changing u re-runs only beta tail evaluations over the cached draws
  auto t1 = std::chrono::steady_clock::now();
  for (double n : n_grid) {
    eval_opt.at(n, 0.95);
    eval_con.at(n, 0.95);
  }
  double t_reeval = seconds_since(t1);
  bool fast = t_reeval < 0.01 * t_base;

  std::ostringstream detail;
  detail << "point-mass vs power diff = "
         << std::fabs(a_point.summary.median - p_ref.summary.median)
         << "; monotone = " << (monotone ? "yes" : "NO")
         << "; optimistic >= conservative = " << (ordered ? "yes" : "NO")
         << "; re-evaluation at u=0.95 took " << t_reeval << " s vs "
         << t_base << " s simulate+fit (" << 100.0 * t_reeval / t_base
         << "%)";
  report(5, "assurance consistency, monotonicity and recompute cost",
         point_ok && monotone && fast, detail.str());
  if (!ordered)
    std::printf("       note: prior ordering informational check failed\n");
}

// ---------------------------------------------------------------------------
// Criterion 6: numerical kernels.

void run_criterion_6() {
  auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  double worst = 0.0;
  for (double a : {1e-3, 0.1, 1.0, 3.7, 10.0, 1e3, 1e6})
    for (double b : {1e-3, 0.1, 1.0, 3.7, 10.0, 1e3, 1e6})
      for (double p : {0.01, 0.1, 0.5, 0.9, 0.99}) {
        BetaParams params(a, b);
        double y = beta_quantile(p, params);
        double err = std::fabs(reg_inc_beta(y, params) - p);
        worst = std::max(worst, err);
        ok = ok && err <= 1e-10;
      }
  double arcsine = 2.0 / M_PI * std::asin(std::sqrt(0.025));
  double tail_half = 1.0 - reg_inc_beta(0.975, {0.5, 0.5});
  ok = ok && std::fabs(tail_half - arcsine) <= 1e-10;
  for (double x : {0.01, 0.25, 0.5, 0.9})
    ok = ok && std::fabs(reg_inc_beta(x, {1, 1}) - x) <= 1e-10;
  double sym_worst = 0.0;
  for (double a : {0.5, 1.0, 4.0, 100.0})
    for (double x : {0.05, 0.3, 0.5, 0.8}) {
      double s = reg_inc_beta(x, {a, a}) + reg_inc_beta(1 - x, {a, a});
      sym_worst = std::max(sym_worst, std::fabs(s - 1.0));
    }
  ok = ok && sym_worst <= 1e-12;
  std::ostringstream detail;
  detail << "round-trip worst " << worst << ", symmetry worst " << sym_worst
         << ", arcsine check " << std::fabs(tail_half - arcsine) << ", "
         << seconds_since(t0) << " s";
  report(6, "numerical kernels", ok, detail.str());
}

// ---------------------------------------------------------------------------
// Criterion 7: byte-identical pipeline outputs at any thread count.

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

void run_criterion_7() {
  auto make_cfg = [](const std::string& out, int threads) {
    std::ostringstream os;
    os << R"({"schema": 1, "seed": 424242, "threads": )" << threads
       << R"(, "out": ")" << out << R"(",
      "data_model": {"kind": "beta-binomial", "control_rate": 0.3},
      "scenarios": {"n": [30, 80, 200, 400], "effects": [0.0, 0.2], "M": 1500},
      "fit": {"stage2_warmup": 800, "stage2_keep": 500},
      "oc": {"u": [0.975], "n_grid": [50, 150, 600], "psi_grid": [0.15],
             "k_draws": 400,
             "design_priors": [
               {"name": "pm", "kind": "normal", "mu": 0.18, "sigma2": 0.001}],
             "assurance": {"hyper_draws": 120, "prior_draws": 600,
                           "target": 0.5, "n_grid": [60, 200, 500]}}})";
    return os.str();
  };
  fs::path d1 = fs::temp_directory_path() / "taushape_acc_det1";
  fs::path d2 = fs::temp_directory_path() / "taushape_acc_det2";
  fs::remove_all(d1);
  fs::remove_all(d2);
  for (auto [dir, threads] : {std::pair{d1, 1}, std::pair{d2, 4}}) {
    RunConfig cfg = parse_config(make_cfg(dir.string(), threads), "acc7");
    run_simulate(cfg, dir.string());
    run_fit(cfg, dir.string());
    run_oc(cfg, dir.string());
  }
  bool ok = true;
  int compared = 0;
  std::string mismatch;
  for (const auto& entry : fs::directory_iterator(d1)) {
    std::string name = entry.path().filename().string();
    if (name == "timings.txt") continue;
    ++compared;
    if (slurp(entry.path()) != slurp(d2 / name)) {
      ok = false;
      mismatch = name;
    }
  }
  std::ostringstream detail;
  detail << compared << " output files compared across 1 vs 4 threads";
  if (!ok) detail << "; first mismatch: " << mismatch;
  report(7, "full-pipeline determinism", ok && compared > 10, detail.str());
}

// ---------------------------------------------------------------------------
// Criterion 8: logistic path smoke test.

void run_criterion_8() {
  auto t0 = std::chrono::steady_clock::now();
  Scenario s;
  s.key = "logistic_null";
  s.model.kind = ModelKind::LogisticAdjusted;
  s.model.beta = {-1.26, 1, -0.5, 1, -0.1, 0.5};
  s.model.eta = 0.0;
  s.n = 200;
  s.M = 500;
  TauSample ts =
      run_scenario(s, FitMethod::Laplace, RngStream(kSeed + 3, 0), kThreads);
  double mean_tau = 0.0;
  for (double t : ts.taus) mean_tau += t;
  mean_tau /= ts.taus.size();
  bool mean_ok = std::fabs(mean_tau - 0.5) <= 0.04;

  // adjusted/unadjusted agreement with inert covariates
  Scenario adj;
  adj.key = "agree_adj";
  adj.model.kind = ModelKind::LogisticAdjusted;
  adj.model.beta = {-1.26, 0, 0, 0, 0, 0};
  adj.model.eta = -0.7;
  adj.n = 200;
  adj.M = 500;
  Scenario unadj = adj;
  unadj.key = "agree_unadj";
  unadj.analysis = ModelKind::LogisticUnadjusted;
  const double u = 0.9;
  TauSample ta =
      run_scenario(adj, FitMethod::Laplace, RngStream(kSeed + 4, 0), kThreads);
  TauSample tb =
      run_scenario(unadj, FitMethod::Laplace, RngStream(kSeed + 4, 0), kThreads);
  double fa = 0.0, fb = 0.0;
  for (double t : ta.taus) fa += t > u ? 1.0 : 0.0;
  for (double t : tb.taus) fb += t > u ? 1.0 : 0.0;
  fa /= ta.taus.size();
  fb /= tb.taus.size();
  double se = std::sqrt(fa * (1 - fa) / ta.taus.size() +
                        fb * (1 - fb) / tb.taus.size());
  bool agree = std::fabs(fa - fb) <= 2.0 * se + 1e-9;
  double elapsed = seconds_since(t0);

  std::ostringstream detail;
  detail << "mean(tau) = " << mean_tau << " (0.5 +/- 0.04); adjusted "
         << fa << " vs unadjusted " << fb << " (2se = " << 2 * se << "), "
         << elapsed << " s";
  report(8, "logistic path smoke test", mean_ok && agree && elapsed < 600,
         detail.str());
}

}  // namespace

int main() {
  std::printf("taushape acceptance suite\n");
  auto t0 = std::chrono::steady_clock::now();
  ValidationReport null_rep = run_criterion_1_and_4();
  ValidationReport alt_rep = run_criterion_2();
  run_criterion_3(null_rep, alt_rep);
  run_criterion_5();
  run_criterion_6();
  run_criterion_7();
  run_criterion_8();
  std::printf("total: %d/%d criteria passed in %.1f s\n", 8 - g_failures, 8,
              seconds_since(t0));
  return g_failures == 0 ? 0 : 1;
}
