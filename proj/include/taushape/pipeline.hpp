#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "taushape/config.hpp"
#include "taushape/oc.hpp"
#include "taushape/persist.hpp"

namespace taushape {

// simulate: one TauSample file per scenario plus a manifest. Deterministic
// for a fixed seed at any thread count; wall times go to a separate
// timings.txt sidecar so the data files stay byte-identical across runs.
Manifest run_simulate(const RunConfig& cfg, const std::string& out_dir);

struct FitOutputs {
  QuantileMatrix matrix;
  std::optional<Stage1Posterior> stage1_null;
  std::optional<Stage1Posterior> stage1_alt;
  std::optional<NullShapePosterior> null_model;
  std::optional<AltShapePosterior> alt_model;
  bool diagnostics_ok = true;
  std::vector<std::string> warnings;
};

// fit: quantile matrix, stage-1 and stage-2 posteriors, persisted next to
// the manifest. Throws InsufficientDesign when a present hypothesis has
// fewer than 3 distinct design points.
FitOutputs run_fit(const RunConfig& cfg, const std::string& dir);

struct OcOutputs {
  std::vector<std::string> files;
  std::vector<std::string> warnings;
  // crossing sample size per design prior (assurance target), when reached
  std::vector<std::pair<std::string, double>> crossings;
};

// oc: CSV tables and SVG figures for type I error, power and assurance.
OcOutputs run_oc(const RunConfig& cfg, const std::string& dir);

SampleSizeResult run_ssd(const RunConfig& cfg, const std::string& dir);

// Normalized-estimand design prior built from a config spec; priors on the
// conditional-effect scale go through the cached standardization transform.
DesignPrior make_design_prior(const DesignPriorSpec& spec, const RunConfig& cfg);

// eta -> normalized marginal estimand, interpolated standardization curve.
std::function<double(double)> make_conditional_transform(
    const DataModel& model, Estimand estimand, Direction direction,
    double psi0, double eta_lo, double eta_hi);

// Conjugate-oracle validation: fit on training scenarios, predict held-out
// operating characteristics, compare with exact enumeration.
struct OracleGridRow {
  double effect;  // control-minus-treated risk difference
  std::vector<int> train_per_arm;
  std::vector<int> test_per_arm;
};

struct ConjugateOracleSpec {
  double control_rate = 0.3;
  double u = 0.975;
  int m_iterations = 5000;
  std::vector<int> null_train_per_arm = {10, 40, 100, 500};
  std::vector<int> null_test_per_arm = {20, 60, 200};
  std::vector<OracleGridRow> power_rows = default_power_rows();
  double type1_tolerance = 0.01;
  double power_tolerance = 0.05;

  static std::vector<OracleGridRow> default_power_rows();
};

struct ValidationRow {
  std::string kind;  // "type1" or "power"
  double n_per_arm;
  double effect;  // 0 for type1 rows
  double predicted;
  double exact;
  double tolerance;
  bool pass;
};

struct ValidationReport {
  std::vector<ValidationRow> rows;
  bool pass = true;
  std::string bias_note;  // informational small-n / large-n bias signs
  std::optional<NullShapePosterior> null_model;
  std::optional<AltShapePosterior> alt_model;
};

ValidationReport validate_conjugate(const ConjugateOracleSpec& spec,
                                    const FitConfig& fit, std::uint64_t seed,
                                    int threads);

std::string report_to_string(const ValidationReport& report);

}  // namespace taushape
