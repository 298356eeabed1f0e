#pragma once

#include <string>
#include <vector>

#include "taushape/oc.hpp"
#include "taushape/shape_model.hpp"
#include "taushape/trial.hpp"

namespace taushape {

// One file per scenario: the scenario/meta header followed by the tau column,
// 17-significant-digit text, bit-exact on read-back.
void save_tau_sample(const TauSample& sample, const std::string& path);
TauSample load_tau_sample(const std::string& path);

struct ManifestEntry {
  std::string file;
  std::string key;
  double n = 0;
  double m = 0;
  double failures = 0;
  double separation_flags = 0;
};

struct Manifest {
  std::uint64_t seed = 0;
  std::string method;
  std::vector<ManifestEntry> entries;
};

void save_manifest(const Manifest& m, const std::string& path);
Manifest load_manifest(const std::string& path);

// Every file named by the manifest must exist and carry a matching header.
// Returns the loaded samples in manifest order.
std::vector<TauSample> load_manifest_samples(const Manifest& m,
                                             const std::string& dir);

void save_quantile_matrix(const QuantileMatrix& qm, const std::string& path);
QuantileMatrix load_quantile_matrix(const std::string& path);

void save_stage1(const Stage1Posterior& s1, const std::string& path);
Stage1Posterior load_stage1(const std::string& path);

void save_null_posterior(const NullShapePosterior& m, const std::string& path);
NullShapePosterior load_null_posterior(const std::string& path);
void save_alt_posterior(const AltShapePosterior& m, const std::string& path);
AltShapePosterior load_alt_posterior(const std::string& path);

// CSV export: one row per grid point.
std::string oc_csv(const std::vector<OCEstimate>& estimates);
void save_oc_csv(const std::vector<OCEstimate>& estimates,
                 const std::string& path);

}  // namespace taushape
