#include "taushape/persist.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "taushape/errors.hpp"
#include "taushape/text_table.hpp"

namespace taushape {

namespace {

void scenario_to_meta(const Scenario& s, TextTable& t) {
  t.set_meta("key", s.key);
  t.set_meta("model", to_string(s.model.kind));
  t.set_meta("analysis", to_string(s.analysis_kind()));
  t.set_meta("n", static_cast<long>(s.n));
  t.set_meta("psi0", s.psi0);
  t.set_meta("estimand", to_string(s.estimand));
  t.set_meta("direction", to_string(s.direction));
  t.set_meta("M", static_cast<long>(s.M));
  t.set_meta("eta", s.model.eta);
  std::ostringstream beta;
  for (std::size_t i = 0; i < s.model.beta.size(); ++i) {
    if (i) beta << ' ';
    beta << format_double(s.model.beta[i]);
  }
  t.set_meta("beta", beta.str());
  t.set_meta("alloc_ratio", s.model.alloc_ratio);
  std::ostringstream cov;
  for (std::size_t i = 0; i < s.model.covariates.gens.size(); ++i) {
    const auto& g = s.model.covariates.gens[i];
    if (i) cov << ' ';
    switch (g.type) {
      case CovariateGenerator::Type::Bernoulli:
        cov << "bernoulli:" << format_double(g.p1);
        break;
      case CovariateGenerator::Type::Normal:
        cov << "normal:" << format_double(g.p1) << ':' << format_double(g.p2);
        break;
      case CovariateGenerator::Type::SquareOf:
        cov << "square:" << g.source;
        break;
    }
  }
  t.set_meta("covariates", cov.str());
}

CovariateSpec covariates_from_string(const std::string& text) {
  CovariateSpec spec;
  spec.gens.clear();
  std::istringstream in(text);
  std::string tok;
  while (in >> tok) {
    CovariateGenerator g;
    std::replace(tok.begin(), tok.end(), ':', ' ');
    std::istringstream ts(tok);
    std::string name;
    ts >> name;
    if (name == "bernoulli") {
      g.type = CovariateGenerator::Type::Bernoulli;
      ts >> g.p1;
    } else if (name == "normal") {
      g.type = CovariateGenerator::Type::Normal;
      ts >> g.p1 >> g.p2;
    } else if (name == "square") {
      g.type = CovariateGenerator::Type::SquareOf;
      ts >> g.source;
    } else {
      throw SchemaError("unknown covariate generator: " + name);
    }
    spec.gens.push_back(g);
  }
  return spec;
}

Scenario scenario_from_meta(const TextTable& t) {
  Scenario s;
  s.key = t.get_meta("key");
  s.model.kind = model_kind_from_string(t.get_meta("model"));
  s.analysis = model_kind_from_string(t.get_meta("analysis"));
  s.n = static_cast<int>(t.get_meta_long("n"));
  s.psi0 = t.get_meta_double("psi0");
  s.estimand = estimand_from_string(t.get_meta("estimand"));
  s.direction = direction_from_string(t.get_meta("direction"));
  s.M = static_cast<int>(t.get_meta_long("M"));
  s.model.eta = t.get_meta_double("eta");
  std::istringstream beta(t.get_meta("beta"));
  double v;
  s.model.beta.clear();
  while (beta >> v) s.model.beta.push_back(v);
  s.model.alloc_ratio = t.get_meta_double("alloc_ratio");
  s.model.covariates = covariates_from_string(t.get_meta("covariates"));
  return s;
}

}  // namespace

void save_tau_sample(const TauSample& sample, const std::string& path) {
  TextTable t;
  t.kind = "tau-sample";
  scenario_to_meta(sample.scenario, t);
  t.set_meta("seed", static_cast<long>(sample.meta.seed));
  t.set_meta("stream", static_cast<long>(sample.meta.stream_id));
  t.set_meta("method", to_string(sample.meta.method));
  t.set_meta("failures", static_cast<long>(sample.meta.failures));
  t.set_meta("separation_flags",
             static_cast<long>(sample.meta.separation_flags));
  t.columns = {"tau"};
  t.rows.reserve(sample.taus.size());
  for (double tau : sample.taus) t.rows.push_back({tau});
  t.save(path);
}

TauSample load_tau_sample(const std::string& path) {
  TextTable t = TextTable::load(path);
  if (t.kind != "tau-sample")
    throw SchemaError(path + ": expected a tau-sample table");
  TauSample s;
  s.scenario = scenario_from_meta(t);
  s.meta.seed = static_cast<std::uint64_t>(t.get_meta_long("seed"));
  s.meta.stream_id = static_cast<std::uint64_t>(t.get_meta_long("stream"));
  s.meta.method = fit_method_from_string(t.get_meta("method"));
  s.meta.failures = static_cast<int>(t.get_meta_long("failures"));
  s.meta.separation_flags =
      static_cast<int>(t.get_meta_long("separation_flags"));
  s.taus = t.column("tau");
  return s;
}

void save_manifest(const Manifest& m, const std::string& path) {
  TextTable t;
  t.kind = "manifest";
  t.set_meta("seed", static_cast<long>(m.seed));
  t.set_meta("method", m.method);
  t.id_column = "file";
  t.columns = {"n", "M", "failures", "separation_flags"};
  for (const auto& e : m.entries) {
    t.ids.push_back(e.file);
    t.rows.push_back({e.n, e.m, e.failures, e.separation_flags});
  }
  // Scenario keys ride along as a second id-like metadata list.
  std::ostringstream keys;
  for (std::size_t i = 0; i < m.entries.size(); ++i) {
    if (i) keys << ' ';
    keys << m.entries[i].key;
  }
  t.set_meta("keys", keys.str());
  t.save(path);
}

Manifest load_manifest(const std::string& path) {
  TextTable t = TextTable::load(path);
  if (t.kind != "manifest") throw SchemaError(path + ": expected a manifest");
  Manifest m;
  m.seed = static_cast<std::uint64_t>(t.get_meta_long("seed"));
  m.method = t.get_meta("method");
  std::istringstream keys(t.get_meta("keys"));
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    ManifestEntry e;
    e.file = t.ids.at(i);
    if (!(keys >> e.key)) throw SchemaError(path + ": manifest keys truncated");
    e.n = t.rows[i][0];
    e.m = t.rows[i][1];
    e.failures = t.rows[i][2];
    e.separation_flags = t.rows[i][3];
    m.entries.push_back(std::move(e));
  }
  return m;
}

std::vector<TauSample> load_manifest_samples(const Manifest& m,
                                             const std::string& dir) {
  std::vector<TauSample> out;
  for (const auto& e : m.entries) {
    std::filesystem::path p = std::filesystem::path(dir) / e.file;
    if (!std::filesystem::exists(p))
      throw IoError("manifest references missing file: " + p.string());
    TauSample s = load_tau_sample(p.string());
    if (s.scenario.key != e.key || s.scenario.n != static_cast<int>(e.n) ||
        s.scenario.M != static_cast<int>(e.m))
      throw SchemaError("manifest entry does not match file header: " + e.file);
    out.push_back(std::move(s));
  }
  return out;
}

void save_quantile_matrix(const QuantileMatrix& qm, const std::string& path) {
  TextTable t;
  t.kind = "quantile-matrix";
  std::ostringstream probs;
  for (std::size_t j = 0; j < qm.grid.probs.size(); ++j) {
    if (j) probs << ' ';
    probs << format_double(qm.grid.probs[j]);
  }
  t.set_meta("grid", probs.str());
  t.id_column = "key";
  t.columns = {"n", "delta"};
  for (int j = 0; j < qm.grid.size(); ++j)
    t.columns.push_back("q" + std::to_string(j));
  for (const auto& row : qm.rows) {
    t.ids.push_back(row.key);
    std::vector<double> r = {row.n, row.delta};
    r.insert(r.end(), row.q.begin(), row.q.end());
    t.rows.push_back(std::move(r));
  }
  t.save(path);
}

QuantileMatrix load_quantile_matrix(const std::string& path) {
  TextTable t = TextTable::load(path);
  if (t.kind != "quantile-matrix")
    throw SchemaError(path + ": expected a quantile-matrix table");
  QuantileMatrix qm;
  std::istringstream probs(t.get_meta("grid"));
  double p;
  while (probs >> p) qm.grid.probs.push_back(p);
  qm.grid.validate();
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    QuantileRow row;
    row.key = t.ids.at(i);
    row.n = t.rows[i][0];
    row.delta = t.rows[i][1];
    row.q.assign(t.rows[i].begin() + 2, t.rows[i].end());
    qm.rows.push_back(std::move(row));
  }
  return qm;
}

void save_stage1(const Stage1Posterior& s1, const std::string& path) {
  TextTable t;
  t.kind = "stage1-posterior";
  t.set_meta("hypothesis", s1.hypothesis == Hypothesis::Null ? "null" : "alt");
  t.set_meta("asymmetric", s1.asymmetric ? "true" : "false");
  t.set_meta("sigma_eps", s1.sigma_eps);
  t.id_column = "key";
  t.columns = {"n", "delta", "rhat", "converged", "log_a"};
  if (s1.asymmetric) t.columns.push_back("log_b");
  for (const auto& e : s1.entries) {
    for (std::size_t d = 0; d < e.log_a.size(); ++d) {
      t.ids.push_back(e.key);
      std::vector<double> r = {e.n, e.delta, e.rhat, e.converged ? 1.0 : 0.0,
                               e.log_a[d]};
      if (s1.asymmetric) r.push_back(e.log_b.at(d));
      t.rows.push_back(std::move(r));
    }
  }
  t.save(path);
}

Stage1Posterior load_stage1(const std::string& path) {
  TextTable t = TextTable::load(path);
  if (t.kind != "stage1-posterior")
    throw SchemaError(path + ": expected a stage1-posterior table");
  Stage1Posterior s1;
  s1.hypothesis =
      t.get_meta("hypothesis") == "null" ? Hypothesis::Null : Hypothesis::Alt;
  s1.asymmetric = t.get_meta("asymmetric") == "true";
  s1.sigma_eps = t.get_meta_double("sigma_eps");
  Stage1Entry* cur = nullptr;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const std::string& key = t.ids.at(i);
    if (!cur || cur->key != key) {
      s1.entries.emplace_back();
      cur = &s1.entries.back();
      cur->key = key;
      cur->n = t.rows[i][0];
      cur->delta = t.rows[i][1];
      cur->rhat = t.rows[i][2];
      cur->converged = t.rows[i][3] != 0.0;
    }
    cur->log_a.push_back(t.rows[i][4]);
    if (s1.asymmetric) cur->log_b.push_back(t.rows[i][5]);
  }
  return s1;
}

namespace {

void save_hyper(const HyperDraws& h, const std::string& c1,
                const std::string& c2, const std::string& sigma,
                TextTable& t) {
  std::size_t base = t.columns.size();
  t.columns.push_back(c1);
  t.columns.push_back(c2);
  t.columns.push_back(sigma);
  if (t.rows.empty()) t.rows.resize(h.draws.rows());
  if (static_cast<long>(t.rows.size()) != h.draws.rows())
    throw SchemaError("hyper draw blocks of different length");
  for (long i = 0; i < h.draws.rows(); ++i) {
    t.rows[i].resize(base + 3);
    t.rows[i][base] = h.draws(i, 0);
    t.rows[i][base + 1] = h.draws(i, 1);
    t.rows[i][base + 2] = h.draws(i, 2);
  }
}

HyperDraws load_hyper(const TextTable& t, const std::string& c1,
                      const std::string& c2, const std::string& sigma) {
  HyperDraws h;
  int i1 = t.column_index(c1), i2 = t.column_index(c2),
      i3 = t.column_index(sigma);
  h.draws.resize(static_cast<long>(t.rows.size()), 3);
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    h.draws(static_cast<long>(r), 0) = t.rows[r][i1];
    h.draws(static_cast<long>(r), 1) = t.rows[r][i2];
    h.draws(static_cast<long>(r), 2) = t.rows[r][i3];
  }
  return h;
}

void diag_meta(const HyperDraws& h, const std::string& prefix, TextTable& t) {
  std::ostringstream rhat, ess;
  for (std::size_t i = 0; i < h.rhat.size(); ++i) {
    if (i) rhat << ' ';
    rhat << format_double(h.rhat[i]);
  }
  for (std::size_t i = 0; i < h.ess.size(); ++i) {
    if (i) ess << ' ';
    ess << format_double(h.ess[i]);
  }
  t.set_meta(prefix + "rhat", rhat.str());
  t.set_meta(prefix + "ess", ess.str());
  t.set_meta(prefix + "warning", h.convergence_warning ? "true" : "false");
}

void diag_from_meta(const TextTable& t, const std::string& prefix,
                    HyperDraws& h) {
  std::istringstream rhat(t.get_meta(prefix + "rhat"));
  std::istringstream ess(t.get_meta(prefix + "ess"));
  double v;
  while (rhat >> v) h.rhat.push_back(v);
  while (ess >> v) h.ess.push_back(v);
  h.convergence_warning = t.get_meta(prefix + "warning") == "true";
}

}  // namespace

void save_null_posterior(const NullShapePosterior& m, const std::string& path) {
  TextTable t;
  t.kind = "null-shape-posterior";
  t.set_meta("asymmetric", m.b ? "true" : "false");
  diag_meta(m.a, "a_", t);
  save_hyper(m.a, "alpha1", "alpha2", "sigma0", t);
  if (m.b) {
    diag_meta(*m.b, "b_", t);
    save_hyper(*m.b, "alpha1_b", "alpha2_b", "sigma0_b", t);
  }
  t.save(path);
}

NullShapePosterior load_null_posterior(const std::string& path) {
  TextTable t = TextTable::load(path);
  if (t.kind != "null-shape-posterior")
    throw SchemaError(path + ": expected a null-shape-posterior table");
  NullShapePosterior m;
  m.a = load_hyper(t, "alpha1", "alpha2", "sigma0");
  diag_from_meta(t, "a_", m.a);
  if (t.get_meta("asymmetric") == "true") {
    HyperDraws b = load_hyper(t, "alpha1_b", "alpha2_b", "sigma0_b");
    diag_from_meta(t, "b_", b);
    m.b = std::move(b);
  }
  return m;
}

void save_alt_posterior(const AltShapePosterior& m, const std::string& path) {
  TextTable t;
  t.kind = "alt-shape-posterior";
  diag_meta(m.phi, "phi_", t);
  save_hyper(m.phi, "phi1", "phi2", "sigma1", t);
  t.save(path);
}

AltShapePosterior load_alt_posterior(const std::string& path) {
  TextTable t = TextTable::load(path);
  if (t.kind != "alt-shape-posterior")
    throw SchemaError(path + ": expected an alt-shape-posterior table");
  AltShapePosterior m;
  m.phi = load_hyper(t, "phi1", "phi2", "sigma1");
  diag_from_meta(t, "phi_", m.phi);
  return m;
}

std::string oc_csv(const std::vector<OCEstimate>& estimates) {
  std::ostringstream os;
  os << "kind,n,psi,u,median,lo,hi,K\n";
  for (const auto& e : estimates) {
    os << OCEstimate::kind_name(e.kind) << ',' << format_double(e.n) << ',';
    if (e.psi) os << format_double(*e.psi);
    os << ',' << format_double(e.u) << ',' << format_double(e.summary.median)
       << ',' << format_double(e.summary.lo) << ','
       << format_double(e.summary.hi) << ',' << e.K << '\n';
  }
  return os.str();
}

void save_oc_csv(const std::vector<OCEstimate>& estimates,
                 const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path);
  f << oc_csv(estimates);
  if (!f) throw IoError("write failed: " + path);
}

}  // namespace taushape
