// taushape: operating characteristics of Bayesian trial decision rules via
// beta shape models fitted to simulated sampling distributions.
//
// Subcommands: simulate, fit, oc, ssd, validate.
// Exit codes: 0 success, 2 schema error, 3 insufficient design,
//             4 diagnostics failure, 5 IO error.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "taushape/config.hpp"
#include "taushape/errors.hpp"
#include "taushape/pipeline.hpp"

namespace {

constexpr int kExitSchema = 2;
constexpr int kExitInsufficient = 3;
constexpr int kExitDiagnostics = 4;
constexpr int kExitIo = 5;

struct GlobalOpts {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<int> threads;
};

taushape::RunConfig load(const GlobalOpts& g) {
  taushape::RunConfig cfg = taushape::load_config(g.config);
  if (g.seed) cfg.seed = *g.seed;
  if (!g.out.empty()) cfg.out = g.out;
  if (g.threads) cfg.threads = *g.threads;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulation-assisted operating characteristics for Bayesian trial designs"};
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--config", g.config, "path to the JSON run configuration")
      ->required();
  app.add_option("--seed", g.seed, "override the config seed");
  app.add_option("--out", g.out, "override the config output directory");
  app.add_option("--threads", g.threads, "worker threads");

  CLI::App* cmd_simulate =
      app.add_subcommand("simulate", "simulate scenarios into tau files");
  CLI::App* cmd_fit =
      app.add_subcommand("fit", "fit the shape models to simulated taus");
  CLI::App* cmd_oc = app.add_subcommand(
      "oc", "evaluate type I error / power / assurance from fitted models");
  CLI::App* cmd_ssd = app.add_subcommand(
      "ssd", "smallest sample size reaching the assurance target");
  CLI::App* cmd_validate = app.add_subcommand(
      "validate", "compare the fitted pipeline against the conjugate oracle");

  CLI11_PARSE(app, argc, argv);

  try {
    taushape::RunConfig cfg = load(g);
    if (cmd_simulate->parsed()) {
      taushape::Manifest manifest = taushape::run_simulate(cfg, cfg.out);
      std::cout << "simulated " << manifest.entries.size()
                << " scenario(s) into " << cfg.out << '\n';
      for (const auto& e : manifest.entries)
        std::cout << "  " << e.file << "  n=" << e.n << " M=" << e.m
                  << " failures=" << e.failures << '\n';
    } else if (cmd_fit->parsed()) {
      taushape::FitOutputs fit = taushape::run_fit(cfg, cfg.out);
      std::cout << "quantile matrix: " << fit.matrix.rows.size() << " row(s)\n";
      if (fit.null_model)
        std::cout << "null shape model fitted ("
                  << fit.null_model->a.size() << " hyper draws)\n";
      if (fit.alt_model)
        std::cout << "alternative shape model fitted ("
                  << fit.alt_model->phi.size() << " hyper draws)\n";
      for (const auto& w : fit.warnings) std::cout << "warning: " << w << '\n';
      if (!fit.diagnostics_ok) {
        std::cerr << "stage-2 split-Rhat exceeded 1.05\n";
        return kExitDiagnostics;
      }
    } else if (cmd_oc->parsed()) {
      taushape::OcOutputs oc = taushape::run_oc(cfg, cfg.out);
      for (const auto& f : oc.files) std::cout << "wrote " << f << '\n';
      for (const auto& w : oc.warnings) std::cout << "warning: " << w << '\n';
      for (const auto& c : oc.crossings)
        std::cout << "assurance target reached at n = " << c.second
                  << " under prior " << c.first << '\n';
    } else if (cmd_ssd->parsed()) {
      taushape::SampleSizeResult res = taushape::run_ssd(cfg, cfg.out);
      std::cout << "smallest n with assurance >= target: " << res.n << '\n';
      for (const auto& [n, med] : res.evaluations)
        std::cout << "  n=" << n << " assurance=" << med << '\n';
    } else if (cmd_validate->parsed()) {
      taushape::ConjugateOracleSpec spec;
      spec.m_iterations = cfg.validate.m_iterations;
      spec.u = cfg.validate.u;
      spec.control_rate = cfg.validate.control_rate;
      taushape::ValidationReport report =
          taushape::validate_conjugate(spec, cfg.fit, cfg.seed, cfg.threads);
      std::cout << taushape::report_to_string(report);
      if (!report.pass) return 1;
    }
    return 0;
  } catch (const taushape::SchemaError& e) {
    std::cerr << "schema error: " << e.what() << '\n';
    return kExitSchema;
  } catch (const taushape::InsufficientDesign& e) {
    std::cerr << "insufficient design: " << e.what() << '\n';
    return kExitInsufficient;
  } catch (const taushape::IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return kExitIo;
  } catch (const taushape::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
