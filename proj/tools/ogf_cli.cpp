// Experiment runner for online graph filtering over expanding graphs.
//
// Subcommands:
//   generate  synthesize an expanding-graph node stream
//   run       online-learning experiments with sweeps and realizations
//   audit     empirical regret vs the analytic bound, step by step
//   report    re-aggregate summary statistics from an emitted bundle

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ogf/datagen.hpp"
#include "ogf/experiment.hpp"
#include "ogf/io.hpp"

using nlohmann::json;

namespace {

struct RunFlags {
  std::string target = "filter";
  std::string stream_path;
  std::string learners = "deterministic,stochastic,adaptive,pc,batch,pretrained";
  std::vector<double> etas;
  std::vector<double> mus;
  std::vector<long> orders;
  long n0 = 100;
  double edge_prob = 0.2;
  long t_total = 1000;
  long edges_per_node = 5;
  long bandwidth = 3;
  double kernel_variance = 10.0;
  long gen_filter_order = 5;
  bool raw_weights = false;
  long realizations = 10;
  std::uint64_t seed = 0;
  std::string output;
  std::string config_path;
  int workers = 2;
  bool eta_sweep = false;
  bool k_sweep = false;
};

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto pos = text.find(',', start);
    if (pos == std::string::npos) {
      out.push_back(text.substr(start));
      break;
    }
    out.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::vector<double> log_grid(double lo, double hi, int points) {
  std::vector<double> out;
  for (int i = 0; i < points; ++i) {
    const double f = points == 1 ? 0.0 : static_cast<double>(i) / (points - 1);
    out.push_back(lo * std::pow(hi / lo, f));
  }
  return out;
}

void overlay_config(RunFlags& flags) {
  if (flags.config_path.empty()) return;
  std::ifstream in(flags.config_path);
  if (!in) throw ogf::ConfigError("cannot open config file " + flags.config_path);
  json cfg;
  in >> cfg;
  // The config file takes precedence over command-line flags.
  if (cfg.contains("target")) flags.target = cfg["target"].get<std::string>();
  if (cfg.contains("stream_path")) flags.stream_path = cfg["stream_path"].get<std::string>();
  if (cfg.contains("learners")) flags.learners = cfg["learners"].get<std::string>();
  if (cfg.contains("etas")) flags.etas = cfg["etas"].get<std::vector<double>>();
  if (cfg.contains("mus")) flags.mus = cfg["mus"].get<std::vector<double>>();
  if (cfg.contains("orders")) flags.orders = cfg["orders"].get<std::vector<long>>();
  if (cfg.contains("n0")) flags.n0 = cfg["n0"].get<long>();
  if (cfg.contains("edge_prob")) flags.edge_prob = cfg["edge_prob"].get<double>();
  if (cfg.contains("t_total")) flags.t_total = cfg["t_total"].get<long>();
  if (cfg.contains("edges_per_node")) flags.edges_per_node = cfg["edges_per_node"].get<long>();
  if (cfg.contains("bandwidth")) flags.bandwidth = cfg["bandwidth"].get<long>();
  if (cfg.contains("kernel_variance")) flags.kernel_variance = cfg["kernel_variance"].get<double>();
  if (cfg.contains("gen_filter_order")) flags.gen_filter_order = cfg["gen_filter_order"].get<long>();
  if (cfg.contains("raw_weights")) flags.raw_weights = cfg["raw_weights"].get<bool>();
  if (cfg.contains("realizations")) flags.realizations = cfg["realizations"].get<long>();
  if (cfg.contains("output")) flags.output = cfg["output"].get<std::string>();
  if (cfg.contains("workers")) flags.workers = cfg["workers"].get<int>();
}

ogf::SyntheticConfig synth_from(const RunFlags& flags) {
  ogf::SyntheticConfig synth;
  synth.n0 = flags.n0;
  synth.edge_prob = flags.edge_prob;
  synth.t_total = flags.t_total;
  synth.edges_per_node = flags.edges_per_node;
  synth.bandwidth = flags.bandwidth;
  synth.target_kind = ogf::target_kind_from_string(flags.target);
  synth.kernel_variance = flags.kernel_variance;
  synth.gen_filter_order = flags.gen_filter_order;
  synth.unit_spectral_radius = !flags.raw_weights;
  synth.seed = flags.seed;
  return synth;
}

ogf::ExperimentConfig experiment_from(const RunFlags& flags) {
  ogf::ExperimentConfig config;
  config.synthetic = flags.stream_path.empty();
  if (config.synthetic) {
    config.synth = synth_from(flags);
  } else {
    config.stream_path = flags.stream_path;
  }
  for (const auto& name : split_list(flags.learners)) {
    ogf::LearnerConfig lc;
    lc.kind = ogf::learner_kind_from_string(name);
    config.learners.push_back(lc);
  }
  config.sweep.etas = flags.etas.empty() ? log_grid(1e-5, 1e-1, 5) : flags.etas;
  config.sweep.mus = flags.mus.empty() ? std::vector<double>{1e-3} : flags.mus;
  if (flags.orders.empty()) {
    config.sweep.orders = {5};
  } else {
    config.sweep.orders.assign(flags.orders.begin(), flags.orders.end());
  }
  config.realizations = flags.realizations;
  config.seed = flags.seed;
  config.output_dir = flags.output;
  config.max_workers = flags.workers;
  config.emit_eta_sweep = flags.eta_sweep;
  config.emit_order_sweep = flags.k_sweep;
  return config;
}

int cmd_generate(const RunFlags& flags) {
  ogf::SyntheticConfig synth = synth_from(flags);
  const ogf::GeneratedBase base = ogf::generate_base(synth);
  const ogf::NodeStream stream = ogf::generate_stream(synth, base);
  ogf::save_stream(stream, flags.output);
  std::printf("wrote %ld-step %s stream (n0=%ld) to %s\n",
              static_cast<long>(stream.length()), flags.target.c_str(),
              static_cast<long>(synth.n0), flags.output.c_str());
  return 0;
}

int cmd_run(const RunFlags& flags) {
  const ogf::ExperimentConfig config = experiment_from(flags);
  const ogf::ExperimentResult result = ogf::run_experiment(config);
  std::printf("%-14s %8s %8s %4s %12s %12s %9s\n", "learner", "eta", "mu", "K",
              "mean NRMSE", "std NRMSE", "diverged");
  for (const auto& s : result.summaries) {
    std::printf("%-14s %8g %8g %4ld %12.5g %12.5g %9ld\n", ogf::to_string(s.kind).c_str(),
                s.eta, s.mu, static_cast<long>(s.order), s.mean_test_nrmse,
                s.std_test_nrmse, static_cast<long>(s.diverged_runs));
  }
  return 0;
}

int cmd_audit(const RunFlags& flags, const std::string& learner, double eta, double mu,
              long order, bool pretrain_init) {
  ogf::SyntheticConfig synth = synth_from(flags);
  const ogf::GeneratedBase base = ogf::generate_base(synth);
  const ogf::NodeStream stream = ogf::generate_stream(synth, base);

  ogf::LearnerConfig cfg;
  cfg.kind = ogf::learner_kind_from_string(learner);
  cfg.hp.eta = eta;
  cfg.hp.mu = mu;
  cfg.hp.order = order;
  cfg.pretrain_init = pretrain_init;
  cfg.seed = ogf::derive_seed(flags.seed, 0xa0d17ULL);

  ogf::BoundKind bound;
  switch (cfg.kind) {
    case ogf::LearnerKind::Deterministic: bound = ogf::BoundKind::Deterministic; break;
    case ogf::LearnerKind::Stochastic: bound = ogf::BoundKind::Stochastic; break;
    case ogf::LearnerKind::Adaptive: bound = ogf::BoundKind::Adaptive; break;
    default:
      std::fprintf(stderr, "audit supports deterministic, stochastic, adaptive\n");
      return 2;
  }
  const ogf::AuditResult audit = ogf::audit_run(stream, cfg, bound);
  if (!flags.output.empty()) ogf::save_audit_csv(audit, flags.output);
  std::printf("audited %zu steps: min slack %.6g, violations %ld\n", audit.steps.size(),
              audit.min_slack, static_cast<long>(audit.violations));
  if (audit.violations > 0) {
    const auto& bad = audit.steps[static_cast<std::size_t>(audit.first_violation - 1)];
    std::fprintf(stderr, "first violation at t=%ld: regret %.9g > bound %.9g\n",
                 static_cast<long>(bad.t), bad.regret, bad.bound);
    return 1;
  }
  return 0;
}

int cmd_report(const std::string& dir) {
  const bool ok = ogf::verify_bundle(dir);
  std::printf("bundle %s: summary %s\n", dir.c_str(),
              ok ? "recomputes exactly" : "MISMATCH");
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"online graph filtering over expanding graphs"};
  app.require_subcommand(1);

  RunFlags flags;

  auto add_synth_flags = [&](CLI::App* cmd) {
    cmd->add_option("--n0", flags.n0, "starting graph size");
    cmd->add_option("--edge-prob", flags.edge_prob, "ER edge probability");
    cmd->add_option("--t-total", flags.t_total, "incoming node count");
    cmd->add_option("--edges-per-node", flags.edges_per_node, "edges per incoming node");
    cmd->add_option("--bandwidth", flags.bandwidth, "Laplacian bandlimit of x0");
    cmd->add_option("--target", flags.target, "target kind: filter|wmean|kernel");
    cmd->add_option("--kernel-variance", flags.kernel_variance, "Gaussian kernel variance");
    cmd->add_option("--gen-filter-order", flags.gen_filter_order, "generator filter order");
    cmd->add_flag("--raw-weights", flags.raw_weights,
                  "keep raw uniform weights (skip unit-spectral-radius rescale)");
  };

  auto* gen = app.add_subcommand("generate", "synthesize a node stream");
  add_synth_flags(gen);
  gen->add_option("--seed", flags.seed, "RNG seed")->required();
  gen->add_option("-o,--output", flags.output, "output directory")->required();

  auto* run = app.add_subcommand("run", "run online-learning experiments");
  add_synth_flags(run);
  run->add_option("--stream", flags.stream_path, "load a stream bundle instead of generating");
  run->add_option("--learners", flags.learners, "comma list of learners");
  run->add_option("--eta-grid", flags.etas, "learning-rate grid");
  run->add_option("--mu-grid", flags.mus, "regularization grid");
  run->add_option("--k-grid", flags.orders, "filter-order grid");
  run->add_option("--realizations", flags.realizations, "independent realizations");
  run->add_option("--seed", flags.seed, "master seed")->required();
  run->add_option("-o,--output", flags.output, "output directory for the result bundle");
  run->add_option("--workers", flags.workers, "worker threads");
  run->add_option("--config", flags.config_path, "JSON config file (overrides flags)");
  run->add_flag("--eta-sweep", flags.eta_sweep, "emit eta-sweep regret series");
  run->add_flag("--k-sweep", flags.k_sweep, "emit filter-order sweep table");

  std::string audit_learner = "deterministic";
  double audit_eta = 0.05, audit_mu = 1e-3;
  long audit_order = 5;
  bool audit_pretrain = false;
  auto* audit = app.add_subcommand("audit", "validate a regret bound on a synthetic run");
  add_synth_flags(audit);
  audit->add_option("--seed", flags.seed, "RNG seed")->required();
  audit->add_option("--learner", audit_learner, "deterministic|stochastic|adaptive");
  audit->add_option("--eta", audit_eta, "learning rate");
  audit->add_option("--mu", audit_mu, "regularization weight");
  audit->add_option("--order", audit_order, "filter order");
  audit->add_flag("--pretrain", audit_pretrain, "pretrain h(0) instead of zero-init");
  audit->add_option("-o,--output", flags.output, "audit report CSV path");

  std::string report_dir;
  auto* report = app.add_subcommand("report", "re-aggregate an emitted result bundle");
  report->add_option("dir", report_dir, "bundle directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_generate(flags);
    if (run->parsed()) {
      overlay_config(flags);
      return cmd_run(flags);
    }
    if (audit->parsed()) {
      return cmd_audit(flags, audit_learner, audit_eta, audit_mu, audit_order,
                       audit_pretrain);
    }
    if (report->parsed()) return cmd_report(report_dir);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
