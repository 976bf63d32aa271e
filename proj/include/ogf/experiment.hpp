#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ogf/attachment.hpp"
#include "ogf/common.hpp"
#include "ogf/datagen.hpp"
#include "ogf/learners.hpp"
#include "ogf/metrics.hpp"

namespace ogf {

enum class LearnerKind {
  Deterministic,        // attachment known before prediction
  Stochastic,           // uniform-rule model, attachment revealed after
  Adaptive,             // ensemble dictionaries with learned combiners
  PredictionCorrection, // stochastic step then deterministic correction
  Batch,                // hindsight least-squares filter
  Pretrained            // frozen pre-trained filter
};

LearnerKind learner_kind_from_string(const std::string& name);
std::string to_string(LearnerKind kind);

/// Everything needed to run one learner over one stream.
struct LearnerConfig {
  LearnerKind kind = LearnerKind::Deterministic;
  HyperParams hp;
  int steps_per_arrival = 1;
  double rule_scale = 1.0;          // expected edge count c_e of the model rules
  bool freeze_model_weight = false;  // pin the stochastic edge weight at the G_0 median
  std::vector<AttachmentRule> ensemble_rules;  // empty -> the five canonical rules
  std::uint64_t seed = 0;            // ensemble weight draws
  bool pretrain_init = true;         // false -> h(0) = 0
};

/// Which steps the batch comparator is fit on and scored over.
enum class ComparatorWindow { None, Train, Full };

struct RunTrace {
  std::vector<StepRecord> records;
  std::vector<Vector> filters;           // h(t) after each step
  Vector initial_filter;                 // h(0)
  double ball_radius = 0.0;              // resolved energy-ball radius
  bool diverged = false;
  Index diverged_at = -1;

  // Populated when a comparator window was requested.
  Vector batch_filter;
  std::vector<double> comparator_losses;  // deterministic loss of h* per window step

  // Run-wide maxima for constraint checks.
  double max_filter_norm = 0.0;
  double max_combiner_simplex_error = 0.0;

  // Final ensemble combiners (adaptive learner only).
  Vector final_m;
  Vector final_n;

  std::vector<double> online_losses(Index count = -1) const;
  std::vector<double> predictions() const;
  std::vector<double> truths() const;
};

/// Replays the stream through one learner. Divergence is recorded on the
/// trace, never propagated.
RunTrace run_learner(const NodeStream& stream, const LearnerConfig& cfg,
                     ComparatorWindow window = ComparatorWindow::None);

/// The five rules used by the adaptive learner when none are configured.
std::vector<AttachmentRule> canonical_rules(double scale);

// --- analytic bound audits ----------------------------------------------------

enum class BoundKind { Deterministic, Stochastic, Adaptive };

struct AuditStep {
  Index t = 0;
  double regret = 0.0;
  double bound = 0.0;
  double slack = 0.0;
  std::vector<double> terms;
};

struct AuditResult {
  std::vector<AuditStep> steps;
  double min_slack = 0.0;
  Index violations = 0;
  Index first_violation = -1;
  RegretBoundParams final_params;  // constants at the end of the run
};

/// Runs the learner plus a shadow deterministic learner on the same data,
/// instantiates the bound constants from running maxima, and evaluates
/// regret against the analytic bound at every step.
AuditResult audit_run(const NodeStream& stream, const LearnerConfig& cfg, BoundKind bound);

void save_audit_csv(const AuditResult& audit, const std::string& path);

// --- experiment orchestration ---------------------------------------------------

struct SweepAxes {
  std::vector<double> etas{1e-1};
  std::vector<double> mus{1e-3};
  std::vector<Index> orders{5};
};

struct ExperimentConfig {
  bool synthetic = true;
  SyntheticConfig synth;
  std::string stream_path;  // used when synthetic == false

  std::vector<LearnerConfig> learners;
  SweepAxes sweep;
  Index realizations = 10;
  std::uint64_t seed = 0;
  std::string output_dir;
  int max_workers = 2;
  // Train NRMSE for hyperparameter selection is scored over the last
  // fraction of the train prefix, excluding the warm-up.
  double selection_fraction = 0.5;
  bool emit_eta_sweep = false;
  bool emit_order_sweep = false;

  void validate() const;
};

struct RunSummary {
  LearnerKind kind = LearnerKind::Deterministic;
  double eta = 0.0, mu = 0.0;
  Index order = 0;
  Index realization = 0;
  double train_nrmse = 0.0;   // selection window
  double test_nrmse = 0.0;
  double train_regret = 0.0;  // normalized regret over the train prefix
  bool diverged = false;
  std::vector<double> regret_series;  // normalized regret per train step
};

struct LearnerSummary {
  LearnerKind kind = LearnerKind::Deterministic;
  double eta = 0.0, mu = 0.0;
  Index order = 0;
  double mean_test_nrmse = 0.0;
  double std_test_nrmse = 0.0;
  double mean_train_regret = 0.0;
  Index diverged_runs = 0;
  std::vector<double> test_nrmse_per_realization;
  std::vector<double> train_regret_per_realization;
  std::vector<std::vector<double>> regret_series_per_realization;
};

struct ExperimentResult {
  std::vector<LearnerSummary> summaries;           // one per learner, selected hp
  std::vector<RunSummary> all_runs;                // every (hp, realization) run
};

/// Full protocol: per learner and hyperparameter combination, pretrain,
/// stream the train prefix, lock the combination minimizing mean train
/// NRMSE, and evaluate the test suffix. Emits per-run CSVs and the summary
/// tables when `output_dir` is set.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Builds the stream for one realization (synthetic generation or load).
NodeStream realize_stream(const ExperimentConfig& config, Index realization);

/// Re-aggregates summary.csv from the per-run record CSVs in `output_dir`
/// and returns true when the recomputation matches the stored table.
bool verify_bundle(const std::string& output_dir);

}  // namespace ogf
