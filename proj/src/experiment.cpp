#include "ogf/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <numeric>
#include <thread>

#include <json.hpp>

#include "ogf/io.hpp"
#include "ogf/rng.hpp"

namespace ogf {

namespace {

using nlohmann::json;

void parallel_for(Index n, int workers, const std::function<void(Index)>& fn) {
  if (workers <= 1 || n <= 1) {
    for (Index i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<Index> next{0};
  std::mutex err_mutex;
  std::exception_ptr first_error;
  auto body = [&] {
    while (true) {
      const Index i = next.fetch_add(1);
      if (i >= n) break;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  const int count = static_cast<int>(std::min<Index>(workers, n));
  pool.reserve(static_cast<std::size_t>(count));
  for (int w = 0; w < count; ++w) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

double max_entry_weight(const AttachmentVector& a) {
  double m = 0.0;
  for (const auto& [i, w] : a.entries) m = std::max(m, w);
  return m;
}

double simplex_error(const Vector& v) {
  return std::max(std::abs(v.sum() - 1.0), std::max(0.0, -v.minCoeff()));
}

}  // namespace

LearnerKind learner_kind_from_string(const std::string& name) {
  if (name == "deterministic") return LearnerKind::Deterministic;
  if (name == "stochastic") return LearnerKind::Stochastic;
  if (name == "adaptive") return LearnerKind::Adaptive;
  if (name == "pc") return LearnerKind::PredictionCorrection;
  if (name == "batch") return LearnerKind::Batch;
  if (name == "pretrained") return LearnerKind::Pretrained;
  throw ConfigError("unknown learner: " + name);
}

std::string to_string(LearnerKind kind) {
  switch (kind) {
    case LearnerKind::Deterministic: return "deterministic";
    case LearnerKind::Stochastic: return "stochastic";
    case LearnerKind::Adaptive: return "adaptive";
    case LearnerKind::PredictionCorrection: return "pc";
    case LearnerKind::Batch: return "batch";
    case LearnerKind::Pretrained: return "pretrained";
  }
  return "unknown";
}

std::vector<AttachmentRule> canonical_rules(double scale) {
  return {{RuleKind::Degree, scale},
          {RuleKind::Betweenness, scale},
          {RuleKind::Eigenvector, scale},
          {RuleKind::Pagerank, scale},
          {RuleKind::Uniform, scale}};
}

std::vector<double> RunTrace::online_losses(Index count) const {
  const std::size_t n = count < 0 ? records.size()
                                  : std::min(records.size(), static_cast<std::size_t>(count));
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = records[i].loss;
  return out;
}

std::vector<double> RunTrace::predictions() const {
  std::vector<double> out(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) out[i] = records[i].prediction;
  return out;
}

std::vector<double> RunTrace::truths() const {
  std::vector<double> out(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) out[i] = records[i].truth;
  return out;
}

RunTrace run_learner(const NodeStream& stream, const LearnerConfig& cfg,
                     ComparatorWindow window) {
  stream.validate();
  HyperParams hp = cfg.hp;
  hp.validate();
  if (cfg.kind == LearnerKind::Pretrained) hp.eta = 0.0;

  RunTrace trace;

  Vector h0;
  if (cfg.pretrain_init) {
    HyperParams pre = hp;
    pre.ball_radius = 0.0;
    h0 = pretrain(stream.base_graph, stream.base_signal, pre);
    if (hp.ball_radius <= 0.0) hp.ball_radius = 10.0 * h0.norm();
    h0 = project_ball(h0, hp.ball_radius);
  } else {
    h0 = Vector::Zero(hp.order);
  }
  trace.initial_filter = h0;
  trace.ball_radius = hp.ball_radius;

  OnlineFilterState state{h0};
  AdaptiveState ada;
  EnsembleAttachment ens;
  Rng ens_rng(derive_seed(cfg.seed, 0xadaULL));
  if (cfg.kind == LearnerKind::Adaptive) {
    const auto rules =
        cfg.ensemble_rules.empty() ? canonical_rules(cfg.rule_scale) : cfg.ensemble_rules;
    double cap = stream.base_graph.max_edge_weight();
    if (cap <= 0.0) cap = 1.0;
    ens = make_ensemble(stream.base_graph, rules, cap, ens_rng);
    ada.h = h0;
    ada.m = ens.prob_combiner;
    ada.n = ens.weight_combiner;
  }
  const AttachmentRule uniform_rule{RuleKind::Uniform, cfg.rule_scale};
  const double frozen_weight =
      cfg.freeze_model_weight ? stream.base_graph.median_edge_weight() : 0.0;

  const Index T = stream.length();
  std::vector<Vector> det_features;
  det_features.reserve(static_cast<std::size_t>(T));

  ExpandingGraph graph = stream.base_graph;
  Vector signal = stream.base_signal;
  ShiftMatrix sm = build_shift_matrix(graph, signal, hp.order,
                                      graph.node_count() + T);

  trace.max_filter_norm = h0.norm();
  for (const auto& rec : stream.records) {
    const AttachmentVector& a = rec.attachment;
    det_features.push_back(backproject(a, sm));
    if (!trace.diverged && cfg.kind != LearnerKind::Batch) {
      try {
        StepOutcome out;
        switch (cfg.kind) {
          case LearnerKind::Deterministic:
          case LearnerKind::Pretrained:
            out = deterministic_step(state, a, sm, rec.value, hp);
            break;
          case LearnerKind::Stochastic: {
            const auto rp = rule_probabilities(uniform_rule, graph, frozen_weight);
            out = stochastic_step(state, rp.model, sm, rec.value, hp);
            break;
          }
          case LearnerKind::PredictionCorrection: {
            const auto rp = rule_probabilities(uniform_rule, graph, frozen_weight);
            out = prediction_correction_step(state, rp.model, a, sm, rec.value, hp);
            break;
          }
          case LearnerKind::Adaptive: {
            out = adaptive_step(ada, ens, sm, rec.value, hp, cfg.steps_per_arrival);
            trace.max_combiner_simplex_error =
                std::max({trace.max_combiner_simplex_error, simplex_error(ada.m),
                          simplex_error(ada.n)});
            break;
          }
          default:
            break;
        }
        out.record.t = rec.t;
        trace.records.push_back(out.record);
        const Vector& h = cfg.kind == LearnerKind::Adaptive ? ada.h : state.h;
        trace.filters.push_back(h);
        trace.max_filter_norm = std::max(trace.max_filter_norm, h.norm());
      } catch (const DivergenceError&) {
        trace.diverged = true;
        trace.diverged_at = rec.t;
      }
    }
    graph = expand(graph, a);
    sm = extend_shift_matrix(std::move(sm), graph, a, rec.value);
    signal.conservativeResize(signal.size() + 1);
    signal[signal.size() - 1] = rec.value;
    if (cfg.kind == LearnerKind::Adaptive && !trace.diverged) {
      ens = append_ensemble_row(ens, graph, ens_rng);
    }
  }
  if (cfg.kind == LearnerKind::Adaptive) {
    trace.final_m = ada.m;
    trace.final_n = ada.n;
  }

  const Index window_len = window == ComparatorWindow::Train ? stream.train_count
                           : window == ComparatorWindow::Full ? T
                                                              : 0;
  if (window_len > 0 || cfg.kind == LearnerKind::Batch) {
    const Index fit_len = cfg.kind == LearnerKind::Batch && window_len == 0
                              ? stream.train_count
                              : window_len;
    BatchSolver solver(hp.order, hp.mu);
    for (Index t = 0; t < fit_len; ++t) {
      solver.add(det_features[static_cast<std::size_t>(t)],
                 stream.records[static_cast<std::size_t>(t)].value);
    }
    Vector h_star = solver.solve();
    if (hp.ball_radius > 0.0) h_star = project_ball(h_star, hp.ball_radius);
    trace.batch_filter = h_star;
    const double reg = hp.mu * h_star.squaredNorm();
    trace.comparator_losses.reserve(static_cast<std::size_t>(window_len));
    for (Index t = 0; t < window_len; ++t) {
      const double r = det_features[static_cast<std::size_t>(t)].dot(h_star) -
                       stream.records[static_cast<std::size_t>(t)].value;
      trace.comparator_losses.push_back(0.5 * r * r + reg);
    }
  }

  if (cfg.kind == LearnerKind::Batch) {
    const Vector& h_star = trace.batch_filter;
    const double reg = hp.mu * h_star.squaredNorm();
    const double norm = h_star.norm();
    for (Index t = 0; t < T; ++t) {
      const double pred = det_features[static_cast<std::size_t>(t)].dot(h_star);
      const double r = pred - stream.records[static_cast<std::size_t>(t)].value;
      StepRecord record;
      record.t = t + 1;
      record.prediction = pred;
      record.truth = stream.records[static_cast<std::size_t>(t)].value;
      record.loss = 0.5 * r * r + reg;
      record.filter_norm = norm;
      trace.records.push_back(record);
      trace.filters.push_back(h_star);
    }
    trace.initial_filter = h_star;
    trace.max_filter_norm = norm;
  }
  return trace;
}

AuditResult audit_run(const NodeStream& stream, const LearnerConfig& cfg, BoundKind bound) {
  stream.validate();
  if ((bound == BoundKind::Deterministic && cfg.kind != LearnerKind::Deterministic) ||
      (bound == BoundKind::Stochastic && cfg.kind != LearnerKind::Stochastic) ||
      (bound == BoundKind::Adaptive && cfg.kind != LearnerKind::Adaptive)) {
    throw ConfigError("bound kind does not match learner kind");
  }
  HyperParams hp = cfg.hp;
  hp.validate();

  Vector h0;
  if (cfg.pretrain_init) {
    HyperParams pre = hp;
    pre.ball_radius = 0.0;
    h0 = pretrain(stream.base_graph, stream.base_signal, pre);
    if (hp.ball_radius <= 0.0) hp.ball_radius = 10.0 * h0.norm();
    h0 = project_ball(h0, hp.ball_radius);
  } else {
    h0 = Vector::Zero(hp.order);
  }

  OnlineFilterState main_state{h0};
  OnlineFilterState shadow{h0};
  AdaptiveState ada;
  EnsembleAttachment ens;
  Rng ens_rng(derive_seed(cfg.seed, 0xadaULL));
  if (cfg.kind == LearnerKind::Adaptive) {
    const auto rules =
        cfg.ensemble_rules.empty() ? canonical_rules(cfg.rule_scale) : cfg.ensemble_rules;
    double cap = stream.base_graph.max_edge_weight();
    if (cap <= 0.0) cap = 1.0;
    ens = make_ensemble(stream.base_graph, rules, cap, ens_rng);
    ada.h = h0;
    ada.m = ens.prob_combiner;
    ada.n = ens.weight_combiner;
  }
  const AttachmentRule uniform_rule{RuleKind::Uniform, cfg.rule_scale};
  const double frozen_weight =
      cfg.freeze_model_weight ? stream.base_graph.median_edge_weight() : 0.0;

  const Index T = stream.length();
  std::vector<Vector> det_features;
  std::vector<double> online, run_r, run_c, run_y, run_w, run_m, run_h;
  StochasticSeries stoch_series;
  AdaptiveSeries ada_series;

  ExpandingGraph graph = stream.base_graph;
  Vector signal = stream.base_signal;
  ShiftMatrix sm = build_shift_matrix(graph, signal, hp.order, graph.node_count() + T);

  double max_r = 0.0, max_c = 0.0, max_y = 0.0, max_w = 0.0, max_m = 0.0;
  double max_h = h0.norm();
  for (const auto& rec : stream.records) {
    const AttachmentVector& a = rec.attachment;
    const Vector bp = backproject(a, sm);
    det_features.push_back(bp);

    const Vector& h_main = cfg.kind == LearnerKind::Adaptive ? ada.h : main_state.h;
    max_c = std::max(max_c, bp.norm());
    max_y = std::max(max_y, filter_response(sm, h_main).norm());
    max_r = std::max({max_r, std::abs(bp.dot(h_main) - rec.value),
                      std::abs(bp.dot(shadow.h) - rec.value)});
    max_w = std::max(max_w, max_entry_weight(a));
    max_m = std::max(max_m, static_cast<double>(a.nnz()));
    max_h = std::max({max_h, h_main.norm(), shadow.h.norm()});
    const double dist = (h_main - shadow.h).norm();

    switch (cfg.kind) {
      case LearnerKind::Deterministic: {
        const StepOutcome out = deterministic_step(main_state, a, sm, rec.value, hp);
        online.push_back(out.record.loss);
        break;
      }
      case LearnerKind::Stochastic: {
        const auto rp = rule_probabilities(uniform_rule, graph, frozen_weight);
        max_w = std::max(max_w, rp.model.weights.maxCoeff());
        stoch_series.prob_norm_sq.push_back(rp.model.probs.squaredNorm());
        stoch_series.max_variance.push_back(
            (rp.model.probs.array() * (1.0 - rp.model.probs.array())).maxCoeff());
        stoch_series.filter_distance.push_back(dist);
        const StepOutcome out = stochastic_step(main_state, rp.model, sm, rec.value, hp);
        online.push_back(out.record.loss);
        break;
      }
      case LearnerKind::Adaptive: {
        max_w = std::max(max_w, ens.weight_dict.maxCoeff());
        ada_series.frob_sq.push_back(ens.prob_dict.squaredNorm());
        const Matrix gram = ens.prob_dict.transpose() * ens.prob_dict;
        Eigen::SelfAdjointEigenSolver<Matrix> eig(gram, Eigen::EigenvaluesOnly);
        ada_series.spectral_sq.push_back(eig.eigenvalues().maxCoeff());
        ada_series.max_row_norm.push_back(ens.prob_dict.rowwise().norm().maxCoeff());
        ada_series.filter_distance.push_back(dist);
        const StepOutcome out = adaptive_step(ada, ens, sm, rec.value, hp,
                                              cfg.steps_per_arrival);
        online.push_back(out.record.loss);
        break;
      }
      default:
        throw ConfigError("audit supports deterministic, stochastic, and adaptive learners");
    }
    if (bound != BoundKind::Deterministic) {
      deterministic_step(shadow, a, sm, rec.value, hp);
    }
    max_h = std::max({max_h,
                      (cfg.kind == LearnerKind::Adaptive ? ada.h : main_state.h).norm(),
                      shadow.h.norm()});

    run_r.push_back(max_r);
    run_c.push_back(max_c);
    run_y.push_back(max_y);
    run_w.push_back(max_w);
    run_m.push_back(max_m);
    run_h.push_back(max_h);

    graph = expand(graph, a);
    sm = extend_shift_matrix(std::move(sm), graph, a, rec.value);
    signal.conservativeResize(signal.size() + 1);
    signal[signal.size() - 1] = rec.value;
    if (cfg.kind == LearnerKind::Adaptive) ens = append_ensemble_row(ens, graph, ens_rng);
  }

  BatchSolver solver(hp.order, hp.mu);
  for (Index t = 0; t < T; ++t) {
    solver.add(det_features[static_cast<std::size_t>(t)],
               stream.records[static_cast<std::size_t>(t)].value);
  }
  Vector h_star = solver.solve();
  if (hp.ball_radius > 0.0) h_star = project_ball(h_star, hp.ball_radius);

  std::vector<double> comparator;
  const double reg = hp.mu * h_star.squaredNorm();
  for (Index t = 0; t < T; ++t) {
    const double r = det_features[static_cast<std::size_t>(t)].dot(h_star) -
                     stream.records[static_cast<std::size_t>(t)].value;
    comparator.push_back(0.5 * r * r + reg);
  }
  const std::vector<double> regret = normalized_regret({online, comparator});

  AuditResult result;
  result.min_slack = std::numeric_limits<double>::infinity();
  for (Index t = 1; t <= T; ++t) {
    const auto i = static_cast<std::size_t>(t - 1);
    RegretBoundParams params;
    params.residual_bound = run_r[i];
    params.feature_bound = run_c[i];
    params.response_bound = run_y[i];
    params.weight_cap = run_w[i];
    params.max_edges = run_m[i];
    params.filter_cap = run_h[i];
    params.eta = hp.eta;
    params.mu = hp.mu;
    params.comparator_norm = h_star.norm();

    AuditStep step;
    step.t = t;
    step.regret = regret[i];
    switch (bound) {
      case BoundKind::Deterministic:
        step.terms = bound_deterministic_terms(params, t);
        break;
      case BoundKind::Stochastic:
        step.terms = bound_stochastic_terms(params, stoch_series, t);
        break;
      case BoundKind::Adaptive:
        step.terms = bound_adaptive_terms(params, ada_series, t);
        break;
    }
    step.bound = std::accumulate(step.terms.begin(), step.terms.end(), 0.0);
    step.slack = step.bound - step.regret;
    if (step.slack < result.min_slack) result.min_slack = step.slack;
    if (step.slack < 0.0) {
      ++result.violations;
      if (result.first_violation < 0) result.first_violation = t;
    }
    result.steps.push_back(std::move(step));
    if (t == T) result.final_params = params;
  }
  return result;
}

void save_audit_csv(const AuditResult& audit, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  std::size_t n_terms = audit.steps.empty() ? 0 : audit.steps.front().terms.size();
  out << "t,regret,bound";
  for (std::size_t k = 0; k < n_terms; ++k) out << ",term" << (k + 1);
  out << ",slack\n";
  for (const auto& step : audit.steps) {
    out << step.t << ',' << format_double(step.regret) << ',' << format_double(step.bound);
    for (const double term : step.terms) out << ',' << format_double(term);
    out << ',' << format_double(step.slack) << '\n';
  }
}

void ExperimentConfig::validate() const {
  if (learners.empty()) throw ConfigError("no learners selected");
  if (sweep.etas.empty() || sweep.mus.empty() || sweep.orders.empty()) {
    throw ConfigError("sweep grids must be nonempty");
  }
  if (realizations < 1) throw ConfigError("need at least one realization");
  if (!(selection_fraction > 0.0 && selection_fraction <= 1.0)) {
    throw ConfigError("selection fraction must be in (0,1]");
  }
  if (synthetic) {
    synth.validate();
  } else if (stream_path.empty()) {
    throw ConfigError("either a synthetic config or a stream path is required");
  }
}

NodeStream realize_stream(const ExperimentConfig& config, Index realization) {
  if (!config.synthetic) return load_stream(config.stream_path);
  SyntheticConfig synth = config.synth;
  synth.seed = derive_seed(config.seed, static_cast<std::uint64_t>(realization));
  const GeneratedBase base = generate_base(synth);
  return generate_stream(synth, base);
}

namespace {

struct SelectionScores {
  double train_nrmse = std::numeric_limits<double>::quiet_NaN();
  double test_nrmse = std::numeric_limits<double>::quiet_NaN();
  double train_regret = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> regret_series;
  bool diverged = false;
};

SelectionScores score_run(const NodeStream& stream, const RunTrace& trace,
                          double selection_fraction) {
  SelectionScores scores;
  scores.diverged = trace.diverged;
  if (trace.diverged) return scores;
  const Index train = stream.train_count;
  const Index total = stream.length();
  const auto preds = trace.predictions();
  const auto truths = trace.truths();

  const Index sel_begin =
      train - static_cast<Index>(std::floor(selection_fraction * static_cast<double>(train)));
  std::vector<double> sp(preds.begin() + sel_begin, preds.begin() + train);
  std::vector<double> st(truths.begin() + sel_begin, truths.begin() + train);
  scores.train_nrmse = nrmse(sp, st);

  if (total > train) {
    std::vector<double> tp(preds.begin() + train, preds.end());
    std::vector<double> tt(truths.begin() + train, truths.end());
    scores.test_nrmse = nrmse(tp, tt);
  }

  if (!trace.comparator_losses.empty()) {
    RegretLedger ledger;
    ledger.online_losses = trace.online_losses(train);
    ledger.comparator_losses = trace.comparator_losses;
    scores.regret_series = normalized_regret(ledger);
    scores.train_regret = scores.regret_series.back();
  }
  return scores;
}

std::string hp_label(double eta, double mu, Index order) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "eta%g_mu%g_K%ld", eta, mu, static_cast<long>(order));
  return buf;
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double acc = 0.0;
  for (const double x : v) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  const bool emit = !config.output_dir.empty();
  const std::filesystem::path out_dir(config.output_dir);
  if (emit) std::filesystem::create_directories(out_dir / "runs");

  // Realizations are shared across learners and grid points.
  std::vector<NodeStream> streams(static_cast<std::size_t>(config.realizations));
  parallel_for(config.realizations, config.max_workers, [&](Index r) {
    streams[static_cast<std::size_t>(r)] = realize_stream(config, r);
  });

  ExperimentResult result;
  json manifest;
  manifest["seed"] = config.seed;
  manifest["realizations"] = config.realizations;
  manifest["selection_fraction"] = config.selection_fraction;
  manifest["train_count"] = streams.front().train_count;
  manifest["t_total"] = streams.front().length();
  if (config.synthetic) {
    manifest["synthetic"] = {{"n0", config.synth.n0},
                             {"edge_prob", config.synth.edge_prob},
                             {"t_total", config.synth.t_total},
                             {"edges_per_node", config.synth.edges_per_node},
                             {"bandwidth", config.synth.bandwidth},
                             {"target_kind", to_string(config.synth.target_kind)},
                             {"kernel_variance", config.synth.kernel_variance},
                             {"gen_filter_order", config.synth.gen_filter_order},
                             {"unit_spectral_radius", config.synth.unit_spectral_radius}};
  } else {
    manifest["stream_path"] = config.stream_path;
  }
  manifest["learners"] = json::array();

  for (std::size_t li = 0; li < config.learners.size(); ++li) {
    const LearnerConfig& base_cfg = config.learners[li];
    const bool eta_free = base_cfg.kind == LearnerKind::Batch ||
                          base_cfg.kind == LearnerKind::Pretrained;

    struct GridCell {
      double eta, mu;
      Index order;
      std::vector<SelectionScores> scores;
    };
    std::vector<GridCell> grid;
    for (const Index order : config.sweep.orders) {
      for (const double mu : config.sweep.mus) {
        for (const double eta : config.sweep.etas) {
          grid.push_back({eta, mu, order, {}});
          if (eta_free) break;  // eta plays no role; one cell per (mu, order)
        }
      }
    }

    for (auto& cell : grid) {
      cell.scores.resize(static_cast<std::size_t>(config.realizations));
      std::vector<RunTrace> traces(static_cast<std::size_t>(config.realizations));
      parallel_for(config.realizations, config.max_workers, [&](Index r) {
        LearnerConfig cfg = base_cfg;
        cfg.hp.eta = cell.eta;
        cfg.hp.mu = cell.mu;
        cfg.hp.order = cell.order;
        cfg.seed = derive_seed(config.seed, (li + 1) * 1000003ULL +
                                                static_cast<std::uint64_t>(r));
        const auto& stream = streams[static_cast<std::size_t>(r)];
        RunTrace trace = run_learner(stream, cfg, ComparatorWindow::Train);
        cell.scores[static_cast<std::size_t>(r)] =
            score_run(stream, trace, config.selection_fraction);
        traces[static_cast<std::size_t>(r)] = std::move(trace);
      });
      if (emit) {
        const auto dir = out_dir / "runs" / to_string(base_cfg.kind) /
                         hp_label(cell.eta, cell.mu, cell.order);
        std::filesystem::create_directories(dir);
        for (Index r = 0; r < config.realizations; ++r) {
          save_records_csv(traces[static_cast<std::size_t>(r)].records,
                           (dir / ("r" + std::to_string(r) + ".csv")).string());
        }
      }
      for (Index r = 0; r < config.realizations; ++r) {
        const auto& s = cell.scores[static_cast<std::size_t>(r)];
        RunSummary run;
        run.kind = base_cfg.kind;
        run.eta = cell.eta;
        run.mu = cell.mu;
        run.order = cell.order;
        run.realization = r;
        run.train_nrmse = s.train_nrmse;
        run.test_nrmse = s.test_nrmse;
        run.train_regret = s.train_regret;
        run.diverged = s.diverged;
        run.regret_series = s.regret_series;
        result.all_runs.push_back(std::move(run));
      }
    }

    // Lock the grid point with the best mean train NRMSE.
    std::size_t best = 0;
    double best_score = std::numeric_limits<double>::infinity();
    for (std::size_t g = 0; g < grid.size(); ++g) {
      std::vector<double> vals;
      for (const auto& s : grid[g].scores) {
        if (!s.diverged) vals.push_back(s.train_nrmse);
      }
      if (vals.empty()) continue;
      const double score = mean_of(vals);
      if (score < best_score) {
        best_score = score;
        best = g;
      }
    }

    LearnerSummary summary;
    summary.kind = base_cfg.kind;
    summary.eta = grid[best].eta;
    summary.mu = grid[best].mu;
    summary.order = grid[best].order;
    for (const auto& s : grid[best].scores) {
      if (s.diverged) {
        ++summary.diverged_runs;
        continue;
      }
      summary.test_nrmse_per_realization.push_back(s.test_nrmse);
      summary.train_regret_per_realization.push_back(s.train_regret);
      summary.regret_series_per_realization.push_back(s.regret_series);
    }
    summary.mean_test_nrmse = mean_of(summary.test_nrmse_per_realization);
    summary.std_test_nrmse = sample_std(summary.test_nrmse_per_realization);
    summary.mean_train_regret = mean_of(summary.train_regret_per_realization);
    result.summaries.push_back(summary);

    json learner_entry;
    learner_entry["kind"] = to_string(base_cfg.kind);
    learner_entry["selected"] = hp_label(summary.eta, summary.mu, summary.order);
    learner_entry["eta"] = summary.eta;
    learner_entry["mu"] = summary.mu;
    learner_entry["order"] = summary.order;
    manifest["learners"].push_back(learner_entry);
  }

  if (emit) {
    {
      std::ofstream out(out_dir / "summary.csv");
      out << "learner,eta,mu,order,mean_nrmse,std_nrmse,diverged_runs\n";
      for (const auto& s : result.summaries) {
        out << to_string(s.kind) << ',' << format_double(s.eta) << ','
            << format_double(s.mu) << ',' << s.order << ','
            << format_double(s.mean_test_nrmse) << ',' << format_double(s.std_test_nrmse)
            << ',' << s.diverged_runs << '\n';
      }
    }
    {
      std::ofstream out(out_dir / "regret.csv");
      out << "learner,mean_train_regret\n";
      for (const auto& s : result.summaries) {
        out << to_string(s.kind) << ',' << format_double(s.mean_train_regret) << '\n';
      }
    }
    {
      std::ofstream out(out_dir / "cumregret.csv");
      out << "learner,t,mean_normalized_regret\n";
      for (const auto& s : result.summaries) {
        if (s.regret_series_per_realization.empty()) continue;
        const std::size_t len = s.regret_series_per_realization.front().size();
        for (std::size_t t = 0; t < len; ++t) {
          double acc = 0.0;
          for (const auto& series : s.regret_series_per_realization) acc += series[t];
          acc /= static_cast<double>(s.regret_series_per_realization.size());
          out << to_string(s.kind) << ',' << (t + 1) << ',' << format_double(acc) << '\n';
        }
      }
    }
    if (config.emit_eta_sweep) {
      std::ofstream out(out_dir / "eta_sweep.csv");
      out << "learner,eta,t,mean_normalized_regret\n";
      for (std::size_t li = 0; li < config.learners.size(); ++li) {
        const auto& run_group = config.learners[li];
        if (run_group.kind != LearnerKind::Deterministic) continue;
        const double selected_mu = result.summaries[li].mu;
        const Index selected_order = result.summaries[li].order;
        for (const double eta : config.sweep.etas) {
          std::vector<const RunSummary*> runs;
          for (const auto& run : result.all_runs) {
            if (run.kind == run_group.kind && run.eta == eta && !run.diverged &&
                run.mu == selected_mu && run.order == selected_order) {
              runs.push_back(&run);
            }
          }
          if (runs.empty()) continue;
          const std::size_t len = runs.front()->regret_series.size();
          for (std::size_t t = 0; t < len; ++t) {
            double acc = 0.0;
            int cnt = 0;
            for (const auto* run : runs) {
              if (run->regret_series.size() == len) {
                acc += run->regret_series[t];
                ++cnt;
              }
            }
            if (cnt == 0) continue;
            out << to_string(run_group.kind) << ',' << format_double(eta) << ','
                << (t + 1) << ',' << format_double(acc / cnt) << '\n';
          }
        }
      }
    }
    if (config.emit_order_sweep) {
      std::ofstream out(out_dir / "k_sweep.csv");
      out << "learner,order,mean_nrmse\n";
      for (const auto& learner : config.learners) {
        for (const Index order : config.sweep.orders) {
          // Best (eta, mu) for this order by train NRMSE, scored on test.
          double best_train = std::numeric_limits<double>::infinity();
          double best_test = std::numeric_limits<double>::quiet_NaN();
          for (const double eta : config.sweep.etas) {
            for (const double mu : config.sweep.mus) {
              std::vector<double> train_vals, test_vals;
              for (const auto& run : result.all_runs) {
                if (run.kind == learner.kind && run.order == order && run.eta == eta &&
                    run.mu == mu && !run.diverged) {
                  train_vals.push_back(run.train_nrmse);
                  test_vals.push_back(run.test_nrmse);
                }
              }
              if (train_vals.empty()) continue;
              const double mt = mean_of(train_vals);
              if (mt < best_train) {
                best_train = mt;
                best_test = mean_of(test_vals);
              }
            }
          }
          if (std::isfinite(best_train)) {
            out << to_string(learner.kind) << ',' << order << ','
                << format_double(best_test) << '\n';
          }
        }
      }
    }
    std::ofstream mout(out_dir / "manifest.json");
    mout << manifest.dump(2) << '\n';
  }
  return result;
}

bool verify_bundle(const std::string& output_dir) {
  const std::filesystem::path dir(output_dir);
  std::ifstream min(dir / "manifest.json");
  if (!min) throw Error("no manifest.json in " + output_dir);
  json manifest;
  min >> manifest;
  const Index train_count = manifest["train_count"].get<Index>();
  const Index t_total = manifest["t_total"].get<Index>();
  const Index realizations = manifest["realizations"].get<Index>();

  std::ifstream sin(dir / "summary.csv");
  if (!sin) throw Error("no summary.csv in " + output_dir);
  std::string line;
  std::getline(sin, line);  // header
  bool all_match = true;
  std::size_t row = 0;
  while (std::getline(sin, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const auto pos = line.find(',', start);
      if (pos == std::string::npos) {
        fields.push_back(line.substr(start));
        break;
      }
      fields.push_back(line.substr(start, pos - start));
      start = pos + 1;
    }
    if (fields.size() != 7) throw ParseError("summary.csv has malformed row");
    const std::string& kind = fields[0];
    const std::string selected = manifest["learners"][row]["selected"].get<std::string>();
    std::vector<double> nrmses;
    for (Index r = 0; r < realizations; ++r) {
      const auto path = dir / "runs" / kind / selected / ("r" + std::to_string(r) + ".csv");
      if (!std::filesystem::exists(path)) continue;
      const auto records = load_records_csv(path.string());
      if (static_cast<Index>(records.size()) != t_total) continue;  // diverged run
      std::vector<double> preds, truths;
      for (std::size_t i = static_cast<std::size_t>(train_count); i < records.size(); ++i) {
        preds.push_back(records[i].prediction);
        truths.push_back(records[i].truth);
      }
      nrmses.push_back(nrmse(preds, truths));
    }
    const double mean = mean_of(nrmses);
    const double stddev = sample_std(nrmses);
    if (format_double(mean) != fields[4] || format_double(stddev) != fields[5]) {
      all_match = false;
    }
    ++row;
  }
  return all_match;
}

}  // namespace ogf
