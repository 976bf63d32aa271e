#include "ogf/datagen.hpp"

#include <algorithm>
#include <cmath>

#include "ogf/learners.hpp"
#include "ogf/rng.hpp"

namespace ogf {

namespace {

// Ridge weight used when fitting the generating filter for filter-kind data.
constexpr double kGeneratorRidge = 1e-4;

}  // namespace

TargetKind target_kind_from_string(const std::string& name) {
  if (name == "filter") return TargetKind::Filter;
  if (name == "wmean") return TargetKind::WMean;
  if (name == "kernel") return TargetKind::Kernel;
  throw ConfigError("unknown target kind: " + name);
}

std::string to_string(TargetKind kind) {
  switch (kind) {
    case TargetKind::Filter: return "filter";
    case TargetKind::WMean: return "wmean";
    case TargetKind::Kernel: return "kernel";
  }
  return "unknown";
}

void SyntheticConfig::validate() const {
  if (n0 < 1) throw ConfigError("starting size must be positive");
  if (!(edge_prob > 0.0 && edge_prob <= 1.0)) {
    throw ConfigError("edge probability must be in (0,1]");
  }
  if (t_total < 1) throw ConfigError("stream length must be positive");
  if (edges_per_node < 1 || edges_per_node > n0) {
    throw ConfigError("edges per node must be in [1, n0]");
  }
  if (bandwidth < 1 || bandwidth > n0) {
    throw ConfigError("bandwidth must be in [1, n0]");
  }
  if (!(kernel_variance > 0.0)) throw ConfigError("kernel variance must be positive");
  if (gen_filter_order < 1) throw ConfigError("generator filter order must be positive");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError("train fraction must be in (0,1)");
  }
}

void NodeStream::validate() const {
  const Index n0 = base_graph.node_count();
  if (base_signal.size() != n0) {
    throw SchemaError("base signal length does not match base graph");
  }
  if (records.empty()) throw SchemaError("stream has no records");
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& rec = records[i];
    if (rec.t != static_cast<Index>(i) + 1) {
      throw SchemaError("stream records must be consecutive starting at t=1");
    }
    if (rec.attachment.length != n0 + rec.t - 1) {
      throw SchemaError("attachment at t=" + std::to_string(rec.t) +
                        " has length " + std::to_string(rec.attachment.length) +
                        ", expected " + std::to_string(n0 + rec.t - 1));
    }
    try {
      rec.attachment.validate();
    } catch (const Error& e) {
      throw SchemaError("attachment at t=" + std::to_string(rec.t) + ": " + e.what());
    }
  }
  if (train_count < 0 || train_count > length()) {
    throw SchemaError("train count outside the stream length");
  }
}

GeneratedBase generate_base(const SyntheticConfig& config) {
  config.validate();
  Rng root(config.seed);
  for (int attempt = 0; attempt < 5; ++attempt) {
    Rng rng = root.fork(static_cast<std::uint64_t>(attempt));

    std::vector<ExpandingGraph::Edge> edges;
    for (Index dst = 0; dst < config.n0; ++dst) {
      for (Index src = 0; src < config.n0; ++src) {
        if (src == dst) continue;
        if (rng.bernoulli(config.edge_prob)) {
          edges.emplace_back(src, dst, rng.uniform_open(1.0));
        }
      }
    }
    ExpandingGraph graph = ExpandingGraph::from_edges(config.n0, edges);
    if (config.unit_spectral_radius) {
      const double radius = spectral_radius_estimate(graph);
      if (radius > 0.0) {
        for (auto& [src, dst, w] : edges) w /= radius;
        graph = ExpandingGraph::from_edges(config.n0, edges);
      }
    }

    // Signal spanned by the lowest eigenvectors of L = D - (A + A^T)/2.
    const Matrix dense = graph.dense();
    const Matrix sym = 0.5 * (dense + dense.transpose());
    Matrix laplacian = -sym;
    laplacian.diagonal() += sym.rowwise().sum();
    Eigen::SelfAdjointEigenSolver<Matrix> solver(laplacian);
    if (solver.info() != Eigen::Success) continue;

    Vector signal = Vector::Zero(config.n0);
    for (Index k = 0; k < config.bandwidth; ++k) {
      signal += rng.normal() * solver.eigenvectors().col(k);
    }
    const double norm = signal.norm();
    if (norm < 1e-12) continue;
    signal /= norm;
    return GeneratedBase{std::move(graph), std::move(signal)};
  }
  throw Error("base-graph generation failed after 5 attempts");
}

namespace {

AttachmentVector draw_attachment(Index n_existing, Index n_edges, double weight, Rng& rng) {
  AttachmentVector a;
  a.length = n_existing;
  std::vector<Index> picked;
  picked.reserve(static_cast<std::size_t>(n_edges));
  while (static_cast<Index>(picked.size()) < n_edges) {
    const Index candidate = static_cast<Index>(rng.integer(static_cast<std::uint64_t>(n_existing)));
    if (std::find(picked.begin(), picked.end(), candidate) == picked.end()) {
      picked.push_back(candidate);
    }
  }
  std::sort(picked.begin(), picked.end());
  for (Index idx : picked) a.entries.emplace_back(idx, weight);
  return a;
}

double wmean_target(const AttachmentVector& a, const Vector& signal) {
  double num = 0.0, den = 0.0;
  for (const auto& [i, w] : a.entries) {
    num += w * signal[i];
    den += w;
  }
  return den > 0.0 ? num / den : 0.0;
}

// Nadaraya-Watson regression over the neighbours' signals with a Gaussian
// kernel centred at their mean; reduces to the weighted mean as the
// variance grows.
double kernel_target(const AttachmentVector& a, const Vector& signal, double variance) {
  if (a.entries.empty()) return 0.0;
  double centre = 0.0;
  for (const auto& [i, w] : a.entries) centre += signal[i];
  centre /= static_cast<double>(a.entries.size());
  double num = 0.0, den = 0.0;
  for (const auto& [i, w] : a.entries) {
    const double d = signal[i] - centre;
    const double k = std::exp(-d * d / (2.0 * variance));
    num += w * k * signal[i];
    den += w * k;
  }
  return den > 0.0 ? num / den : 0.0;
}

}  // namespace

NodeStream generate_stream(const SyntheticConfig& config, const GeneratedBase& base) {
  config.validate();
  if (base.graph.node_count() != config.n0 || base.signal.size() != config.n0) {
    throw DimensionError("base does not match the configuration");
  }
  Rng rng = Rng(config.seed).fork(0x5741414dULL);

  NodeStream stream;
  stream.base_graph = base.graph;
  stream.base_signal = base.signal;
  stream.train_count =
      static_cast<Index>(std::floor(config.train_fraction * static_cast<double>(config.t_total)));

  const double edge_weight = base.graph.median_edge_weight();
  if (edge_weight <= 0.0) throw ConfigError("starting graph has no edges to take a median from");

  if (config.target_kind == TargetKind::Filter) {
    HyperParams gen_hp;
    gen_hp.order = config.gen_filter_order;
    gen_hp.mu = kGeneratorRidge;
    gen_hp.eta = 0.0;
    gen_hp.ball_radius = 0.0;
    stream.generator_filter = pretrain(base.graph, base.signal, gen_hp);
  }

  ExpandingGraph graph = base.graph;
  Vector signal = base.signal;
  ShiftMatrix sm;
  if (config.target_kind == TargetKind::Filter) {
    sm = build_shift_matrix(graph, signal, config.gen_filter_order,
                            config.n0 + config.t_total);
  }

  stream.records.reserve(static_cast<std::size_t>(config.t_total));
  for (Index t = 1; t <= config.t_total; ++t) {
    AttachmentVector a =
        draw_attachment(graph.node_count(), config.edges_per_node, edge_weight, rng);
    double value = 0.0;
    switch (config.target_kind) {
      case TargetKind::Filter:
        value = predict_deterministic(a, sm, stream.generator_filter);
        break;
      case TargetKind::WMean:
        value = wmean_target(a, signal);
        break;
      case TargetKind::Kernel:
        value = kernel_target(a, signal, config.kernel_variance);
        break;
    }
    stream.records.push_back({t, value, a});

    graph = expand(graph, a);
    if (config.target_kind == TargetKind::Filter) {
      sm = extend_shift_matrix(std::move(sm), graph, a, value);
    }
    signal.conservativeResize(signal.size() + 1);
    signal[signal.size() - 1] = value;
  }
  return stream;
}

}  // namespace ogf
