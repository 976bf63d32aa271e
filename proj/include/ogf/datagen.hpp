#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ogf/common.hpp"
#include "ogf/graph.hpp"

namespace ogf {

enum class TargetKind { Filter, WMean, Kernel };

TargetKind target_kind_from_string(const std::string& name);
std::string to_string(TargetKind kind);

/// Synthetic expanding-graph experiment description.
struct SyntheticConfig {
  Index n0 = 100;                // starting size
  double edge_prob = 0.2;        // ER density of the starting graph
  Index t_total = 1000;          // incoming-node stream length
  Index edges_per_node = 5;      // edges formed by each incoming node
  Index bandwidth = 3;           // Laplacian bandlimit of the starting signal
  TargetKind target_kind = TargetKind::Filter;
  double kernel_variance = 10.0;
  Index gen_filter_order = 5;
  std::uint64_t seed = 0;
  // Rescale the starting adjacency to unit spectral radius. Expansion keeps
  // the spectrum (the new column is zero), so shifts of any order stay
  // bounded along the whole stream.
  bool unit_spectral_radius = true;
  double train_fraction = 0.8;

  void validate() const;
};

struct StreamRecord {
  Index t = 0;       // 1-based arrival time
  double value = 0;  // true signal at the incoming node
  AttachmentVector attachment;
};

/// A full experiment input: the starting graph and signal plus the ordered
/// arrivals. `generator_filter` is nonempty only for filter-generated data.
struct NodeStream {
  ExpandingGraph base_graph;
  Vector base_signal;
  std::vector<StreamRecord> records;
  Index train_count = 0;
  Vector generator_filter;

  Index length() const { return static_cast<Index>(records.size()); }
  void validate() const;
};

struct GeneratedBase {
  ExpandingGraph graph;
  Vector signal;
};

/// Directed ER starting graph with uniform (0,1] weights (rescaled when
/// `unit_spectral_radius` is set) and a signal spanned by the lowest
/// `bandwidth` eigenvectors of the symmetrized Laplacian, unit-normalized.
GeneratedBase generate_base(const SyntheticConfig& config);

/// Arrival stream over the base: each incoming node forms `edges_per_node`
/// distinct uniformly chosen edges weighted by the median edge weight of the
/// starting graph; the target value follows `target_kind`.
NodeStream generate_stream(const SyntheticConfig& config, const GeneratedBase& base);

}  // namespace ogf
