#pragma once

#include <utility>
#include <vector>

#include "ogf/common.hpp"

namespace ogf {

/// Sparse connectivity of one incoming node: directed edges from existing
/// nodes toward it. Entries are (source index, weight), sorted by index.
struct AttachmentVector {
  Index length = 0;
  std::vector<std::pair<Index, double>> entries;

  Index nnz() const { return static_cast<Index>(entries.size()); }

  /// Checks index range, ordering, and positive weights. When `weight_cap`
  /// or `max_edges` is positive the corresponding bound is enforced too.
  void validate(double weight_cap = 0.0, Index max_edges = 0) const;

  Vector dense() const;
  static AttachmentVector from_dense(const Vector& v, Index expected_length = -1);
};

/// Directed weighted graph that only ever grows by appending nodes.
/// Row i holds the incoming edges of node i as (source, weight) pairs,
/// i.e. entry (j, w) in row i is an edge from node j toward node i with
/// weight w. Rows of existing nodes are never touched by an expansion.
class ExpandingGraph {
 public:
  using Entry = std::pair<Index, double>;
  using Edge = std::tuple<Index, Index, double>;  // (src, dst, weight)

  ExpandingGraph() = default;

  /// n isolated nodes.
  explicit ExpandingGraph(Index n) : rows_(static_cast<std::size_t>(n)), origin_(n) {}

  /// Build from an edge list; throws on self-loops, bad indices,
  /// duplicates, or non-positive weights.
  static ExpandingGraph from_edges(Index n, const std::vector<Edge>& edges);

  Index node_count() const { return static_cast<Index>(rows_.size()); }
  Index edge_count() const { return n_edges_; }
  Index origin_size() const { return origin_; }

  const std::vector<Entry>& incoming(Index node) const {
    return rows_[static_cast<std::size_t>(node)];
  }

  /// Edge list sorted by (dst, src); the canonical serialization order.
  std::vector<Edge> edges() const;

  /// All edge weights in row order; used by median/cap computations.
  std::vector<double> edge_weights() const;

  double max_edge_weight() const;
  double median_edge_weight() const;

  /// y = A x through the sparse rows; rows with no entries yield zero.
  Vector shift(const Vector& x) const;

  Matrix dense() const;

  friend ExpandingGraph expand(const ExpandingGraph& g, const AttachmentVector& a);

 private:
  std::vector<std::vector<Entry>> rows_;
  Index n_edges_ = 0;
  Index origin_ = 0;
};

/// Append one node whose incoming edges are `a`. The new row equals `a`,
/// the new column is all zeros, and every prior entry is unchanged.
ExpandingGraph expand(const ExpandingGraph& g, const AttachmentVector& a);

/// Dominant-eigenvalue estimate of the adjacency via power iteration;
/// returns 0 for edgeless graphs.
double spectral_radius_estimate(const ExpandingGraph& g, int max_iters = 300,
                                double tol = 1e-12);

/// Columns are the successive shifts of the current signal:
/// column k holds A^(k-1) x for k = 1..K. Rows are preallocated in chunks
/// so appending a node costs O(K * nnz) amortized, not a rebuild.
class ShiftMatrix {
 public:
  ShiftMatrix() = default;
  ShiftMatrix(Index rows, Index order, Index capacity_hint = 0);

  Index rows() const { return rows_; }
  Index order() const { return static_cast<Index>(data_.cols()); }

  /// Active N x K block.
  Eigen::Block<const Matrix> view() const { return data_.topRows(rows_); }

  double at(Index i, Index k) const { return data_(i, k); }

  /// Appends one row; values must have `order()` entries.
  void append_row(const double* values);

  void set_column(Index k, const Vector& v) { data_.col(k).head(rows_) = v; }

 private:
  Matrix data_;
  Index rows_ = 0;
};

/// column k = A^(k-1) x, computed by repeated sparse shifts (A^k is never
/// materialized). `capacity_hint` preallocates rows for later extensions.
ShiftMatrix build_shift_matrix(const ExpandingGraph& graph, const Vector& signal,
                               Index order, Index capacity_hint = 0);

/// Incremental update after `graph_after = expand(old graph, prev_attachment)`
/// and the revealed signal value was appended. Appends one row: the raw
/// signal column gets `new_signal_value`, and shift column k gets the
/// diffusion of the old column k-1 over the new incoming edges. Equals the
/// from-scratch rebuild on the expanded graph/signal.
ShiftMatrix extend_shift_matrix(ShiftMatrix sm, const ExpandingGraph& graph_after,
                                const AttachmentVector& prev_attachment,
                                double new_signal_value);

}  // namespace ogf
