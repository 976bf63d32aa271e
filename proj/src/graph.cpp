#include "ogf/graph.hpp"

#include <algorithm>
#include <cmath>

namespace ogf {

void AttachmentVector::validate(double weight_cap, Index max_edges) const {
  Index prev = -1;
  for (const auto& [idx, w] : entries) {
    if (idx < 0 || idx >= length) {
      throw DimensionError("attachment index " + std::to_string(idx) +
                           " out of range for length " + std::to_string(length));
    }
    if (idx <= prev) throw InvariantError("attachment entries must be strictly increasing");
    if (!(w > 0.0)) throw InvariantError("attachment weight must be positive");
    if (weight_cap > 0.0 && w > weight_cap) {
      throw InvariantError("attachment weight " + std::to_string(w) + " exceeds cap " +
                           std::to_string(weight_cap));
    }
    prev = idx;
  }
  if (max_edges > 0 && nnz() > max_edges) {
    throw InvariantError("attachment has " + std::to_string(nnz()) + " edges, cap is " +
                         std::to_string(max_edges));
  }
}

Vector AttachmentVector::dense() const {
  Vector v = Vector::Zero(length);
  for (const auto& [idx, w] : entries) v[idx] = w;
  return v;
}

AttachmentVector AttachmentVector::from_dense(const Vector& v, Index expected_length) {
  if (expected_length >= 0 && v.size() != expected_length) {
    throw DimensionError("dense attachment has length " + std::to_string(v.size()) +
                         ", expected " + std::to_string(expected_length));
  }
  AttachmentVector a;
  a.length = v.size();
  for (Index i = 0; i < v.size(); ++i) {
    if (v[i] != 0.0) a.entries.emplace_back(i, v[i]);
  }
  return a;
}

ExpandingGraph ExpandingGraph::from_edges(Index n, const std::vector<Edge>& edges) {
  ExpandingGraph g(n);
  for (const auto& [src, dst, w] : edges) {
    if (src < 0 || src >= n || dst < 0 || dst >= n) {
      throw DimensionError("edge (" + std::to_string(src) + "," + std::to_string(dst) +
                           ") out of range for " + std::to_string(n) + " nodes");
    }
    if (src == dst) throw InvariantError("self-loops are not allowed");
    if (!(w > 0.0)) throw InvariantError("edge weight must be positive");
    g.rows_[static_cast<std::size_t>(dst)].emplace_back(src, w);
    ++g.n_edges_;
  }
  for (auto& row : g.rows_) {
    std::sort(row.begin(), row.end());
    for (std::size_t i = 1; i < row.size(); ++i) {
      if (row[i].first == row[i - 1].first) throw InvariantError("duplicate edge");
    }
  }
  return g;
}

std::vector<ExpandingGraph::Edge> ExpandingGraph::edges() const {
  std::vector<Edge> out;
  out.reserve(static_cast<std::size_t>(n_edges_));
  for (Index dst = 0; dst < node_count(); ++dst) {
    for (const auto& [src, w] : rows_[static_cast<std::size_t>(dst)]) {
      out.emplace_back(src, dst, w);
    }
  }
  return out;
}

std::vector<double> ExpandingGraph::edge_weights() const {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n_edges_));
  for (const auto& row : rows_) {
    for (const auto& [src, w] : row) out.push_back(w);
  }
  return out;
}

double ExpandingGraph::max_edge_weight() const {
  double m = 0.0;
  for (const auto& row : rows_) {
    for (const auto& [src, w] : row) m = std::max(m, w);
  }
  return m;
}

double ExpandingGraph::median_edge_weight() const {
  std::vector<double> w = edge_weights();
  if (w.empty()) return 0.0;
  const std::size_t mid = w.size() / 2;
  std::nth_element(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(mid), w.end());
  double hi = w[mid];
  if (w.size() % 2 == 1) return hi;
  double lo = *std::max_element(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

Vector ExpandingGraph::shift(const Vector& x) const {
  if (x.size() != node_count()) {
    throw DimensionError("signal length " + std::to_string(x.size()) +
                         " does not match node count " + std::to_string(node_count()));
  }
  Vector y = Vector::Zero(node_count());
  for (Index i = 0; i < node_count(); ++i) {
    double acc = 0.0;
    for (const auto& [j, w] : rows_[static_cast<std::size_t>(i)]) acc += w * x[j];
    y[i] = acc;
  }
  return y;
}

Matrix ExpandingGraph::dense() const {
  Matrix a = Matrix::Zero(node_count(), node_count());
  for (Index i = 0; i < node_count(); ++i) {
    for (const auto& [j, w] : rows_[static_cast<std::size_t>(i)]) a(i, j) = w;
  }
  return a;
}

ExpandingGraph expand(const ExpandingGraph& g, const AttachmentVector& a) {
  if (a.length != g.node_count()) {
    throw DimensionError("attachment length " + std::to_string(a.length) +
                         " does not match node count " + std::to_string(g.node_count()));
  }
  a.validate();
  ExpandingGraph out = g;
  out.rows_.emplace_back(a.entries);
  out.n_edges_ += a.nnz();
  return out;
}

double spectral_radius_estimate(const ExpandingGraph& g, int max_iters, double tol) {
  const Index n = g.node_count();
  if (n == 0 || g.edge_count() == 0) return 0.0;
  // Nonnegative start vector on a nonnegative matrix: ||Av||/||v|| converges
  // to the Perron value.
  Vector v = Vector::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
  double lambda = 0.0;
  for (int it = 0; it < max_iters; ++it) {
    Vector w = g.shift(v);
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    if (it > 0 && std::abs(norm - lambda) <= tol * std::max(1.0, norm)) {
      return norm;
    }
    lambda = norm;
    v = w / norm;
  }
  return lambda;
}

ShiftMatrix::ShiftMatrix(Index rows, Index order, Index capacity_hint) : rows_(rows) {
  if (order < 1) throw ConfigError("filter order must be at least 1");
  data_.setZero(std::max(rows, capacity_hint), order);
}

void ShiftMatrix::append_row(const double* values) {
  if (rows_ == data_.rows()) {
    // Geometric growth keeps per-append cost amortized O(order).
    Matrix grown(std::max<Index>(16, data_.rows() + data_.rows() / 2), data_.cols());
    grown.topRows(data_.rows()) = data_;
    data_ = std::move(grown);
  }
  for (Index k = 0; k < order(); ++k) data_(rows_, k) = values[k];
  ++rows_;
}

ShiftMatrix build_shift_matrix(const ExpandingGraph& graph, const Vector& signal,
                               Index order, Index capacity_hint) {
  if (order < 1) throw ConfigError("filter order must be at least 1");
  if (signal.size() != graph.node_count()) {
    throw DimensionError("signal length " + std::to_string(signal.size()) +
                         " does not match node count " +
                         std::to_string(graph.node_count()));
  }
  ShiftMatrix sm(graph.node_count(), order, capacity_hint);
  sm.set_column(0, signal);
  Vector col = signal;
  for (Index k = 1; k < order; ++k) {
    col = graph.shift(col);
    sm.set_column(k, col);
  }
  return sm;
}

ShiftMatrix extend_shift_matrix(ShiftMatrix sm, const ExpandingGraph& graph_after,
                                const AttachmentVector& prev_attachment,
                                double new_signal_value) {
  if (prev_attachment.length != sm.rows() ||
      graph_after.node_count() != sm.rows() + 1) {
    throw DimensionError("stale shift matrix: have " + std::to_string(sm.rows()) +
                         " rows, graph has " + std::to_string(graph_after.node_count()) +
                         " nodes");
  }
  const Index order = sm.order();
  double row[64];
  std::vector<double> heap_row;
  double* values = row;
  if (order > 64) {
    heap_row.resize(static_cast<std::size_t>(order));
    values = heap_row.data();
  }
  values[0] = new_signal_value;
  for (Index k = 1; k < order; ++k) {
    double acc = 0.0;
    for (const auto& [j, w] : prev_attachment.entries) acc += w * sm.at(j, k - 1);
    values[k] = acc;
  }
  sm.append_row(values);
  return sm;
}

}  // namespace ogf
