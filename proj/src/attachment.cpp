#include "ogf/attachment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ogf {

void StochasticAttachment::validate(double weight_cap) const {
  if (probs.size() != weights.size()) {
    throw DimensionError("probability and weight vectors differ in length");
  }
  for (Index i = 0; i < probs.size(); ++i) {
    if (!(probs[i] >= 0.0 && probs[i] <= 1.0)) {
      throw InvariantError("attachment probability out of [0,1] at index " +
                           std::to_string(i));
    }
    if (!(weights[i] > 0.0)) {
      throw InvariantError("attachment model weight must be positive at index " +
                           std::to_string(i));
    }
    if (weight_cap > 0.0 && weights[i] > weight_cap) {
      throw InvariantError("attachment model weight exceeds cap at index " +
                           std::to_string(i));
    }
  }
}

AttachmentMoments attachment_moments(const StochasticAttachment& sa) {
  sa.validate();
  AttachmentMoments m;
  m.mean = sa.probs.cwiseProduct(sa.weights);
  m.cov_diag = sa.weights.array().square() * sa.probs.array() *
               (1.0 - sa.probs.array());
  return m;
}

AttachmentVector sample_attachment(const StochasticAttachment& sa, Rng& rng) {
  sa.validate();
  AttachmentVector a;
  a.length = sa.probs.size();
  for (Index i = 0; i < sa.probs.size(); ++i) {
    if (rng.bernoulli(sa.probs[i])) a.entries.emplace_back(i, sa.weights[i]);
  }
  return a;
}

RuleKind rule_kind_from_string(const std::string& name) {
  if (name == "uniform") return RuleKind::Uniform;
  if (name == "degree") return RuleKind::Degree;
  if (name == "betweenness") return RuleKind::Betweenness;
  if (name == "eigenvector") return RuleKind::Eigenvector;
  if (name == "pagerank") return RuleKind::Pagerank;
  throw ConfigError("unknown attachment rule: " + name);
}

std::string to_string(RuleKind kind) {
  switch (kind) {
    case RuleKind::Uniform: return "uniform";
    case RuleKind::Degree: return "degree";
    case RuleKind::Betweenness: return "betweenness";
    case RuleKind::Eigenvector: return "eigenvector";
    case RuleKind::Pagerank: return "pagerank";
  }
  return "unknown";
}

namespace {

// Out-neighbour lists (successors), derived from the row-major storage.
std::vector<std::vector<Index>> out_neighbours(const ExpandingGraph& g) {
  std::vector<std::vector<Index>> out(static_cast<std::size_t>(g.node_count()));
  for (Index i = 0; i < g.node_count(); ++i) {
    for (const auto& [j, w] : g.incoming(i)) {
      out[static_cast<std::size_t>(j)].push_back(i);
    }
  }
  return out;
}

}  // namespace

Vector degree_centrality(const ExpandingGraph& graph) {
  Vector deg = Vector::Zero(graph.node_count());
  for (Index i = 0; i < graph.node_count(); ++i) {
    deg[i] += static_cast<double>(graph.incoming(i).size());  // in-degree
    for (const auto& [j, w] : graph.incoming(i)) deg[j] += 1.0;  // out-degree
  }
  return deg;
}

Vector betweenness_centrality(const ExpandingGraph& graph) {
  const Index n = graph.node_count();
  const auto succ = out_neighbours(graph);
  Vector bc = Vector::Zero(n);

  std::vector<Index> stack(static_cast<std::size_t>(n));
  std::vector<Index> queue(static_cast<std::size_t>(n));
  std::vector<std::vector<Index>> preds(static_cast<std::size_t>(n));
  std::vector<double> sigma(static_cast<std::size_t>(n));
  std::vector<Index> dist(static_cast<std::size_t>(n));
  std::vector<double> delta(static_cast<std::size_t>(n));

  for (Index s = 0; s < n; ++s) {
    Index stack_top = 0;
    std::fill(sigma.begin(), sigma.end(), 0.0);
    std::fill(dist.begin(), dist.end(), Index{-1});
    for (auto& p : preds) p.clear();
    sigma[static_cast<std::size_t>(s)] = 1.0;
    dist[static_cast<std::size_t>(s)] = 0;
    Index head = 0, tail = 0;
    queue[tail++] = s;
    while (head < tail) {
      const Index v = queue[head++];
      stack[stack_top++] = v;
      for (Index w : succ[static_cast<std::size_t>(v)]) {
        if (dist[static_cast<std::size_t>(w)] < 0) {
          dist[static_cast<std::size_t>(w)] = dist[static_cast<std::size_t>(v)] + 1;
          queue[tail++] = w;
        }
        if (dist[static_cast<std::size_t>(w)] ==
            dist[static_cast<std::size_t>(v)] + 1) {
          sigma[static_cast<std::size_t>(w)] += sigma[static_cast<std::size_t>(v)];
          preds[static_cast<std::size_t>(w)].push_back(v);
        }
      }
    }
    std::fill(delta.begin(), delta.end(), 0.0);
    while (stack_top > 0) {
      const Index w = stack[--stack_top];
      for (Index v : preds[static_cast<std::size_t>(w)]) {
        delta[static_cast<std::size_t>(v)] +=
            sigma[static_cast<std::size_t>(v)] / sigma[static_cast<std::size_t>(w)] *
            (1.0 + delta[static_cast<std::size_t>(w)]);
      }
      if (w != s) bc[w] += delta[static_cast<std::size_t>(w)];
    }
  }
  return bc;
}

Vector eigenvector_centrality(const ExpandingGraph& graph, bool* converged, double tol,
                              int max_iters) {
  const Index n = graph.node_count();
  if (converged) *converged = false;
  if (n == 0) return Vector();
  // Power iteration on the transpose: score flows along outgoing edges.
  Vector v = Vector::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
  for (int it = 0; it < max_iters; ++it) {
    Vector w = Vector::Zero(n);
    for (Index i = 0; i < n; ++i) {
      const double vi = v[i];
      for (const auto& [j, weight] : graph.incoming(i)) w[j] += weight * vi;
    }
    const double norm = w.norm();
    if (norm == 0.0) return v;  // caller falls back
    w /= norm;
    const double lambda = v.dot(w) * norm;  // Rayleigh-style estimate
    const Vector residual = w * norm - lambda * v;
    v = w;
    if (residual.norm() <= tol) {
      if (converged) *converged = true;
      return v;
    }
  }
  return v;
}

Vector pagerank_centrality(const ExpandingGraph& graph, double damping, double tol,
                           int max_iters) {
  const Index n = graph.node_count();
  if (n == 0) return Vector();
  std::vector<double> out_count(static_cast<std::size_t>(n), 0.0);
  for (Index i = 0; i < n; ++i) {
    for (const auto& [j, w] : graph.incoming(i)) out_count[static_cast<std::size_t>(j)] += 1.0;
  }
  Vector pr = Vector::Constant(n, 1.0 / static_cast<double>(n));
  const double teleport = (1.0 - damping) / static_cast<double>(n);
  for (int it = 0; it < max_iters; ++it) {
    double dangling = 0.0;
    for (Index j = 0; j < n; ++j) {
      if (out_count[static_cast<std::size_t>(j)] == 0.0) dangling += pr[j];
    }
    Vector next = Vector::Constant(n, teleport + damping * dangling / static_cast<double>(n));
    for (Index i = 0; i < n; ++i) {
      double acc = 0.0;
      for (const auto& [j, w] : graph.incoming(i)) {
        acc += pr[j] / out_count[static_cast<std::size_t>(j)];
      }
      next[i] += damping * acc;
    }
    const double diff = (next - pr).lpNorm<1>();
    pr = next;
    if (diff <= tol) break;
  }
  return pr;
}

RuleProbabilities rule_probabilities(const AttachmentRule& rule, const ExpandingGraph& graph,
                                     double frozen_weight) {
  const Index n = graph.node_count();
  if (n == 0) throw DimensionError("rule probabilities need a nonempty graph");
  if (!(rule.scale > 0.0)) throw ConfigError("rule scale must be positive");

  RuleProbabilities out;
  Vector scores;
  switch (rule.kind) {
    case RuleKind::Uniform:
      scores = Vector::Ones(n);
      break;
    case RuleKind::Degree:
      scores = degree_centrality(graph);
      break;
    case RuleKind::Betweenness:
      scores = betweenness_centrality(graph);
      break;
    case RuleKind::Eigenvector: {
      bool ok = false;
      scores = eigenvector_centrality(graph, &ok);
      if (!ok) {
        scores = Vector::Ones(n);
        out.used_fallback = true;
      }
      break;
    }
    case RuleKind::Pagerank:
      scores = pagerank_centrality(graph);
      break;
  }

  const double min_score = scores.minCoeff();
  if (min_score < 0.0) scores.array() -= min_score;
  const double total = scores.sum();
  Vector p;
  if (total <= 0.0) {
    // Degenerate scores (e.g. edgeless graph): fall back to uniform mass.
    p = Vector::Constant(n, std::min(1.0, rule.scale / static_cast<double>(n)));
    out.used_fallback = true;
  } else {
    p = (scores * (rule.scale / total)).cwiseMin(1.0);
  }

  double w = frozen_weight > 0.0 ? frozen_weight : graph.median_edge_weight();
  if (w <= 0.0) w = 1.0;  // edgeless graph has no median; unit candidates
  out.model.probs = p;
  out.model.weights = Vector::Constant(n, w);
  return out;
}

void EnsembleAttachment::validate(double simplex_tol) const {
  const Index n = node_count();
  const Index m = rule_count();
  if (m < 1) throw ConfigError("ensemble needs at least one rule");
  if (weight_dict.rows() != n || weight_dict.cols() != m ||
      prob_combiner.size() != m || weight_combiner.size() != m) {
    throw DimensionError("ensemble dictionary/combiner dimensions disagree");
  }
  for (Index c = 0; c < m; ++c) {
    for (Index r = 0; r < n; ++r) {
      const double p = prob_dict(r, c);
      if (!(p >= 0.0 && p <= 1.0)) {
        throw InvariantError("probability dictionary entry out of [0,1]");
      }
      const double w = weight_dict(r, c);
      if (!(w > 0.0 && w <= weight_cap)) {
        throw InvariantError("weight dictionary entry outside (0, cap]");
      }
    }
  }
  for (const Vector* comb : {&prob_combiner, &weight_combiner}) {
    if (std::abs(comb->sum() - 1.0) > simplex_tol || comb->minCoeff() < -simplex_tol) {
      throw InvariantError("combiner is off the probability simplex");
    }
  }
}

EnsembleAttachment make_ensemble(const ExpandingGraph& graph,
                                 const std::vector<AttachmentRule>& rules,
                                 double weight_cap, Rng& rng) {
  if (rules.empty()) throw ConfigError("ensemble needs at least one rule");
  if (!(weight_cap > 0.0)) throw ConfigError("weight cap must be positive");
  const Index n = graph.node_count();
  const Index m = static_cast<Index>(rules.size());
  EnsembleAttachment ens;
  ens.rules = rules;
  ens.weight_cap = weight_cap;
  ens.prob_dict.resize(n, m);
  ens.weight_dict.resize(n, m);
  for (Index c = 0; c < m; ++c) {
    ens.prob_dict.col(c) = rule_probabilities(rules[static_cast<std::size_t>(c)], graph).model.probs;
  }
  for (Index r = 0; r < n; ++r) {
    for (Index c = 0; c < m; ++c) ens.weight_dict(r, c) = rng.uniform_open(weight_cap);
  }
  ens.prob_combiner = Vector::Constant(m, 1.0 / static_cast<double>(m));
  ens.weight_combiner = Vector::Constant(m, 1.0 / static_cast<double>(m));
  return ens;
}

StochasticAttachment compose_ensemble(const EnsembleAttachment& ens, double simplex_tol) {
  ens.validate(simplex_tol);
  StochasticAttachment sa;
  sa.probs = ens.prob_dict * ens.prob_combiner;
  sa.weights = ens.weight_dict * ens.weight_combiner;
  // Convex combinations of valid columns stay in range; clamp rounding dust.
  sa.probs = sa.probs.cwiseMax(0.0).cwiseMin(1.0);
  sa.weights = sa.weights.cwiseMin(ens.weight_cap);
  return sa;
}

EnsembleAttachment append_ensemble_row(const EnsembleAttachment& ens,
                                       const ExpandingGraph& graph_after, Rng& rng) {
  if (graph_after.node_count() != ens.node_count() + 1) {
    throw DimensionError("ensemble append expects exactly one new node");
  }
  EnsembleAttachment out = ens;
  const Index n = graph_after.node_count();
  const Index m = ens.rule_count();
  out.prob_dict.resize(n, m);
  for (Index c = 0; c < m; ++c) {
    out.prob_dict.col(c) =
        rule_probabilities(ens.rules[static_cast<std::size_t>(c)], graph_after).model.probs;
  }
  out.weight_dict.conservativeResize(n, m);
  for (Index c = 0; c < m; ++c) out.weight_dict(n - 1, c) = rng.uniform_open(ens.weight_cap);
  return out;
}

Vector project_simplex(const Vector& v) {
  const Index m = v.size();
  if (m < 1) throw ConfigError("simplex projection needs at least one coordinate");
  std::vector<Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(), [&](Index a, Index b) {
    if (v[a] != v[b]) return v[a] > v[b];
    return a < b;  // deterministic tie-break
  });
  double cumulative = 0.0;
  double tau = 0.0;
  Index support = 0;
  for (Index k = 0; k < m; ++k) {
    cumulative += v[order[static_cast<std::size_t>(k)]];
    const double candidate = (cumulative - 1.0) / static_cast<double>(k + 1);
    if (v[order[static_cast<std::size_t>(k)]] - candidate > 0.0) {
      tau = candidate;
      support = k + 1;
    }
  }
  (void)support;
  return (v.array() - tau).cwiseMax(0.0);
}

}  // namespace ogf
