#pragma once

#include <string>
#include <vector>

#include "ogf/common.hpp"
#include "ogf/graph.hpp"
#include "ogf/rng.hpp"

namespace ogf {

/// Weighted-Bernoulli attachment model for one incoming node: entry i is
/// present with probability probs[i] and carries weights[i] when present.
struct StochasticAttachment {
  Vector probs;
  Vector weights;

  void validate(double weight_cap = 0.0) const;
};

struct AttachmentMoments {
  Vector mean;      // p ∘ w
  Vector cov_diag;  // w∘² ∘ p ∘ (1-p); the covariance matrix is diag(cov_diag)
};

/// Exact first and second moments of the weighted-Bernoulli model.
AttachmentMoments attachment_moments(const StochasticAttachment& sa);

/// Independent Bernoulli draw per node; deterministic under a fixed seed.
AttachmentVector sample_attachment(const StochasticAttachment& sa, Rng& rng);

enum class RuleKind { Uniform, Degree, Betweenness, Eigenvector, Pagerank };

RuleKind rule_kind_from_string(const std::string& name);
std::string to_string(RuleKind kind);

/// One heuristic probability rule. `scale` is the expected number of edges
/// the rule assigns in total (probabilities are normalized to sum to it,
/// then clipped to [0,1]).
struct AttachmentRule {
  RuleKind kind = RuleKind::Uniform;
  double scale = 1.0;  // expected edge count c_e
};

struct RuleProbabilities {
  StochasticAttachment model;
  bool used_fallback = false;  // eigenvector iteration failed to converge
};

/// Rule probabilities over the current graph. Centrality scores are shifted
/// to be nonnegative, normalized to sum `scale`, and clipped at one. Weights
/// are the median edge weight of the current graph on every candidate edge;
/// pass `frozen_weight > 0` to pin them instead.
RuleProbabilities rule_probabilities(const AttachmentRule& rule, const ExpandingGraph& graph,
                                     double frozen_weight = 0.0);

/// Raw centrality scores (before any normalization).
Vector degree_centrality(const ExpandingGraph& graph);          // in+out edge counts
Vector betweenness_centrality(const ExpandingGraph& graph);     // unweighted directed Brandes
Vector eigenvector_centrality(const ExpandingGraph& graph, bool* converged = nullptr,
                              double tol = 1e-10, int max_iters = 1000);
Vector pagerank_centrality(const ExpandingGraph& graph, double damping = 0.85,
                           double tol = 1e-10, int max_iters = 10000);

/// Dictionary of M attachment rules with simplex-constrained combiners.
/// Column m of prob_dict holds rule m's probabilities; weight_dict holds
/// per-rule candidate edge weights in (0, weight_cap].
struct EnsembleAttachment {
  Matrix prob_dict;        // N x M
  Matrix weight_dict;      // N x M
  Vector prob_combiner;    // m, on the simplex
  Vector weight_combiner;  // n, on the simplex
  std::vector<AttachmentRule> rules;
  double weight_cap = 1.0;

  Index rule_count() const { return prob_dict.cols(); }
  Index node_count() const { return prob_dict.rows(); }

  void validate(double simplex_tol = 1e-9) const;
};

/// Fresh ensemble over `graph`: probability columns from the rules, weight
/// columns drawn uniformly in (0, weight_cap], combiners uniform 1/M.
EnsembleAttachment make_ensemble(const ExpandingGraph& graph,
                                 const std::vector<AttachmentRule>& rules,
                                 double weight_cap, Rng& rng);

/// Composite model (P m, W n). Combiners must be on the simplex to within
/// `simplex_tol`; numerical dust outside [0,1] is clamped.
StochasticAttachment compose_ensemble(const EnsembleAttachment& ens,
                                      double simplex_tol = 1e-9);

/// After the graph gained one node: probability columns are recomputed from
/// the rules on the new graph and the weight dictionary gains one row of
/// independent uniform (0, weight_cap] draws. Combiners are untouched.
EnsembleAttachment append_ensemble_row(const EnsembleAttachment& ens,
                                       const ExpandingGraph& graph_after, Rng& rng);

/// Euclidean projection onto the probability simplex via sort-and-threshold.
/// Sorting ties are broken by index for determinism.
Vector project_simplex(const Vector& v);

}  // namespace ogf
