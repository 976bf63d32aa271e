#pragma once

#include <vector>

#include "ogf/attachment.hpp"
#include "ogf/common.hpp"
#include "ogf/graph.hpp"

namespace ogf {

/// Learning-rate, ridge weight, filter order, and energy-ball radius shared
/// by the online learners.
struct HyperParams {
  double eta = 0.1;         // step size, >= 0 (0 means evaluation only)
  double mu = 1e-3;         // l2 penalty weight, > 0
  Index order = 5;          // filter order K >= 1
  double ball_radius = 0.0;  // H; <= 0 means unconstrained

  void validate() const {
    if (eta < 0.0) throw ConfigError("learning rate must be nonnegative");
    if (!(mu > 0.0)) throw ConfigError("regularization weight must be positive");
    if (order < 1) throw ConfigError("filter order must be at least 1");
  }
};

/// One online step's outcome, serialized as
/// t,prediction,truth,loss,grad_norm,filter_norm.
struct StepRecord {
  Index t = 0;
  double prediction = 0.0;
  double truth = 0.0;
  double loss = 0.0;
  double grad_norm = 0.0;
  double filter_norm = 0.0;
};

/// Predictions above this magnitude abort the run instead of propagating
/// overflow into the records.
inline constexpr double kDivergenceGuard = 1e12;

// --- shared arithmetic kernels -------------------------------------------
//
// Both the deterministic path (sparse attachment) and the stochastic path
// (dense expected attachment with zeros skipped) accumulate in ascending
// node order, so a binary-probability model reproduces the deterministic
// trace bit for bit.

/// A_x^T a for a sparse attachment; O(K * nnz).
Vector backproject(const AttachmentVector& a, const ShiftMatrix& sm);

/// A_x^T u for a dense vector, skipping exact zeros; O(K * N).
Vector backproject(const Vector& u, const ShiftMatrix& sm);

/// A_x h (the filter response at every existing node).
Vector filter_response(const ShiftMatrix& sm, const Vector& h);

// --- deterministic setting ------------------------------------------------

/// a^T A_x h computed through the sparse attachment.
double predict_deterministic(const AttachmentVector& a, const ShiftMatrix& sm,
                             const Vector& h);

/// 1/2 (a^T A_x h - x)^2 + mu ||h||^2
double loss_det(const AttachmentVector& a, const ShiftMatrix& sm, const Vector& h,
                double x_true, double mu);

/// (a^T A_x h - x) A_x^T a + 2 mu h
Vector grad_det(const AttachmentVector& a, const ShiftMatrix& sm, const Vector& h,
                double x_true, double mu);

/// Radial projection onto the ball ||h|| <= radius (no-op inside).
Vector project_ball(const Vector& h, double radius);

struct OnlineFilterState {
  Vector h;
};

struct StepOutcome {
  double prediction = 0.0;
  StepRecord record;
};

/// One projected-gradient step with the attachment known before prediction.
StepOutcome deterministic_step(OnlineFilterState& state, const AttachmentVector& a,
                               const ShiftMatrix& sm, double x_true,
                               const HyperParams& hp);

// --- stochastic setting ----------------------------------------------------

struct StochasticLoss {
  double total = 0.0;
  double bias_sq = 0.0;   // 1/2 ((w∘p)^T A_x h - x)^2
  double variance = 0.0;  // 1/2 (A_x h)^T Σ (A_x h)
  double reg = 0.0;       // mu ||h||^2
};

/// Exact expectation of the squared-error loss under the weighted-Bernoulli
/// attachment model.
StochasticLoss loss_stoch(const StochasticAttachment& sa, const ShiftMatrix& sm,
                          const Vector& h, double x_true, double mu);

/// ((w∘p)^T A_x h - x) A_x^T (w∘p) + A_x^T Σ A_x h + 2 mu h
Vector grad_stoch(const StochasticAttachment& sa, const ShiftMatrix& sm,
                  const Vector& h, double x_true, double mu);

/// One stochastic step: predict from the model moments, update, and leave
/// the revealed attachment to the caller for the graph expansion.
StepOutcome stochastic_step(OnlineFilterState& state, const StochasticAttachment& sa,
                            const ShiftMatrix& sm, double x_true, const HyperParams& hp);

// --- adaptive ensemble setting ---------------------------------------------

struct AdaptiveState {
  Vector h;
  Vector m;  // probability combiner, on the simplex
  Vector n;  // weight combiner, on the simplex
};

/// Stochastic loss at the composite moments (P m, W n).
StochasticLoss loss_ada(const EnsembleAttachment& ens, const ShiftMatrix& sm,
                        const Vector& h, double x_true, double mu);

Vector grad_ada_h(const EnsembleAttachment& ens, const ShiftMatrix& sm, const Vector& h,
                  double x_true, double mu);

/// Gradient of the composite loss w.r.t. the probability combiner:
/// resid P^T(Wn ∘ A_x h) + 1/2 P^T((A_x h)∘² ∘ (Wn)∘²) - P^T(Pm ∘ (A_x h)∘² ∘ (Wn)∘²).
Vector grad_ada_m(const EnsembleAttachment& ens, const ShiftMatrix& sm, const Vector& h,
                  double x_true, double mu);

/// Bias-term gradient w.r.t. the weight combiner: resid W^T(Pm ∘ A_x h).
/// The variance's dependence on n is intentionally not included.
Vector grad_ada_n(const EnsembleAttachment& ens, const ShiftMatrix& sm, const Vector& h,
                  double x_true, double mu);

/// Alternating projected steps, h then m then n, repeated
/// `steps_per_arrival` times; each gradient is evaluated at the latest
/// iterate. The ensemble's combiners are read from `state`, not `ens`.
StepOutcome adaptive_step(AdaptiveState& state, const EnsembleAttachment& ens,
                          const ShiftMatrix& sm, double x_true, const HyperParams& hp,
                          int steps_per_arrival = 1);

// --- prediction-correction --------------------------------------------------

/// One stochastic step followed, once the true attachment is revealed, by one
/// deterministic gradient step on the same sample. Both phases share eta and
/// mu; the correction starts from the post-prediction filter.
StepOutcome prediction_correction_step(OnlineFilterState& state,
                                       const StochasticAttachment& sa,
                                       const AttachmentVector& revealed,
                                       const ShiftMatrix& sm, double x_true,
                                       const HyperParams& hp);

// --- batch and pre-trained baselines -----------------------------------------

struct BatchSample {
  Vector features;  // A_x^T a, the prediction row
  double target = 0.0;
};

/// Accumulates the normal equations (G^T G + mu I) h = G^T x row by row and
/// solves once; singularity cannot occur for mu > 0.
class BatchSolver {
 public:
  explicit BatchSolver(Index order, double mu);

  void add(const Vector& features, double target);
  Index sample_count() const { return count_; }

  Vector solve() const;

 private:
  Matrix gram_;
  Vector moment_;
  double mu_;
  Index count_ = 0;
};

/// h* = argmin sum_t (a_t^T A_x,t h - x_t)^2 + mu ||h||^2 over a recorded
/// stream of prediction rows.
Vector batch_solve(const std::vector<BatchSample>& stream, Index order, double mu);

/// Masked self-prediction fit on the starting graph: each node plays the
/// incoming role once, predicted from its own incoming edges with its signal
/// entry zeroed. Result is projected onto the energy ball when one is set.
Vector pretrain(const ExpandingGraph& graph0, const Vector& x0, const HyperParams& hp);

}  // namespace ogf
