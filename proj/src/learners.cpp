#include "ogf/learners.hpp"

#include <cmath>

namespace ogf {

namespace {

void check_filter(const ShiftMatrix& sm, const Vector& h) {
  if (h.size() != sm.order()) {
    throw DimensionError("filter length " + std::to_string(h.size()) +
                         " does not match shift-matrix order " +
                         std::to_string(sm.order()));
  }
}

void guard_prediction(double prediction) {
  if (!(std::abs(prediction) <= kDivergenceGuard)) {
    throw DivergenceError("prediction magnitude " + std::to_string(prediction) +
                          " exceeds the overflow guard");
  }
}

}  // namespace

Vector backproject(const AttachmentVector& a, const ShiftMatrix& sm) {
  if (a.length != sm.rows()) {
    throw DimensionError("attachment length " + std::to_string(a.length) +
                         " does not match shift-matrix rows " +
                         std::to_string(sm.rows()));
  }
  const Index order = sm.order();
  Vector g = Vector::Zero(order);
  for (const auto& [i, w] : a.entries) {
    for (Index k = 0; k < order; ++k) g[k] += w * sm.at(i, k);
  }
  return g;
}

Vector backproject(const Vector& u, const ShiftMatrix& sm) {
  if (u.size() != sm.rows()) {
    throw DimensionError("vector length " + std::to_string(u.size()) +
                         " does not match shift-matrix rows " +
                         std::to_string(sm.rows()));
  }
  const Index order = sm.order();
  Vector g = Vector::Zero(order);
  for (Index i = 0; i < u.size(); ++i) {
    const double ui = u[i];
    if (ui == 0.0) continue;
    for (Index k = 0; k < order; ++k) g[k] += ui * sm.at(i, k);
  }
  return g;
}

Vector filter_response(const ShiftMatrix& sm, const Vector& h) {
  check_filter(sm, h);
  return sm.view() * h;
}

double predict_deterministic(const AttachmentVector& a, const ShiftMatrix& sm,
                             const Vector& h) {
  check_filter(sm, h);
  return backproject(a, sm).dot(h);
}

double loss_det(const AttachmentVector& a, const ShiftMatrix& sm, const Vector& h,
                double x_true, double mu) {
  const double r = predict_deterministic(a, sm, h) - x_true;
  return 0.5 * r * r + mu * h.squaredNorm();
}

Vector grad_det(const AttachmentVector& a, const ShiftMatrix& sm, const Vector& h,
                double x_true, double mu) {
  check_filter(sm, h);
  const Vector bp = backproject(a, sm);
  const double r = bp.dot(h) - x_true;
  return r * bp + 2.0 * mu * h;
}

Vector project_ball(const Vector& h, double radius) {
  if (radius <= 0.0) return h;
  const double norm = h.norm();
  if (norm <= radius) return h;
  return h * (radius / norm);
}

StepOutcome deterministic_step(OnlineFilterState& state, const AttachmentVector& a,
                               const ShiftMatrix& sm, double x_true,
                               const HyperParams& hp) {
  hp.validate();
  check_filter(sm, state.h);
  const Vector bp = backproject(a, sm);
  const double prediction = bp.dot(state.h);
  guard_prediction(prediction);
  const double r = prediction - x_true;
  const Vector grad = r * bp + 2.0 * hp.mu * state.h;

  StepOutcome out;
  out.prediction = prediction;
  out.record.prediction = prediction;
  out.record.truth = x_true;
  out.record.loss = 0.5 * r * r + hp.mu * state.h.squaredNorm();
  out.record.grad_norm = grad.norm();
  if (hp.eta != 0.0) {
    state.h = project_ball(state.h - hp.eta * grad, hp.ball_radius);
  }
  out.record.filter_norm = state.h.norm();
  return out;
}

namespace {

// Variance back-projection A_x^T (cov ∘ y); exact zeros are skipped so a
// zero-covariance model adds an exact zero vector.
Vector variance_backprojection(const Vector& cov_diag, const Vector& y,
                               const ShiftMatrix& sm) {
  Vector term = Vector::Zero(sm.order());
  for (Index i = 0; i < cov_diag.size(); ++i) {
    const double c = cov_diag[i];
    if (c == 0.0) continue;
    const double cy = c * y[i];
    for (Index k = 0; k < sm.order(); ++k) term[k] += cy * sm.at(i, k);
  }
  return term;
}

double variance_quadratic(const Vector& cov_diag, const Vector& y) {
  double acc = 0.0;
  for (Index i = 0; i < cov_diag.size(); ++i) {
    const double c = cov_diag[i];
    if (c == 0.0) continue;
    acc += c * y[i] * y[i];
  }
  return acc;
}

}  // namespace

StochasticLoss loss_stoch(const StochasticAttachment& sa, const ShiftMatrix& sm,
                          const Vector& h, double x_true, double mu) {
  check_filter(sm, h);
  const AttachmentMoments mom = attachment_moments(sa);
  if (mom.mean.size() != sm.rows()) {
    throw DimensionError("attachment model length does not match shift-matrix rows");
  }
  const double r = backproject(mom.mean, sm).dot(h) - x_true;
  StochasticLoss loss;
  loss.bias_sq = 0.5 * r * r;
  const Vector y = filter_response(sm, h);
  loss.variance = 0.5 * variance_quadratic(mom.cov_diag, y);
  loss.reg = mu * h.squaredNorm();
  loss.total = loss.bias_sq + loss.variance + loss.reg;
  return loss;
}

Vector grad_stoch(const StochasticAttachment& sa, const ShiftMatrix& sm,
                  const Vector& h, double x_true, double mu) {
  check_filter(sm, h);
  const AttachmentMoments mom = attachment_moments(sa);
  if (mom.mean.size() != sm.rows()) {
    throw DimensionError("attachment model length does not match shift-matrix rows");
  }
  const Vector bp = backproject(mom.mean, sm);
  const double r = bp.dot(h) - x_true;
  const Vector y = filter_response(sm, h);
  const Vector vterm = variance_backprojection(mom.cov_diag, y, sm);
  return r * bp + vterm + 2.0 * mu * h;
}

StepOutcome stochastic_step(OnlineFilterState& state, const StochasticAttachment& sa,
                            const ShiftMatrix& sm, double x_true,
                            const HyperParams& hp) {
  hp.validate();
  check_filter(sm, state.h);
  const AttachmentMoments mom = attachment_moments(sa);
  if (mom.mean.size() != sm.rows()) {
    throw DimensionError("attachment model length does not match shift-matrix rows");
  }
  const Vector bp = backproject(mom.mean, sm);
  const double prediction = bp.dot(state.h);
  guard_prediction(prediction);
  const double r = prediction - x_true;
  const Vector y = filter_response(sm, state.h);
  const Vector vterm = variance_backprojection(mom.cov_diag, y, sm);
  const Vector grad = r * bp + vterm + 2.0 * hp.mu * state.h;

  StepOutcome out;
  out.prediction = prediction;
  out.record.prediction = prediction;
  out.record.truth = x_true;
  const double bias_sq = 0.5 * r * r;
  const double variance = 0.5 * variance_quadratic(mom.cov_diag, y);
  out.record.loss = bias_sq + variance + hp.mu * state.h.squaredNorm();
  out.record.grad_norm = grad.norm();
  if (hp.eta != 0.0) {
    state.h = project_ball(state.h - hp.eta * grad, hp.ball_radius);
  }
  out.record.filter_norm = state.h.norm();
  return out;
}

StochasticLoss loss_ada(const EnsembleAttachment& ens, const ShiftMatrix& sm,
                        const Vector& h, double x_true, double mu) {
  return loss_stoch(compose_ensemble(ens), sm, h, x_true, mu);
}

Vector grad_ada_h(const EnsembleAttachment& ens, const ShiftMatrix& sm, const Vector& h,
                  double x_true, double mu) {
  return grad_stoch(compose_ensemble(ens), sm, h, x_true, mu);
}

Vector grad_ada_m(const EnsembleAttachment& ens, const ShiftMatrix& sm, const Vector& h,
                  double x_true, double mu) {
  check_filter(sm, h);
  if (ens.node_count() != sm.rows()) {
    throw DimensionError("ensemble row count does not match shift-matrix rows");
  }
  (void)mu;  // the regularizer does not depend on the combiners
  const Vector pbar = ens.prob_dict * ens.prob_combiner;
  const Vector wbar = ens.weight_dict * ens.weight_combiner;
  const Vector y = filter_response(sm, h);
  const double resid = wbar.cwiseProduct(pbar).dot(y) - x_true;
  const Vector y2w2 = y.array().square() * wbar.array().square();
  return resid * (ens.prob_dict.transpose() * wbar.cwiseProduct(y)) +
         0.5 * (ens.prob_dict.transpose() * y2w2) -
         ens.prob_dict.transpose() * pbar.cwiseProduct(y2w2);
}

Vector grad_ada_n(const EnsembleAttachment& ens, const ShiftMatrix& sm, const Vector& h,
                  double x_true, double mu) {
  check_filter(sm, h);
  if (ens.node_count() != sm.rows()) {
    throw DimensionError("ensemble row count does not match shift-matrix rows");
  }
  (void)mu;
  const Vector pbar = ens.prob_dict * ens.prob_combiner;
  const Vector wbar = ens.weight_dict * ens.weight_combiner;
  const Vector y = filter_response(sm, h);
  const double resid = wbar.cwiseProduct(pbar).dot(y) - x_true;
  return resid * (ens.weight_dict.transpose() * pbar.cwiseProduct(y));
}

StepOutcome adaptive_step(AdaptiveState& state, const EnsembleAttachment& ens,
                          const ShiftMatrix& sm, double x_true, const HyperParams& hp,
                          int steps_per_arrival) {
  hp.validate();
  if (steps_per_arrival < 1) throw ConfigError("steps_per_arrival must be at least 1");
  EnsembleAttachment work = ens;
  work.prob_combiner = state.m;
  work.weight_combiner = state.n;

  const StochasticAttachment composite = compose_ensemble(work);
  const Vector bp = backproject(composite.probs.cwiseProduct(composite.weights), sm);
  const double prediction = bp.dot(state.h);
  guard_prediction(prediction);

  StepOutcome out;
  out.prediction = prediction;
  out.record.prediction = prediction;
  out.record.truth = x_true;
  out.record.loss = loss_stoch(composite, sm, state.h, x_true, hp.mu).total;

  for (int s = 0; s < steps_per_arrival; ++s) {
    const Vector gh = grad_stoch(compose_ensemble(work), sm, state.h, x_true, hp.mu);
    if (s == 0) out.record.grad_norm = gh.norm();
    if (hp.eta != 0.0) {
      state.h = project_ball(state.h - hp.eta * gh, hp.ball_radius);
      const Vector gm = grad_ada_m(work, sm, state.h, x_true, hp.mu);
      state.m = project_simplex(state.m - hp.eta * gm);
      work.prob_combiner = state.m;
      const Vector gn = grad_ada_n(work, sm, state.h, x_true, hp.mu);
      state.n = project_simplex(state.n - hp.eta * gn);
      work.weight_combiner = state.n;
    }
  }
  out.record.filter_norm = state.h.norm();
  return out;
}

StepOutcome prediction_correction_step(OnlineFilterState& state,
                                       const StochasticAttachment& sa,
                                       const AttachmentVector& revealed,
                                       const ShiftMatrix& sm, double x_true,
                                       const HyperParams& hp) {
  StepOutcome out = stochastic_step(state, sa, sm, x_true, hp);
  if (hp.eta != 0.0) {
    const Vector grad = grad_det(revealed, sm, state.h, x_true, hp.mu);
    state.h = project_ball(state.h - hp.eta * grad, hp.ball_radius);
  }
  out.record.filter_norm = state.h.norm();
  return out;
}

BatchSolver::BatchSolver(Index order, double mu) : mu_(mu) {
  if (order < 1) throw ConfigError("filter order must be at least 1");
  if (!(mu > 0.0)) throw ConfigError("batch solve needs mu > 0");
  gram_.setZero(order, order);
  moment_.setZero(order);
}

void BatchSolver::add(const Vector& features, double target) {
  if (features.size() != gram_.rows()) {
    throw DimensionError("batch sample has wrong feature length");
  }
  gram_.selfadjointView<Eigen::Lower>().rankUpdate(features);
  moment_ += features * target;
  ++count_;
}

Vector BatchSolver::solve() const {
  if (count_ == 0) throw ConfigError("batch solve needs at least one sample");
  Matrix system = gram_.selfadjointView<Eigen::Lower>();
  system.diagonal().array() += mu_;
  return system.ldlt().solve(moment_);
}

Vector batch_solve(const std::vector<BatchSample>& stream, Index order, double mu) {
  BatchSolver solver(order, mu);
  for (const auto& sample : stream) solver.add(sample.features, sample.target);
  return solver.solve();
}

Vector pretrain(const ExpandingGraph& graph0, const Vector& x0, const HyperParams& hp) {
  hp.validate();
  if (graph0.node_count() == 0) throw DimensionError("pretraining needs a nonempty graph");
  if (x0.size() != graph0.node_count()) {
    throw DimensionError("signal length does not match starting graph");
  }
  BatchSolver solver(hp.order, hp.mu);
  Vector masked = x0;
  for (Index i = 0; i < graph0.node_count(); ++i) {
    masked[i] = 0.0;
    const ShiftMatrix sm = build_shift_matrix(graph0, masked, hp.order);
    AttachmentVector a;
    a.length = graph0.node_count();
    a.entries = graph0.incoming(i);
    solver.add(backproject(a, sm), x0[i]);
    masked[i] = x0[i];
  }
  return project_ball(solver.solve(), hp.ball_radius);
}

}  // namespace ogf
