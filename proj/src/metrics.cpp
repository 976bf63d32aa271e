#include "ogf/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace ogf {

std::vector<double> normalized_regret(const RegretLedger& ledger) {
  if (ledger.online_losses.size() != ledger.comparator_losses.size()) {
    throw DimensionError("online and comparator loss series differ in length");
  }
  std::vector<double> out(ledger.online_losses.size());
  double cumulative = 0.0;
  for (std::size_t t = 0; t < out.size(); ++t) {
    cumulative += ledger.online_losses[t] - ledger.comparator_losses[t];
    out[t] = cumulative / static_cast<double>(t + 1);
  }
  return out;
}

std::vector<double> bound_deterministic_terms(const RegretBoundParams& p, Index T) {
  if (T < 1) throw ConfigError("bound horizon must be at least 1");
  const double ld = p.lipschitz();
  if (p.eta == 0.0) {
    return {std::numeric_limits<double>::infinity(), 0.0};
  }
  return {p.comparator_norm * p.comparator_norm / (2.0 * p.eta * static_cast<double>(T)),
          0.5 * p.eta * ld * ld};
}

double bound_deterministic(const RegretBoundParams& p, Index T) {
  const auto terms = bound_deterministic_terms(p, T);
  return std::accumulate(terms.begin(), terms.end(), 0.0);
}

namespace {

void check_horizon(std::size_t have, Index T) {
  if (T < 1) throw ConfigError("bound horizon must be at least 1");
  if (have < static_cast<std::size_t>(T)) {
    throw ConfigError("bound evaluation needs per-step series up to the horizon");
  }
}

}  // namespace

std::vector<double> bound_stochastic_terms(const RegretBoundParams& p,
                                           const StochasticSeries& s, Index T) {
  check_horizon(std::min({s.prob_norm_sq.size(), s.max_variance.size(),
                          s.filter_distance.size()}),
                T);
  const double w2y2 = p.weight_cap * p.weight_cap * p.response_bound * p.response_bound;
  const double rwy = p.residual_bound * p.weight_cap * p.response_bound;
  const double ld = p.lipschitz();
  double model_sq = 0.0, model_cross = 0.0, variance = 0.0, distance = 0.0;
  for (Index t = 0; t < T; ++t) {
    const auto i = static_cast<std::size_t>(t);
    const double pn = s.prob_norm_sq[i] + p.max_edges;
    model_sq += w2y2 * pn;
    model_cross += 2.0 * rwy * std::sqrt(pn);
    variance += w2y2 * s.max_variance[i];
    distance += ld * s.filter_distance[i];
  }
  const double inv_t = 1.0 / static_cast<double>(T);
  const auto tail = bound_deterministic_terms(p, T);
  return {model_sq * inv_t, model_cross * inv_t, variance * inv_t, distance * inv_t,
          tail[0], tail[1]};
}

double bound_stochastic(const RegretBoundParams& p, const StochasticSeries& s, Index T) {
  const auto terms = bound_stochastic_terms(p, s, T);
  return std::accumulate(terms.begin(), terms.end(), 0.0);
}

double bound_uniform_asymptotic(const RegretBoundParams& p, const StochasticSeries& s,
                                Index T) {
  check_horizon(s.filter_distance.size(), T);
  const double w2y2 = p.weight_cap * p.weight_cap * p.response_bound * p.response_bound;
  const double rwy = p.residual_bound * p.weight_cap * p.response_bound;
  const double ld = p.lipschitz();
  double distance = 0.0;
  for (Index t = 0; t < T; ++t) distance += s.filter_distance[static_cast<std::size_t>(t)];
  const auto tail = bound_deterministic_terms(p, T);
  return w2y2 * p.max_edges + rwy * (p.max_edges + 1.0) +
         ld * distance / static_cast<double>(T) + tail[0] + tail[1];
}

std::vector<double> bound_adaptive_terms(const RegretBoundParams& p,
                                         const AdaptiveSeries& s, Index T) {
  check_horizon(std::min({s.frob_sq.size(), s.spectral_sq.size(), s.max_row_norm.size(),
                          s.filter_distance.size()}),
                T);
  const double w2y2 = p.weight_cap * p.weight_cap * p.response_bound * p.response_bound;
  const double rwy = p.residual_bound * p.weight_cap * p.response_bound;
  const double ld = p.lipschitz();
  double dict_sq = 0.0, dict_spectral = 0.0, row_norm = 0.0, distance = 0.0;
  for (Index t = 0; t < T; ++t) {
    const auto i = static_cast<std::size_t>(t);
    dict_sq += w2y2 * (s.frob_sq[i] + p.max_edges);
    dict_spectral += rwy * s.spectral_sq[i];
    row_norm += w2y2 * s.max_row_norm[i];
    distance += ld * s.filter_distance[i];
  }
  const double inv_t = 1.0 / static_cast<double>(T);
  const auto tail = bound_deterministic_terms(p, T);
  return {dict_sq * inv_t,       dict_spectral * inv_t, rwy * (1.0 + p.max_edges),
          row_norm * inv_t,      distance * inv_t,      tail[0],
          tail[1]};
}

double bound_adaptive(const RegretBoundParams& p, const AdaptiveSeries& s, Index T) {
  const auto terms = bound_adaptive_terms(p, s, T);
  return std::accumulate(terms.begin(), terms.end(), 0.0);
}

double nrmse(const std::vector<double>& predictions, const std::vector<double>& truths) {
  if (predictions.size() != truths.size()) {
    throw DimensionError("prediction and truth series differ in length");
  }
  if (predictions.empty()) throw DimensionError("NRMSE needs at least one sample");
  const auto [lo, hi] = std::minmax_element(truths.begin(), truths.end());
  if (*hi <= *lo) {
    throw InvariantError("NRMSE is undefined for a constant truth vector");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < truths.size(); ++i) {
    const double d = predictions[i] - truths[i];
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(truths.size())) / (*hi - *lo);
}

}  // namespace ogf
