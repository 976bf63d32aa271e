#pragma once

#include <vector>

#include "ogf/common.hpp"

namespace ogf {

/// Per-step online losses paired with the losses of a fixed comparator
/// filter replayed over the same steps.
struct RegretLedger {
  std::vector<double> online_losses;
  std::vector<double> comparator_losses;
};

/// Normalized static regret series: (sum online - sum comparator) / t for
/// every prefix length t.
std::vector<double> normalized_regret(const RegretLedger& ledger);

/// Constants entering the analytic regret bounds. In audits they are
/// instantiated from running maxima observed over the run rather than
/// a-priori values.
struct RegretBoundParams {
  double residual_bound = 0.0;   // R: max |a^T A_x h - x|
  double feature_bound = 0.0;    // C: max ||A_x^T a||
  double response_bound = 0.0;   // Y: max ||A_x h||
  double weight_cap = 0.0;       // w_h
  double max_edges = 0.0;        // M_max
  double filter_cap = 0.0;       // H (max filter norm)
  double eta = 0.0;
  double mu = 0.0;
  double comparator_norm = 0.0;  // ||h*||

  /// L_d = R C + 2 mu H
  double lipschitz() const { return residual_bound * feature_bound + 2.0 * mu * filter_cap; }
};

/// ||h*||^2 / (2 eta T) + (eta/2) L_d^2. Infinite for eta = 0.
double bound_deterministic(const RegretBoundParams& p, Index T);
std::vector<double> bound_deterministic_terms(const RegretBoundParams& p, Index T);

/// Per-step environment series entering the stochastic bound.
struct StochasticSeries {
  std::vector<double> prob_norm_sq;     // ||p_t||^2
  std::vector<double> max_variance;     // max_n p_n (1 - p_n)
  std::vector<double> filter_distance;  // ||h_stoch(t-1) - h_det(t-1)||
};

/// Term-wise evaluation of the stochastic regret bound at horizon T:
/// mean over t<=T of [w^2 Y^2 (||p||^2 + M), 2 R w Y sqrt(||p||^2 + M),
/// w^2 Y^2 sigma_t^2, L_d dist_t], then the deterministic tail.
std::vector<double> bound_stochastic_terms(const RegretBoundParams& p,
                                           const StochasticSeries& s, Index T);
double bound_stochastic(const RegretBoundParams& p, const StochasticSeries& s, Index T);

/// Closed-form limit of the stochastic bound under uniform attachment:
/// w^2 M Y^2 + R w Y (M + 1) + mean L_d dist + tail.
double bound_uniform_asymptotic(const RegretBoundParams& p,
                                const StochasticSeries& s, Index T);

/// Per-step dictionary series entering the adaptive bound.
struct AdaptiveSeries {
  std::vector<double> frob_sq;          // ||P_{t-1}||_F^2
  std::vector<double> spectral_sq;      // ||P_{t-1}||_2^2
  std::vector<double> max_row_norm;     // max_n ||[P_{t-1}]_{n,:}||_2
  std::vector<double> filter_distance;  // ||h_ada(t-1) - h_det(t-1)||
};

std::vector<double> bound_adaptive_terms(const RegretBoundParams& p,
                                         const AdaptiveSeries& s, Index T);
double bound_adaptive(const RegretBoundParams& p, const AdaptiveSeries& s, Index T);

/// Root mean squared error divided by the truth's range. Throws when the
/// truth vector is constant.
double nrmse(const std::vector<double>& predictions, const std::vector<double>& truths);

}  // namespace ogf
