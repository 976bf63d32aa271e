#include <doctest.h>

#include <cmath>

#include "ogf/attachment.hpp"
#include "ogf/rng.hpp"
#include "oracles.hpp"

using namespace ogf;

TEST_CASE("attachment_moments: scaled Bernoulli endpoints") {
  StochasticAttachment sa;
  sa.probs = Vector::Constant(1, 0.5);
  sa.weights = Vector::Constant(1, 2.0);
  const auto m = attachment_moments(sa);
  CHECK(m.mean[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(m.cov_diag[0] == doctest::Approx(1.0).epsilon(1e-15));

  sa.probs = Vector(2);
  sa.probs << 1.0, 0.0;
  sa.weights = Vector::Constant(2, 3.0);
  const auto m2 = attachment_moments(sa);
  CHECK(m2.mean[0] == 3.0);
  CHECK(m2.mean[1] == 0.0);
  CHECK(m2.cov_diag[0] == 0.0);
  CHECK(m2.cov_diag[1] == 0.0);
}

TEST_CASE("attachment_moments: exact enumeration for small N") {
  Rng rng(101);
  for (int rep = 0; rep < 20; ++rep) {
    const Index n = 2 + static_cast<Index>(rng.integer(10));  // up to 11
    const StochasticAttachment sa = oracle::random_model(n, rng);
    Vector mean, cov;
    oracle::exhaustive_moments(sa, mean, cov);
    const auto m = attachment_moments(sa);
    CHECK((m.mean - mean).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((m.cov_diag - cov).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("attachment_moments: Monte-Carlo agreement within sampling error") {
  Rng rng(103);
  const Index n = 10;
  const StochasticAttachment sa = oracle::random_model(n, rng);
  const int draws = 1000000;
  Vector sum = Vector::Zero(n), sum_sq = Vector::Zero(n);
  for (int d = 0; d < draws; ++d) {
    const AttachmentVector a = sample_attachment(sa, rng);
    for (const auto& [i, w] : a.entries) {
      sum[i] += w;
      sum_sq[i] += w * w;
    }
  }
  const auto m = attachment_moments(sa);
  for (Index i = 0; i < n; ++i) {
    const double emp_mean = sum[i] / draws;
    const double emp_var = sum_sq[i] / draws - emp_mean * emp_mean;
    const double se_mean = std::sqrt(m.cov_diag[i] / draws);
    CHECK(std::abs(emp_mean - m.mean[i]) <= 4.0 * se_mean + 1e-9);
    // Exact sampling error of the variance estimator from the model's
    // fourth central moment.
    const double p = sa.probs[i], w = sa.weights[i];
    const double mu4 =
        std::pow(w, 4) * p * (1.0 - p) * (std::pow(1.0 - p, 3) + p * p * p);
    const double se_var = std::sqrt(std::max(mu4 - m.cov_diag[i] * m.cov_diag[i], 0.0) /
                                    draws);
    CHECK(std::abs(emp_var - m.cov_diag[i]) <= 4.0 * se_var + 1e-9);
  }
}

TEST_CASE("sample_attachment: degenerate probabilities") {
  Rng rng(107);
  StochasticAttachment sa;
  sa.probs = Vector::Ones(6);
  sa.weights = Vector::Constant(6, 0.25);
  const AttachmentVector all = sample_attachment(sa, rng);
  CHECK(all.nnz() == 6);
  for (const auto& [i, w] : all.entries) CHECK(w == 0.25);

  sa.probs = Vector::Zero(6);
  const AttachmentVector none = sample_attachment(sa, rng);
  CHECK(none.nnz() == 0);
}

TEST_CASE("sample_attachment: inclusion frequency near the probability") {
  Rng rng(109);
  StochasticAttachment sa;
  sa.probs = Vector::Constant(50, 0.3);
  sa.weights = Vector::Ones(50);
  const int draws = 20000;
  Vector count = Vector::Zero(50);
  for (int d = 0; d < draws; ++d) {
    for (const auto& [i, w] : sample_attachment(sa, rng).entries) count[i] += 1.0;
  }
  const double se = std::sqrt(0.3 * 0.7 / draws);
  for (Index i = 0; i < 50; ++i) {
    CHECK(std::abs(count[i] / draws - 0.3) <= 4.0 * se);
  }
}

TEST_CASE("sample_attachment: deterministic under a fixed seed") {
  Rng a(77), b(77);
  StochasticAttachment sa = oracle::random_model(20, a);
  Rng r1(123), r2(123);
  const auto s1 = sample_attachment(sa, r1);
  const auto s2 = sample_attachment(sa, r2);
  CHECK(s1.entries == s2.entries);
  (void)b;
}

TEST_CASE("rule_probabilities: uniform mass decays as c_e over N") {
  Rng rng(211);
  ExpandingGraph g = oracle::random_graph(4, 0.5, rng);
  const AttachmentRule rule{RuleKind::Uniform, 1.0};
  auto rp = rule_probabilities(rule, g);
  for (Index i = 0; i < 4; ++i) CHECK(rp.model.probs[i] == 0.25);

  for (int step = 0; step < 20; ++step) {
    g = expand(g, oracle::random_attachment(g.node_count(), 2, rng));
    rp = rule_probabilities(rule, g);
    const double expect = 1.0 / static_cast<double>(g.node_count());
    for (Index i = 0; i < g.node_count(); ++i) CHECK(rp.model.probs[i] == expect);
  }
}

TEST_CASE("rule_probabilities: degree rule on a star graph") {
  // Centre has out-degree 3; with total (in+out) degree the centre carries
  // half the mass and each leaf one sixth.
  const ExpandingGraph g =
      ExpandingGraph::from_edges(4, {{0, 1, 1.0}, {0, 2, 1.0}, {0, 3, 1.0}});
  const auto rp = rule_probabilities({RuleKind::Degree, 1.0}, g);
  CHECK(rp.model.probs[0] == doctest::Approx(0.5).epsilon(1e-12));
  for (Index leaf = 1; leaf < 4; ++leaf) {
    CHECK(rp.model.probs[leaf] == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
  }
}

TEST_CASE("rule_probabilities: pagerank matches an independent power iteration") {
  Rng rng(213);
  const ExpandingGraph g = oracle::random_graph(6, 0.5, rng);

  // Dense power-iteration oracle with uniform teleport and dangling spread.
  const Index n = g.node_count();
  const Matrix a = g.dense();
  Vector out_deg = Vector::Zero(n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      if (a(i, j) != 0.0) out_deg[j] += 1.0;
    }
  }
  Vector pr = Vector::Constant(n, 1.0 / n);
  for (int it = 0; it < 200000; ++it) {
    Vector next = Vector::Constant(n, 0.15 / n);
    double dangling = 0.0;
    for (Index j = 0; j < n; ++j) {
      if (out_deg[j] == 0.0) dangling += pr[j];
    }
    next.array() += 0.85 * dangling / n;
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < n; ++j) {
        if (a(i, j) != 0.0) next[i] += 0.85 * pr[j] / out_deg[j];
      }
    }
    const double delta = (next - pr).lpNorm<1>();
    pr = next;
    if (delta < 1e-14) break;
  }

  const Vector got = pagerank_centrality(g);
  CHECK((got - pr).cwiseAbs().maxCoeff() <= 1e-9);

  const auto rp = rule_probabilities({RuleKind::Pagerank, 1.0}, g);
  const Vector expect = pr / pr.sum();
  CHECK((rp.model.probs - expect).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("rule_probabilities: betweenness on a directed path concentrates inside") {
  // 0 -> 1 -> 2 -> 3: only the interior nodes lie on shortest paths.
  const ExpandingGraph g =
      ExpandingGraph::from_edges(4, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}});
  const Vector bc = betweenness_centrality(g);
  CHECK(bc[0] == 0.0);
  CHECK(bc[3] == 0.0);
  CHECK(bc[1] == doctest::Approx(2.0));  // pairs (0,2), (0,3)
  CHECK(bc[2] == doctest::Approx(2.0));  // pairs (0,3), (1,3)
}

TEST_CASE("rule_probabilities: eigenvector centrality matches the dominant eigenvector") {
  Rng rng(217);
  const ExpandingGraph g = oracle::random_graph(7, 0.6, rng);
  bool converged = false;
  const Vector v = eigenvector_centrality(g, &converged);
  REQUIRE(converged);
  const Matrix at = g.dense().transpose();
  const Vector image = at * v;
  const double lambda = v.dot(image);
  CHECK((image - lambda * v).norm() <= 1e-8);
}

TEST_CASE("rule_probabilities: weights are the median edge weight") {
  const ExpandingGraph g = ExpandingGraph::from_edges(
      3, {{0, 1, 0.2}, {1, 2, 0.6}, {0, 2, 0.4}});
  const auto rp = rule_probabilities({RuleKind::Uniform, 1.0}, g);
  for (Index i = 0; i < 3; ++i) CHECK(rp.model.weights[i] == 0.4);

  const auto frozen = rule_probabilities({RuleKind::Uniform, 1.0}, g, 0.125);
  for (Index i = 0; i < 3; ++i) CHECK(frozen.model.weights[i] == 0.125);
}

TEST_CASE("compose_ensemble: one-hot combiner selects a column") {
  Rng rng(301);
  const ExpandingGraph g = oracle::random_graph(6, 0.5, rng);
  EnsembleAttachment ens = make_ensemble(
      g, {{RuleKind::Uniform, 1.0}, {RuleKind::Degree, 1.0}}, 1.0, rng);
  ens.prob_combiner = Vector::Zero(2);
  ens.prob_combiner[1] = 1.0;
  const auto sa = compose_ensemble(ens);
  CHECK((sa.probs - ens.prob_dict.col(1)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("compose_ensemble: identical columns are a fixed point") {
  Rng rng(303);
  EnsembleAttachment ens;
  ens.rules = {{RuleKind::Uniform, 1.0}, {RuleKind::Uniform, 1.0}};
  ens.weight_cap = 1.0;
  const Vector col = (oracle::random_vector(5, rng).array().abs() * 0.8 + 0.1).matrix();
  ens.prob_dict.resize(5, 2);
  ens.prob_dict.col(0) = col;
  ens.prob_dict.col(1) = col;
  ens.weight_dict = Matrix::Constant(5, 2, 0.5);
  ens.prob_combiner = Vector::Constant(2, 0.5);
  ens.weight_combiner = Vector::Constant(2, 0.5);
  const auto sa = compose_ensemble(ens);
  CHECK((sa.probs - col).cwiseAbs().maxCoeff() == 0.0);

  ens.prob_combiner << 0.3, 0.7;
  const auto sa2 = compose_ensemble(ens);
  CHECK((sa2.probs - col).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("compose_ensemble: convex combination stays within column bounds") {
  Rng rng(307);
  for (int rep = 0; rep < 50; ++rep) {
    const Index n = 3 + static_cast<Index>(rng.integer(8));
    const Index m = 2 + static_cast<Index>(rng.integer(3));
    EnsembleAttachment ens;
    ens.weight_cap = 1.0;
    ens.prob_dict.resize(n, m);
    ens.weight_dict.resize(n, m);
    for (Index r = 0; r < n; ++r) {
      for (Index c = 0; c < m; ++c) {
        ens.prob_dict(r, c) = rng.uniform();
        ens.weight_dict(r, c) = rng.uniform_open(1.0);
      }
    }
    ens.rules.assign(static_cast<std::size_t>(m), {RuleKind::Uniform, 1.0});
    Vector mix = (oracle::random_vector(m, rng).array().abs() + 0.01).matrix();
    mix /= mix.sum();
    ens.prob_combiner = mix;
    ens.weight_combiner = Vector::Constant(m, 1.0 / static_cast<double>(m));
    const auto sa = compose_ensemble(ens);
    sa.validate(ens.weight_cap);
    for (Index r = 0; r < n; ++r) {
      CHECK(sa.probs[r] >= ens.prob_dict.row(r).minCoeff() - 1e-12);
      CHECK(sa.probs[r] <= ens.prob_dict.row(r).maxCoeff() + 1e-12);
    }
  }
}

TEST_CASE("compose_ensemble: off-simplex combiner is rejected") {
  Rng rng(311);
  const ExpandingGraph g = oracle::random_graph(4, 0.5, rng);
  EnsembleAttachment ens = make_ensemble(g, {{RuleKind::Uniform, 1.0}}, 1.0, rng);
  ens.prob_combiner = Vector::Constant(1, 1.5);
  CHECK_THROWS_AS(compose_ensemble(ens), InvariantError);
}

TEST_CASE("append_ensemble_row: uniform rule column tracks the new size") {
  Rng rng(313);
  ExpandingGraph g = oracle::random_graph(3, 0.8, rng);
  EnsembleAttachment ens = make_ensemble(g, {{RuleKind::Uniform, 1.0}}, 1.0, rng);
  g = expand(g, oracle::random_attachment(3, 1, rng));
  ens = append_ensemble_row(ens, g, rng);
  CHECK(ens.node_count() == 4);
  for (Index i = 0; i < 4; ++i) CHECK(ens.prob_dict(i, 0) == 0.25);
  CHECK(ens.weight_dict(3, 0) > 0.0);
  CHECK(ens.weight_dict(3, 0) <= 1.0);
}

TEST_CASE("append_ensemble_row: columns stay valid over long runs") {
  Rng rng(317);
  ExpandingGraph g = oracle::random_graph(5, 0.5, rng);
  EnsembleAttachment ens = make_ensemble(
      g, {{RuleKind::Uniform, 1.0}, {RuleKind::Degree, 1.0}, {RuleKind::Pagerank, 1.0}},
      1.0, rng);
  for (int step = 0; step < 50; ++step) {
    g = expand(g, oracle::random_attachment(g.node_count(), 2, rng));
    ens = append_ensemble_row(ens, g, rng);
    ens.validate();
    CHECK(ens.node_count() == g.node_count());
  }
}

TEST_CASE("project_simplex: points on the simplex are fixed") {
  Rng rng(401);
  for (int rep = 0; rep < 20; ++rep) {
    Vector v = (oracle::random_vector(4, rng).array().abs() + 0.01).matrix();
    v /= v.sum();
    CHECK((project_simplex(v) - v).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("project_simplex: dominant coordinate saturates") {
  Vector v(2);
  v << 10.0, 0.0;
  const Vector p = project_simplex(v);
  CHECK(p[0] == 1.0);
  CHECK(p[1] == 0.0);
}

TEST_CASE("project_simplex: matches the brute-force support-set oracle") {
  Rng rng(403);
  for (int rep = 0; rep < 200; ++rep) {
    const Index m = 2 + static_cast<Index>(rng.integer(3));  // up to 4
    const Vector v = oracle::random_vector(m, rng, 3.0);
    const Vector got = project_simplex(v);
    const Vector want = oracle::brute_force_simplex_projection(v);
    CHECK((got - want).cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("project_simplex: closer than random simplex points") {
  Rng rng(407);
  const Vector v = oracle::random_vector(5, rng, 2.0);
  const Vector p = project_simplex(v);
  const double d = (p - v).norm();
  for (int rep = 0; rep < 1000; ++rep) {
    Vector s = (oracle::random_vector(5, rng).array().abs() + 1e-6).matrix();
    s /= s.sum();
    CHECK(d <= (s - v).norm() + 1e-12);
  }
}

TEST_CASE("project_simplex: idempotent") {
  Rng rng(409);
  const Vector v = oracle::random_vector(6, rng, 4.0);
  const Vector once = project_simplex(v);
  const Vector twice = project_simplex(once);
  CHECK((once - twice).cwiseAbs().maxCoeff() <= 1e-12);
}
