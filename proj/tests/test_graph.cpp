#include <doctest.h>

#include <filesystem>

#include "ogf/graph.hpp"
#include "ogf/io.hpp"
#include "ogf/rng.hpp"
#include "oracles.hpp"

using namespace ogf;

namespace {

AttachmentVector make_attachment(Index length,
                                 std::vector<std::pair<Index, double>> entries) {
  AttachmentVector a;
  a.length = length;
  a.entries = std::move(entries);
  return a;
}

}  // namespace

TEST_CASE("expand: single node gains one edge") {
  ExpandingGraph g(1);
  const ExpandingGraph g2 = expand(g, make_attachment(1, {{0, 0.75}}));
  CHECK(g2.node_count() == 2);
  CHECK(g2.edge_count() == 1);
  CHECK(g2.dense()(1, 0) == 0.75);
  CHECK(g2.dense()(0, 1) == 0.0);
}

TEST_CASE("expand: all-zero attachment adds an isolated node") {
  Rng rng(7);
  const ExpandingGraph g = oracle::random_graph(5, 0.4, rng);
  const ExpandingGraph g2 = expand(g, make_attachment(5, {}));
  CHECK(g2.node_count() == 6);
  CHECK(g2.edge_count() == g.edge_count());
  CHECK(g2.incoming(5).empty());
}

TEST_CASE("expand: matches dense block assembly") {
  Rng rng(11);
  const ExpandingGraph g = oracle::random_graph(6, 0.5, rng);
  const AttachmentVector a = oracle::random_attachment(6, 2, rng);
  const ExpandingGraph g2 = expand(g, a);

  Matrix expected = Matrix::Zero(7, 7);
  expected.topLeftCorner(6, 6) = g.dense();
  expected.row(6).head(6) = a.dense().transpose();
  CHECK((g2.dense() - expected).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("expand: errors") {
  ExpandingGraph g(3);
  CHECK_THROWS_AS(expand(g, make_attachment(2, {})), DimensionError);
  CHECK_THROWS_AS(expand(g, make_attachment(3, {{1, -0.5}})), InvariantError);
  CHECK_THROWS_AS(expand(g, make_attachment(3, {{4, 0.5}})), DimensionError);
}

TEST_CASE("expand: append-only block digest is unchanged") {
  Rng rng(13);
  ExpandingGraph g = oracle::random_graph(8, 0.3, rng);
  const auto before = oracle::block_digest(g, 8);
  for (int step = 0; step < 10; ++step) {
    g = expand(g, oracle::random_attachment(g.node_count(), 3, rng));
    CHECK(oracle::block_digest(g, 8) == before);
  }
}

TEST_CASE("build_shift_matrix: edgeless graph keeps only the raw signal") {
  ExpandingGraph g(4);
  Rng rng(3);
  const Vector x = oracle::random_vector(4, rng);
  const ShiftMatrix sm = build_shift_matrix(g, x, 3);
  CHECK((sm.view().col(0) - x).norm() == 0.0);
  CHECK(sm.view().col(1).norm() == 0.0);
  CHECK(sm.view().col(2).norm() == 0.0);
}

TEST_CASE("build_shift_matrix: order one is the signal itself") {
  Rng rng(5);
  const ExpandingGraph g = oracle::random_graph(5, 0.5, rng);
  const Vector x = oracle::random_vector(5, rng);
  const ShiftMatrix sm = build_shift_matrix(g, x, 1);
  CHECK(sm.order() == 1);
  CHECK((sm.view().col(0) - x).norm() == 0.0);
}

TEST_CASE("build_shift_matrix: matches dense matrix powers") {
  Rng rng(17);
  const ExpandingGraph g = oracle::random_graph(8, 0.4, rng);
  const Vector x = oracle::random_vector(8, rng);
  const ShiftMatrix sm = build_shift_matrix(g, x, 4);
  const Matrix expected = oracle::dense_shift_matrix(g.dense(), x, 4);
  CHECK((sm.view() - expected).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("build_shift_matrix: zero order is rejected") {
  ExpandingGraph g(2);
  CHECK_THROWS_AS(build_shift_matrix(g, Vector::Zero(2), 0), ConfigError);
}

TEST_CASE("shift recursion: each column is the shift of the previous") {
  Rng rng(23);
  const ExpandingGraph g = oracle::random_graph(12, 0.3, rng);
  const Vector x = oracle::random_vector(12, rng);
  const ShiftMatrix sm = build_shift_matrix(g, x, 5);
  for (Index k = 1; k < 5; ++k) {
    const Vector prev = sm.view().col(k - 1);
    CHECK((sm.view().col(k) - g.shift(prev)).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("extend_shift_matrix: zero attachment and zero value") {
  ExpandingGraph g(3);
  const Vector x = Vector::Constant(3, 1.0);
  ShiftMatrix sm = build_shift_matrix(g, x, 3);
  const ExpandingGraph g2 = expand(g, make_attachment(3, {}));
  sm = extend_shift_matrix(std::move(sm), g2, make_attachment(3, {}), 0.0);
  CHECK(sm.rows() == 4);
  CHECK(sm.at(3, 0) == 0.0);
  CHECK(sm.at(3, 1) == 0.0);
}

TEST_CASE("extend_shift_matrix: order one appends the revealed value") {
  Rng rng(29);
  const ExpandingGraph g = oracle::random_graph(4, 0.5, rng);
  const Vector x = oracle::random_vector(4, rng);
  ShiftMatrix sm = build_shift_matrix(g, x, 1);
  const AttachmentVector a = oracle::random_attachment(4, 2, rng);
  const ExpandingGraph g2 = expand(g, a);
  sm = extend_shift_matrix(std::move(sm), g2, a, 0.625);
  CHECK(sm.at(4, 0) == 0.625);
}

TEST_CASE("extend_shift_matrix: stale matrix is rejected") {
  Rng rng(31);
  const ExpandingGraph g = oracle::random_graph(4, 0.5, rng);
  const Vector x = oracle::random_vector(4, rng);
  ShiftMatrix sm = build_shift_matrix(g, x, 2);
  const AttachmentVector a = oracle::random_attachment(4, 2, rng);
  const ExpandingGraph g2 = expand(expand(g, a), make_attachment(5, {}));
  CHECK_THROWS_AS(extend_shift_matrix(std::move(sm), g2, a, 0.0), DimensionError);
}

TEST_CASE("incremental/full agreement over long random expansions") {
  Rng rng(37);
  const Index order = 4;
  ExpandingGraph g = oracle::random_graph(6, 0.4, rng);
  Vector signal = oracle::random_vector(6, rng);
  ShiftMatrix sm = build_shift_matrix(g, signal, order);
  for (int step = 0; step < 50; ++step) {
    const Index nnz = 1 + static_cast<Index>(rng.integer(3));
    const AttachmentVector a = oracle::random_attachment(g.node_count(), nnz, rng);
    const double value = 2.0 * rng.uniform() - 1.0;
    g = expand(g, a);
    sm = extend_shift_matrix(std::move(sm), g, a, value);
    signal.conservativeResize(signal.size() + 1);
    signal[signal.size() - 1] = value;

    const ShiftMatrix rebuilt = build_shift_matrix(g, signal, order);
    CHECK((sm.view() - rebuilt.view()).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("graph csv round-trip is exact") {
  Rng rng(41);
  const ExpandingGraph g = oracle::random_graph(9, 0.35, rng);
  const auto dir = std::filesystem::temp_directory_path() / "ogf_graph_csv_test";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "graph.csv").string();
  save_graph_csv(g, path);
  const ExpandingGraph loaded = load_graph_csv(path, g.node_count());
  CHECK(loaded.edge_count() == g.edge_count());
  CHECK((loaded.dense() - g.dense()).cwiseAbs().maxCoeff() == 0.0);

  const Vector x = oracle::random_vector(9, rng);
  const auto spath = (dir / "signal.csv").string();
  save_signal_csv(x, spath);
  const Vector lx = load_signal_csv(spath);
  CHECK((lx - x).norm() == 0.0);
  std::filesystem::remove_all(dir);
}

TEST_CASE("self-loops and duplicate edges are rejected") {
  CHECK_THROWS_AS(ExpandingGraph::from_edges(3, {{1, 1, 0.5}}), InvariantError);
  CHECK_THROWS_AS(ExpandingGraph::from_edges(3, {{0, 1, 0.5}, {0, 1, 0.25}}),
                  InvariantError);
  CHECK_THROWS_AS(ExpandingGraph::from_edges(3, {{0, 1, 0.0}}), InvariantError);
}
