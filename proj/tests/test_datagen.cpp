#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "ogf/datagen.hpp"
#include "ogf/io.hpp"
#include "ogf/learners.hpp"
#include "ogf/rng.hpp"
#include "oracles.hpp"

using namespace ogf;

namespace {

SyntheticConfig small_config(TargetKind kind, std::uint64_t seed) {
  SyntheticConfig cfg;
  cfg.n0 = 24;
  cfg.edge_prob = 0.25;
  cfg.t_total = 40;
  cfg.edges_per_node = 3;
  cfg.bandwidth = 3;
  cfg.target_kind = kind;
  cfg.gen_filter_order = 3;
  cfg.seed = seed;
  return cfg;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_CASE("generate_base: bandwidth one spans the constant direction") {
  SyntheticConfig cfg = small_config(TargetKind::WMean, 5);
  cfg.bandwidth = 1;
  cfg.edge_prob = 0.5;  // densely connected, so the symmetrized graph is connected
  const GeneratedBase base = generate_base(cfg);
  const Vector& x = base.signal;
  const Vector centered = x.array() - x.mean();
  CHECK(centered.norm() <= 1e-8 * x.norm());
}

TEST_CASE("generate_base: Rayleigh quotient within the bandlimit") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const SyntheticConfig cfg = small_config(TargetKind::WMean, seed);
    const GeneratedBase base = generate_base(cfg);

    const Matrix dense = base.graph.dense();
    const Matrix sym = 0.5 * (dense + dense.transpose());
    Matrix laplacian = -sym;
    laplacian.diagonal() += sym.rowwise().sum();
    Eigen::SelfAdjointEigenSolver<Matrix> solver(laplacian);
    REQUIRE(solver.info() == Eigen::Success);
    const double lambda_bw = solver.eigenvalues()[cfg.bandwidth - 1];
    const double rayleigh = base.signal.dot(laplacian * base.signal);
    CHECK(rayleigh <= lambda_bw * base.signal.squaredNorm() + 1e-10);
    CHECK(base.signal.norm() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("generate_base: unit spectral radius after rescaling") {
  const SyntheticConfig cfg = small_config(TargetKind::WMean, 9);
  const GeneratedBase base = generate_base(cfg);
  const double radius = spectral_radius_estimate(base.graph);
  CHECK(radius == doctest::Approx(1.0).epsilon(1e-6));

  SyntheticConfig raw = cfg;
  raw.unit_spectral_radius = false;
  const GeneratedBase raw_base = generate_base(raw);
  CHECK(spectral_radius_estimate(raw_base.graph) > 1.0);
}

TEST_CASE("generate_base: seeded regeneration is bit-reproducible") {
  const SyntheticConfig cfg = small_config(TargetKind::Filter, 13);
  const GeneratedBase a = generate_base(cfg);
  const GeneratedBase b = generate_base(cfg);
  CHECK((a.signal - b.signal).norm() == 0.0);
  CHECK(a.graph.edges() == b.graph.edges());
}

TEST_CASE("generate_stream: attachments have exactly the configured edge count") {
  const SyntheticConfig cfg = small_config(TargetKind::WMean, 17);
  const GeneratedBase base = generate_base(cfg);
  const NodeStream stream = generate_stream(cfg, base);
  const double median = base.graph.median_edge_weight();
  for (const auto& rec : stream.records) {
    CHECK(rec.attachment.nnz() == cfg.edges_per_node);
    for (const auto& [i, w] : rec.attachment.entries) CHECK(w == median);
    rec.attachment.validate();
  }
  CHECK(stream.train_count == 32);  // floor(0.8 * 40)
}

TEST_CASE("generate_stream: wmean with a single neighbour copies its signal") {
  SyntheticConfig cfg = small_config(TargetKind::WMean, 19);
  cfg.edges_per_node = 1;
  const GeneratedBase base = generate_base(cfg);
  const NodeStream stream = generate_stream(cfg, base);
  Vector signal = base.signal;
  for (const auto& rec : stream.records) {
    const Index neighbour = rec.attachment.entries.front().first;
    CHECK(rec.value == signal[neighbour]);
    signal.conservativeResize(signal.size() + 1);
    signal[signal.size() - 1] = rec.value;
  }
}

TEST_CASE("generate_stream: planted filter replays with zero residuals") {
  const SyntheticConfig cfg = small_config(TargetKind::Filter, 23);
  const GeneratedBase base = generate_base(cfg);
  const NodeStream stream = generate_stream(cfg, base);
  REQUIRE(stream.generator_filter.size() == cfg.gen_filter_order);

  ExpandingGraph graph = base.graph;
  ShiftMatrix sm = build_shift_matrix(graph, base.signal, cfg.gen_filter_order);
  for (const auto& rec : stream.records) {
    const double pred = predict_deterministic(rec.attachment, sm, stream.generator_filter);
    CHECK(pred == rec.value);
    graph = expand(graph, rec.attachment);
    sm = extend_shift_matrix(std::move(sm), graph, rec.attachment, rec.value);
  }
}

TEST_CASE("generate_stream: kernel target tends to the weighted mean for huge variance") {
  SyntheticConfig kernel_cfg = small_config(TargetKind::Kernel, 29);
  kernel_cfg.kernel_variance = 1e8;
  SyntheticConfig wmean_cfg = kernel_cfg;
  wmean_cfg.target_kind = TargetKind::WMean;

  const GeneratedBase base = generate_base(kernel_cfg);
  const NodeStream ks = generate_stream(kernel_cfg, base);
  const NodeStream ws = generate_stream(wmean_cfg, base);
  for (Index t = 0; t < ks.length(); ++t) {
    const double kv = ks.records[static_cast<std::size_t>(t)].value;
    const double wv = ws.records[static_cast<std::size_t>(t)].value;
    CHECK(std::abs(kv - wv) <= 1e-3 * std::max(1e-6, std::abs(wv)));
  }
}

TEST_CASE("generate_stream: determinism and byte-identical serialization") {
  const SyntheticConfig cfg = small_config(TargetKind::Kernel, 31);
  const GeneratedBase base = generate_base(cfg);
  const NodeStream s1 = generate_stream(cfg, base);
  const NodeStream s2 = generate_stream(cfg, base);

  const auto dir = std::filesystem::temp_directory_path() / "ogf_datagen_det";
  std::filesystem::remove_all(dir);
  save_stream(s1, (dir / "a").string());
  save_stream(s2, (dir / "b").string());
  for (const char* name : {"graph.csv", "signal.csv", "stream.csv", "manifest.json"}) {
    CHECK(slurp(dir / "a" / name) == slurp(dir / "b" / name));
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("save/load stream: lossless round-trip") {
  const SyntheticConfig cfg = small_config(TargetKind::Filter, 37);
  const GeneratedBase base = generate_base(cfg);
  const NodeStream stream = generate_stream(cfg, base);

  const auto dir = std::filesystem::temp_directory_path() / "ogf_stream_roundtrip";
  std::filesystem::remove_all(dir);
  save_stream(stream, dir.string());
  const NodeStream loaded = load_stream(dir.string());

  CHECK(loaded.base_graph.edges() == stream.base_graph.edges());
  CHECK((loaded.base_signal - stream.base_signal).norm() == 0.0);
  CHECK(loaded.train_count == stream.train_count);
  REQUIRE(loaded.length() == stream.length());
  for (Index t = 0; t < stream.length(); ++t) {
    const auto& a = stream.records[static_cast<std::size_t>(t)];
    const auto& b = loaded.records[static_cast<std::size_t>(t)];
    CHECK(a.t == b.t);
    CHECK(a.value == b.value);
    CHECK(a.attachment.length == b.attachment.length);
    CHECK(a.attachment.entries == b.attachment.entries);
  }
  CHECK((loaded.generator_filter - stream.generator_filter).norm() == 0.0);
  std::filesystem::remove_all(dir);
}

TEST_CASE("load_stream: schema violations are rejected") {
  const auto dir = std::filesystem::temp_directory_path() / "ogf_stream_bad";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  {
    std::ofstream g(dir / "graph.csv");
    g << "src,dst,weight\n0,1,0.5\n";
    std::ofstream s(dir / "signal.csv");
    s << "node,value\n0,0.25\n1,0.5\n";
  }

  SUBCASE("empty stream") {
    std::ofstream f(dir / "stream.csv");
    f << "t,value,attach_indices,attach_weights\n";
    f.close();
    CHECK_THROWS_AS(load_stream(dir.string()), SchemaError);
  }
  SUBCASE("attachment index beyond the current node count") {
    std::ofstream f(dir / "stream.csv");
    f << "t,value,attach_indices,attach_weights\n";
    f << "1,0.3,5,0.5\n";
    f.close();
    CHECK_THROWS_AS(load_stream(dir.string()), SchemaError);
  }
  SUBCASE("malformed number carries a line number") {
    std::ofstream f(dir / "stream.csv");
    f << "t,value,attach_indices,attach_weights\n";
    f << "1,zap,0,0.5\n";
    f.close();
    try {
      load_stream(dir.string());
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line == 2);
    }
  }
  std::filesystem::remove_all(dir);
}
