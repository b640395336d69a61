#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include <json.hpp>

#include "mesonet/detection.hpp"
#include "mesonet/synth.hpp"
#include "oracles.hpp"

using namespace mesonet;
using Edges = std::vector<std::pair<Index, Index>>;

namespace {

Graph two_triangles_bridge() {
  return Graph::from_edges(Edges{{0, 1}, {1, 2}, {2, 0}, {3, 4}, {4, 5}, {5, 3}, {2, 3}});
}

void add_clique(Edges& e, Index first, Index size) {
  for (Index i = first; i < first + size; ++i)
    for (Index j = i + 1; j < first + size; ++j) e.emplace_back(i, j);
}

Graph cliques(Index count, Index size, bool ring) {
  Edges e;
  for (Index c = 0; c < count; ++c) add_clique(e, c * size, size);
  if (ring)
    for (Index c = 0; c < count; ++c) e.emplace_back(c * size, ((c + 1) % count) * size + 1);
  return Graph::from_edges(e, count * size);
}

Partition clique_labels(Index count, Index size) {
  std::vector<Index> l(count * size);
  for (Index i = 0; i < count * size; ++i) l[i] = i / size;
  return Partition(l);
}

struct Fixture {
  Graph graph;
  QualityFunction quality;
  std::shared_ptr<const WeightedGraph> weighted;
};

Fixture fixture(const Graph& g, QualityKind kind) {
  Fixture f{g, QualityFunction::modularity(g), nullptr};
  if (kind == QualityKind::bic_sbm) f.quality = QualityFunction::bic_sbm(g);
  if (kind == QualityKind::bic_dcsbm) {
    const auto ubcm = solve_ubcm(g.degrees());
    REQUIRE(ubcm.converged);
    f.quality = QualityFunction::bic_dcsbm(g, ubcm.nodes);
  }
  f.weighted = std::make_shared<const WeightedGraph>(
      WeightedGraph::from_graph(g, f.quality.surrogate_multipliers()));
  return f;
}

}  // namespace

TEST_CASE("modularity examples") {
  const Graph g = two_triangles_bridge();
  CHECK(modularity(g, Partition(std::vector<Index>{0, 0, 0, 1, 1, 1})) ==
        doctest::Approx(0.357143).epsilon(1e-6));
  CHECK(modularity(g, Partition::single_block(6)) == doctest::Approx(0.0).epsilon(1e-15));
  const Graph tri = Graph::from_edges(Edges{{0, 1}, {1, 2}, {2, 0}});
  CHECK(modularity(tri, Partition::singletons(3)) == doctest::Approx(-1.0 / 3.0));
  CHECK(modularity(cliques(2, 5, false), clique_labels(2, 5)) == doctest::Approx(0.5));
  CHECK_THROWS_AS(modularity(Graph::from_edges(Edges{}, 3), Partition::singletons(3)), Error);
}

TEST_CASE("modularity agrees with the double-sum oracle") {
  std::mt19937_64 rng(41);
  for (int t = 0; t < 100; ++t) {
    const Index n = 4 + t % 8;
    const Graph g = oracle::random_graph(n, 0.4, rng);
    if (g.edge_count() == 0) continue;
    const Partition p = Partition::from_labels(oracle::random_labels(n, 3, rng));
    CHECK(modularity(g, p) == doctest::Approx(oracle::modularity(g, p.labels())).epsilon(1e-12));
  }
}

TEST_CASE("value equals full for the exact qualities") {
  std::mt19937_64 rng(43);
  for (QualityKind kind : {QualityKind::modularity, QualityKind::bic_sbm}) {
    for (int t = 0; t < 40; ++t) {
      const Index n = 5 + t % 6;
      const Graph g = oracle::random_connected_graph(n, 0.5, rng);
      const Fixture f = fixture(g, kind);
      const Partition p = Partition::from_labels(oracle::random_labels(n, 3, rng));
      const double full = f.quality.full(g, p);
      CHECK(f.quality.value(block_stats(f.weighted, p)) == doctest::Approx(full).epsilon(1e-12));
      if (kind == QualityKind::bic_sbm)
        CHECK(full == doctest::Approx(-oracle::bic_sbm(g, p.labels())).epsilon(1e-12));
      else
        CHECK(full == doctest::Approx(oracle::modularity(g, p.labels())).epsilon(1e-12));
    }
  }
}

TEST_CASE("delta equals the change of value for every move") {
  std::mt19937_64 rng(47);
  for (QualityKind kind : {QualityKind::modularity, QualityKind::bic_sbm, QualityKind::bic_dcsbm}) {
    CAPTURE(static_cast<int>(kind));
    for (int t = 0; t < 15; ++t) {
      const Index n = 6 + t % 5;
      const Graph g = oracle::random_connected_graph(n, 0.45, rng);
      const Fixture f = fixture(g, kind);
      // capacity n leaves empty blocks, so create and destroy moves are covered
      BlockStats s(f.weighted, oracle::random_labels(n, 3, rng), n);
      for (Index v = 0; v < n; ++v)
        for (Index to = 0; to < n; ++to) {
          const double before = f.quality.value(s);
          const double predicted = f.quality.delta(s, v, to);
          BlockStats after = s;
          apply_move(after, v, s.label(v), to);
          CHECK(predicted == doctest::Approx(f.quality.value(after) - before).epsilon(1e-9).scale(1.0));
        }
    }
  }
}

TEST_CASE("aggregation preserves the quality value") {
  std::mt19937_64 rng(53);
  for (QualityKind kind : {QualityKind::modularity, QualityKind::bic_sbm, QualityKind::bic_dcsbm}) {
    for (int t = 0; t < 15; ++t) {
      const Index n = 10;
      const Graph g = oracle::random_connected_graph(n, 0.4, rng);
      const Fixture f = fixture(g, kind);
      const Partition fine = Partition::from_labels(oracle::random_labels(n, 5, rng));
      const Partition coarse = Partition::from_labels(oracle::random_labels(fine.block_count(), 2, rng));
      auto agg = std::make_shared<const WeightedGraph>(
          f.weighted->aggregate(fine.labels(), fine.block_count()));
      std::vector<Index> composed(n);
      for (Index i = 0; i < n; ++i) composed[i] = coarse[fine[i]];
      const double on_original = f.quality.value(block_stats(f.weighted, Partition::from_labels(composed)));
      const double on_aggregate = f.quality.value(block_stats(agg, coarse));
      CHECK(on_aggregate == doctest::Approx(on_original).epsilon(1e-12));
    }
  }
}

TEST_CASE("refinement yields connected sub-communities") {
  std::mt19937_64 rng(59);
  for (QualityKind kind : {QualityKind::modularity, QualityKind::bic_sbm}) {
    for (int t = 0; t < 30; ++t) {
      const Index n = 15;
      const Graph g = oracle::random_graph(n, 0.2, rng);
      const Fixture f = fixture(g, kind);
      // random communities are usually disconnected
      const Partition p = Partition::from_labels(oracle::random_labels(n, 3, rng));
      const Partition refined = leiden_detail::refine(f.weighted, p, f.quality, 100 + t);
      REQUIRE(refined.node_count() == n);
      for (const auto& members : refined.members()) {
        for (Index v : members) CHECK(p[v] == p[members.front()]);
        CHECK(oracle::induces_connected(g, members));
      }
    }
  }
}

TEST_CASE("leiden examples") {
  const Graph two = cliques(2, 5, false);
  const auto q = QualityFunction::modularity(two);
  const Partition found = leiden(two, q, std::nullopt, 1);
  CHECK(found.same_grouping(clique_labels(2, 5)));

  // exhaustive search confirms the two cliques maximize Q
  double best = -1.0;
  std::vector<Index> argmax;
  oracle::for_each_set_partition(10, [&](const std::vector<Index>& labels) {
    const double v = oracle::modularity(two, labels);
    if (v > best + 1e-12) {
      best = v;
      argmax = labels;
    }
  });
  CHECK(Partition(argmax).same_grouping(clique_labels(2, 5)));
  CHECK(modularity(two, found) == doctest::Approx(best));

  const Graph empty = Graph::from_edges(Edges{}, 6);
  for (auto quality : {QualityFunction::modularity(empty), QualityFunction::bic_sbm(empty)})
    CHECK(leiden(empty, quality, std::nullopt, 3) == Partition::singletons(6));

  std::mt19937_64 rng(61);
  const Graph g = oracle::random_connected_graph(30, 0.15, rng);
  const auto qg = QualityFunction::bic_sbm(g);
  CHECK(leiden(g, qg, std::nullopt, 9) == leiden(g, qg, std::nullopt, 9));
}

TEST_CASE("local moves never lower the value") {
  std::mt19937_64 rng(67);
  for (int t = 0; t < 20; ++t) {
    const Graph g = oracle::random_connected_graph(20, 0.2, rng);
    const Fixture f = fixture(g, t % 2 ? QualityKind::bic_sbm : QualityKind::modularity);
    BlockStats s(f.weighted, oracle::random_labels(20, 4, rng), 20);
    const double before = f.quality.value(s);
    leiden_detail::move_nodes(s, f.quality, 7 + t);
    CHECK(f.quality.value(s) >= before - 1e-9);
  }
}

TEST_CASE("detect_modularity") {
  DetectConfig cfg;
  cfg.seed = 5;
  const Graph ring = cliques(4, 5, true);
  const auto r = detect_modularity(ring, cfg);
  CHECK(r.partition.block_count() == 4);
  CHECK(r.partition.same_grouping(clique_labels(4, 5)));

  // merging adjacent cliques only lowers Q
  const double q4 = modularity(ring, clique_labels(4, 5));
  std::vector<Index> merged(20);
  for (Index i = 0; i < 20; ++i) merged[i] = (i / 5) / 2;
  CHECK(modularity(ring, Partition(merged)) < q4);
  for (Index i = 0; i < 20; ++i) merged[i] = (i / 5) == 3 ? 0 : (i / 5);
  CHECK(modularity(ring, Partition::from_labels(merged)) < q4);

  const auto two = detect_modularity(cliques(2, 5, false), cfg);
  CHECK(two.objective() == doctest::Approx(0.5));
  CHECK(two.final_scores.modularity == doctest::Approx(0.5));
}

TEST_CASE("outer loop contract") {
  const auto model = planted_partition(2, 20, 0.4, 0.05, 3);
  const Graph g = sample_sbm(model).graph;
  for (Method m : {Method::modularity, Method::bic_sbm, Method::bic_dcsbm}) {
    CAPTURE(to_string(m));
    DetectConfig cfg;
    cfg.seed = 11;

    cfg.max_outer = 0;
    const auto first = detect(g, m, cfg);
    CHECK(first.outer_iterations == 0);
    REQUIRE(first.score_trace.size() == 1);

    cfg.max_outer = 50;
    const auto full = detect(g, m, cfg);
    const auto again = detect(g, m, cfg);
    CHECK(full.partition == again.partition);
    CHECK(full.score_trace == again.score_trace);
    CHECK(full.score_trace.front() == first.score_trace.front());

    for (std::size_t i = 1; i < full.score_trace.size(); ++i) {
      if (m == Method::modularity)
        CHECK(full.score_trace[i] >= full.score_trace[i - 1]);
      else
        CHECK(full.score_trace[i] <= full.score_trace[i - 1]);
    }
    if (m == Method::modularity)
      CHECK(full.score_trace.back() == doctest::Approx(modularity(g, full.partition)));
    if (m == Method::bic_sbm)
      CHECK(full.score_trace.back() == doctest::Approx(bic_sbm(g, full.partition).bic));
  }
}

TEST_CASE("max_outer = 0 returns the first leiden run") {
  std::mt19937_64 rng(71);
  const Graph g = oracle::random_connected_graph(25, 0.2, rng);
  DetectConfig cfg;
  cfg.seed = 4;
  cfg.max_outer = 0;
  const auto r = detect_bic_sbm(g, cfg);
  const Partition direct = leiden(g, QualityFunction::bic_sbm(g), std::nullopt, derive_seed(4, 0));
  CHECK(r.partition == direct);
}

TEST_CASE("restarts keep the best objective") {
  std::mt19937_64 rng(73);
  const Graph g = oracle::random_connected_graph(30, 0.15, rng);
  DetectConfig cfg;
  cfg.seed = 2;
  const auto single = detect_bic_sbm(g, cfg);
  cfg.restarts = 4;
  const auto best = detect_bic_sbm(g, cfg);
  cfg.parallel = false;
  const auto serial = detect_bic_sbm(g, cfg);
  CHECK(best.partition == serial.partition);
  CHECK(best.restart == serial.restart);
  CHECK(best.objective() <= single.objective() + 1e-9);
  if (best.restart == 0) {
    CHECK(best.partition == single.partition);
    CHECK(best.restart_seed == 2);
  } else {
    CHECK(best.restart_seed == derive_seed(2, 1000003ULL + static_cast<std::uint64_t>(best.restart)));
  }
}

TEST_CASE("random initialization") {
  std::mt19937_64 rng(74);
  const Graph g = oracle::random_connected_graph(20, 0.2, rng);
  DetectConfig cfg;
  cfg.seed = 9;
  cfg.initial = InitKind::random;
  const auto a = detect_bic_sbm(g, cfg);
  const auto b = detect_bic_sbm(g, cfg);
  CHECK(a.partition == b.partition);
  CHECK(a.score_trace == b.score_trace);
}

TEST_CASE("evaluate_partition is consistent with the individual scores") {
  const Graph g = Graph::from_edges(Edges{{0, 1}, {2, 3}, {0, 2}});
  const Partition p(std::vector<Index>{0, 0, 1, 1});
  const auto s = evaluate_partition(g, p);
  CHECK(s.bic_sbm.bic == doctest::Approx(9.8740).epsilon(1e-4));
  CHECK(s.modularity == doctest::Approx(modularity(g, p)));

  const auto single = evaluate_partition(g, Partition::single_block(4));
  CHECK(single.modularity == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(single.bic_sbm.param_count == 1);

  std::mt19937_64 rng(79);
  const Graph h = oracle::random_connected_graph(20, 0.3, rng);
  DetectConfig cfg;
  cfg.seed = 8;
  const auto r = detect_bic_dcsbm(h, cfg);
  const auto again = evaluate_partition(h, r.partition);
  CHECK(r.final_scores.bic_dcsbm.bic == doctest::Approx(again.bic_dcsbm.bic));
  CHECK(r.final_scores.bic_sbm.bic == doctest::Approx(bic_sbm(h, r.partition).bic));
  CHECK(r.ubcm_residual <= 1e-8);
}

TEST_CASE("configuration errors") {
  const Graph g = cliques(2, 3, false);
  DetectConfig cfg;
  cfg.restarts = 0;
  CHECK_THROWS_AS(detect_modularity(g, cfg), Error);
  cfg = DetectConfig{};
  cfg.max_outer = -1;
  CHECK_THROWS_AS(detect_modularity(g, cfg), Error);
  cfg = DetectConfig{};
  cfg.initial = InitKind::provided;
  CHECK_THROWS_AS(detect_modularity(g, cfg), Error);
  cfg.initial_partition = Partition::singletons(3);
  CHECK_THROWS_AS(detect_modularity(g, cfg), Error);
  CHECK_THROWS_AS(parse_method("louvain"), Error);
  CHECK(parse_method("bic-sbm") == Method::bic_sbm);
}

TEST_CASE("provided initial partition") {
  const Graph ring = cliques(4, 5, true);
  DetectConfig cfg;
  cfg.initial = InitKind::provided;
  cfg.initial_partition = clique_labels(4, 5);
  cfg.max_outer = 0;
  const auto r = detect_modularity(ring, cfg);
  CHECK(modularity(ring, r.partition) >= modularity(ring, clique_labels(4, 5)) - 1e-12);
}

TEST_CASE("run manifest") {
  const Graph g = cliques(2, 5, false);
  DetectConfig cfg;
  cfg.seed = 7;
  const auto r = detect_bic_sbm(g, cfg);
  const auto j = nlohmann::json::parse(run_manifest(g, r, cfg));
  CHECK(j["method"] == "bic-sbm");
  CHECK(j["seed"] == 7);
  CHECK(j["config"]["max_outer"] == 50);
  CHECK(j["blocks"] == r.partition.block_count());
  CHECK(j["score_trace"].size() == r.score_trace.size());
  CHECK(j["final"]["bic_sbm"]["bic"].get<double>() == doctest::Approx(r.final_scores.bic_sbm.bic));
}

TEST_CASE("derive_seed spreads indices") {
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
  CHECK(derive_seed(5, 3) == derive_seed(5, 3));
}
