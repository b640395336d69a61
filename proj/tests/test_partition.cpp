#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>

#include "mesonet/partition.hpp"
#include "oracles.hpp"

using namespace mesonet;
using Edges = std::vector<std::pair<Index, Index>>;

namespace {

Graph two_triangles_bridge() {
  return Graph::from_edges(Edges{{0, 1}, {1, 2}, {2, 0}, {3, 4}, {4, 5}, {5, 3}, {2, 3}});
}

Partition triangles() { return Partition(std::vector<Index>{0, 0, 0, 1, 1, 1}); }

// Block counts straight from the edge list.
struct Counts {
  std::map<std::pair<Index, Index>, Count> pair;
  std::vector<Count> size;
};

Counts count_blocks(const Graph& g, std::span<const Index> labels, Index capacity) {
  Counts c;
  c.size.assign(capacity, 0);
  for (Index l : labels) ++c.size[l];
  for (const auto& [i, j] : g.edge_list()) {
    const Index r = std::min(labels[i], labels[j]);
    const Index s = std::max(labels[i], labels[j]);
    ++c.pair[{r, s}];
  }
  return c;
}

void check_against_counts(const Graph& g, const BlockStats& s) {
  const Counts c = count_blocks(g, s.raw_labels(), s.capacity());
  Index live = 0;
  for (Index r = 0; r < s.capacity(); ++r) {
    CHECK(s.size(r) == c.size[r]);
    if (c.size[r] > 0) ++live;
    for (Index t = r; t < s.capacity(); ++t) {
      auto it = c.pair.find({r, t});
      const Count expected = it == c.pair.end() ? 0 : it->second;
      CHECK((r == t ? s.intra(r) : s.inter(r, t)) == expected);
    }
  }
  CHECK(s.block_count() == live);
}

std::string temp_file(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("mesonet_test_" + name)).string();
}

}  // namespace

TEST_CASE("partition labels") {
  CHECK_THROWS_AS(Partition(std::vector<Index>{0, 2}), Error);
  CHECK_THROWS_AS(Partition(std::vector<Index>{-1, 0}), Error);
  const Partition p = Partition::from_labels(std::vector<Index>{7, 7, 3, 9});
  CHECK(p.labels() == std::vector<Index>{0, 0, 1, 2});
  CHECK(p.block_count() == 3);
  CHECK(p.block_sizes() == std::vector<Count>{2, 1, 1});

  const Partition a(std::vector<Index>{1, 1, 0});
  const Partition b(std::vector<Index>{0, 0, 1});
  CHECK(a.same_grouping(b));
  CHECK_FALSE(a == b);
  CHECK(a.canonical() == b);
  CHECK_FALSE(a.same_grouping(Partition::singletons(3)));
  CHECK(Partition::single_block(4).block_count() == 1);
}

TEST_CASE("block_stats examples") {
  const Graph g = two_triangles_bridge();
  const BlockStats s = block_stats(g, triangles());
  CHECK(s.size(0) == 3);
  CHECK(s.size(1) == 3);
  CHECK(s.intra(0) == 3);
  CHECK(s.intra(1) == 3);
  CHECK(s.inter(0, 1) == 1);
  CHECK(s.inter(1, 0) == 1);

  const BlockStats single = block_stats(g, Partition::single_block(6));
  CHECK(single.intra(0) == g.edge_count());

  const BlockStats solo = block_stats(g, Partition::singletons(6));
  for (Index r = 0; r < 6; ++r) {
    CHECK(solo.intra(r) == 0);
    for (Index t = 0; t < 6; ++t)
      if (r != t) CHECK(solo.inter(r, t) == (g.has_edge(r, t) ? 1 : 0));
  }

  CHECK_THROWS_AS(block_stats(g, Partition::singletons(5)), Error);
}

TEST_CASE("ic_ec_ratio") {
  const Graph g = two_triangles_bridge();
  CHECK(ic_ec_ratio(block_stats(g, triangles())) == 6.0);
  CHECK(ic_ec_ratio(block_stats(g, Partition::single_block(6))) ==
        std::numeric_limits<double>::infinity());
  CHECK(ic_ec_ratio(block_stats(g, Partition::singletons(6))) == 0.0);
}

TEST_CASE("apply_move on a triangle") {
  const Graph g = Graph::from_edges(Edges{{0, 1}, {1, 2}, {2, 0}});
  auto wg = std::make_shared<const WeightedGraph>(WeightedGraph::from_graph(g));
  BlockStats s(wg, std::vector<Index>{0, 0, 0}, 3);
  apply_move(s, 2, 0, 1);
  CHECK(s.intra(0) == 1);
  CHECK(s.inter(0, 1) == 2);
  CHECK(s.block_count() == 2);
  CHECK(s == block_stats(wg, Partition(std::vector<Index>{0, 0, 1})));

  const BlockStats before = s;
  apply_move(s, 2, 1, 1);
  CHECK(s == before);
  CHECK_THROWS_AS(apply_move(s, 2, 0, 1), Error);
}

TEST_CASE("random move sequences match recomputation") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = 12;
    const Graph g = oracle::random_graph(n, 0.35, rng);
    auto wg = std::make_shared<const WeightedGraph>(WeightedGraph::from_graph(g));
    const Index capacity = 5;
    const auto start = oracle::random_labels(n, capacity, rng);
    BlockStats s(wg, start, capacity);
    std::uniform_int_distribution<Index> node(0, n - 1), block(0, capacity - 1);
    for (int step = 0; step < 50; ++step) {
      const Index v = node(rng);
      const Index to = block(rng);
      apply_move(s, v, s.label(v), to);
      const BlockStats fresh(wg, std::vector<Index>(s.raw_labels().begin(), s.raw_labels().end()),
                             capacity);
      REQUIRE(s == fresh);
      CHECK(s.total_intra() + s.total_inter() == g.edge_count());
      Count degree_total = 0;
      for (Index r = 0; r < capacity; ++r) degree_total += s.degree_sum(r);
      CHECK(degree_total == 2 * g.edge_count());
    }
    check_against_counts(g, s);
  }
}

TEST_CASE("node-to-block counts follow moves") {
  std::mt19937_64 rng(17);
  const Graph g = oracle::random_graph(10, 0.4, rng);
  auto wg = std::make_shared<const WeightedGraph>(WeightedGraph::from_graph(g));
  BlockStats s(wg, oracle::random_labels(10, 3, rng), 3);
  for (int step = 0; step < 30; ++step) {
    const Index v = step % 10;
    apply_move(s, v, s.label(v), (s.label(v) + 1) % 3);
    for (Index u = 0; u < 10; ++u)
      for (Index r = 0; r < 3; ++r) {
        Count expected = 0;
        for (Index w : g.neighbors(u))
          if (s.label(w) == r) ++expected;
        CHECK(s.node_to_block(u, r) == expected);
      }
  }
}

TEST_CASE("aggregation conserves edges") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    const Graph g = oracle::random_graph(15, 0.3, rng);
    const WeightedGraph wg = WeightedGraph::from_graph(g);
    const Partition p = Partition::from_labels(oracle::random_labels(15, 4, rng));
    const WeightedGraph agg = wg.aggregate(p.labels(), p.block_count());
    CHECK(agg.total_edges() == g.edge_count());
    const BlockStats s = block_stats(g, p);
    for (Index r = 0; r < p.block_count(); ++r) {
      CHECK(agg.internal_edges[r] == s.intra(r));
      CHECK(agg.size[r] == s.size(r));
      CHECK(agg.degree[r] == s.degree_sum(r));
      for (const auto& [t, w] : agg.adjacency[r]) CHECK(w == s.inter(r, t));
    }
  }
}

TEST_CASE("partition csv round trip") {
  const Graph g = two_triangles_bridge();
  const std::string path = temp_file("partition.csv");
  write_partition(g, triangles(), path);
  CHECK(read_partition(g, path) == triangles());
  {
    std::ofstream out(path);
    out << "node,label\n0,1\n";
  }
  CHECK_THROWS_AS(read_partition(g, path), Error);
  std::filesystem::remove(path);
}
