#include <algorithm>
#include <deque>
#include <numeric>
#include <random>

#include "mesonet/detection.hpp"

namespace mesonet {

namespace {

std::vector<Index> shuffled(Index n, std::mt19937_64& rng) {
  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), Index{0});
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

Index pick_best(const BlockStats& s, const QualityFunction& q, Index v,
                const std::vector<Index>& candidates) {
  Index best = -1;
  double best_gain = q.min_gain();
  for (Index c : candidates) {
    const double d = q.delta(s, v, c);
    if (d > best_gain) {
      best_gain = d;
      best = c;
    }
  }
  return best;
}

Count local_moves(BlockStats& st, const QualityFunction& q, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Index n = st.node_count();
  const WeightedGraph& wg = st.graph();
  const auto order = shuffled(n, rng);
  std::deque<Index> queue(order.begin(), order.end());
  std::vector<char> queued(n, 1);
  std::vector<Index> candidates;
  Count moves = 0;
  while (!queue.empty()) {
    const Index v = queue.front();
    queue.pop_front();
    queued[v] = 0;
    const Index from = st.label(v);
    candidates.clear();
    for (const auto& [b, w] : st.node_blocks(v))
      if (b != from) candidates.push_back(b);
    std::sort(candidates.begin(), candidates.end());
    if (st.members(from) > 1) {
      const Index e = st.empty_block();
      candidates.push_back(e >= 0 ? e : st.capacity());
    }
    const Index best = pick_best(st, q, v, candidates);
    if (best < 0) continue;
    st.move(v, best);
    ++moves;
    for (const auto& [u, w] : wg.adjacency[v]) {
      if (queued[u] || st.label(u) == best) continue;
      queue.push_back(u);
      queued[u] = 1;
    }
  }
  return moves;
}

}  // namespace

namespace leiden_detail {

bool move_nodes(BlockStats& state, const QualityFunction& q, std::uint64_t seed) {
  return local_moves(state, q, seed) > 0;
}

Partition refine(std::shared_ptr<const WeightedGraph> wg, const Partition& partition,
                 const QualityFunction& q, std::uint64_t seed) {
  const Index n = wg->node_count();
  if (partition.node_count() != n) throw Error("partition does not match weighted graph");
  std::vector<Index> start(n);
  std::iota(start.begin(), start.end(), Index{0});
  BlockStats rs(std::move(wg), start, n);
  std::mt19937_64 rng(seed);
  std::vector<Index> candidates;
  // A non-empty refined block b always contains node b, so partition[b] is
  // the community it belongs to.
  for (auto& community : partition.members()) {
    std::shuffle(community.begin(), community.end(), rng);
    for (Index v : community) {
      const Index from = rs.label(v);
      if (rs.members(from) != 1) continue;
      candidates.clear();
      for (const auto& [b, w] : rs.node_blocks(v))
        if (b != from && partition[b] == partition[v]) candidates.push_back(b);
      std::sort(candidates.begin(), candidates.end());
      const Index best = pick_best(rs, q, v, candidates);
      if (best >= 0) rs.move(v, best);
    }
  }
  return rs.partition();
}

}  // namespace leiden_detail

Partition leiden(const Graph& g, const QualityFunction& quality,
                 const std::optional<Partition>& initial, std::uint64_t seed,
                 LeidenStats* stats) {
  const Index n0 = g.node_count();
  if (initial && initial->node_count() != n0)
    throw Error("initial partition has " + std::to_string(initial->node_count()) +
                " nodes, graph has " + std::to_string(n0));
  auto level_graph = std::make_shared<const WeightedGraph>(
      WeightedGraph::from_graph(g, quality.surrogate_multipliers()));
  std::vector<Index> to_level(n0);
  std::iota(to_level.begin(), to_level.end(), Index{0});
  std::vector<Index> labels = initial ? initial->labels() : to_level;
  if (stats) *stats = {};

  std::vector<Index> flat(n0);
  for (std::uint64_t level = 0;; ++level) {
    const Index n = level_graph->node_count();
    Index capacity = n;
    for (Index l : labels) capacity = std::max(capacity, l + 1);
    BlockStats st(level_graph, labels, capacity);
    const Count moves = local_moves(st, quality, derive_seed(seed, 2 * level));
    const Partition lp = st.partition();
    for (Index i = 0; i < n0; ++i) flat[i] = lp[to_level[i]];
    if (stats) {
      ++stats->levels;
      stats->moves += moves;
    }
    if (lp.block_count() == n) break;

    // A level without moves collapses whole communities, so that adjacent
    // communities can still merge at the next level; the refined partition
    // is used otherwise.
    const Partition refined =
        moves == 0 ? lp
                   : leiden_detail::refine(level_graph, lp, quality, derive_seed(seed, 2 * level + 1));
    auto next = std::make_shared<const WeightedGraph>(
        level_graph->aggregate(refined.labels(), refined.block_count()));
    std::vector<Index> next_labels(refined.block_count());
    for (Index v = 0; v < n; ++v) next_labels[refined[v]] = lp[v];
    for (Index i = 0; i < n0; ++i) to_level[i] = refined[to_level[i]];
    level_graph = std::move(next);
    labels = std::move(next_labels);
  }
  return Partition::from_labels(flat);
}

}  // namespace mesonet
