#pragma once

#include <memory>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "mesonet/graph.hpp"

namespace mesonet {

/// Dense node-to-block labeling: every id in 0..k-1 is used.
class Partition {
 public:
  Partition() = default;
  /// Throws unless the labels are dense.
  explicit Partition(std::vector<Index> labels);

  /// Relabels arbitrary non-negative ids densely by order of first appearance.
  static Partition from_labels(std::span<const Index> raw);
  static Partition singletons(Index n);
  static Partition single_block(Index n);

  Index node_count() const { return static_cast<Index>(labels_.size()); }
  Index block_count() const { return block_count_; }
  Index operator[](Index i) const { return labels_[i]; }
  const std::vector<Index>& labels() const { return labels_; }

  std::vector<Count> block_sizes() const;
  std::vector<std::vector<Index>> members() const;

  /// Relabeled by order of first appearance; equal groupings compare equal.
  Partition canonical() const;
  bool same_grouping(const Partition& other) const;

  bool operator==(const Partition&) const = default;

 private:
  std::vector<Index> labels_;
  Index block_count_ = 0;
};

/// Graph whose nodes stand for sets of original nodes, with edge
/// multiplicities. Level 0 of the Leiden hierarchy is the original graph with
/// unit weights; every aggregation produces a coarser one.
struct WeightedGraph {
  std::vector<std::vector<std::pair<Index, Count>>> adjacency;  // no self entries
  std::vector<Count> internal_edges;
  std::vector<Count> size;
  std::vector<Count> degree;
  // Sums of x_i and x_i^2 over represented nodes; empty unless multipliers given.
  Eigen::VectorXd x_sum;
  Eigen::VectorXd x2_sum;

  Index node_count() const { return static_cast<Index>(adjacency.size()); }
  Count total_edges() const;

  static WeightedGraph from_graph(const Graph& g, const Eigen::VectorXd* multipliers = nullptr);
  /// Collapses nodes sharing a membership id into one node.
  WeightedGraph aggregate(std::span<const Index> membership, Index group_count) const;
};

/// Block-level sufficient statistics N_r, L_rr, L_rs plus per-node neighbor
/// counts per block, updated incrementally under single-node moves.
class BlockStats {
 public:
  BlockStats() = default;
  /// Block ids in `labels` must be below `capacity`; empty ids are allowed.
  BlockStats(std::shared_ptr<const WeightedGraph> g, std::span<const Index> labels,
             Index capacity);

  Index block_count() const { return live_blocks_; }
  Index capacity() const { return static_cast<Index>(size_.size()); }
  Index node_count() const { return static_cast<Index>(labels_.size()); }

  Index label(Index v) const { return labels_[v]; }
  Count size(Index r) const { return size_[r]; }
  Index members(Index r) const { return members_[r]; }
  Count intra(Index r) const { return intra_[r]; }
  Count inter(Index r, Index s) const;
  const std::unordered_map<Index, Count>& inter_row(Index r) const { return inter_[r]; }
  Count degree_sum(Index r) const { return degree_[r]; }
  double x_sum(Index r) const { return x_sum_[r]; }
  double x2_sum(Index r) const { return x2_sum_[r]; }
  bool has_multipliers() const { return !x_sum_.empty(); }

  Count node_to_block(Index v, Index r) const;
  std::span<const std::pair<Index, Count>> node_blocks(Index v) const { return node_blocks_[v]; }

  Count total_intra() const;
  Count total_inter() const;

  /// Lowest empty block id, or -1 when every id is in use.
  Index empty_block() const { return empty_.empty() ? -1 : *empty_.begin(); }

  void move(Index v, Index to);

  /// Current labels relabeled densely (order of first appearance).
  Partition partition() const;
  std::span<const Index> raw_labels() const { return labels_; }

  const WeightedGraph& graph() const { return *graph_; }

  /// Same labels and counts; neighbor-count order is ignored.
  bool operator==(const BlockStats& o) const;

 private:
  void add_inter(Index r, Index s, Count delta);
  static void bump(std::vector<std::pair<Index, Count>>& list, Index block, Count delta);

  std::shared_ptr<const WeightedGraph> graph_;
  std::vector<Index> labels_;
  std::vector<Count> size_;
  std::vector<Index> members_;
  std::vector<Count> intra_;
  std::vector<Count> degree_;
  std::vector<double> x_sum_;
  std::vector<double> x2_sum_;
  std::vector<std::unordered_map<Index, Count>> inter_;
  std::vector<std::vector<std::pair<Index, Count>>> node_blocks_;
  std::set<Index> empty_;
  Index live_blocks_ = 0;
};

/// Exact block statistics of `p` on `g`. Throws when p does not fit g.
BlockStats block_stats(const Graph& g, const Partition& p);
BlockStats block_stats(std::shared_ptr<const WeightedGraph> wg, const Partition& p);

/// Moves `node` from `from` to `to`; from == to is a no-op. Throws if the node
/// is not in `from`.
void apply_move(BlockStats& s, Index node, Index from, Index to);

/// Intra-cluster edges over inter-cluster edges; +inf when only the
/// denominator vanishes, 0 when the numerator does.
double ic_ec_ratio(const BlockStats& s);

void write_partition(const Graph& g, const Partition& p, const std::string& path);
Partition read_partition(const Graph& g, const std::string& path);

}  // namespace mesonet
