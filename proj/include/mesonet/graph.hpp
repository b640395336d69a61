#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace mesonet {

using Index = Eigen::Index;
using Count = std::int64_t;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Binary undirected simple graph. Immutable after construction.
///
/// Nodes are dense indices 0..N-1; the label of each node (the id it had
/// in the input) is kept alongside for reporting.
class Graph {
 public:
  Graph() = default;

  /// Builds a graph from node-id pairs. Duplicate and reversed pairs collapse
  /// to one edge. With a hint, nodes 0..hint-1 all exist even if isolated.
  static Graph from_edges(std::span<const std::pair<Index, Index>> edges,
                          std::optional<Index> node_count_hint = std::nullopt);

  /// Same, with explicit labels for the N nodes.
  static Graph from_edges(std::span<const std::pair<Index, Index>> edges,
                          std::vector<std::string> labels);

  Index node_count() const { return static_cast<Index>(adjacency_.size()); }
  Count edge_count() const { return edge_count_; }
  Index degree(Index i) const { return static_cast<Index>(adjacency_[i].size()); }
  const Eigen::VectorXi& degrees() const { return degrees_; }

  /// Sorted neighbor ids of node i.
  std::span<const Index> neighbors(Index i) const { return adjacency_[i]; }
  bool has_edge(Index i, Index j) const;

  /// Every edge once, as (i, j) with i < j, in lexicographic order.
  std::vector<std::pair<Index, Index>> edge_list() const;

  const std::string& label(Index i) const { return labels_[i]; }
  const std::vector<std::string>& labels() const { return labels_; }
  std::optional<Index> find_label(const std::string& label) const;

  Index isolated_count() const;

 private:
  std::vector<std::vector<Index>> adjacency_;
  Eigen::VectorXi degrees_;
  std::vector<std::string> labels_;
  Count edge_count_ = 0;
};

/// Network-level indicators.
struct MacroReport {
  Index node_count = 0;
  Count edge_count = 0;
  double density = 0.0;
  double mean_degree = 0.0;
  double degree_std = 0.0;
  double cv = 0.0;
  Index nakamoto = 0;
  double mean_clustering = 0.0;
  std::vector<std::pair<Index, double>> degree_ccdf;
  Eigen::VectorXd clustering_values;
  Index isolated = 0;
};

struct DegreeStats {
  double mean = 0.0;
  double std_dev = 0.0;
  double cv = 0.0;  // NaN when the mean degree is zero
};

struct Clustering {
  Eigen::VectorXd local;
  double mean = 0.0;
};

/// 2L / (N(N-1)). Throws for N < 2.
double density(const Graph& g);

/// Mean degree, population standard deviation and their ratio.
DegreeStats degree_stats(const Graph& g);

/// Smallest number of top-degree nodes whose degrees sum to at least 51% of
/// the total degree 2L. Throws when the graph has no edges.
Index nakamoto_index(const Graph& g);
/// Same rule on a bare degree sequence.
Index nakamoto_index(std::span<const Count> degrees);

/// c_i = 2 t_i / (k_i (k_i - 1)); nodes with degree below 2 get 0. The mean
/// runs over all N nodes.
Clustering clustering(const Graph& g);

/// (k, fraction of nodes with degree >= k) at every distinct degree.
std::vector<std::pair<Index, double>> degree_ccdf(const Graph& g);

/// All of the above. Density and Nakamoto fields are NaN/0 when undefined.
MacroReport macro_report(const Graph& g);

/// Reads an edge list: two tokens per line separated by whitespace or a
/// comma, '#' starts a comment line. A line with a single token declares a
/// node without adding edges. Tokens are labels; nodes are indexed by first appearance.
Graph read_edge_list(const std::string& path);
void write_edge_list(const Graph& g, const std::string& path);

/// Shortest round-trippable rendering with 6 significant digits.
std::string format_number(double value);

}  // namespace mesonet
