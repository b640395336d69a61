#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "mesonet/graph.hpp"
#include "mesonet/partition.hpp"

namespace mesonet {

/// Planted block structure. For the SBM `blocks` holds probabilities; for the
/// dcSBM it holds affinities chi_rs and `multipliers` the per-node x_i.
struct PlantedModel {
  std::vector<Index> block_sizes;
  Eigen::MatrixXd blocks;
  Eigen::VectorXd multipliers;
  std::uint64_t seed = 0;

  Index node_count() const;
  /// Node i's block; nodes are numbered block by block.
  std::vector<Index> labels() const;
};

struct PlantedGraph {
  Graph graph;
  Partition planted;
};

/// Every dyad is an independent Bernoulli draw.
PlantedGraph sample_sbm(const PlantedModel& model);
/// p_ij = x_i x_j chi / (1 + x_i x_j chi).
PlantedGraph sample_dcsbm(const PlantedModel& model);

/// Two-parameter assortative model: `blocks` groups of `size` nodes.
PlantedModel planted_partition(Index blocks, Index size, double p_in, double p_out,
                               std::uint64_t seed);

}  // namespace mesonet
