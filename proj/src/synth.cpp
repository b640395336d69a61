#include "mesonet/synth.hpp"

#include <cmath>
#include <random>

namespace mesonet {

Index PlantedModel::node_count() const {
  Index n = 0;
  for (Index s : block_sizes) n += s;
  return n;
}

std::vector<Index> PlantedModel::labels() const {
  std::vector<Index> out;
  out.reserve(node_count());
  for (std::size_t r = 0; r < block_sizes.size(); ++r)
    out.insert(out.end(), block_sizes[r], static_cast<Index>(r));
  return out;
}

namespace {

void validate(const PlantedModel& m, bool probabilities) {
  const auto k = static_cast<Index>(m.block_sizes.size());
  if (k == 0) throw Error("planted model needs at least one block");
  for (Index s : m.block_sizes)
    if (s <= 0) throw Error("planted block sizes must be positive");
  if (m.blocks.rows() != k || m.blocks.cols() != k)
    throw Error("block matrix must be " + std::to_string(k) + " x " + std::to_string(k));
  for (Index r = 0; r < k; ++r) {
    for (Index s = 0; s < k; ++s) {
      const double v = m.blocks(r, s);
      if (v != m.blocks(s, r)) throw Error("block matrix must be symmetric");
      if (probabilities && !(v >= 0.0 && v <= 1.0))
        throw Error("block probabilities must lie in [0, 1]");
      if (!probabilities && !(v >= 0.0)) throw Error("block affinities must be non-negative");
    }
  }
}

template <typename Prob>
PlantedGraph sample(const PlantedModel& m, Prob prob) {
  const auto labels = m.labels();
  const auto n = static_cast<Index>(labels.size());
  std::mt19937_64 rng(m.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::pair<Index, Index>> edges;
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      const double u = unit(rng);
      if (u < prob(i, j, labels[i], labels[j])) edges.emplace_back(i, j);
    }
  }
  return {Graph::from_edges(edges, n), Partition(labels)};
}

}  // namespace

PlantedGraph sample_sbm(const PlantedModel& model) {
  validate(model, true);
  return sample(model, [&](Index, Index, Index r, Index s) { return model.blocks(r, s); });
}

PlantedGraph sample_dcsbm(const PlantedModel& model) {
  validate(model, false);
  const Index n = model.node_count();
  if (model.multipliers.size() != n)
    throw Error("dcSBM needs one multiplier per node (" + std::to_string(n) + ")");
  for (Index i = 0; i < n; ++i)
    if (!(model.multipliers[i] >= 0.0) || !std::isfinite(model.multipliers[i]))
      throw Error("node multipliers must be finite and non-negative");
  return sample(model, [&](Index i, Index j, Index r, Index s) {
    const double w = model.multipliers[i] * model.multipliers[j] * model.blocks(r, s);
    return std::isinf(w) ? 1.0 : w / (1.0 + w);
  });
}

PlantedModel planted_partition(Index blocks, Index size, double p_in, double p_out,
                               std::uint64_t seed) {
  PlantedModel m;
  m.block_sizes.assign(blocks, size);
  m.blocks = Eigen::MatrixXd::Constant(blocks, blocks, p_out);
  m.blocks.diagonal().setConstant(p_in);
  m.seed = seed;
  return m;
}

}  // namespace mesonet
