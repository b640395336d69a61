#include "mesonet/partition.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <sstream>

namespace mesonet {

Partition::Partition(std::vector<Index> labels) : labels_(std::move(labels)) {
  Index k = 0;
  for (Index l : labels_) {
    if (l < 0) throw Error("negative block label");
    k = std::max(k, l + 1);
  }
  std::vector<char> used(static_cast<std::size_t>(k), 0);
  for (Index l : labels_) used[l] = 1;
  if (std::find(used.begin(), used.end(), 0) != used.end())
    throw Error("partition labels are not dense");
  block_count_ = k;
}

Partition Partition::from_labels(std::span<const Index> raw) {
  std::unordered_map<Index, Index> map;
  std::vector<Index> labels;
  labels.reserve(raw.size());
  for (Index l : raw) {
    auto [it, inserted] = map.try_emplace(l, static_cast<Index>(map.size()));
    labels.push_back(it->second);
  }
  return Partition(std::move(labels));
}

Partition Partition::singletons(Index n) {
  std::vector<Index> labels(n);
  for (Index i = 0; i < n; ++i) labels[i] = i;
  return Partition(std::move(labels));
}

Partition Partition::single_block(Index n) { return Partition(std::vector<Index>(n, 0)); }

std::vector<Count> Partition::block_sizes() const {
  std::vector<Count> sizes(block_count_, 0);
  for (Index l : labels_) ++sizes[l];
  return sizes;
}

std::vector<std::vector<Index>> Partition::members() const {
  std::vector<std::vector<Index>> out(block_count_);
  for (Index i = 0; i < node_count(); ++i) out[labels_[i]].push_back(i);
  return out;
}

Partition Partition::canonical() const { return from_labels(labels_); }

bool Partition::same_grouping(const Partition& other) const {
  return node_count() == other.node_count() && canonical().labels_ == other.canonical().labels_;
}

Count WeightedGraph::total_edges() const {
  Count total = 0;
  for (Index v = 0; v < node_count(); ++v) {
    total += internal_edges[v];
    for (const auto& [u, w] : adjacency[v])
      if (u > v) total += w;
  }
  return total;
}

WeightedGraph WeightedGraph::from_graph(const Graph& g, const Eigen::VectorXd* multipliers) {
  WeightedGraph wg;
  const Index n = g.node_count();
  wg.adjacency.resize(n);
  for (Index i = 0; i < n; ++i) {
    auto nb = g.neighbors(i);
    wg.adjacency[i].reserve(nb.size());
    for (Index j : nb) wg.adjacency[i].emplace_back(j, 1);
  }
  wg.internal_edges.assign(n, 0);
  wg.size.assign(n, 1);
  wg.degree.resize(n);
  for (Index i = 0; i < n; ++i) wg.degree[i] = g.degree(i);
  if (multipliers) {
    if (multipliers->size() != n) throw Error("multiplier vector does not match node count");
    wg.x_sum = *multipliers;
    wg.x2_sum = multipliers->array().square();
  }
  return wg;
}

WeightedGraph WeightedGraph::aggregate(std::span<const Index> membership,
                                       Index group_count) const {
  WeightedGraph out;
  out.adjacency.resize(group_count);
  out.internal_edges.assign(group_count, 0);
  out.size.assign(group_count, 0);
  out.degree.assign(group_count, 0);
  const bool with_x = x_sum.size() > 0;
  if (with_x) {
    out.x_sum = Eigen::VectorXd::Zero(group_count);
    out.x2_sum = Eigen::VectorXd::Zero(group_count);
  }
  std::vector<std::unordered_map<Index, Count>> links(group_count);
  for (Index v = 0; v < node_count(); ++v) {
    const Index gv = membership[v];
    out.internal_edges[gv] += internal_edges[v];
    out.size[gv] += size[v];
    out.degree[gv] += degree[v];
    if (with_x) {
      out.x_sum[gv] += x_sum[v];
      out.x2_sum[gv] += x2_sum[v];
    }
    for (const auto& [u, w] : adjacency[v]) {
      if (u < v) continue;
      const Index gu = membership[u];
      if (gu == gv) {
        out.internal_edges[gv] += w;
      } else {
        links[gv][gu] += w;
        links[gu][gv] += w;
      }
    }
  }
  for (Index a = 0; a < group_count; ++a) {
    out.adjacency[a].assign(links[a].begin(), links[a].end());
    std::sort(out.adjacency[a].begin(), out.adjacency[a].end());
  }
  return out;
}

BlockStats::BlockStats(std::shared_ptr<const WeightedGraph> g, std::span<const Index> labels,
                       Index capacity)
    : graph_(std::move(g)), labels_(labels.begin(), labels.end()) {
  const WeightedGraph& wg = *graph_;
  const Index n = wg.node_count();
  if (static_cast<Index>(labels_.size()) != n)
    throw Error("partition has " + std::to_string(labels_.size()) + " labels for " +
                std::to_string(n) + " nodes");
  for (Index l : labels_)
    if (l < 0 || l >= capacity) throw Error("block label " + std::to_string(l) + " out of range");
  size_.assign(capacity, 0);
  members_.assign(capacity, 0);
  intra_.assign(capacity, 0);
  degree_.assign(capacity, 0);
  inter_.assign(capacity, {});
  const bool with_x = wg.x_sum.size() > 0;
  if (with_x) {
    x_sum_.assign(capacity, 0.0);
    x2_sum_.assign(capacity, 0.0);
  }
  node_blocks_.assign(n, {});
  for (Index v = 0; v < n; ++v) {
    const Index r = labels_[v];
    size_[r] += wg.size[v];
    ++members_[r];
    degree_[r] += wg.degree[v];
    intra_[r] += wg.internal_edges[v];
    if (with_x) {
      x_sum_[r] += wg.x_sum[v];
      x2_sum_[r] += wg.x2_sum[v];
    }
    for (const auto& [u, w] : wg.adjacency[v]) {
      bump(node_blocks_[v], labels_[u], w);
      if (u < v) continue;
      const Index s = labels_[u];
      if (s == r)
        intra_[r] += w;
      else
        add_inter(r, s, w);
    }
  }
  for (Index r = 0; r < capacity; ++r) {
    if (members_[r] == 0)
      empty_.insert(r);
    else
      ++live_blocks_;
  }
}

Count BlockStats::inter(Index r, Index s) const {
  if (r == s) return intra_[r];
  auto it = inter_[r].find(s);
  return it == inter_[r].end() ? 0 : it->second;
}

Count BlockStats::node_to_block(Index v, Index r) const {
  for (const auto& [b, w] : node_blocks_[v])
    if (b == r) return w;
  return 0;
}

Count BlockStats::total_intra() const {
  Count t = 0;
  for (Count l : intra_) t += l;
  return t;
}

Count BlockStats::total_inter() const {
  Count t = 0;
  for (Index r = 0; r < capacity(); ++r)
    for (const auto& [s, l] : inter_[r])
      if (s > r) t += l;
  return t;
}

void BlockStats::add_inter(Index r, Index s, Count delta) {
  for (auto [a, b] : {std::pair{r, s}, std::pair{s, r}}) {
    auto& row = inter_[a];
    auto it = row.try_emplace(b, 0).first;
    it->second += delta;
    if (it->second == 0) row.erase(it);
  }
}

void BlockStats::bump(std::vector<std::pair<Index, Count>>& list, Index block, Count delta) {
  for (auto it = list.begin(); it != list.end(); ++it) {
    if (it->first != block) continue;
    it->second += delta;
    if (it->second == 0) {
      *it = list.back();
      list.pop_back();
    }
    return;
  }
  list.emplace_back(block, delta);
}

void BlockStats::move(Index v, Index to) {
  const Index from = labels_[v];
  if (from == to) return;
  if (to < 0) throw Error("negative target block");
  if (to >= capacity()) {
    const auto cap = static_cast<std::size_t>(to + 1);
    for (Index r = capacity(); r < to; ++r) empty_.insert(r);
    size_.resize(cap, 0);
    members_.resize(cap, 0);
    intra_.resize(cap, 0);
    degree_.resize(cap, 0);
    inter_.resize(cap);
    if (has_multipliers()) {
      x_sum_.resize(cap, 0.0);
      x2_sum_.resize(cap, 0.0);
    }
    empty_.insert(to);
  }
  const WeightedGraph& wg = *graph_;
  const Count to_from = node_to_block(v, from);
  const Count to_target = node_to_block(v, to);
  intra_[from] -= to_from + wg.internal_edges[v];
  intra_[to] += to_target + wg.internal_edges[v];
  for (const auto& [s, w] : node_blocks_[v]) {
    if (s == from || s == to) continue;
    add_inter(from, s, -w);
    add_inter(to, s, w);
  }
  if (to_from != to_target) add_inter(from, to, to_from - to_target);

  size_[from] -= wg.size[v];
  size_[to] += wg.size[v];
  degree_[from] -= wg.degree[v];
  degree_[to] += wg.degree[v];
  if (has_multipliers()) {
    x_sum_[from] -= wg.x_sum[v];
    x_sum_[to] += wg.x_sum[v];
    x2_sum_[from] -= wg.x2_sum[v];
    x2_sum_[to] += wg.x2_sum[v];
  }
  for (const auto& [u, w] : wg.adjacency[v]) {
    bump(node_blocks_[u], from, -w);
    bump(node_blocks_[u], to, w);
  }
  labels_[v] = to;

  if (--members_[from] == 0) {
    empty_.insert(from);
    --live_blocks_;
    // accumulated floating-point residue
    if (has_multipliers()) x_sum_[from] = x2_sum_[from] = 0.0;
  }
  if (members_[to]++ == 0) {
    empty_.erase(to);
    ++live_blocks_;
  }
}

Partition BlockStats::partition() const { return Partition::from_labels(labels_); }

bool BlockStats::operator==(const BlockStats& o) const {
  if (labels_ != o.labels_) return false;
  const Index cap = std::max(capacity(), o.capacity());
  auto get = [](const auto& v, Index r) {
    using T = typename std::decay_t<decltype(v)>::value_type;
    return r < static_cast<Index>(v.size()) ? v[r] : T{};
  };
  for (Index r = 0; r < cap; ++r) {
    if (get(size_, r) != get(o.size_, r) || get(members_, r) != get(o.members_, r) ||
        get(intra_, r) != get(o.intra_, r) || get(degree_, r) != get(o.degree_, r))
      return false;
    const auto empty_row = std::unordered_map<Index, Count>{};
    const auto& a = r < capacity() ? inter_[r] : empty_row;
    const auto& b = r < o.capacity() ? o.inter_[r] : empty_row;
    if (a != b) return false;
  }
  for (std::size_t v = 0; v < node_blocks_.size(); ++v) {
    auto a = node_blocks_[v];
    auto b = o.node_blocks_[v];
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    if (a != b) return false;
  }
  return live_blocks_ == o.live_blocks_;
}

BlockStats block_stats(std::shared_ptr<const WeightedGraph> wg, const Partition& p) {
  const Index capacity = std::max(p.block_count(), wg->node_count());
  return BlockStats(std::move(wg), p.labels(), capacity);
}

BlockStats block_stats(const Graph& g, const Partition& p) {
  return block_stats(std::make_shared<const WeightedGraph>(WeightedGraph::from_graph(g)), p);
}

void apply_move(BlockStats& s, Index node, Index from, Index to) {
  if (s.label(node) != from)
    throw Error("node " + std::to_string(node) + " is not in block " + std::to_string(from));
  s.move(node, to);
}

double ic_ec_ratio(const BlockStats& s) {
  const Count intra = s.total_intra();
  const Count inter = s.total_inter();
  if (intra == 0) return 0.0;
  if (inter == 0) return std::numeric_limits<double>::infinity();
  return static_cast<double>(intra) / static_cast<double>(inter);
}

void write_partition(const Graph& g, const Partition& p, const std::string& path) {
  if (p.node_count() != g.node_count()) throw Error("partition does not match graph");
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << "node,label\n";
  for (Index i = 0; i < g.node_count(); ++i) out << g.label(i) << ',' << p[i] << '\n';
}

Partition read_partition(const Graph& g, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open partition " + path);
  std::unordered_map<std::string, Index> index;
  for (Index i = 0; i < g.node_count(); ++i) index.emplace(g.label(i), i);
  std::vector<Index> raw(g.node_count(), -1);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    if (line_no == 1 && line.rfind("node", 0) == 0) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw Error(path + ":" + std::to_string(line_no) + ": expected node,label");
    const std::string node = line.substr(0, comma);
    auto it = index.find(node);
    if (it == index.end())
      throw Error(path + ":" + std::to_string(line_no) + ": unknown node " + node);
    raw[it->second] = std::stoll(line.substr(comma + 1));
  }
  for (Index i = 0; i < g.node_count(); ++i)
    if (raw[i] < 0) throw Error("partition file misses node " + g.label(i));
  return Partition::from_labels(raw);
}

}  // namespace mesonet
