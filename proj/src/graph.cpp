#include "mesonet/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <unordered_map>

namespace mesonet {

namespace {

void fill_adjacency(std::span<const std::pair<Index, Index>> edges, Index n,
                    std::vector<std::vector<Index>>& adjacency) {
  for (const auto& [a, b] : edges) {
    if (a < 0 || b < 0) throw Error("negative node id in edge list");
    if (a >= n || b >= n)
      throw Error("node id " + std::to_string(std::max(a, b)) + " exceeds node count " +
                  std::to_string(n));
    if (a == b) throw Error("self-loop at node " + std::to_string(a));
    adjacency[a].push_back(b);
    adjacency[b].push_back(a);
  }
}

}  // namespace

Graph Graph::from_edges(std::span<const std::pair<Index, Index>> edges,
                        std::optional<Index> node_count_hint) {
  Index n = 0;
  for (const auto& [a, b] : edges) n = std::max({n, a + 1, b + 1});
  if (node_count_hint) {
    if (*node_count_hint < n)
      throw Error("node count hint " + std::to_string(*node_count_hint) +
                  " does not exceed every node id");
    n = *node_count_hint;
  }
  std::vector<std::string> labels(n);
  for (Index i = 0; i < n; ++i) labels[i] = std::to_string(i);
  return from_edges(edges, std::move(labels));
}

Graph Graph::from_edges(std::span<const std::pair<Index, Index>> edges,
                        std::vector<std::string> labels) {
  Graph g;
  const auto n = static_cast<Index>(labels.size());
  g.adjacency_.assign(n, {});
  fill_adjacency(edges, n, g.adjacency_);
  g.degrees_.resize(n);
  Count stubs = 0;
  for (Index i = 0; i < n; ++i) {
    auto& nb = g.adjacency_[i];
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
    nb.shrink_to_fit();
    g.degrees_[i] = static_cast<int>(nb.size());
    stubs += static_cast<Count>(nb.size());
  }
  g.edge_count_ = stubs / 2;
  g.labels_ = std::move(labels);
  return g;
}

bool Graph::has_edge(Index i, Index j) const {
  const auto& nb = adjacency_[i];
  return std::binary_search(nb.begin(), nb.end(), j);
}

std::vector<std::pair<Index, Index>> Graph::edge_list() const {
  std::vector<std::pair<Index, Index>> out;
  out.reserve(static_cast<std::size_t>(edge_count_));
  for (Index i = 0; i < node_count(); ++i)
    for (Index j : adjacency_[i])
      if (i < j) out.emplace_back(i, j);
  return out;
}

std::optional<Index> Graph::find_label(const std::string& label) const {
  auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) return std::nullopt;
  return static_cast<Index>(it - labels_.begin());
}

Index Graph::isolated_count() const {
  return static_cast<Index>((degrees_.array() == 0).count());
}

double density(const Graph& g) {
  const Index n = g.node_count();
  if (n < 2) throw Error("density undefined for fewer than 2 nodes");
  return 2.0 * static_cast<double>(g.edge_count()) /
         (static_cast<double>(n) * static_cast<double>(n - 1));
}

DegreeStats degree_stats(const Graph& g) {
  DegreeStats s;
  const Index n = g.node_count();
  if (n == 0) return s;
  const Eigen::ArrayXd k = g.degrees().cast<double>().array();
  s.mean = 2.0 * static_cast<double>(g.edge_count()) / static_cast<double>(n);
  s.std_dev = std::sqrt((k - s.mean).square().mean());
  s.cv = s.mean > 0.0 ? s.std_dev / s.mean : std::numeric_limits<double>::quiet_NaN();
  return s;
}

Index nakamoto_index(std::span<const Count> degrees) {
  std::vector<Count> k(degrees.begin(), degrees.end());
  Count total = 0;
  for (Count d : k) {
    if (d < 0) throw Error("negative degree");
    total += d;
  }
  if (total == 0) throw Error("Nakamoto index undefined for a graph without edges");
  std::sort(k.begin(), k.end(), std::greater<>());
  // prefix >= 0.51 * total, in integers
  Count prefix = 0;
  for (std::size_t m = 0; m < k.size(); ++m) {
    prefix += k[m];
    if (100 * prefix >= 51 * total) return static_cast<Index>(m + 1);
  }
  return static_cast<Index>(k.size());
}

Index nakamoto_index(const Graph& g) {
  const std::vector<Count> k(g.degrees().data(), g.degrees().data() + g.node_count());
  return nakamoto_index(k);
}

Clustering clustering(const Graph& g) {
  const Index n = g.node_count();
  Clustering c;
  c.local = Eigen::VectorXd::Zero(n);
  for (Index i = 0; i < n; ++i) {
    const Index ki = g.degree(i);
    if (ki < 2) continue;
    auto nb = g.neighbors(i);
    Count triangles = 0;
    for (std::size_t a = 0; a < nb.size(); ++a) {
      auto nj = g.neighbors(nb[a]);
      // count common neighbors of i and nb[a] beyond position a
      auto it1 = nb.begin() + static_cast<std::ptrdiff_t>(a) + 1;
      auto it2 = std::upper_bound(nj.begin(), nj.end(), nb[a]);
      while (it1 != nb.end() && it2 != nj.end()) {
        if (*it1 < *it2) {
          ++it1;
        } else if (*it2 < *it1) {
          ++it2;
        } else {
          ++triangles;
          ++it1;
          ++it2;
        }
      }
    }
    c.local[i] = 2.0 * static_cast<double>(triangles) /
                 (static_cast<double>(ki) * static_cast<double>(ki - 1));
  }
  c.mean = n > 0 ? c.local.mean() : 0.0;
  return c;
}

std::vector<std::pair<Index, double>> degree_ccdf(const Graph& g) {
  const Index n = g.node_count();
  std::vector<Index> k(g.degrees().data(), g.degrees().data() + n);
  std::sort(k.begin(), k.end());
  std::vector<std::pair<Index, double>> out;
  for (std::size_t pos = 0; pos < k.size();) {
    const Index value = k[pos];
    out.emplace_back(value, static_cast<double>(k.size() - pos) / static_cast<double>(n));
    while (pos < k.size() && k[pos] == value) ++pos;
  }
  return out;
}

MacroReport macro_report(const Graph& g) {
  MacroReport r;
  r.node_count = g.node_count();
  r.edge_count = g.edge_count();
  r.density = g.node_count() >= 2 ? density(g) : std::numeric_limits<double>::quiet_NaN();
  const auto ds = degree_stats(g);
  r.mean_degree = ds.mean;
  r.degree_std = ds.std_dev;
  r.cv = ds.cv;
  r.nakamoto = g.edge_count() > 0 ? nakamoto_index(g) : 0;
  auto c = clustering(g);
  r.mean_clustering = c.mean;
  r.clustering_values = std::move(c.local);
  r.degree_ccdf = degree_ccdf(g);
  r.isolated = g.isolated_count();
  return r;
}

Graph read_edge_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open edge list " + path);
  std::unordered_map<std::string, Index> index;
  std::vector<std::string> labels;
  std::vector<std::pair<Index, Index>> edges;
  auto id_of = [&](const std::string& label) {
    auto [it, inserted] = index.try_emplace(label, static_cast<Index>(labels.size()));
    if (inserted) labels.push_back(label);
    return it->second;
  };
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    std::string a, b, extra;
    if (!(ss >> a) || a.front() == '#') continue;
    if (!(ss >> b)) {
      id_of(a);
      continue;
    }
    if (ss >> extra)
      throw Error(path + ":" + std::to_string(line_no) + ": expected two tokens");
    const Index ia = id_of(a);
    const Index ib = id_of(b);
    if (ia == ib) throw Error(path + ":" + std::to_string(line_no) + ": self-loop at node " + a);
    edges.emplace_back(ia, ib);
  }
  return Graph::from_edges(edges, std::move(labels));
}

void write_edge_list(const Graph& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  for (Index i = 0; i < g.node_count(); ++i) out << g.label(i) << '\n';
  for (const auto& [i, j] : g.edge_list()) out << g.label(i) << ' ' << g.label(j) << '\n';
}

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", value);
  return buf;
}

}  // namespace mesonet
