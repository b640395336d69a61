// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mesonet/analysis.hpp"
#include "mesonet/cli.hpp"
#include "mesonet/detection.hpp"
#include "mesonet/synth.hpp"
#include "oracles.hpp"

using namespace mesonet;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[512];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof buf, f, args);
  va_end(args);
  return buf;
}

double round_to(double v, int digits) {
  const double s = std::pow(10.0, digits);
  return std::round(v * s) / s;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size();
  return m % 2 ? v[m / 2] : 0.5 * (v[m / 2 - 1] + v[m / 2]);
}

Graph with_edge_count(Index n, Count l) {
  std::vector<std::pair<Index, Index>> e;
  for (Index i = 0; i < n && static_cast<Count>(e.size()) < l; ++i)
    for (Index j = i + 1; j < n && static_cast<Count>(e.size()) < l; ++j) e.emplace_back(i, j);
  return Graph::from_edges(e, n);
}

// Fixed suite for the exhaustive oracles.
std::vector<Graph> small_suite() {
  std::vector<Graph> out;
  std::mt19937_64 rng(20240601);
  for (int i = 0; i < 20; ++i) out.push_back(oracle::random_connected_graph(5 + i % 3, 0.5, rng));
  return out;
}

// ---------------------------------------------------------------------------

Outcome size_arithmetic() {
  struct Row {
    const char* name;
    Index n;
    Count l;
    double k_bar;
  };
  const Row rows[] = {
      {"AI/Inv", 300, 2931, 19.54},  {"AI/Inv", 500, 2252, 9.01},   {"AI/Inv", 700, 5367, 15.33},
      {"BT/Inv", 300, 1318, 8.79},   {"BT/Inv", 500, 2300, 9.20},   {"BT/Inv", 700, 3497, 9.99},
      {"SC/Inv", 300, 1640, 10.93},  {"SC/Inv", 500, 2803, 11.21},  {"SC/Inv", 700, 4801, 13.72},
      {"AI/Org", 300, 665, 4.43},    {"AI/Org", 500, 923, 3.69},    {"AI/Org", 700, 1434, 4.10},
      {"BT/Org", 300, 673, 4.49},    {"BT/Org", 500, 888, 3.55},    {"BT/Org", 700, 1496, 4.27},
      {"SC/Org", 300, 488, 3.25},    {"SC/Org", 500, 870, 3.48},    {"SC/Org", 700, 1229, 3.51},
  };
  // density statements of the text, all at top-500
  struct Density {
    const char* name;
    double rho;
  };
  const Density stated[] = {{"AI/Inv", 0.018}, {"BT/Inv", 0.018}, {"SC/Inv", 0.022},
                            {"AI/Org", 0.007}, {"BT/Org", 0.007}, {"SC/Org", 0.007}};
  int k_ok = 0, rho_ok = 0;
  std::string bad;
  for (const auto& r : rows) {
    const Graph g = with_edge_count(r.n, r.l);
    if (round_to(degree_stats(g).mean, 2) == r.k_bar) ++k_ok;
    else bad += fmt(" k(%s,%ld)", r.name, static_cast<long>(r.n));
    if (r.n != 500) continue;
    for (const auto& d : stated)
      if (std::string(d.name) == r.name) {
        if (round_to(density(g), 3) == d.rho) ++rho_ok;
        else bad += fmt(" rho(%s)", r.name);
      }
  }
  return {k_ok == 18 && rho_ok == 6,
          fmt("mean degree %d/18 rows, density %d/6 statements%s", k_ok, rho_ok, bad.c_str())};
}

Outcome exhaustive_bic() {
  int equal = 0, below = 0;
  double worst_gap = 0.0;
  for (const Graph& g : small_suite()) {
    double best = std::numeric_limits<double>::infinity();
    oracle::for_each_set_partition(g.node_count(), [&](const std::vector<Index>& labels) {
      best = std::min(best, oracle::bic_sbm(g, labels));
    });
    DetectConfig cfg;
    cfg.seed = 1;
    cfg.restarts = 10;
    const auto r = detect_bic_sbm(g, cfg);
    const double found = oracle::bic_sbm(g, r.partition.labels());
    if (found < best - 1e-9) ++below;
    if (std::abs(found - best) <= 1e-9) ++equal;
    worst_gap = std::max(worst_gap, found - best);
  }
  return {below == 0 && equal >= 16,
          fmt("global minimum reached on %d/20 graphs (need 16), %d below the minimum, largest gap %.4g",
              equal, below, worst_gap)};
}

Outcome exhaustive_modularity() {
  int equal = 0, op_exact = 0;
  double worst_op = 0.0;
  for (const Graph& g : small_suite()) {
    double best = -1.0, graph_err = 0.0;
    oracle::for_each_set_partition(g.node_count(), [&](const std::vector<Index>& labels) {
      const double brute = oracle::modularity(g, labels);
      best = std::max(best, brute);
      graph_err = std::max(graph_err, std::abs(modularity(g, Partition(labels)) - brute));
    });
    if (graph_err <= 1e-12) ++op_exact;
    worst_op = std::max(worst_op, graph_err);
    DetectConfig cfg;
    cfg.seed = 1;
    cfg.restarts = 10;
    const auto r = detect_modularity(g, cfg);
    if (std::abs(oracle::modularity(g, r.partition.labels()) - best) <= 1e-12) ++equal;
  }
  return {equal >= 16 && op_exact == 20,
          fmt("maximum reached on %d/20 graphs (need 16); Q matches the brute sum on %d/20 graphs "
              "over every set partition (max |diff| %.2g)",
              equal, op_exact, worst_op)};
}

Outcome planted_recovery() {
  std::vector<double> nmi_mod, nmi_bic, nmi_bic_singletons;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto pg = sample_sbm(planted_partition(2, 50, 0.3, 0.02, seed));
    DetectConfig cfg;
    cfg.seed = seed;
    nmi_mod.push_back(similarity(pg.planted, detect_modularity(pg.graph, cfg).partition).nmi);
    nmi_bic_singletons.push_back(similarity(pg.planted, detect_bic_sbm(pg.graph, cfg).partition).nmi);
    cfg.initial = InitKind::modularity;
    nmi_bic.push_back(similarity(pg.planted, detect_bic_sbm(pg.graph, cfg).partition).nmi);
  }
  const double m_mod = median(nmi_mod), m_bic = median(nmi_bic);
  return {m_mod >= 0.95 && m_bic >= 0.95,
          fmt("median NMI modularity %.4f, BIC-SBM (modularity-derived start) %.4f; "
              "diagnostic: BIC-SBM from singletons %.4f",
              m_mod, m_bic, median(nmi_bic_singletons))};
}

Outcome degree_correction() {
  int wins = 0, residual_ok = 0;
  double worst = 0.0;
  const Index size = 30;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    PlantedModel m;
    m.block_sizes = {size, size};
    m.blocks.resize(2, 2);
    m.blocks << 1.0, 0.05, 0.05, 1.0;
    // geometric grid from 0.2 to 2.0 inside each block, in shuffled order
    m.multipliers.resize(2 * size);
    std::mt19937_64 rng(seed);
    for (Index b = 0; b < 2; ++b) {
      std::vector<double> grid(size);
      for (Index i = 0; i < size; ++i)
        grid[i] = 0.2 * std::pow(10.0, static_cast<double>(i) / static_cast<double>(size - 1));
      std::shuffle(grid.begin(), grid.end(), rng);
      for (Index i = 0; i < size; ++i) m.multipliers[b * size + i] = grid[i];
    }
    m.seed = seed;
    const auto pg = sample_dcsbm(m);
    const auto planted = evaluate_partition(pg.graph, pg.planted);
    const auto single = evaluate_partition(pg.graph, Partition::single_block(2 * size));
    if (planted.bic_dcsbm.bic < single.bic_dcsbm.bic) ++wins;
    const auto res = dcsbm_residuals(pg.graph, pg.planted, planted.dcsbm_params);
    const double r = std::max(res.degree.cwiseAbs().maxCoeff(), res.block.cwiseAbs().maxCoeff());
    worst = std::max(worst, r);
    if (planted.dcsbm_refit_converged && r <= 1e-6) ++residual_ok;
  }
  return {wins >= 19 && residual_ok == 20,
          fmt("planted beats single block in %d/20 seeds (need 19); joint refit residuals <= 1e-6 "
              "in %d/20 (max %.2g)",
              wins, residual_ok, worst)};
}

Outcome solver_residuals() {
  int ok = 0;
  double worst = 0.0;
  const int runs = 10;
  for (int s = 0; s < runs; ++s) {
    std::mt19937_64 rng(500 + s);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const Index n = 100;
    std::vector<double> w(n);
    for (auto& v : w) v = 2.0 * std::pow(1.0 - u(rng), -1.0 / 1.5);
    double total = 0.0;
    for (double v : w) total += v;
    std::vector<std::pair<Index, Index>> e;
    for (Index i = 0; i < n; ++i)
      for (Index j = i + 1; j < n; ++j)
        if (u(rng) < std::min(1.0, w[i] * w[j] / total)) e.emplace_back(i, j);
    const Graph g = Graph::from_edges(e, n);
    const auto fit = solve_ubcm(g.degrees());
    const double r = (ubcm_expected_degrees(fit.nodes) - g.degrees().cast<double>()).norm();
    worst = std::max(worst, r);
    if (fit.converged && r <= 1e-6) ++ok;
  }
  const Graph c4 = Graph::from_edges(std::vector<std::pair<Index, Index>>{{0, 1}, {1, 2}, {2, 3}, {3, 0}});
  const auto fit = solve_ubcm(c4.degrees());
  double dev = 0.0;
  for (Index i = 0; i < 4; ++i) dev = std::max(dev, std::abs(fit.nodes.x[i] - std::sqrt(2.0)));
  return {ok == runs && dev <= 1e-8,
          fmt("heavy-tail residual <= 1e-6 on %d/%d sequences (max %.2g); 4-cycle |x - sqrt 2| = %.2g",
              ok, runs, worst, dev)};
}

Outcome delta_consistency() {
  std::mt19937_64 rng(777);
  int ok = 0, creates = 0, destroys = 0, total = 0;
  double worst = 0.0;
  while (total < 1000) {
    const Index n = 4 + static_cast<Index>(rng() % 9);
    const Graph g = oracle::random_graph(n, 0.4, rng);
    if (g.edge_count() == 0) continue;
    const bool use_q = total % 2 == 0;
    const auto q = use_q ? QualityFunction::modularity(g) : QualityFunction::bic_sbm(g);
    auto wg = std::make_shared<const WeightedGraph>(WeightedGraph::from_graph(g));
    const auto labels = oracle::random_labels(n, 1 + static_cast<Index>(rng() % n), rng);
    BlockStats s(wg, labels, n);
    const Index v = static_cast<Index>(rng() % n);
    const Index to = static_cast<Index>(rng() % n);
    std::vector<Index> after = labels;
    after[v] = to;
    const auto brute = [&](const std::vector<Index>& l) {
      // dense relabel for the dyad-loop oracle
      const auto p = Partition::from_labels(l).labels();
      return use_q ? oracle::modularity(g, p) : -oracle::bic_sbm(g, p);
    };
    const double expected = brute(after) - brute(labels);
    const double got = q.delta(s, v, to);
    const double err = std::abs(got - expected);
    worst = std::max(worst, err);
    if (err <= 1e-9) ++ok;
    if (to != labels[v]) {
      if (s.size(to) == 0) ++creates;
      if (s.size(labels[v]) == 1) ++destroys;
    }
    ++total;
  }
  return {ok == total && creates > 0 && destroys > 0,
          fmt("%d/%d deltas within 1e-9 of recompute (max err %.2g); %d create and %d destroy moves",
              ok, total, worst, creates, destroys)};
}

Outcome inequality() {
  const std::vector<double> a{1.0, 9.0}, b{0.0, 0.0, 10.0};
  const double g1 = lorenz_gini(a).gini, g2 = lorenz_gini(b).gini;
  const bool fixtures = std::abs(g1 - 0.4) <= 1e-15 && std::abs(g2 - 2.0 / 3.0) <= 1e-15;
  std::mt19937_64 rng(31337);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int ok = 0;
  for (int t = 0; t < 200; ++t) {
    const std::size_t k = 2 + t % 15;
    std::vector<double> v(k);
    for (auto& x : v) x = std::pow(u(rng), 3.0) * 100.0;
    if (t % 7 == 0) v[0] = 0.0;
    const auto c = lorenz_gini(v);
    bool good = c.gini >= -1e-15 && c.gini < 1.0;
    for (std::size_t i = 0; i < c.x.size(); ++i) good = good && c.y[i] <= c.x[i] + 1e-12;
    // a transfer from a richer to a poorer cluster never raises G
    const auto hi = std::max_element(v.begin(), v.end()) - v.begin();
    const auto lo = std::min_element(v.begin(), v.end()) - v.begin();
    if (v[hi] > v[lo]) {
      std::vector<double> w = v;
      const double amount = 0.5 * (v[hi] - v[lo]) * u(rng);
      w[hi] -= amount;
      w[lo] += amount;
      good = good && lorenz_gini(w).gini <= c.gini + 1e-12;
    }
    if (good) ++ok;
  }
  return {fixtures && ok == 200,
          fmt("G([1,9]) = %.17g, G([0,0,10]) = %.17g; properties hold on %d/200 inputs", g1, g2, ok)};
}

Outcome similarity_suite() {
  const auto hand = similarity(Partition(std::vector<Index>{0, 0, 1}), Partition(std::vector<Index>{0, 1, 1}));
  const bool hand_ok = std::abs(hand.rand - 1.0 / 3.0) <= 1e-15 && hand.jaccard == 0.0;
  const Partition split(std::vector<Index>{0, 0, 1, 1, 2, 2});
  const auto id = similarity(split, split);
  const bool id_ok = id.rand == 1.0 && id.jaccard == 1.0 && id.nmi == 1.0;
  const bool single_ok = similarity(split, Partition::single_block(6)).nmi == 0.0;
  std::mt19937_64 rng(4242);
  int symmetric = 0;
  for (int t = 0; t < 100; ++t) {
    const Index n = 2 + t % 30;
    const Partition c = Partition::from_labels(oracle::random_labels(n, 1 + t % 5, rng));
    const Partition d = Partition::from_labels(oracle::random_labels(n, 1 + (t / 5) % 5, rng));
    const auto x = similarity(c, d), y = similarity(d, c);
    if (x.rand == y.rand && x.jaccard == y.jaccard && x.nmi == y.nmi && x.nmi >= 0.0 && x.nmi <= 1.0 &&
        x.rand >= 0.0 && x.rand <= 1.0)
      ++symmetric;
  }
  return {hand_ok && id_ok && single_ok && symmetric == 100,
          fmt("hand case RI %.6f JI %.1f; identity %s; single-block NMI %s; exact symmetry on %d/100 pairs",
              hand.rand, hand.jaccard, id_ok ? "all 1" : "NOT all 1", single_ok ? "0" : "nonzero",
              symmetric)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  const fs::path dir = fs::temp_directory_path() / "mesonet_acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::ostringstream sink;
  const auto cli = [&](std::vector<std::string> args, const fs::path& out) {
    args.insert(args.begin(), {"--out-dir", out.string()});
    return run_cli(args, sink, sink);
  };
  int same = 0, total = 0;
  std::string failures;
  if (cli({"--seed", "5", "synth", "--blocks", "3", "--size", "20", "--p-in", "0.25", "--p-out", "0.03"},
          dir) != 0)
    return {false, "could not generate the input graph"};
  if (cli({"--seed", "6", "synth", "--model", "dcsbm", "--blocks", "2", "--size", "25", "--p-in", "1",
           "--p-out", "0.05", "--x-min", "0.2", "--x-max", "2"},
          dir / "dc") != 0)
    return {false, "could not generate the dcSBM input graph"};
  const std::vector<fs::path> inputs{dir / "edges.txt", dir / "dc" / "edges.txt"};
  for (const auto& input : inputs)
    for (const std::string method : {"modularity", "bic-sbm", "bic-dcsbm"})
      for (const std::string restarts : {"1", "4"})
        for (const std::string init : {"singletons", "modularity"}) {
          std::vector<std::string> files[2];
          for (int rep = 0; rep < 2; ++rep) {
            const fs::path out = dir / ("rep" + std::to_string(rep));
            fs::create_directories(out);
            if (cli({"--seed", "7", "detect", "--graph", input.string(), "--method", method, "--restarts",
                     restarts, "--init", init},
                    out) != 0)
              return {false, "detect failed for " + method};
            files[rep] = {slurp(out / (method + "_partition.csv")), slurp(out / (method + "_manifest.json"))};
          }
          ++total;
          if (files[0] == files[1] && !files[0][0].empty()) ++same;
          else failures += " " + method + "/" + restarts + "/" + init;
        }
  fs::remove_all(dir);
  return {same == total,
          fmt("%d/%d repeated detect runs byte-identical (partition and manifest)%s", same, total,
              failures.c_str())};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "mean degree and density arithmetic", size_arithmetic},
      {2, "exhaustive BIC-SBM oracle", exhaustive_bic},
      {3, "exhaustive modularity oracle", exhaustive_modularity},
      {4, "planted recovery", planted_recovery},
      {5, "degree-correction discrimination", degree_correction},
      {6, "solver residuals", solver_residuals},
      {7, "delta consistency", delta_consistency},
      {8, "inequality fixtures", inequality},
      {9, "similarity fixtures", similarity_suite},
      {10, "determinism", determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s [%2d] %s: %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs);
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
