#include "subergm/diagnose.hpp"

#include <bit>
#include <cmath>
#include <random>
#include <string>

#include "subergm/parallel.hpp"

namespace subergm {

double predict_edge_prob(const Eigen::VectorXd& theta, const StatVector& delta) {
  if (theta.size() != 3)
    throw std::invalid_argument("predict_edge_prob: theta must have 3 entries");
  auto d = delta.as_array();
  return logistic(theta(0) * d[0] + theta(1) * d[1] + theta(2) * d[2]);
}

double predict_edge_prob(const NpModel& m, const ExpBasis& basis, const StatVector& delta) {
  double eta = m.theta0;
  eta += m.effect(0, static_cast<double>(delta.twostars), basis);
  eta += m.effect(1, static_cast<double>(delta.triangles), basis);
  return logistic(eta);
}

ResidualReport pearson_node_residuals(const UndirectedGraph& g,
                                      const EdgePredictor& predict, unsigned workers) {
  const NodeId n = g.node_count();
  if (n < 2) throw std::invalid_argument("residuals: graph too small");

  ResidualReport report;
  report.node_avg.resize(n);
  report.degrees.resize(static_cast<std::size_t>(n));

  std::vector<std::string> failures(static_cast<std::size_t>(n));
  parallel_for(static_cast<std::size_t>(n), workers, [&](std::size_t idx) {
    auto i = static_cast<NodeId>(idx);
    double sum = 0.0;
    for (NodeId j = 0; j < n; ++j) {
      if (j == i) continue;
      double pi = predict(change_statistics(g, i, j));
      if (!(pi > 0.0) || !(pi < 1.0)) {
        failures[idx] = "residuals: fitted probability " + std::to_string(pi) +
                        " at dyad (" + std::to_string(std::min(i, j)) + "," +
                        std::to_string(std::max(i, j)) + ")";
        return;
      }
      double y = g.has_edge(i, j) ? 1.0 : 0.0;
      sum += (y - pi) / std::sqrt(pi * (1.0 - pi));
    }
    report.node_avg(i) = sum / static_cast<double>(n - 1);
    report.degrees[idx] = g.degree(i);
  });
  for (const auto& f : failures)
    if (!f.empty()) throw NumericError(f);
  return report;
}

namespace {

// Dense bitset adjacency for the sampler: shared-neighbor counts become a
// word-wise AND + popcount, which keeps dense states cheap.
struct DenseAdj {
  NodeId n;
  std::size_t words;
  std::vector<std::uint64_t> bits;
  std::vector<std::int32_t> deg;
  std::int64_t edges = 0;

  explicit DenseAdj(NodeId nodes)
      : n(nodes),
        words((static_cast<std::size_t>(nodes) + 63) / 64),
        bits(static_cast<std::size_t>(nodes) * words, 0),
        deg(static_cast<std::size_t>(nodes), 0) {}

  bool get(NodeId i, NodeId j) const {
    return (bits[static_cast<std::size_t>(i) * words + static_cast<std::size_t>(j) / 64] >>
            (j % 64)) & 1u;
  }
  void flip(NodeId i, NodeId j, bool on) {
    auto mask_i = std::uint64_t{1} << (j % 64);
    auto mask_j = std::uint64_t{1} << (i % 64);
    auto& wi = bits[static_cast<std::size_t>(i) * words + static_cast<std::size_t>(j) / 64];
    auto& wj = bits[static_cast<std::size_t>(j) * words + static_cast<std::size_t>(i) / 64];
    if (on) {
      wi |= mask_i;
      wj |= mask_j;
      ++deg[static_cast<std::size_t>(i)];
      ++deg[static_cast<std::size_t>(j)];
      ++edges;
    } else {
      wi &= ~mask_i;
      wj &= ~mask_j;
      --deg[static_cast<std::size_t>(i)];
      --deg[static_cast<std::size_t>(j)];
      --edges;
    }
  }
  int shared(NodeId i, NodeId j) const {
    const auto* a = bits.data() + static_cast<std::size_t>(i) * words;
    const auto* b = bits.data() + static_cast<std::size_t>(j) * words;
    int count = 0;
    for (std::size_t w = 0; w < words; ++w) count += std::popcount(a[w] & b[w]);
    return count;  // self bits are never set, so i and j are not counted
  }
};

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Core sampler over precomputed conditional-logit tables:
// eta(dyad) = theta0 + f2[delta_twostars] + f3[delta_triangles].
GibbsTrace run_gibbs(double theta0, const std::vector<double>& f2,
                     const std::vector<double>& f3, NodeId n, const GibbsConfig& cfg) {
  if (n < 2) throw std::invalid_argument("gibbs_simulate: need at least two nodes");
  if (cfg.sweeps < 1) throw std::invalid_argument("gibbs_simulate: sweeps must be positive");
  if (cfg.init_density < 0.0 || cfg.init_density > 1.0)
    throw std::invalid_argument("gibbs_simulate: init density outside [0,1]");

  std::mt19937_64 rng(cfg.seed);
  DenseAdj adj(n);
  for (NodeId i = 0; i < n; ++i)
    for (NodeId j = i + 1; j < n; ++j)
      if (uniform01(rng) < cfg.init_density) adj.flip(i, j, true);

  const std::size_t dyad_count =
      static_cast<std::size_t>(n) * (static_cast<std::size_t>(n) - 1) / 2;
  const double dyads = static_cast<double>(dyad_count);
  GibbsTrace trace;
  trace.sweeps = cfg.sweeps;
  trace.seed = cfg.seed;
  trace.density_path.reserve(static_cast<std::size_t>(cfg.sweeps));
  std::vector<std::int64_t> on_count(dyad_count, 0);

  for (int sweep = 0; sweep < cfg.sweeps; ++sweep) {
    std::size_t dyad = 0;
    for (NodeId i = 0; i < n; ++i) {
      for (NodeId j = i + 1; j < n; ++j, ++dyad) {
        bool y = adj.get(i, j);
        int d2 = (adj.deg[static_cast<std::size_t>(i)] - (y ? 1 : 0)) +
                 (adj.deg[static_cast<std::size_t>(j)] - (y ? 1 : 0));
        int d3 = adj.shared(i, j);
        double eta = theta0 + f2[static_cast<std::size_t>(d2)] + f3[static_cast<std::size_t>(d3)];
        bool on = uniform01(rng) < logistic(eta);
        if (on != y) adj.flip(i, j, on);
        on_count[dyad] += on ? 1 : 0;
      }
    }
    trace.density_path.push_back(static_cast<double>(adj.edges) / dyads);
  }

  trace.dyad_on_fraction.resize(on_count.size());
  for (std::size_t k = 0; k < on_count.size(); ++k)
    trace.dyad_on_fraction[k] =
        static_cast<double>(on_count[k]) / static_cast<double>(cfg.sweeps);

  std::vector<std::pair<NodeId, NodeId>> edges;
  for (NodeId i = 0; i < n; ++i)
    for (NodeId j = i + 1; j < n; ++j)
      if (adj.get(i, j)) edges.emplace_back(i, j);
  trace.final_graph = UndirectedGraph(n, edges);
  return trace;
}

}  // namespace

GibbsTrace gibbs_simulate(const Eigen::VectorXd& theta, NodeId n, const GibbsConfig& cfg) {
  if (theta.size() != 3)
    throw std::invalid_argument("gibbs_simulate: theta must have 3 entries");
  std::vector<double> f2(static_cast<std::size_t>(2 * n), 0.0);
  std::vector<double> f3(static_cast<std::size_t>(n), 0.0);
  for (std::size_t x = 0; x < f2.size(); ++x) f2[x] = theta(1) * static_cast<double>(x);
  for (std::size_t x = 0; x < f3.size(); ++x) f3[x] = theta(2) * static_cast<double>(x);
  return run_gibbs(theta(0), f2, f3, n, cfg);
}

GibbsTrace gibbs_simulate(const NpModel& m, const ExpBasis& basis, NodeId n,
                          const GibbsConfig& cfg) {
  std::vector<double> f2(static_cast<std::size_t>(2 * n), 0.0);
  std::vector<double> f3(static_cast<std::size_t>(n), 0.0);
  for (std::size_t x = 0; x < f2.size(); ++x)
    f2[x] = m.effect(0, static_cast<double>(x), basis);
  for (std::size_t x = 0; x < f3.size(); ++x)
    f3[x] = m.effect(1, static_cast<double>(x), basis);
  return run_gibbs(m.theta0, f2, f3, n, cfg);
}

bool density_exits_band(const GibbsTrace& trace, double lo, double hi) {
  for (double d : trace.density_path)
    if (d <= lo || d >= hi) return true;
  return false;
}

}  // namespace subergm
