#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "subergm/basis.hpp"
#include "subergm/glm.hpp"
#include "subergm/graph.hpp"
#include "subergm/npfit.hpp"

namespace subergm {

// Conditional edge probability of a dyad with change statistics delta.
// Parametric: inverse logit of theta'(1, d_twostars, d_triangles).
double predict_edge_prob(const Eigen::VectorXd& theta, const StatVector& delta);
// Nonparametric: inverse logit of theta0 + sum_l m_l(delta_l).
double predict_edge_prob(const NpModel& m, const ExpBasis& basis, const StatVector& delta);

// Per-node averages of the Pearson residuals
//   e_ij = (y_ij - pi_ij) / sqrt(pi_ij (1 - pi_ij)),
// one average over the n-1 dyads at each node. predict maps a dyad's change
// statistics to its fitted probability. Throws NumericError when a fitted
// probability is exactly 0 or 1 (the residual is undefined there).
using EdgePredictor = std::function<double(const StatVector&)>;

struct ResidualReport {
  Eigen::VectorXd node_avg;
  std::vector<NodeId> degrees;
};

ResidualReport pearson_node_residuals(const UndirectedGraph& g,
                                      const EdgePredictor& predict,
                                      unsigned workers = 0);

struct GibbsConfig {
  int sweeps = 0;
  std::uint64_t seed = 0;
  double init_density = 0.5;  // Erdos-Renyi starting state
};

struct GibbsTrace {
  int sweeps = 0;
  std::uint64_t seed = 0;
  std::vector<double> density_path;      // after each sweep
  std::vector<double> dyad_on_fraction;  // dyad (i<j) on-rate over all sweeps
  UndirectedGraph final_graph{0};
};

// Systematic-scan Gibbs sampler over all dyads in (i, j) order, i < j.
// Bit-reproducible for a given config. Both model forms share a core that
// precomputes the conditional logit on the integer change-statistic range,
// so each dyad update costs one shared-neighbor count.
GibbsTrace gibbs_simulate(const Eigen::VectorXd& theta, NodeId n, const GibbsConfig& cfg);
GibbsTrace gibbs_simulate(const NpModel& m, const ExpBasis& basis, NodeId n,
                          const GibbsConfig& cfg);

// Degeneracy flag: the density path left the open band (lo, hi).
bool density_exits_band(const GibbsTrace& trace, double lo = 0.001, double hi = 0.9);

}  // namespace subergm
