#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "subergm/basis.hpp"
#include "subergm/npfit.hpp"

namespace subergm {

// Stacked effect curves of the usable fits from a sweep. Each row is
// (theta0, m_1(grid_1), ..., m_p(grid_p)); the intercept rides along as one
// extra coordinate so depth ranks whole model estimates, not just shapes.
struct CurveFamily {
  int p = 0;
  int grid_size = 0;
  std::vector<Eigen::VectorXd> grids;  // per effect, [0, xmax_l] inclusive
  Eigen::MatrixXd curves;              // m x (1 + p*grid_size)
  std::vector<int> round_ids;
};

// Evaluates every model with status converged (effect-zeroed fits count;
// their segments are exactly zero). xmax gives the shared grid limit per
// effect, normally the maximum observed change statistic of the sweep.
CurveFamily evaluate_curve_family(const std::vector<NpModel>& models,
                                  const ExpBasis& basis,
                                  const std::vector<double>& xmax,
                                  int grid_size = 200);

// Band depth with all C(m,2) two-curve bands (envelope boundaries count as
// inside) and the modified variant that scores the fraction of grid points
// inside. Counts are kept as integers so rankings have no floating-point
// ambiguity.
struct DepthResult {
  Eigen::VectorXd bd, mbd;
  std::vector<std::int64_t> bd_pairs;     // pairs fully containing curve i
  std::vector<std::int64_t> mbd_points;   // contained grid points, summed over pairs
};

DepthResult modified_band_depth(const CurveFamily& f);

struct MedianModel {
  int round = -1;
  NpModel model;
  double bd = 0.0, mbd = 0.0;
  std::size_t family_index = 0;
};

// Deepest observed curve under lexicographic (BD, MBD); ties resolve to the
// lowest round index. models must contain the fits the family was built from.
MedianModel select_median(const CurveFamily& f, const std::vector<NpModel>& models);

// Pointwise mean, which by linearity equals the curve of the averaged
// coefficients.
Eigen::VectorXd mean_curve(const CurveFamily& f);

}  // namespace subergm
