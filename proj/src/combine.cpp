#include "subergm/combine.hpp"

#include <algorithm>

#include "subergm/parallel.hpp"

namespace subergm {

CurveFamily evaluate_curve_family(const std::vector<NpModel>& models,
                                  const ExpBasis& basis,
                                  const std::vector<double>& xmax, int grid_size) {
  if (grid_size < 2) throw std::invalid_argument("curve family: grid too small");

  std::vector<const NpModel*> usable;
  for (const auto& m : models)
    if (m.converged()) usable.push_back(&m);
  if (usable.empty()) throw NumericError("curve family: no converged fits");

  CurveFamily f;
  f.p = static_cast<int>(xmax.size());
  f.grid_size = grid_size;
  for (int l = 0; l < f.p; ++l) {
    Eigen::VectorXd grid(grid_size);
    for (int i = 0; i < grid_size; ++i)
      grid(i) = xmax[static_cast<std::size_t>(l)] * i / (grid_size - 1);
    f.grids.push_back(std::move(grid));
  }

  // Basis design per grid is shared by every curve.
  std::vector<Eigen::MatrixXd> designs;
  for (int l = 0; l < f.p; ++l) designs.push_back(basis.design(f.grids[static_cast<std::size_t>(l)]));

  f.curves.resize(static_cast<Eigen::Index>(usable.size()),
                  1 + static_cast<Eigen::Index>(f.p) * grid_size);
  for (std::size_t i = 0; i < usable.size(); ++i) {
    const NpModel& m = *usable[i];
    if (static_cast<int>(m.u.size()) != f.p)
      throw std::invalid_argument("curve family: model effect count mismatch");
    auto row = static_cast<Eigen::Index>(i);
    f.curves(row, 0) = m.theta0;
    for (int l = 0; l < f.p; ++l) {
      auto seg = f.curves.row(row).segment(1 + static_cast<Eigen::Index>(l) * grid_size, grid_size);
      if (m.effect_zeroed(l))
        seg.setZero();
      else
        seg = (designs[static_cast<std::size_t>(l)] * m.u[static_cast<std::size_t>(l)]).transpose();
    }
    f.round_ids.push_back(m.round);
  }
  return f;
}

DepthResult modified_band_depth(const CurveFamily& f) {
  const auto m = f.curves.rows();
  const auto P = f.curves.cols();
  if (m < 3) throw std::invalid_argument("band depth: need at least three curves");

  DepthResult out;
  out.bd_pairs.assign(static_cast<std::size_t>(m), 0);
  out.mbd_points.assign(static_cast<std::size_t>(m), 0);

  // MBD decomposes over grid points: at each point, the pairs whose envelope
  // contains curve i are all pairs except those entirely above or entirely
  // below, so sorting one column gives every curve's count at once.
  std::vector<double> column(static_cast<std::size_t>(m));
  auto pairs_of = [](std::int64_t k) { return k * (k - 1) / 2; };
  for (Eigen::Index t = 0; t < P; ++t) {
    for (Eigen::Index i = 0; i < m; ++i) column[static_cast<std::size_t>(i)] = f.curves(i, t);
    std::vector<double> sorted = column;
    std::sort(sorted.begin(), sorted.end());
    for (Eigen::Index i = 0; i < m; ++i) {
      double v = column[static_cast<std::size_t>(i)];
      auto below = std::lower_bound(sorted.begin(), sorted.end(), v) - sorted.begin();
      auto above = sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), v);
      out.mbd_points[static_cast<std::size_t>(i)] +=
          pairs_of(m) - pairs_of(below) - pairs_of(above);
    }
  }

  // Plain band depth needs containment at every point, so pairs are checked
  // directly, with an early exit on the first excursion.
  parallel_for(static_cast<std::size_t>(m), 0, [&](std::size_t i) {
    const auto row = f.curves.row(static_cast<Eigen::Index>(i));
    std::int64_t count = 0;
    for (Eigen::Index j1 = 0; j1 < m; ++j1) {
      for (Eigen::Index j2 = j1 + 1; j2 < m; ++j2) {
        bool inside = true;
        for (Eigen::Index t = 0; t < P; ++t) {
          double a = f.curves(j1, t), b = f.curves(j2, t);
          double v = row(t);
          if (v < std::min(a, b) || v > std::max(a, b)) {
            inside = false;
            break;
          }
        }
        count += inside ? 1 : 0;
      }
    }
    out.bd_pairs[static_cast<std::size_t>(i)] = count;
  });

  double total_pairs = static_cast<double>(pairs_of(m));
  out.bd.resize(m);
  out.mbd.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    out.bd(i) = static_cast<double>(out.bd_pairs[static_cast<std::size_t>(i)]) / total_pairs;
    out.mbd(i) = static_cast<double>(out.mbd_points[static_cast<std::size_t>(i)]) /
                 (total_pairs * static_cast<double>(P));
  }
  return out;
}

MedianModel select_median(const CurveFamily& f, const std::vector<NpModel>& models) {
  DepthResult depth = modified_band_depth(f);
  std::size_t best = 0;
  for (std::size_t i = 1; i < f.round_ids.size(); ++i) {
    auto key = [&](std::size_t k) {
      return std::make_tuple(depth.bd_pairs[k], depth.mbd_points[k], -f.round_ids[k]);
    };
    if (key(i) > key(best)) best = i;
  }
  MedianModel out;
  out.round = f.round_ids[best];
  out.family_index = best;
  out.bd = depth.bd(static_cast<Eigen::Index>(best));
  out.mbd = depth.mbd(static_cast<Eigen::Index>(best));
  for (const auto& m : models) {
    if (m.round == out.round && m.converged()) {
      out.model = m;
      return out;
    }
  }
  throw std::invalid_argument("select_median: median round missing from model list");
}

Eigen::VectorXd mean_curve(const CurveFamily& f) {
  return f.curves.colwise().mean();
}

}  // namespace subergm
