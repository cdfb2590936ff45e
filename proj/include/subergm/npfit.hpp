#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "subergm/basis.hpp"
#include "subergm/design.hpp"
#include "subergm/graph.hpp"

#include <nlohmann/json_fwd.hpp>

namespace subergm {

enum class NpStatus { Converged, NoFitTooFewOnes, HitMaxIterations, Aborted };

// Which smooth effects survived: M1 both, M2 triangles only, M3 two-stars
// only, M4 intercept only.
enum class ModelLabel { M1, M2, M3, M4 };

std::string to_string(NpStatus s);
std::string to_string(ModelLabel l);

struct NpModel {
  int round = -1;
  NpStatus status = NpStatus::Aborted;
  ModelLabel label = ModelLabel::M1;
  double theta0 = 0.0;
  std::vector<Eigen::VectorXd> u;  // one block per effect; zeroed blocks are exactly 0
  Eigen::VectorXd lambda;          // last finite penalties (ignored for zeroed blocks)
  std::vector<int> signs;          // monotonicity directions from the preparatory GLM
  std::vector<double> max_delta;   // observed covariate maximum per effect

  bool converged() const { return status == NpStatus::Converged; }
  bool effect_zeroed(int l) const;

  // m_l(x) = B(x)' u_l; zeroed effects are identically zero.
  double effect(int l, double x, const ExpBasis& basis) const;
};

struct FitConfig {
  int K = 20;
  double gamma_min = 5e-4;
  double gamma_max = 1.0;
  int min_ones = 10;
  double zero_threshold = 0.005;  // sup|m_l| below which a failing effect is zeroed
  double conv_tol = 1e-12;
  int t_max = 20;  // inner Newton iterations per penalty update
  int s_max = 20;  // penalty (Schall) updates
  double lambda_init = 1.0;
  double lambda_max = 1e10;  // beyond this the effect is treated as zero
};

// Monotonicity directions from an unpenalized GLM on the change statistics:
// +1 when the coefficient is nonnegative. Covariate columns that are
// identically zero get coefficient 0, hence +1. Returns nullopt when the
// preparatory GLM does not converge or is singular.
std::optional<std::vector<int>> determine_directions(const Subsample& s);

// Penalized log-likelihood of the nonparametric conditional model with
// coefficient layout beta = (theta0, u_1, ..., u_p):
//   l_p = sum_i [y_i eta_i - log(1 + e^{eta_i})] - 0.5 sum_l lambda_l u_l'u_l,
// eta_i = theta0 + sum_l B(delta_il)'u_l. Returns value, score, and Hessian.
struct PenalizedEval {
  double value = 0.0;
  Eigen::VectorXd score;
  Eigen::MatrixXd hessian;  // negative definite
};
PenalizedEval penalized_objective(const Eigen::VectorXd& beta,
                                  const Eigen::VectorXd& lambda,
                                  const Subsample& s, const ExpBasis& basis);

// One Schall step: lambda_l' = df_l / u_l'u_l with
// df_l = tr of block l of (F_u + diag(lambda))^{-1} F_u, where F_u is the
// u-block of the unpenalized Fisher information. Blocks whose coefficients
// have collapsed (u'u < 1e-12) or whose update exceeds lambda_max are marked
// for zeroing instead of updated.
struct SchallResult {
  Eigen::VectorXd lambda;
  std::vector<bool> zero_out;
  Eigen::VectorXd df;
};
SchallResult schall_update(const std::vector<Eigen::VectorXd>& u,
                           const Eigen::VectorXd& lambda,
                           const Eigen::MatrixXd& fisher_u, double lambda_max);

// Full alternating fit of one subsample: inner constrained Newton steps
// (each step solves a QP that keeps the iterate feasible) alternating with
// Schall penalty updates; effects whose penalty diverges are zeroed and the
// reduced model is refit. See FitConfig for the knobs.
NpModel fit_np_sample(const Subsample& s, const FitConfig& cfg, const ExpBasis& basis);

// Inner loop only, at fixed penalties; no Schall updates, no zeroing.
// active[l] = false removes effect l from the model entirely.
NpModel fit_np_fixed_lambda(const Subsample& s, const FitConfig& cfg,
                            const ExpBasis& basis, const Eigen::VectorXd& lambda,
                            const std::vector<int>& signs,
                            const std::vector<bool>& active);

struct NpTally {
  int total = 0;
  int no_fit = 0;
  int m1 = 0, m2 = 0, m3 = 0, m4 = 0;
  int hit_max_iterations = 0;
  int aborted = 0;
};
NpTally tally_models(const std::vector<NpModel>& models);

struct NpSweep {
  std::vector<NpModel> models;
  NpTally tally;
  std::vector<double> max_delta;  // per effect, over all rounds
};

// Fits every round of the dyad schedule. workers = 0 means hardware
// concurrency; results are ordered by round index regardless of threading.
NpSweep fit_np_all(const UndirectedGraph& g, const FitConfig& cfg,
                   const ExpBasis& basis, unsigned workers = 0);

nlohmann::json np_model_to_json(const NpModel& m);
NpModel np_model_from_json(const nlohmann::json& j);

}  // namespace subergm
