#include "subergm/npfit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "subergm/glm.hpp"
#include "subergm/parallel.hpp"
#include "subergm/qp.hpp"

namespace subergm {

namespace {

double softplus(double eta) {
  if (eta > 0) return eta + std::log1p(std::exp(-eta));
  return std::log1p(std::exp(eta));
}

// Design cache for one subsample: X = (1, B(delta_1)', ..., B(delta_p)').
struct NpDesign {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  int p = 0;
  int K = 0;
  std::vector<double> xmax;
};

NpDesign build_design(const Subsample& s, const ExpBasis& basis) {
  NpDesign d;
  d.p = static_cast<int>(s.covariates.cols()) - 1;
  d.K = basis.K;
  d.y = s.responses;
  const Eigen::Index rows = s.covariates.rows();
  d.X.resize(rows, 1 + static_cast<Eigen::Index>(d.p) * d.K);
  d.X.col(0).setOnes();
  d.xmax.resize(static_cast<std::size_t>(d.p));
  for (int l = 0; l < d.p; ++l) {
    d.X.block(0, 1 + static_cast<Eigen::Index>(l) * d.K, rows, d.K) =
        basis.design(s.covariates.col(1 + l));
    d.xmax[static_cast<std::size_t>(l)] = s.covariates.col(1 + l).maxCoeff();
  }
  return d;
}

// Column indices of the reduced model: intercept plus the active blocks.
std::vector<Eigen::Index> reduced_cols(int p, int K, const std::vector<bool>& active) {
  std::vector<Eigen::Index> cols{0};
  for (int l = 0; l < p; ++l)
    if (active[static_cast<std::size_t>(l)])
      for (int q = 0; q < K; ++q) cols.push_back(1 + static_cast<Eigen::Index>(l) * K + q);
  return cols;
}

Eigen::MatrixXd select_columns(const Eigen::MatrixXd& X,
                               const std::vector<Eigen::Index>& cols) {
  Eigen::MatrixXd out(X.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) out.col(static_cast<Eigen::Index>(c)) = X.col(cols[c]);
  return out;
}

// Per-column ridge weights for a reduced model: 0 for the intercept, then
// lambda_l repeated K times for each active block.
Eigen::VectorXd penalty_columns(const Eigen::VectorXd& lambda_active, int K) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(1 + lambda_active.size() * K);
  for (Eigen::Index l = 0; l < lambda_active.size(); ++l)
    out.segment(1 + l * K, K).setConstant(lambda_active(l));
  return out;
}

struct Eval {
  double value = 0.0;
  Eigen::VectorXd score;
  Eigen::MatrixXd fisher;  // unpenalized X'WX
};

double penalized_value(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                       const Eigen::VectorXd& lambda_cols, const Eigen::VectorXd& beta) {
  Eigen::VectorXd eta = X * beta;
  double v = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) v += y(i) * eta(i) - softplus(eta(i));
  v -= 0.5 * (lambda_cols.array() * beta.array().square()).sum();
  return v;
}

Eval eval_penalized(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                    const Eigen::VectorXd& lambda_cols, const Eigen::VectorXd& beta) {
  Eval e;
  Eigen::VectorXd eta = X * beta;
  Eigen::VectorXd pi(eta.size()), w(eta.size());
  e.value = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    e.value += y(i) * eta(i) - softplus(eta(i));
    pi(i) = logistic(eta(i));
    w(i) = pi(i) * (1.0 - pi(i));
  }
  e.value -= 0.5 * (lambda_cols.array() * beta.array().square()).sum();
  e.score = X.transpose() * (y - pi) - lambda_cols.cwiseProduct(beta);
  e.fisher = X.transpose() * w.asDiagonal() * X;
  return e;
}

struct InnerOut {
  Eigen::VectorXd beta;
  double value = -std::numeric_limits<double>::infinity();
  bool converged = false;
  bool qp_failed = false;
  int iterations = 0;
  std::vector<int> warm;
};

// Constrained Newton ascent at fixed penalties. Each step solves
//   min_b -score'b + 0.5 b'(-H)b   s.t.  A(beta + b) >= 0,
// so feasibility is preserved exactly; the step is halved if it would
// decrease the penalized log-likelihood.
InnerOut run_inner(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                   const Eigen::MatrixXd& A, const Eigen::VectorXd& lambda_cols,
                   Eigen::VectorXd beta, int t_max, double conv_tol,
                   std::vector<int> warm) {
  InnerOut out;
  Eval e = eval_penalized(X, y, lambda_cols, beta);
  for (int t = 0; t < t_max; ++t) {
    QpProblem qp;
    qp.D = e.fisher;
    qp.D.diagonal() += lambda_cols;
    qp.d = e.score;
    qp.A = A;
    qp.b0 = -(A * beta);
    QpSolution sol;
    try {
      sol = solve_qp(qp, warm);
    } catch (const NumericError&) {
      out.qp_failed = true;
      break;
    }
    warm = sol.active;

    double alpha = 1.0;
    double v_new = penalized_value(X, y, lambda_cols, beta + sol.b);
    for (int h = 0; h < 10 && v_new < e.value; ++h) {
      alpha /= 2;
      v_new = penalized_value(X, y, lambda_cols, beta + alpha * sol.b);
    }
    ++out.iterations;
    if (v_new < e.value) {
      // No ascent direction left; the iterate is stationary up to noise.
      out.converged = true;
      break;
    }
    double step_inf = alpha * sol.b.lpNorm<Eigen::Infinity>();
    beta += alpha * sol.b;
    double rel_ll = std::abs(v_new - e.value) / (1.0 + std::abs(e.value));
    e = eval_penalized(X, y, lambda_cols, beta);
    if (rel_ll < conv_tol &&
        step_inf < conv_tol * std::max(1.0, beta.lpNorm<Eigen::Infinity>())) {
      out.converged = true;
      break;
    }
  }
  out.beta = std::move(beta);
  out.value = e.value;
  out.warm = std::move(warm);
  return out;
}

ModelLabel label_from_active(const std::vector<bool>& active) {
  bool twostar = active[0];
  bool triangle = active[1];
  if (twostar && triangle) return ModelLabel::M1;
  if (triangle) return ModelLabel::M2;
  if (twostar) return ModelLabel::M3;
  return ModelLabel::M4;
}

double sup_effect(const ExpBasis& basis, const Eigen::VectorXd& u, double xmax) {
  double sup = 0.0;
  for (int i = 0; i < 200; ++i) {
    double x = xmax * i / 199.0;
    sup = std::max(sup, std::abs(basis.effect(x, u)));
  }
  return sup;
}

}  // namespace

std::string to_string(NpStatus s) {
  switch (s) {
    case NpStatus::Converged: return "converged";
    case NpStatus::NoFitTooFewOnes: return "no_fit_too_few_ones";
    case NpStatus::HitMaxIterations: return "hit_max_iterations";
    case NpStatus::Aborted: return "aborted";
  }
  return "unknown";
}

std::string to_string(ModelLabel l) {
  switch (l) {
    case ModelLabel::M1: return "M1";
    case ModelLabel::M2: return "M2";
    case ModelLabel::M3: return "M3";
    case ModelLabel::M4: return "M4";
  }
  return "unknown";
}

bool NpModel::effect_zeroed(int l) const {
  return u[static_cast<std::size_t>(l)].isZero(0.0);
}

double NpModel::effect(int l, double x, const ExpBasis& basis) const {
  const auto& ul = u[static_cast<std::size_t>(l)];
  if (ul.size() == 0 || ul.isZero(0.0)) return 0.0;
  return basis.effect(x, ul);
}

std::optional<std::vector<int>> determine_directions(const Subsample& s) {
  const auto p = static_cast<int>(s.covariates.cols()) - 1;
  std::vector<int> kept;  // effect indices with a non-zero column
  for (int l = 0; l < p; ++l)
    if (!s.covariates.col(1 + l).isZero(0.0)) kept.push_back(l);

  std::vector<int> signs(static_cast<std::size_t>(p), 1);  // zero column -> theta = 0 -> +1
  if (kept.empty()) return signs;

  Eigen::MatrixXd X(s.covariates.rows(), 1 + static_cast<Eigen::Index>(kept.size()));
  X.col(0) = s.covariates.col(0);
  for (std::size_t c = 0; c < kept.size(); ++c)
    X.col(1 + static_cast<Eigen::Index>(c)) = s.covariates.col(1 + kept[c]);
  try {
    GlmFit fit = fit_logistic(X, s.responses);
    if (!fit.converged) return std::nullopt;
    for (std::size_t c = 0; c < kept.size(); ++c)
      signs[static_cast<std::size_t>(kept[c])] =
          fit.theta(1 + static_cast<Eigen::Index>(c)) >= 0.0 ? 1 : -1;
  } catch (const SingularDesignError&) {
    return std::nullopt;
  }
  return signs;
}

PenalizedEval penalized_objective(const Eigen::VectorXd& beta,
                                  const Eigen::VectorXd& lambda,
                                  const Subsample& s, const ExpBasis& basis) {
  NpDesign d = build_design(s, basis);
  if (beta.size() != d.X.cols())
    throw std::invalid_argument("penalized_objective: beta has wrong length");
  if (lambda.size() != d.p)
    throw std::invalid_argument("penalized_objective: lambda has wrong length");
  if (lambda.minCoeff() < 0)
    throw std::invalid_argument("penalized_objective: penalties must be nonnegative");
  Eigen::VectorXd lambda_cols = penalty_columns(lambda, d.K);
  Eval e = eval_penalized(d.X, d.y, lambda_cols, beta);
  PenalizedEval out;
  out.value = e.value;
  out.score = std::move(e.score);
  out.hessian = -e.fisher;
  out.hessian.diagonal() -= lambda_cols;
  return out;
}

SchallResult schall_update(const std::vector<Eigen::VectorXd>& u,
                           const Eigen::VectorXd& lambda,
                           const Eigen::MatrixXd& fisher_u, double lambda_max) {
  const auto p = static_cast<Eigen::Index>(u.size());
  if (lambda.size() != p) throw std::invalid_argument("schall_update: lambda size mismatch");
  Eigen::Index dim = 0;
  for (const auto& ul : u) dim += ul.size();
  if (fisher_u.rows() != dim || fisher_u.cols() != dim)
    throw std::invalid_argument("schall_update: Fisher block size mismatch");

  Eigen::MatrixXd penalized = fisher_u;
  Eigen::Index off = 0;
  for (Eigen::Index l = 0; l < p; ++l) {
    penalized.diagonal().segment(off, u[static_cast<std::size_t>(l)].size())
        .array() += lambda(l);
    off += u[static_cast<std::size_t>(l)].size();
  }
  Eigen::LDLT<Eigen::MatrixXd> ldlt(penalized);
  if (ldlt.info() != Eigen::Success || ldlt.vectorD().minCoeff() <= 0)
    throw NumericError("schall_update: penalized Fisher information is singular");
  Eigen::MatrixXd M = ldlt.solve(fisher_u);
  if (!M.allFinite())
    throw NumericError("schall_update: penalized Fisher information is singular");

  SchallResult out;
  out.lambda = lambda;
  out.zero_out.assign(static_cast<std::size_t>(p), false);
  out.df.resize(p);
  off = 0;
  for (Eigen::Index l = 0; l < p; ++l) {
    const auto& ul = u[static_cast<std::size_t>(l)];
    out.df(l) = M.diagonal().segment(off, ul.size()).sum();
    off += ul.size();
    double uu = ul.squaredNorm();
    if (uu < 1e-12) {
      out.zero_out[static_cast<std::size_t>(l)] = true;
      continue;
    }
    double next = out.df(l) / uu;
    if (!std::isfinite(next) || next > lambda_max) {
      out.zero_out[static_cast<std::size_t>(l)] = true;
      continue;
    }
    out.lambda(l) = next;
  }
  return out;
}

namespace {

// Shared state while fitting one subsample; handles the gather/scatter
// between the full coefficient layout and the reduced (active-effects) one.
struct FitState {
  const NpDesign& design;
  const ExpBasis& basis;
  const FitConfig& cfg;
  std::vector<int> signs;
  std::vector<bool> active;
  Eigen::VectorXd beta_full;
  Eigen::VectorXd lambda;  // per effect

  Eigen::VectorXd gather(const std::vector<Eigen::Index>& cols) const {
    Eigen::VectorXd b(static_cast<Eigen::Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) b(static_cast<Eigen::Index>(c)) = beta_full(cols[c]);
    return b;
  }
  void scatter(const std::vector<Eigen::Index>& cols, const Eigen::VectorXd& b) {
    for (std::size_t c = 0; c < cols.size(); ++c) beta_full(cols[c]) = b(static_cast<Eigen::Index>(c));
  }
  void zero_effect(int l) {
    active[static_cast<std::size_t>(l)] = false;
    beta_full.segment(1 + static_cast<Eigen::Index>(l) * design.K, design.K).setZero();
  }
  Eigen::VectorXd lambda_active() const {
    std::vector<double> v;
    for (int l = 0; l < design.p; ++l)
      if (active[static_cast<std::size_t>(l)]) v.push_back(lambda(l));
    return Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
  }
  std::vector<int> active_signs() const {
    std::vector<int> v;
    for (int l = 0; l < design.p; ++l)
      if (active[static_cast<std::size_t>(l)]) v.push_back(signs[static_cast<std::size_t>(l)]);
    return v;
  }
  std::vector<Eigen::VectorXd> active_u() const {
    std::vector<Eigen::VectorXd> v;
    for (int l = 0; l < design.p; ++l)
      if (active[static_cast<std::size_t>(l)])
        v.push_back(beta_full.segment(1 + static_cast<Eigen::Index>(l) * design.K, design.K));
    return v;
  }
};

void finalize(NpModel& m, const FitState& st, NpStatus status) {
  m.status = status;
  m.label = label_from_active(st.active);
  m.theta0 = st.beta_full(0);
  for (int l = 0; l < st.design.p; ++l)
    m.u[static_cast<std::size_t>(l)] =
        st.beta_full.segment(1 + static_cast<Eigen::Index>(l) * st.design.K, st.design.K);
  m.lambda = st.lambda;
  m.signs = st.signs;
}

}  // namespace

NpModel fit_np_sample(const Subsample& s, const FitConfig& cfg, const ExpBasis& basis) {
  if (s.covariates.cols() != 3)
    throw std::invalid_argument("fit_np_sample: expected change statistics for 2 effects");

  NpModel m;
  m.round = s.round;
  m.signs.assign(2, 1);
  m.u.assign(2, Eigen::VectorXd::Zero(basis.K));
  m.lambda = Eigen::VectorXd::Constant(2, cfg.lambda_init);
  m.max_delta = {s.covariates.col(1).maxCoeff(), s.covariates.col(2).maxCoeff()};

  if (s.ones_count < cfg.min_ones) {
    m.status = NpStatus::NoFitTooFewOnes;
    return m;
  }
  auto dirs = determine_directions(s);
  if (!dirs) {
    m.status = NpStatus::Aborted;
    return m;
  }

  NpDesign design = build_design(s, basis);
  FitState st{design, basis, cfg, *dirs, std::vector<bool>(2, true),
              Eigen::VectorXd::Zero(design.X.cols()),
              Eigen::VectorXd::Constant(2, cfg.lambda_init)};
  double ybar = std::clamp(s.responses.mean(), 1e-12, 1.0 - 1e-12);
  st.beta_full(0) = std::log(ybar / (1.0 - ybar));

  bool any_qp_success = false;

  for (;;) {  // restarts after an effect is zeroed
    int n_active = 0;
    for (bool a : st.active) n_active += a ? 1 : 0;

    if (n_active == 0) {
      // Intercept-only model: plain logistic fit, no constraints or penalty.
      try {
        GlmFit f = fit_logistic(Eigen::MatrixXd::Ones(design.y.size(), 1), design.y);
        st.beta_full(0) = f.theta(0);
        finalize(m, st, f.converged ? NpStatus::Converged : NpStatus::Aborted);
      } catch (const SingularDesignError&) {
        finalize(m, st, NpStatus::Aborted);
      }
      return m;
    }

    auto cols = reduced_cols(design.p, design.K, st.active);
    Eigen::MatrixXd X = select_columns(design.X, cols);
    ConstraintMatrix cm = constraint_matrix(basis, st.active_signs());
    Eigen::VectorXd beta = st.gather(cols);
    Eigen::VectorXd lambda_act = st.lambda_active();
    std::vector<int> warm;

    bool restart = false;
    bool outer_converged = false;
    for (int s_it = 0; s_it < cfg.s_max; ++s_it) {
      InnerOut inner = run_inner(X, design.y, cm.A, penalty_columns(lambda_act, design.K),
                                 beta, cfg.t_max, cfg.conv_tol, warm);
      if (inner.qp_failed) {
        if (!any_qp_success) {
          st.scatter(cols, inner.beta);
          finalize(m, st, NpStatus::Aborted);
          return m;
        }
        // A later Newton-QP step failed: zero the smallest effect if any is
        // below the threshold, otherwise give up on this sample.
        st.scatter(cols, inner.beta);
        int smallest = -1;
        double smallest_sup = std::numeric_limits<double>::infinity();
        for (int l = 0; l < design.p; ++l) {
          if (!st.active[static_cast<std::size_t>(l)]) continue;
          double sup = sup_effect(basis,
                                  st.beta_full.segment(1 + static_cast<Eigen::Index>(l) * design.K,
                                                       design.K),
                                  design.xmax[static_cast<std::size_t>(l)]);
          if (sup < smallest_sup) {
            smallest_sup = sup;
            smallest = l;
          }
        }
        if (smallest < 0 || smallest_sup > cfg.zero_threshold) {
          finalize(m, st, NpStatus::Aborted);
          return m;
        }
        st.zero_effect(smallest);
        restart = true;
        break;
      }
      any_qp_success = true;
      beta = inner.beta;
      warm = inner.warm;

      // Schall update on the unpenalized Fisher information at the new beta.
      Eigen::VectorXd lambda_cols_zero = Eigen::VectorXd::Zero(X.cols());
      Eval e = eval_penalized(X, design.y, lambda_cols_zero, beta);
      Eigen::MatrixXd fisher_u = e.fisher.bottomRightCorner(X.cols() - 1, X.cols() - 1);
      std::vector<Eigen::VectorXd> u_blocks;
      for (Eigen::Index l = 0; l < lambda_act.size(); ++l)
        u_blocks.push_back(beta.segment(1 + l * design.K, design.K));
      SchallResult sr;
      try {
        sr = schall_update(u_blocks, lambda_act, fisher_u, cfg.lambda_max);
      } catch (const NumericError&) {
        st.scatter(cols, beta);
        finalize(m, st, NpStatus::Aborted);
        return m;
      }

      if (std::find(sr.zero_out.begin(), sr.zero_out.end(), true) != sr.zero_out.end()) {
        st.scatter(cols, beta);
        int pos = 0;
        Eigen::VectorXd lambda_new = st.lambda;
        for (int l = 0; l < design.p; ++l) {
          if (!st.active[static_cast<std::size_t>(l)]) continue;
          if (sr.zero_out[static_cast<std::size_t>(pos)]) st.zero_effect(l);
          else lambda_new(l) = sr.lambda(pos);
          ++pos;
        }
        st.lambda = lambda_new;
        restart = true;
        break;
      }

      double rel = 0.0;
      for (Eigen::Index l = 0; l < lambda_act.size(); ++l)
        rel = std::max(rel, std::abs(sr.lambda(l) - lambda_act(l)) / lambda_act(l));
      lambda_act = sr.lambda;
      {
        int pos = 0;
        for (int l = 0; l < design.p; ++l)
          if (st.active[static_cast<std::size_t>(l)]) st.lambda(l) = lambda_act(pos++);
      }
      if (rel < cfg.conv_tol) {
        outer_converged = true;
        st.scatter(cols, beta);
        break;
      }
    }
    if (restart) continue;
    if (!outer_converged) {
      st.scatter(cols, beta);
      finalize(m, st, NpStatus::HitMaxIterations);
      return m;
    }
    finalize(m, st, NpStatus::Converged);
    return m;
  }
}

NpModel fit_np_fixed_lambda(const Subsample& s, const FitConfig& cfg,
                            const ExpBasis& basis, const Eigen::VectorXd& lambda,
                            const std::vector<int>& signs,
                            const std::vector<bool>& active) {
  if (s.covariates.cols() != 3)
    throw std::invalid_argument("fit_np_fixed_lambda: expected 2 effects");

  NpDesign design = build_design(s, basis);
  FitState st{design, basis, cfg, signs, active,
              Eigen::VectorXd::Zero(design.X.cols()), lambda};
  double ybar = std::clamp(s.responses.mean(), 1e-12, 1.0 - 1e-12);
  st.beta_full(0) = std::log(ybar / (1.0 - ybar));

  NpModel m;
  m.round = s.round;
  m.signs = signs;
  m.u.assign(2, Eigen::VectorXd::Zero(basis.K));
  m.lambda = lambda;
  m.max_delta = {s.covariates.col(1).maxCoeff(), s.covariates.col(2).maxCoeff()};

  auto cols = reduced_cols(design.p, design.K, st.active);
  if (cols.size() == 1) {
    GlmFit f = fit_logistic(Eigen::MatrixXd::Ones(design.y.size(), 1), design.y);
    st.beta_full(0) = f.theta(0);
    finalize(m, st, f.converged ? NpStatus::Converged : NpStatus::Aborted);
    return m;
  }
  Eigen::MatrixXd X = select_columns(design.X, cols);
  ConstraintMatrix cm = constraint_matrix(basis, st.active_signs());
  Eigen::VectorXd beta = st.gather(cols);
  Eigen::VectorXd lambda_cols = penalty_columns(st.lambda_active(), design.K);

  std::vector<int> warm;
  bool converged = false;
  bool failed = false;
  for (int rounds = 0; rounds < cfg.s_max; ++rounds) {
    InnerOut inner = run_inner(X, design.y, cm.A, lambda_cols, beta, cfg.t_max,
                               cfg.conv_tol, warm);
    beta = inner.beta;
    warm = inner.warm;
    if (inner.qp_failed) {
      failed = true;
      break;
    }
    if (inner.converged) {
      converged = true;
      break;
    }
  }
  st.scatter(cols, beta);
  finalize(m, st, failed            ? NpStatus::Aborted
               : converged          ? NpStatus::Converged
                                    : NpStatus::HitMaxIterations);
  return m;
}

NpTally tally_models(const std::vector<NpModel>& models) {
  NpTally t;
  t.total = static_cast<int>(models.size());
  for (const auto& m : models) {
    switch (m.status) {
      case NpStatus::NoFitTooFewOnes: ++t.no_fit; break;
      case NpStatus::HitMaxIterations: ++t.hit_max_iterations; break;
      case NpStatus::Aborted: ++t.aborted; break;
      case NpStatus::Converged:
        switch (m.label) {
          case ModelLabel::M1: ++t.m1; break;
          case ModelLabel::M2: ++t.m2; break;
          case ModelLabel::M3: ++t.m3; break;
          case ModelLabel::M4: ++t.m4; break;
        }
        break;
    }
  }
  return t;
}

NpSweep fit_np_all(const UndirectedGraph& g, const FitConfig& cfg,
                   const ExpBasis& basis, unsigned workers) {
  const NodeId n = g.node_count();
  if (n < 4 || n % 2 != 0)
    throw std::invalid_argument("fit_np_all: graph order must be even and >= 4");

  NpSweep sweep;
  sweep.models.resize(static_cast<std::size_t>(n) - 1);
  parallel_for(sweep.models.size(), workers, [&](std::size_t k) {
    Subsample s = extract_subsample(g, matching_round(n, static_cast<int>(k)));
    sweep.models[k] = fit_np_sample(s, cfg, basis);
  });
  sweep.tally = tally_models(sweep.models);
  sweep.max_delta.assign(2, 0.0);
  for (const auto& m : sweep.models)
    for (std::size_t l = 0; l < 2; ++l)
      sweep.max_delta[l] = std::max(sweep.max_delta[l], m.max_delta[l]);
  return sweep;
}

nlohmann::json np_model_to_json(const NpModel& m) {
  nlohmann::json j;
  j["round"] = m.round;
  j["status"] = to_string(m.status);
  j["model_label"] = to_string(m.label);
  j["theta0"] = m.theta0;
  nlohmann::json blocks = nlohmann::json::array();
  for (const auto& ul : m.u)
    blocks.push_back(std::vector<double>(ul.data(), ul.data() + ul.size()));
  j["u"] = std::move(blocks);
  nlohmann::json lam = nlohmann::json::array();
  for (Eigen::Index l = 0; l < m.lambda.size(); ++l) {
    if (m.effect_zeroed(static_cast<int>(l)) && m.converged())
      lam.push_back(nullptr);  // penalty diverged; the block is exactly zero
    else
      lam.push_back(m.lambda(l));
  }
  j["lambda"] = std::move(lam);
  j["signs"] = m.signs;
  j["max_delta"] = m.max_delta;
  return j;
}

NpModel np_model_from_json(const nlohmann::json& j) {
  NpModel m;
  m.round = j.at("round").get<int>();
  std::string status = j.at("status").get<std::string>();
  if (status == "converged") m.status = NpStatus::Converged;
  else if (status == "no_fit_too_few_ones") m.status = NpStatus::NoFitTooFewOnes;
  else if (status == "hit_max_iterations") m.status = NpStatus::HitMaxIterations;
  else if (status == "aborted") m.status = NpStatus::Aborted;
  else throw ParseError("np model: unknown status '" + status + "'");
  std::string label = j.at("model_label").get<std::string>();
  if (label == "M1") m.label = ModelLabel::M1;
  else if (label == "M2") m.label = ModelLabel::M2;
  else if (label == "M3") m.label = ModelLabel::M3;
  else if (label == "M4") m.label = ModelLabel::M4;
  else throw ParseError("np model: unknown label '" + label + "'");
  m.theta0 = j.at("theta0").get<double>();
  for (const auto& block : j.at("u")) {
    auto v = block.get<std::vector<double>>();
    m.u.push_back(Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
  }
  const auto& lam = j.at("lambda");
  m.lambda.resize(static_cast<Eigen::Index>(lam.size()));
  for (std::size_t l = 0; l < lam.size(); ++l)
    m.lambda(static_cast<Eigen::Index>(l)) = lam[l].is_null() ? 0.0 : lam[l].get<double>();
  m.signs = j.at("signs").get<std::vector<int>>();
  if (j.contains("max_delta")) m.max_delta = j.at("max_delta").get<std::vector<double>>();
  else m.max_delta.assign(m.u.size(), 0.0);
  return m;
}

}  // namespace subergm
