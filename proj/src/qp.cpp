#include "subergm/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace subergm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void validate(const QpProblem& p) {
  const Eigen::Index q = p.D.rows();
  if (p.D.cols() != q || p.d.size() != q)
    throw std::invalid_argument("qp: inconsistent D/d dimensions");
  if (p.A.rows() != p.b0.size())
    throw std::invalid_argument("qp: inconsistent A/b0 dimensions");
  if (p.A.rows() > 0 && p.A.cols() != q)
    throw std::invalid_argument("qp: A column count must match D");
  double scale = std::max(1.0, p.D.cwiseAbs().maxCoeff());
  if ((p.D - p.D.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw std::invalid_argument("qp: D must be symmetric");
}

// Appends the constraint whose J-coordinates are in dv to the active-set
// factorization: Givens rotations push the tail of dv into component iq,
// extending the upper-triangular R by one column. Returns false when the
// new normal is linearly dependent on the active ones.
bool add_constraint(Eigen::MatrixXd& R, Eigen::MatrixXd& J, Eigen::VectorXd& dv,
                    int& iq, double& r_norm) {
  const auto q = static_cast<int>(J.rows());
  for (int j = q - 1; j >= iq + 1; --j) {
    double cc = dv(j - 1);
    double ss = dv(j);
    double h = std::hypot(cc, ss);
    if (h == 0.0) continue;
    dv(j) = 0.0;
    ss /= h;
    cc /= h;
    if (cc < 0.0) {
      cc = -cc;
      ss = -ss;
      dv(j - 1) = -h;
    } else {
      dv(j - 1) = h;
    }
    double xny = ss / (1.0 + cc);
    for (int k = 0; k < q; ++k) {
      double t1 = J(k, j - 1);
      double t2 = J(k, j);
      J(k, j - 1) = t1 * cc + t2 * ss;
      J(k, j) = xny * (t1 + J(k, j - 1)) - t2;
    }
  }
  ++iq;
  R.col(iq - 1).head(iq) = dv.head(iq);
  r_norm = std::max(r_norm, std::abs(dv(iq - 1)));
  return std::abs(dv(iq - 1)) > 1e2 * std::numeric_limits<double>::epsilon() * r_norm;
}

// Removes active constraint at position pos, shifting the later columns of R
// left and restoring triangularity with row rotations mirrored into J.
void delete_constraint(Eigen::MatrixXd& R, Eigen::MatrixXd& J,
                       std::vector<int>& active, std::vector<double>& mult,
                       int& iq, int pos) {
  const auto q = static_cast<int>(J.rows());
  active.erase(active.begin() + pos);
  mult.erase(mult.begin() + pos);
  for (int i = pos; i < iq - 1; ++i) R.col(i) = R.col(i + 1);
  R.col(iq - 1).setZero();
  --iq;
  if (iq == 0) return;

  for (int j = pos; j < iq; ++j) {
    double cc = R(j, j);
    double ss = R(j + 1, j);
    double h = std::hypot(cc, ss);
    if (h == 0.0) continue;
    cc /= h;
    ss /= h;
    R(j + 1, j) = 0.0;
    if (cc < 0.0) {
      R(j, j) = -h;
      cc = -cc;
      ss = -ss;
    } else {
      R(j, j) = h;
    }
    double xny = ss / (1.0 + cc);
    for (int k = j + 1; k < iq; ++k) {
      double t1 = R(j, k);
      double t2 = R(j + 1, k);
      R(j, k) = t1 * cc + t2 * ss;
      R(j + 1, k) = xny * (t1 + R(j, k)) - t2;
    }
    for (int k = 0; k < q; ++k) {
      double t1 = J(k, j);
      double t2 = J(k, j + 1);
      J(k, j) = t1 * cc + t2 * ss;
      J(k, j + 1) = xny * (t1 + J(k, j)) - t2;
    }
  }
}

// Equality-constrained solve on a proposed active set; returns a solution
// only when it satisfies the full KKT conditions.
std::optional<QpSolution> try_warm_start(const QpProblem& p, const Eigen::MatrixXd& D,
                                         const std::vector<int>& warm) {
  const Eigen::Index q = D.rows();
  const auto nw = static_cast<Eigen::Index>(warm.size());
  if (nw == 0 || nw > q) return std::nullopt;
  for (int idx : warm)
    if (idx < 0 || idx >= p.A.rows()) return std::nullopt;

  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(q + nw, q + nw);
  kkt.topLeftCorner(q, q) = D;
  Eigen::VectorXd rhs(q + nw);
  rhs.head(q) = p.d;
  for (Eigen::Index w = 0; w < nw; ++w) {
    kkt.block(q + w, 0, 1, q) = p.A.row(warm[static_cast<std::size_t>(w)]);
    kkt.block(0, q + w, q, 1) = -p.A.row(warm[static_cast<std::size_t>(w)]).transpose();
    rhs(q + w) = p.b0(warm[static_cast<std::size_t>(w)]);
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
  if (!lu.isInvertible()) return std::nullopt;
  Eigen::VectorXd sol = lu.solve(rhs);
  Eigen::VectorXd b = sol.head(q);
  Eigen::VectorXd mu_active = sol.tail(nw);

  double scale = std::max({1.0, p.d.lpNorm<Eigen::Infinity>(),
                           p.b0.size() ? p.b0.lpNorm<Eigen::Infinity>() : 0.0});
  if (mu_active.size() && mu_active.minCoeff() < -1e-11 * scale) return std::nullopt;
  if (p.A.rows()) {
    Eigen::VectorXd slack = p.A * b - p.b0;
    if (slack.minCoeff() < -1e-11 * scale) return std::nullopt;
  }

  QpSolution s;
  s.b = std::move(b);
  s.multipliers = Eigen::VectorXd::Zero(p.A.rows());
  for (Eigen::Index w = 0; w < nw; ++w)
    s.multipliers(warm[static_cast<std::size_t>(w)]) = std::max(0.0, mu_active(w));
  s.active = warm;
  s.iterations = 0;
  KktResidual res = kkt_residual(p, s);
  double worst = std::max({res.stationarity, res.feasibility, res.multiplier_sign,
                           res.complementarity});
  if (worst > 1e-9 * scale) return std::nullopt;
  return s;
}

}  // namespace

QpSolution solve_qp(const QpProblem& p, const std::vector<int>& warm_start) {
  validate(p);
  const Eigen::Index q = p.D.rows();
  const Eigen::Index m = p.A.rows();

  Eigen::MatrixXd D = 0.5 * (p.D + p.D.transpose());
  bool ridged = false;
  Eigen::LLT<Eigen::MatrixXd> llt(D);
  if (llt.info() != Eigen::Success) {
    D.diagonal().array() += 1e-10 * D.trace() / static_cast<double>(q);
    ridged = true;
    llt.compute(D);
    if (llt.info() != Eigen::Success)
      throw IndefiniteHessianError("qp: D is not positive definite");
  }

  if (!warm_start.empty()) {
    if (auto warm = try_warm_start(p, D, warm_start)) {
      warm->ridged = ridged;
      return *warm;
    }
  }

  // J spans the unconstrained directions in the metric of D: J = L^{-T}.
  Eigen::MatrixXd J = llt.matrixU().solve(Eigen::MatrixXd::Identity(q, q));
  Eigen::VectorXd x = llt.solve(p.d);

  QpSolution sol;
  sol.ridged = ridged;
  if (m == 0) {
    sol.b = x;
    sol.multipliers.resize(0);
    return sol;
  }

  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(q, q);
  double r_norm = 1.0;
  std::vector<int> active;
  std::vector<double> mult;
  int iq = 0;
  std::vector<char> is_active(static_cast<std::size_t>(m), 0);

  const double scale = std::max(1.0, p.b0.lpNorm<Eigen::Infinity>());
  const double tol = 1e-12 * scale;
  const int max_steps = 50 * static_cast<int>(m + q + 10);
  int steps = 0;

  for (;;) {
    // Most violated inactive constraint.
    int ip = -1;
    double worst = -tol;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (is_active[static_cast<std::size_t>(i)]) continue;
      double s = p.A.row(i).dot(x) - p.b0(i);
      if (s < worst) {
        worst = s;
        ip = static_cast<int>(i);
      }
    }
    if (ip < 0) break;  // feasible and dual feasible: optimal

    Eigen::VectorXd np = p.A.row(ip).transpose();
    double s_ip = np.dot(x) - p.b0(ip);
    double u_plus = 0.0;

    for (;;) {
      if (++steps > max_steps) throw NumericError("qp: iteration limit exceeded");

      Eigen::VectorXd dv = J.transpose() * np;
      double z2 = dv.tail(q - iq).squaredNorm();
      bool z_zero = z2 <= 1e-26 * std::max(1.0, dv.squaredNorm());
      Eigen::VectorXd z = Eigen::VectorXd::Zero(q);
      if (!z_zero) z = J.rightCols(q - iq) * dv.tail(q - iq);
      Eigen::VectorXd r(iq);
      if (iq > 0)
        r = R.topLeftCorner(iq, iq)
                .triangularView<Eigen::Upper>()
                .solve(dv.head(iq));

      // Partial step: first active constraint whose multiplier hits zero.
      double t1 = kInf;
      int drop = -1;
      for (int k = 0; k < iq; ++k) {
        if (r(k) > 0.0 && mult[static_cast<std::size_t>(k)] / r(k) < t1) {
          t1 = mult[static_cast<std::size_t>(k)] / r(k);
          drop = k;
        }
      }
      // Full step: the violated constraint becomes satisfied.
      double t2 = z_zero ? kInf : -s_ip / z2;  // z'np = ||J2'np||^2 = z2

      if (t1 == kInf && t2 == kInf)
        throw InfeasibleError("qp: constraints are inconsistent");

      if (t2 == kInf) {
        // Step in the dual only; drop the blocking constraint.
        for (int k = 0; k < iq; ++k) mult[static_cast<std::size_t>(k)] -= t1 * r(k);
        u_plus += t1;
        is_active[static_cast<std::size_t>(active[static_cast<std::size_t>(drop)])] = 0;
        delete_constraint(R, J, active, mult, iq, drop);
        continue;
      }

      double t = std::min(t1, t2);
      x += t * z;
      for (int k = 0; k < iq; ++k) mult[static_cast<std::size_t>(k)] -= t * r(k);
      u_plus += t;
      s_ip = np.dot(x) - p.b0(ip);

      if (t2 <= t1) {
        // Full step: activate the constraint.
        if (!add_constraint(R, J, dv, iq, r_norm))
          throw NumericError("qp: active-set factorization broke down");
        active.push_back(ip);
        mult.push_back(u_plus);
        is_active[static_cast<std::size_t>(ip)] = 1;
        break;
      }
      // Partial step: a blocking constraint leaves, keep working on ip.
      is_active[static_cast<std::size_t>(active[static_cast<std::size_t>(drop)])] = 0;
      delete_constraint(R, J, active, mult, iq, drop);
    }
    sol.iterations = steps;
  }

  sol.b = x;
  sol.multipliers = Eigen::VectorXd::Zero(m);
  for (int k = 0; k < iq; ++k)
    sol.multipliers(active[static_cast<std::size_t>(k)]) =
        std::max(0.0, mult[static_cast<std::size_t>(k)]);
  sol.active = active;
  sol.iterations = steps;
  return sol;
}

KktResidual kkt_residual(const QpProblem& p, const QpSolution& s) {
  KktResidual r;
  Eigen::VectorXd grad = p.D * s.b - p.d;
  if (p.A.rows() > 0) grad -= p.A.transpose() * s.multipliers;
  r.stationarity = grad.lpNorm<Eigen::Infinity>();
  if (p.A.rows() > 0) {
    Eigen::VectorXd slack = p.A * s.b - p.b0;
    r.feasibility = std::max(0.0, -slack.minCoeff());
    r.multiplier_sign = std::max(0.0, -s.multipliers.minCoeff());
    r.complementarity = (s.multipliers.array() * slack.array()).abs().maxCoeff();
  }
  return r;
}

}  // namespace subergm
