#include "subergm/glm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "subergm/parallel.hpp"
#include "subergm/qp.hpp"

namespace subergm {

double logistic(double eta) {
  if (eta >= 0) return 1.0 / (1.0 + std::exp(-eta));
  double e = std::exp(eta);
  return e / (1.0 + e);
}

namespace {

// log(1 + exp(eta)) without overflow.
double softplus(double eta) {
  if (eta > 0) return eta + std::log1p(std::exp(-eta));
  return std::log1p(std::exp(eta));
}

// Complete separation check: a hyperplane with margin exists iff the
// max-margin program  min 0.5|b|^2  s.t.  (2y_i - 1) x_i'b >= 1  is
// feasible. When it is, the MLE lies at infinity and the Newton iterate is
// only a direction, so the fit must not be reported as converged.
// (Quasi-complete separation, with ties on the boundary, is not detected.)
bool completely_separated(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  QpProblem p;
  p.D = Eigen::MatrixXd::Identity(X.cols(), X.cols());
  p.d = Eigen::VectorXd::Zero(X.cols());
  p.A = (2.0 * y.array() - 1.0).matrix().asDiagonal() * X;
  p.b0 = Eigen::VectorXd::Ones(X.rows());
  try {
    solve_qp(p);
    return true;
  } catch (const InfeasibleError&) {
    return false;
  } catch (const NumericError&) {
    return false;  // not provably separated; leave the flag alone
  }
}

}  // namespace

double log_likelihood_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                               const Eigen::VectorXd& theta) {
  // Compensated summation: the Newton loop compares likelihoods down to
  // ~eps*(1+|ll|), which naive summation noise (~sqrt(n)*eps*|ll|) would
  // drown for long designs.
  Eigen::VectorXd eta = X * theta;
  double ll = 0.0, comp = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    double term = (y(i) * eta(i) - softplus(eta(i))) - comp;
    double next = ll + term;
    comp = (next - ll) - term;
    ll = next;
  }
  return ll;
}

Eigen::VectorXd GlmFit::standard_errors() const {
  return covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
}

GlmFit fit_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, int max_iter) {
  const Eigen::Index n = X.rows();
  const Eigen::Index p = X.cols();
  if (y.size() != n) throw std::invalid_argument("fit_logistic: X/y size mismatch");
  if (n < p) throw SingularDesignError("fit_logistic: fewer rows than parameters");

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  if (qr.rank() < p)
    throw SingularDesignError("fit_logistic: design matrix is rank deficient");

  GlmFit fit;
  fit.theta = Eigen::VectorXd::Zero(p);
  double ll = log_likelihood_logistic(X, y, fit.theta);

  Eigen::VectorXd pi(n), w(n);
  Eigen::MatrixXd fisher(p, p);
  for (int it = 0; it < max_iter; ++it) {
    Eigen::VectorXd eta = X * fit.theta;
    for (Eigen::Index i = 0; i < n; ++i) {
      pi(i) = logistic(eta(i));
      w(i) = pi(i) * (1.0 - pi(i));
    }
    Eigen::VectorXd score = X.transpose() * (y - pi);
    fisher = X.transpose() * w.asDiagonal() * X;

    Eigen::LDLT<Eigen::MatrixXd> ldlt(fisher);
    if (!fisher.allFinite() || ldlt.info() != Eigen::Success ||
        ldlt.vectorD().minCoeff() <= 0.0) {
      // Fisher information collapsed entirely; no step is possible.
      fit.iterations = it;
      fit.log_likelihood = ll;
      fit.covariance = Eigen::MatrixXd::Constant(p, p,
                                                 std::numeric_limits<double>::quiet_NaN());
      return fit;
    }

    Eigen::VectorXd step = ldlt.solve(score);
    // Predicted ascent of the Newton model. Once it drops below the float
    // resolution of the log-likelihood, ll comparisons are pure noise, so
    // the raw polishing step is accepted instead of being halved away.
    double predicted = 0.5 * score.dot(step);
    bool measurable =
        predicted > 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(ll));
    double alpha = 1.0;
    double ll_new = log_likelihood_logistic(X, y, fit.theta + alpha * step);
    if (measurable) {
      for (int h = 0; h < 10 && ll_new < ll; ++h) {
        alpha /= 2;
        ll_new = log_likelihood_logistic(X, y, fit.theta + alpha * step);
      }
      if (ll_new < ll) {  // no ascent step found; stationary up to noise
        fit.iterations = it;
        break;
      }
    }
    fit.theta += alpha * step;
    fit.iterations = it + 1;
    double rel_change = std::abs(ll_new - ll) / (std::abs(ll) + 1e-300);
    ll = ll_new;
    if (rel_change < 1e-10) fit.converged = true;
    // Keep polishing past the likelihood criterion until the score criterion
    // holds as well; near the optimum this is one or two extra steps and it
    // makes the returned iterate a genuine root of the score equation.
    Eigen::VectorXd eta_new = X * fit.theta;
    for (Eigen::Index i = 0; i < n; ++i) pi(i) = logistic(eta_new(i));
    if ((X.transpose() * (y - pi)).lpNorm<Eigen::Infinity>() < 1e-8) {
      fit.converged = true;
      break;
    }
  }

  // Recompute the score at the final iterate so the convergence flag reflects
  // the returned coefficients, not the pre-step state.
  Eigen::VectorXd eta = X * fit.theta;
  for (Eigen::Index i = 0; i < n; ++i) {
    pi(i) = logistic(eta(i));
    w(i) = pi(i) * (1.0 - pi(i));
  }
  if ((X.transpose() * (y - pi)).lpNorm<Eigen::Infinity>() < 1e-8)
    fit.converged = true;

  // A numerically met tolerance does not make a divergent fit converged:
  // under complete separation the score decays along an unbounded path.
  if (fit.converged && completely_separated(X, y)) fit.converged = false;

  fit.log_likelihood = ll;
  fisher = X.transpose() * w.asDiagonal() * X;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(fisher);
  if (ldlt.info() == Eigen::Success && ldlt.vectorD().minCoeff() > 0)
    fit.covariance = ldlt.solve(Eigen::MatrixXd::Identity(p, p));
  else
    fit.covariance =
        Eigen::MatrixXd::Constant(p, p, std::numeric_limits<double>::quiet_NaN());
  return fit;
}

std::string to_string(GlmStatus s) {
  switch (s) {
    case GlmStatus::Fit: return "fit";
    case GlmStatus::SkippedTooFewOnes: return "too_few_ones";
    case GlmStatus::Singular: return "singular";
  }
  return "unknown";
}

std::vector<GlmRecord> fit_parametric_all(const UndirectedGraph& g, int min_ones,
                                          unsigned workers) {
  const NodeId n = g.node_count();
  if (n < 4 || n % 2 != 0)
    throw std::invalid_argument("fit_parametric_all: graph order must be even and >= 4");

  std::vector<GlmRecord> records(static_cast<std::size_t>(n) - 1);
  parallel_for(records.size(), workers, [&](std::size_t k) {
    Subsample s = extract_subsample(g, matching_round(n, static_cast<int>(k)));
    GlmRecord rec;
    rec.round = s.round;
    rec.ones_count = s.ones_count;
    if (s.ones_count < min_ones) {
      rec.status = GlmStatus::SkippedTooFewOnes;
    } else {
      try {
        rec.fit = fit_logistic(s.covariates, s.responses);
        rec.fit.round = s.round;
      } catch (const SingularDesignError&) {
        rec.status = GlmStatus::Singular;
      }
    }
    records[k] = std::move(rec);
  });
  return records;
}

double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw std::invalid_argument("quantile: empty sample");
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("quantile: p outside [0,1]");
  std::sort(values.begin(), values.end());
  double h = (static_cast<double>(values.size()) - 1.0) * p;
  auto lo = static_cast<std::size_t>(h);
  if (lo + 1 >= values.size()) return values.back();
  return values[lo] + (h - static_cast<double>(lo)) * (values[lo + 1] - values[lo]);
}

AggregateSummary aggregate_estimates(const std::vector<GlmRecord>& records,
                                     double intercept_floor) {
  AggregateSummary out;
  out.names = {"edges", "twostars", "triangles"};

  std::vector<const GlmFit*> usable;
  for (const auto& rec : records) {
    if (rec.status != GlmStatus::Fit || !rec.fit.converged) {
      ++out.n_skipped;
      continue;
    }
    if (rec.fit.theta(0) < intercept_floor) {
      ++out.n_excluded_extreme;
      continue;
    }
    usable.push_back(&rec.fit);
  }
  if (usable.empty()) throw NumericError("aggregate_estimates: no usable fits");

  const auto p = static_cast<Eigen::Index>(usable.front()->theta.size());
  out.mean.resize(p);
  out.median.resize(p);
  out.q05.resize(p);
  out.q95.resize(p);
  out.n_used = static_cast<int>(usable.size());

  std::vector<double> column(usable.size());
  for (Eigen::Index c = 0; c < p; ++c) {
    double sum = 0.0;
    for (std::size_t i = 0; i < usable.size(); ++i) {
      column[i] = usable[i]->theta(c);
      sum += column[i];
    }
    out.mean(c) = sum / static_cast<double>(usable.size());
    out.median(c) = quantile(column, 0.5);
    out.q05(c) = quantile(column, 0.05);
    out.q95(c) = quantile(column, 0.95);
  }
  return out;
}

}  // namespace subergm
