#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "subergm/design.hpp"
#include "subergm/graph.hpp"

namespace subergm {

struct GlmFit {
  Eigen::VectorXd theta;
  Eigen::MatrixXd covariance;  // inverse observed Fisher at the optimum
  double log_likelihood = 0.0;
  bool converged = false;
  int iterations = 0;
  int round = -1;

  Eigen::VectorXd standard_errors() const;
};

// Newton-Raphson logistic regression; the first column of X is expected to
// be the intercept but no particular structure is assumed. Converges when
// the score sup-norm drops below 1e-8 or the relative log-likelihood change
// below 1e-10; gives up after max_iter iterations and returns the last
// iterate flagged non-converged (separation is reported, not repaired).
// Throws SingularDesignError when X is rank deficient.
GlmFit fit_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                    int max_iter = 50);

double logistic(double eta);
double log_likelihood_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                               const Eigen::VectorXd& theta);

enum class GlmStatus { Fit, SkippedTooFewOnes, Singular };

std::string to_string(GlmStatus s);

struct GlmRecord {
  int round = -1;
  GlmStatus status = GlmStatus::Fit;
  int ones_count = 0;
  GlmFit fit;  // meaningful only when status == Fit
};

// Fits the parametric model (edges as intercept, two-stars, triangles) on
// every round of the dyad schedule. Rounds with fewer than min_ones observed
// edges are skipped. workers = 0 means hardware concurrency.
std::vector<GlmRecord> fit_parametric_all(const UndirectedGraph& g,
                                          int min_ones = 3,
                                          unsigned workers = 0);

struct AggregateSummary {
  std::vector<std::string> names;
  Eigen::VectorXd mean, median, q05, q95;
  int n_used = 0;
  int n_skipped = 0;            // skipped or singular or non-converged rounds
  int n_excluded_extreme = 0;   // converged but intercept below the floor
};

// Pools converged fits, dropping those whose intercept fell below
// intercept_floor (a degeneracy guard), and reports mean / median / 5% / 95%
// per coefficient. Throws NumericError when nothing usable remains.
AggregateSummary aggregate_estimates(const std::vector<GlmRecord>& records,
                                     double intercept_floor = -10.0);

// Type-7 (linear interpolation) quantile of a sample; p in [0, 1].
double quantile(std::vector<double> values, double p);

}  // namespace subergm
