#pragma once

#include <iosfwd>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "subergm/graph.hpp"

namespace subergm {

// One round of the schedule: a perfect matching on {0, ..., n-1}.
// Pairs are normalized (i < j) and sorted by first element.
struct Matching {
  int round = 0;  // 0-based round index
  std::vector<std::pair<NodeId, NodeId>> pairs;
};

// Partition of all dyads into n-1 node-disjoint rounds (n even).
struct OneFactorization {
  NodeId n = 0;
  std::vector<Matching> rounds;
};

struct ValidationReport {
  bool ok = true;
  std::string violation;  // first violation found, empty when ok
};

// Round k of the circle construction: node n-1 pairs with k, and
// (k+m, k-m) mod (n-1) pair up for m = 1..n/2-1. Rounds are generated
// on demand so a full factorization never has to be materialized.
Matching matching_round(NodeId n, int k);

OneFactorization one_factorization(NodeId n);

// Checks that every round is a perfect matching and every dyad is covered
// exactly once. Accepts arbitrary (including broken) factorizations.
ValidationReport validate_factorization(const OneFactorization& f);

// The dyads of one round, read off the observed graph: the responses are the
// edge indicators and each covariate row holds the dyad's change statistics
// (edges, twostars, triangles). Within a round the matched dyads share no
// node, so conditional on the rest of the graph the rows are independent.
struct Subsample {
  int round = 0;
  Eigen::VectorXd responses;   // 0/1
  Eigen::MatrixXd covariates;  // pairs x 3
  int ones_count = 0;
};

Subsample extract_subsample(const UndirectedGraph& g, const Matching& m);

void write_subsample_csv(const Subsample& s, std::ostream& out);

}  // namespace subergm
