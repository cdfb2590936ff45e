#include "subergm/design.hpp"

#include <algorithm>
#include <ostream>
#include <string>

namespace subergm {

Matching matching_round(NodeId n, int k) {
  if (n < 4 || n % 2 != 0)
    throw std::invalid_argument("matching_round: n must be even and at least 4");
  if (k < 0 || k >= n - 1)
    throw std::out_of_range("matching_round: round index out of range");

  const NodeId m = n - 1;  // circle size; node n-1 sits in the center
  Matching round;
  round.round = k;
  round.pairs.reserve(static_cast<std::size_t>(n) / 2);

  auto norm = [&](NodeId a, NodeId b) {
    return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
  };
  round.pairs.push_back(norm(static_cast<NodeId>(n - 1), static_cast<NodeId>(k)));
  for (NodeId step = 1; step < n / 2; ++step) {
    NodeId a = static_cast<NodeId>((k + step) % m);
    NodeId b = static_cast<NodeId>(((k - step) % m + m) % m);
    round.pairs.push_back(norm(a, b));
  }
  std::sort(round.pairs.begin(), round.pairs.end());
  return round;
}

OneFactorization one_factorization(NodeId n) {
  if (n < 4 || n % 2 != 0)
    throw std::invalid_argument("one_factorization: n must be even and at least 4");
  OneFactorization f;
  f.n = n;
  f.rounds.reserve(static_cast<std::size_t>(n) - 1);
  for (int k = 0; k < n - 1; ++k) f.rounds.push_back(matching_round(n, k));
  return f;
}

namespace {

std::string pair_str(NodeId i, NodeId j) {
  return "(" + std::to_string(i) + "," + std::to_string(j) + ")";
}

}  // namespace

ValidationReport validate_factorization(const OneFactorization& f) {
  auto fail = [](std::string msg) { return ValidationReport{false, std::move(msg)}; };
  const NodeId n = f.n;
  if (n < 4 || n % 2 != 0) return fail("n must be even and at least 4");
  if (static_cast<NodeId>(f.rounds.size()) != n - 1)
    return fail("expected " + std::to_string(n - 1) + " rounds, got " +
                std::to_string(f.rounds.size()));

  // seen[dyad] counts coverage; triangular index over i < j.
  auto dyad_index = [n](NodeId i, NodeId j) {
    return static_cast<std::size_t>(i) * n + j;
  };
  std::vector<std::uint8_t> seen(static_cast<std::size_t>(n) * n, 0);
  std::vector<std::uint8_t> in_round(static_cast<std::size_t>(n), 0);

  for (const auto& round : f.rounds) {
    if (static_cast<NodeId>(round.pairs.size()) != n / 2)
      return fail("round " + std::to_string(round.round) + " has " +
                  std::to_string(round.pairs.size()) + " pairs, expected " +
                  std::to_string(n / 2));
    std::fill(in_round.begin(), in_round.end(), 0);
    for (auto [i, j] : round.pairs) {
      if (i < 0 || j < 0 || i >= n || j >= n)
        return fail("round " + std::to_string(round.round) + ": node out of range in " +
                    pair_str(i, j));
      if (i == j)
        return fail("round " + std::to_string(round.round) + ": self-pair " + pair_str(i, j));
      if (in_round[i] || in_round[j])
        return fail("round " + std::to_string(round.round) + ": node repeated in " +
                    pair_str(i, j));
      in_round[i] = in_round[j] = 1;
      NodeId a = std::min(i, j), b = std::max(i, j);
      if (seen[dyad_index(a, b)]++)
        return fail("dyad " + pair_str(a, b) + " covered more than once");
    }
  }
  // n-1 rounds of n/2 distinct dyads is exactly C(n,2), so coverage is full.
  return ValidationReport{};
}

Subsample extract_subsample(const UndirectedGraph& g, const Matching& m) {
  if (m.pairs.empty()) throw std::invalid_argument("extract_subsample: empty matching");
  Subsample s;
  s.round = m.round;
  const auto rows = static_cast<Eigen::Index>(m.pairs.size());
  s.responses.resize(rows);
  s.covariates.resize(rows, 3);
  for (Eigen::Index r = 0; r < rows; ++r) {
    auto [i, j] = m.pairs[static_cast<std::size_t>(r)];
    bool y = g.has_edge(i, j);  // validates the ids
    StatVector delta = change_statistics(g, i, j);
    s.responses(r) = y ? 1.0 : 0.0;
    auto row = delta.as_array();
    s.covariates(r, 0) = row[0];
    s.covariates(r, 1) = row[1];
    s.covariates(r, 2) = row[2];
    s.ones_count += y ? 1 : 0;
  }
  return s;
}

void write_subsample_csv(const Subsample& s, std::ostream& out) {
  out << "y,delta_edges,delta_twostars,delta_triangles\n";
  for (Eigen::Index r = 0; r < s.responses.size(); ++r) {
    out << static_cast<long long>(s.responses(r)) << ','
        << static_cast<long long>(s.covariates(r, 0)) << ','
        << static_cast<long long>(s.covariates(r, 1)) << ','
        << static_cast<long long>(s.covariates(r, 2)) << '\n';
  }
}

}  // namespace subergm
