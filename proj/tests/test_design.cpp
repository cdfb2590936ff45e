#include "doctest.h"

#include <set>
#include <sstream>

#include "subergm/design.hpp"

using namespace subergm;

TEST_CASE("circle method rounds for n=4") {
  using P = std::pair<NodeId, NodeId>;
  CHECK(matching_round(4, 0).pairs == std::vector<P>{{0, 3}, {1, 2}});
  CHECK(matching_round(4, 1).pairs == std::vector<P>{{0, 2}, {1, 3}});
  CHECK(matching_round(4, 2).pairs == std::vector<P>{{0, 1}, {2, 3}});
}

TEST_CASE("factorization validates on a range of sizes") {
  for (NodeId n : {4, 6, 8, 10, 26, 50}) {
    OneFactorization f = one_factorization(n);
    CHECK(static_cast<NodeId>(f.rounds.size()) == n - 1);
    ValidationReport r = validate_factorization(f);
    CHECK_MESSAGE(r.ok, r.violation);
  }
  CHECK_THROWS_AS(one_factorization(5), std::invalid_argument);
  CHECK_THROWS_AS(one_factorization(2), std::invalid_argument);
}

TEST_CASE("validator catches broken factorizations") {
  OneFactorization f = one_factorization(6);

  SUBCASE("duplicate dyad") {
    f.rounds[1].pairs[0] = f.rounds[0].pairs[0];
    CHECK(!validate_factorization(f).ok);
  }
  SUBCASE("node used twice in a round") {
    auto& pr = f.rounds[0].pairs;
    pr[1] = {pr[0].first, 5 == pr[0].second ? 4 : 5};
    if (pr[1].first > pr[1].second) std::swap(pr[1].first, pr[1].second);
    CHECK(!validate_factorization(f).ok);
  }
  SUBCASE("missing round") {
    f.rounds.pop_back();
    CHECK(!validate_factorization(f).ok);
  }
  SUBCASE("short round") {
    f.rounds[2].pairs.pop_back();
    CHECK(!validate_factorization(f).ok);
  }
}

TEST_CASE("rounds are node-disjoint dyads") {
  OneFactorization f = one_factorization(12);
  std::set<std::pair<NodeId, NodeId>> seen;
  for (const auto& m : f.rounds) {
    std::set<NodeId> nodes;
    for (auto [i, j] : m.pairs) {
      CHECK(i < j);
      CHECK(nodes.insert(i).second);
      CHECK(nodes.insert(j).second);
      CHECK(seen.insert({i, j}).second);
    }
  }
  CHECK(seen.size() == 12u * 11u / 2u);
}

TEST_CASE("subsample of the complete graph") {
  // In K4 every dyad is an edge with d_i = d_j = 3 and 2 shared neighbors,
  // so every row is (1, 4, 2) with response 1.
  UndirectedGraph k4(4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}});
  for (int k = 0; k < 3; ++k) {
    Subsample s = extract_subsample(k4, matching_round(4, k));
    CHECK(s.round == k);
    CHECK(s.responses.size() == 2);
    CHECK(s.ones_count == 2);
    for (int r = 0; r < 2; ++r) {
      CHECK(s.responses(r) == 1.0);
      CHECK(s.covariates(r, 0) == 1.0);
      CHECK(s.covariates(r, 1) == 4.0);
      CHECK(s.covariates(r, 2) == 2.0);
    }
  }
}

TEST_CASE("subsample csv format") {
  UndirectedGraph g(4, {{0, 3}, {1, 2}, {0, 1}});
  Subsample s = extract_subsample(g, matching_round(4, 0));
  std::ostringstream out;
  write_subsample_csv(s, out);
  // Round 0 pairs (0,3) and (1,2), both edges present.
  CHECK(out.str() ==
        "y,delta_edges,delta_twostars,delta_triangles\n"
        "1,1,1,0\n"
        "1,1,1,0\n");
}
