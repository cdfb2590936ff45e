#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "subergm/errors.hpp"

namespace subergm {

using NodeId = std::int32_t;

// Counts of the Markov statistics used throughout: edges, two-stars
// (paths of length two), triangles.
struct StatVector {
  std::int64_t edges = 0;
  std::int64_t twostars = 0;
  std::int64_t triangles = 0;

  bool operator==(const StatVector&) const = default;

  std::array<double, 3> as_array() const {
    return {static_cast<double>(edges), static_cast<double>(twostars),
            static_cast<double>(triangles)};
  }
};

// Simple undirected graph over dense 0-based node ids. Neighbor lists are
// kept sorted, so adjacency queries are binary searches and shared-neighbor
// counts are linear merges. No self-loops, no multi-edges. The mutating
// calls exist for samplers that work on privately owned copies; everything
// else treats a graph as immutable after construction.
class UndirectedGraph {
 public:
  explicit UndirectedGraph(NodeId n);
  UndirectedGraph(NodeId n, const std::vector<std::pair<NodeId, NodeId>>& edges);

  NodeId node_count() const { return n_; }
  std::int64_t edge_count() const { return edges_; }
  NodeId degree(NodeId i) const;
  bool has_edge(NodeId i, NodeId j) const;
  std::span<const NodeId> neighbors(NodeId i) const;

  // Number of common neighbors of i and j; never counts i or j themselves.
  std::int64_t shared_neighbors(NodeId i, NodeId j) const;

  // Returns true when the edge state actually changed.
  bool set_edge(NodeId i, NodeId j, bool present);

  double density() const;

 private:
  void check_pair(NodeId i, NodeId j) const;

  NodeId n_ = 0;
  std::int64_t edges_ = 0;
  std::vector<std::vector<NodeId>> adj_;
};

struct EgoNet {
  UndirectedGraph graph;
  std::vector<NodeId> to_parent;  // new id -> id in the parent graph
};

// Reads a whitespace-separated edge list ("i j" per line, '#' comments,
// blank lines allowed). Node ids must be nonnegative integers; duplicate
// edges collapse. n is (max id)+1 unless an override is supplied.
UndirectedGraph load_edge_list(std::istream& in,
                               std::optional<NodeId> n_override = std::nullopt);
UndirectedGraph load_edge_list_file(const std::string& path,
                                    std::optional<NodeId> n_override = std::nullopt);
void write_edge_list(const UndirectedGraph& g, std::ostream& out);

StatVector count_statistics(const UndirectedGraph& g);

// Change statistics of dyad (i, j): the statistic difference between the
// graph with the edge present and with it absent. Independent of the dyad's
// current state. Entries: (edges, twostars, triangles) = (1, d_i + d_j
// excluding any (i,j) edge, shared neighbors of i and j).
StatVector change_statistics(const UndirectedGraph& g, NodeId i, NodeId j);

// Subgraph induced by the neighbors of ego (ego itself excluded), relabeled
// to dense ids in ascending parent-id order.
EgoNet ego_net(const UndirectedGraph& g, NodeId ego);

// Copy of g without the given node; ids above it shift down by one.
UndirectedGraph drop_node(const UndirectedGraph& g, NodeId node);

}  // namespace subergm
