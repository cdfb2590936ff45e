#include "subergm/graph.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace subergm {

UndirectedGraph::UndirectedGraph(NodeId n) : n_(n), adj_(static_cast<std::size_t>(n)) {
  if (n < 0) throw std::invalid_argument("graph: node count must be nonnegative");
}

UndirectedGraph::UndirectedGraph(NodeId n, const std::vector<std::pair<NodeId, NodeId>>& edges)
    : UndirectedGraph(n) {
  for (const auto& [i, j] : edges) {
    check_pair(i, j);
    adj_[i].push_back(j);
    adj_[j].push_back(i);
  }
  for (auto& nbrs : adj_) {
    std::sort(nbrs.begin(), nbrs.end());
    nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
    edges_ += static_cast<std::int64_t>(nbrs.size());
  }
  edges_ /= 2;
}

void UndirectedGraph::check_pair(NodeId i, NodeId j) const {
  if (i < 0 || j < 0 || i >= n_ || j >= n_)
    throw std::out_of_range("graph: node id out of range");
  if (i == j) throw std::invalid_argument("graph: self-loops are not allowed");
}

NodeId UndirectedGraph::degree(NodeId i) const {
  if (i < 0 || i >= n_) throw std::out_of_range("graph: node id out of range");
  return static_cast<NodeId>(adj_[i].size());
}

std::span<const NodeId> UndirectedGraph::neighbors(NodeId i) const {
  if (i < 0 || i >= n_) throw std::out_of_range("graph: node id out of range");
  return {adj_[i].data(), adj_[i].size()};
}

bool UndirectedGraph::has_edge(NodeId i, NodeId j) const {
  check_pair(i, j);
  const auto& nbrs = adj_[i].size() <= adj_[j].size() ? adj_[i] : adj_[j];
  NodeId target = adj_[i].size() <= adj_[j].size() ? j : i;
  return std::binary_search(nbrs.begin(), nbrs.end(), target);
}

std::int64_t UndirectedGraph::shared_neighbors(NodeId i, NodeId j) const {
  check_pair(i, j);
  const auto& a = adj_[i];
  const auto& b = adj_[j];
  std::int64_t count = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++count;
      ++ia;
      ++ib;
    }
  }
  return count;
}

bool UndirectedGraph::set_edge(NodeId i, NodeId j, bool present) {
  check_pair(i, j);
  auto& ai = adj_[i];
  auto pos = std::lower_bound(ai.begin(), ai.end(), j);
  bool exists = pos != ai.end() && *pos == j;
  if (exists == present) return false;
  if (present) {
    ai.insert(pos, j);
    auto& aj = adj_[j];
    aj.insert(std::lower_bound(aj.begin(), aj.end(), i), i);
    ++edges_;
  } else {
    ai.erase(pos);
    auto& aj = adj_[j];
    aj.erase(std::lower_bound(aj.begin(), aj.end(), i));
    --edges_;
  }
  return true;
}

double UndirectedGraph::density() const {
  if (n_ < 2) return 0.0;
  return static_cast<double>(edges_) /
         (static_cast<double>(n_) * (n_ - 1) / 2.0);
}

UndirectedGraph load_edge_list(std::istream& in, std::optional<NodeId> n_override) {
  std::vector<std::pair<NodeId, NodeId>> edges;
  NodeId max_id = -1;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::size_t start = line.find_first_not_of(" \t\r");
    if (start == std::string::npos || line[start] == '#') continue;
    std::istringstream row(line);
    long long a = -1, b = -1;
    if (!(row >> a >> b))
      throw ParseError("edge list line " + std::to_string(line_no) +
                       ": expected two integer node ids");
    std::string extra;
    if (row >> extra)
      throw ParseError("edge list line " + std::to_string(line_no) +
                       ": trailing token '" + extra + "'");
    if (a < 0 || b < 0)
      throw ParseError("edge list line " + std::to_string(line_no) +
                       ": node ids must be nonnegative");
    if (a == b)
      throw std::invalid_argument("edge list line " + std::to_string(line_no) +
                                  ": self-loop at node " + std::to_string(a));
    auto i = static_cast<NodeId>(a);
    auto j = static_cast<NodeId>(b);
    edges.emplace_back(std::min(i, j), std::max(i, j));
    max_id = std::max(max_id, std::max(i, j));
  }
  NodeId n = max_id + 1;
  if (n_override) {
    if (*n_override < n)
      throw std::invalid_argument("edge list: node override " +
                                  std::to_string(*n_override) +
                                  " smaller than max id + 1 = " + std::to_string(n));
    n = *n_override;
  }
  return UndirectedGraph(n, edges);
}

UndirectedGraph load_edge_list_file(const std::string& path,
                                    std::optional<NodeId> n_override) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open edge list file: " + path);
  return load_edge_list(in, n_override);
}

void write_edge_list(const UndirectedGraph& g, std::ostream& out) {
  for (NodeId i = 0; i < g.node_count(); ++i)
    for (NodeId j : g.neighbors(i))
      if (i < j) out << i << ' ' << j << '\n';
}

StatVector count_statistics(const UndirectedGraph& g) {
  StatVector s;
  s.edges = g.edge_count();
  std::int64_t tri3 = 0;
  for (NodeId i = 0; i < g.node_count(); ++i) {
    std::int64_t d = g.degree(i);
    s.twostars += d * (d - 1) / 2;
    for (NodeId j : g.neighbors(i))
      if (i < j) tri3 += g.shared_neighbors(i, j);
  }
  s.triangles = tri3 / 3;  // each triangle is seen once per edge
  return s;
}

StatVector change_statistics(const UndirectedGraph& g, NodeId i, NodeId j) {
  std::int64_t y = g.has_edge(i, j) ? 1 : 0;
  StatVector d;
  d.edges = 1;
  d.twostars = (g.degree(i) - y) + (g.degree(j) - y);
  d.triangles = g.shared_neighbors(i, j);
  return d;
}

EgoNet ego_net(const UndirectedGraph& g, NodeId ego) {
  auto nbrs = g.neighbors(ego);
  std::vector<NodeId> to_parent(nbrs.begin(), nbrs.end());  // sorted already
  auto local_id = [&](NodeId parent) -> NodeId {
    auto pos = std::lower_bound(to_parent.begin(), to_parent.end(), parent);
    if (pos == to_parent.end() || *pos != parent) return -1;
    return static_cast<NodeId>(pos - to_parent.begin());
  };
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (NodeId a = 0; a < static_cast<NodeId>(to_parent.size()); ++a) {
    for (NodeId parent_b : g.neighbors(to_parent[a])) {
      if (parent_b <= to_parent[a]) continue;
      NodeId b = local_id(parent_b);
      if (b >= 0) edges.emplace_back(a, b);
    }
  }
  return EgoNet{UndirectedGraph(static_cast<NodeId>(to_parent.size()), edges),
                std::move(to_parent)};
}

UndirectedGraph drop_node(const UndirectedGraph& g, NodeId node) {
  if (node < 0 || node >= g.node_count())
    throw std::out_of_range("drop_node: node id out of range");
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (NodeId i = 0; i < g.node_count(); ++i) {
    if (i == node) continue;
    for (NodeId j : g.neighbors(i)) {
      if (j <= i || j == node) continue;
      edges.emplace_back(i < node ? i : i - 1, j < node ? j : j - 1);
    }
  }
  return UndirectedGraph(g.node_count() - 1, edges);
}

}  // namespace subergm
