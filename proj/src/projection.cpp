#include <algorithm>
#include <queue>

#include "staccato/approx.hpp"
#include "staccato/dict_index.hpp"
#include "staccato/inference.hpp"

namespace staccato {

namespace {

void mark_reachable(const Sfa& g, NodeId from, std::size_t depth, std::vector<bool>& mark) {
  std::vector<std::size_t> dist(g.node_count(), SIZE_MAX);
  std::queue<NodeId> queue;
  dist[from] = 0;
  queue.push(from);
  while (!queue.empty()) {
    NodeId v = queue.front();
    queue.pop();
    mark[v] = true;
    if (dist[v] == depth) continue;
    for (EdgeId id : g.out_edges(v)) {
      NodeId w = g.edge(id).dst;
      if (dist[w] == SIZE_MAX) {
        dist[w] = dist[v] + 1;
        queue.push(w);
      }
    }
  }
}

}  // namespace

Projection project(const Sfa& chunk_graph, const Posting& posting, std::size_t depth) {
  return project_union(chunk_graph, std::span<const Posting>(&posting, 1), depth);
}

Projection project_union(const Sfa& g, std::span<const Posting> postings, std::size_t depth) {
  if (postings.empty()) throw std::invalid_argument("projection needs at least one posting");
  std::vector<bool> mark(g.node_count(), false);
  for (const auto& p : postings) {
    if (p.edge >= g.edge_count()) throw std::out_of_range("posting edge outside the chunk graph");
    const auto& e = g.edge(p.edge);
    mark[e.src] = true;
    mark_reachable(g, e.dst, depth, mark);
  }
  std::vector<NodeId> seed;
  for (NodeId v = 0; v < g.node_count(); ++v) {
    if (mark[v]) seed.push_back(v);
  }

  Projection out;
  out.nodes = find_min_sfa(g, seed);
  std::vector<bool> in_region(g.node_count(), false);
  for (NodeId v : out.nodes) in_region[v] = true;
  auto boundary = region_boundary(g, in_region);
  if (!boundary) throw std::logic_error("projection did not close into a valid region");

  std::vector<NodeId> local(g.node_count(), 0);
  std::vector<std::int64_t> names;
  for (std::size_t i = 0; i < out.nodes.size(); ++i) {
    local[out.nodes[i]] = static_cast<NodeId>(i);
    names.push_back(g.name(out.nodes[i]));
  }
  std::vector<Edge> edges;
  for (const auto& e : g.edges()) {
    if (in_region[e.src] && in_region[e.dst]) {
      edges.push_back(Edge{local[e.src], local[e.dst], e.labels});
    }
  }
  out.region = Sfa(out.nodes.size(), local[boundary->entry], local[boundary->exit],
                   std::move(edges), std::move(names));
  out.prefix_mass = forward_mass(g)[boundary->entry];
  out.suffix_mass = backward_mass(g)[boundary->exit];
  return out;
}

}  // namespace staccato
