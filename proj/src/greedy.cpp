#include <algorithm>
#include <array>
#include <map>
#include <set>

#include "approx_detail.hpp"
#include "staccato/approx.hpp"

namespace staccato {

RankedStrings ChunkedSfa::chunk(EdgeId edge) const {
  RankedStrings r;
  r.k = k;
  for (const auto& l : graph.edge(edge).labels) {
    r.entries.push_back(RankedEntry{l.text, l.prob, l.log_prob, {}});
  }
  return r;
}

namespace {

using NamePair = std::pair<std::int64_t, std::int64_t>;
using CoverMap = std::map<NamePair, std::vector<std::int64_t>>;

ChunkedSfa make_chunked(Sfa graph, const CoverMap& cover, std::size_t m, std::size_t k) {
  ChunkedSfa out;
  out.m = m;
  out.k = k;
  for (const auto& e : graph.edges()) {
    out.covered.push_back(cover.at({graph.name(e.src), graph.name(e.dst)}));
  }
  out.graph = std::move(graph);
  return out;
}

struct Candidate {
  std::vector<std::int64_t> region;  // sorted node names
  std::int64_t entry = 0;
  std::int64_t exit = 0;
  std::vector<Label> labels;
  double old_mass = 0.0;  // mass of the region's paths before collapsing
  double new_mass = 0.0;  // mass of the kept strings
};

Candidate make_candidate(const Sfa& g, std::array<NodeId, 3> triple, std::size_t k) {
  auto nodes = find_min_sfa(g, triple);
  std::vector<bool> region(g.node_count(), false);
  for (NodeId v : nodes) region[v] = true;
  auto boundary = region_boundary(g, region);

  std::vector<bool> inside(g.edge_count(), false);
  for (EdgeId id = 0; id < g.edge_count(); ++id) {
    inside[id] = region[g.edge(id).src] && region[g.edge(id).dst];
  }

  Candidate c;
  for (NodeId v : nodes) c.region.push_back(g.name(v));
  std::sort(c.region.begin(), c.region.end());
  c.entry = g.name(boundary->entry);
  c.exit = g.name(boundary->exit);
  auto ranked = top_k_between(g, boundary->entry, boundary->exit, inside, k);
  for (auto& e : ranked.entries) {
    c.new_mass += e.prob;
    c.labels.push_back(Label{std::move(e.text), e.prob, e.log_prob});
  }
  c.old_mass = mass_between(g, boundary->entry, boundary->exit, inside);
  return c;
}

bool intersects(const std::vector<std::int64_t>& a, const std::vector<std::int64_t>& b) {
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i == *j) return true;
    if (*i < *j) {
      ++i;
    } else {
      ++j;
    }
  }
  return false;
}

}  // namespace

ChunkedSfa per_transition_chunking(const Sfa& sfa, std::size_t k) {
  if (k == 0) throw std::invalid_argument("k must be >= 1");
  std::vector<Edge> edges;
  CoverMap cover;
  for (const auto& e : sfa.edges()) {
    Edge copy = e;
    detail::sort_labels(copy.labels);
    if (copy.labels.size() > k) copy.labels.resize(k);
    edges.push_back(std::move(copy));
    auto a = sfa.name(e.src), b = sfa.name(e.dst);
    cover[{a, b}] = {std::min(a, b), std::max(a, b)};
  }
  std::vector<std::int64_t> names(sfa.node_names().begin(), sfa.node_names().end());
  Sfa graph(sfa.node_count(), sfa.start(), sfa.final_node(), std::move(edges), std::move(names));
  return make_chunked(std::move(graph), cover, sfa.edge_count(), k);
}

ChunkedSfa greedy_approximate(const Sfa& sfa, std::size_t m, std::size_t k) {
  if (m == 0 || k == 0) throw std::invalid_argument("m and k must be >= 1");
  ChunkedSfa start = per_transition_chunking(sfa, k);
  Sfa g = std::move(start.graph);
  CoverMap cover;
  for (EdgeId id = 0; id < g.edge_count(); ++id) {
    cover[{g.name(g.edge(id).src), g.name(g.edge(id).dst)}] = start.covered[id];
  }

  // Candidates keyed by the node names of their (x, y, z) triple. A cached
  // candidate stays valid while no committed region touches it.
  std::map<std::array<std::int64_t, 3>, Candidate> cache;

  while (g.edge_count() > m) {
    auto fwd = forward_mass(g);
    auto bwd = backward_mass(g);
    double total = fwd[g.final_node()];

    const Candidate* best = nullptr;
    double best_score = 0.0;
    std::array<std::size_t, 3> best_rank{};

    for (const auto& first : g.edges()) {
      for (EdgeId second_id : g.out_edges(first.dst)) {
        NodeId x = first.src, y = first.dst, z = g.edge(second_id).dst;
        std::array<std::int64_t, 3> key{g.name(x), g.name(y), g.name(z)};
        auto it = cache.find(key);
        if (it == cache.end()) it = cache.emplace(key, make_candidate(g, {x, y, z}, k)).first;
        const Candidate& c = it->second;

        NodeId entry = *g.find_node(c.entry);
        NodeId exit = *g.find_node(c.exit);
        double score = total - fwd[entry] * bwd[exit] * (c.old_mass - c.new_mass);
        std::array<std::size_t, 3> rank{g.topo_index(x), g.topo_index(y), g.topo_index(z)};
        if (!best || score > best_score || (score == best_score && rank < best_rank)) {
          best = &c;
          best_score = score;
          best_rank = rank;
        }
      }
    }
    if (!best) break;

    Candidate chosen = *best;
    std::vector<bool> region(g.node_count(), false);
    std::set<std::int64_t> merged_cover;
    for (auto name : chosen.region) region[*g.find_node(name)] = true;
    for (const auto& e : g.edges()) {
      if (region[e.src] && region[e.dst]) {
        auto& cov = cover.at({g.name(e.src), g.name(e.dst)});
        merged_cover.insert(cov.begin(), cov.end());
      }
    }
    RegionBoundary boundary{*g.find_node(chosen.entry), *g.find_node(chosen.exit)};
    g = detail::replace_region(g, region, boundary, chosen.labels);
    cover[{chosen.entry, chosen.exit}] =
        std::vector<std::int64_t>(merged_cover.begin(), merged_cover.end());

    std::erase_if(cache, [&](const auto& kv) { return intersects(kv.second.region, chosen.region); });
  }

  CoverMap live;
  for (const auto& e : g.edges()) {
    NamePair key{g.name(e.src), g.name(e.dst)};
    live[key] = cover.at(key);
  }
  return make_chunked(std::move(g), live, m, k);
}

}  // namespace staccato
