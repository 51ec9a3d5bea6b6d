#include <algorithm>
#include <map>

#include "approx_detail.hpp"
#include "staccato/approx.hpp"

namespace staccato {

namespace {

struct Ends {
  std::vector<NodeId> starts;
  std::vector<NodeId> finals;
};

Ends region_ends(const Sfa& sfa, const std::vector<bool>& region) {
  Ends ends;
  for (NodeId v = 0; v < sfa.node_count(); ++v) {
    if (!region[v]) continue;
    bool has_in = std::any_of(sfa.in_edges(v).begin(), sfa.in_edges(v).end(),
                              [&](EdgeId id) { return region[sfa.edge(id).src]; });
    bool has_out = std::any_of(sfa.out_edges(v).begin(), sfa.out_edges(v).end(),
                               [&](EdgeId id) { return region[sfa.edge(id).dst]; });
    if (!has_in) ends.starts.push_back(v);
    if (!has_out) ends.finals.push_back(v);
  }
  return ends;
}

// Adds the far endpoint of every edge that touches an interior node from
// outside. Returns true if the region grew.
bool absorb_protruding_edges(const Sfa& sfa, std::vector<bool>& region,
                             std::optional<NodeId> entry, std::optional<NodeId> exit) {
  std::vector<NodeId> added;
  for (const auto& e : sfa.edges()) {
    bool src_interior = region[e.src] && e.src != entry && e.src != exit;
    bool dst_interior = region[e.dst] && e.dst != entry && e.dst != exit;
    if (src_interior && !region[e.dst]) added.push_back(e.dst);
    if (dst_interior && !region[e.src]) added.push_back(e.src);
  }
  for (NodeId v : added) region[v] = true;
  return !added.empty();
}

}  // namespace

std::optional<RegionBoundary> region_boundary(const Sfa& sfa, const std::vector<bool>& region) {
  auto ends = region_ends(sfa, region);
  if (ends.starts.size() != 1 || ends.finals.size() != 1) return std::nullopt;
  NodeId entry = ends.starts.front();
  NodeId exit = ends.finals.front();
  if (entry == exit) return std::nullopt;
  for (const auto& e : sfa.edges()) {
    bool src_interior = region[e.src] && e.src != entry && e.src != exit;
    bool dst_interior = region[e.dst] && e.dst != entry && e.dst != exit;
    if ((src_interior && !region[e.dst]) || (dst_interior && !region[e.src])) return std::nullopt;
  }
  return RegionBoundary{entry, exit};
}

std::vector<NodeId> find_min_sfa(const Sfa& sfa, std::span<const NodeId> seed) {
  if (seed.empty()) throw std::invalid_argument("find_min_sfa needs a non-empty seed");
  const std::size_t n = sfa.node_count();
  std::vector<bool> region(n, false);
  for (NodeId v : seed) region.at(v) = true;

  auto members = [&] {
    std::vector<NodeId> out;
    for (NodeId v = 0; v < n; ++v) {
      if (region[v]) out.push_back(v);
    }
    return out;
  };

  while (!region_boundary(sfa, region)) {
    auto x = members();
    if (x.size() == 1) {
      // A lone node spans no edge: pair it with its first successor, or with
      // its last predecessor when it is the final node.
      NodeId v = x.front();
      std::optional<NodeId> pick;
      for (EdgeId id : sfa.out_edges(v)) {
        NodeId w = sfa.edge(id).dst;
        if (!pick || sfa.topo_index(w) < sfa.topo_index(*pick)) pick = w;
      }
      if (!pick) {
        for (EdgeId id : sfa.in_edges(v)) {
          NodeId w = sfa.edge(id).src;
          if (!pick || sfa.topo_index(w) > sfa.topo_index(*pick)) pick = w;
        }
      }
      if (!pick) throw std::invalid_argument("find_min_sfa: isolated node");
      region[*pick] = true;
      continue;
    }

    std::optional<NodeId> entry, exit;
    auto ends = region_ends(sfa, region);
    if (ends.starts.size() == 1) {
      entry = ends.starts.front();
    } else {
      // Least common ancestor: the common ancestor latest in topological
      // order. Then add every node on a path from it to a member.
      std::vector<bool> common(n, true);
      std::vector<bool> any_anc(n, false);
      for (NodeId v : x) {
        auto anc = sfa.ancestors(v);
        for (NodeId u = 0; u < n; ++u) {
          common[u] = common[u] && anc[u];
          any_anc[u] = any_anc[u] || anc[u];
        }
      }
      std::optional<NodeId> lca;
      for (NodeId u = 0; u < n; ++u) {
        if (common[u] && (!lca || sfa.topo_index(u) > sfa.topo_index(*lca))) lca = u;
      }
      auto below = sfa.descendants(*lca);
      for (NodeId u = 0; u < n; ++u) {
        if (below[u] && any_anc[u]) region[u] = true;
      }
      entry = lca;
      x = members();
      ends = region_ends(sfa, region);
    }

    if (ends.finals.size() == 1) {
      exit = ends.finals.front();
    } else {
      std::vector<bool> common(n, true);
      std::vector<bool> any_desc(n, false);
      for (NodeId v : x) {
        auto desc = sfa.descendants(v);
        for (NodeId u = 0; u < n; ++u) {
          common[u] = common[u] && desc[u];
          any_desc[u] = any_desc[u] || desc[u];
        }
      }
      std::optional<NodeId> gcd;
      for (NodeId u = 0; u < n; ++u) {
        if (common[u] && (!gcd || sfa.topo_index(u) < sfa.topo_index(*gcd))) gcd = u;
      }
      auto above = sfa.ancestors(*gcd);
      for (NodeId u = 0; u < n; ++u) {
        if (above[u] && any_desc[u]) region[u] = true;
      }
      exit = gcd;
    }

    absorb_protruding_edges(sfa, region, entry, exit);
  }
  return members();
}

Sfa collapse(const Sfa& sfa, std::span<const NodeId> region_nodes, std::size_t k) {
  std::vector<bool> region(sfa.node_count(), false);
  for (NodeId v : region_nodes) region.at(v) = true;
  auto boundary = region_boundary(sfa, region);
  if (!boundary) throw InvalidRegion("collapse: region is not a valid chunk");

  std::vector<bool> inside(sfa.edge_count(), false);
  for (EdgeId id = 0; id < sfa.edge_count(); ++id) {
    const auto& e = sfa.edge(id);
    inside[id] = region[e.src] && region[e.dst];
  }
  auto ranked = top_k_between(sfa, boundary->entry, boundary->exit, inside, k);

  std::vector<Label> labels;
  for (auto& entry : ranked.entries) {
    labels.push_back(Label{std::move(entry.text), entry.prob, entry.log_prob});
  }
  return detail::replace_region(sfa, region, *boundary, std::move(labels));
}

namespace detail {

Sfa replace_region(const Sfa& sfa, const std::vector<bool>& region, RegionBoundary boundary,
                   std::vector<Label> labels) {
  // Surviving nodes keep their names; dense ids are reassigned in order.
  std::vector<NodeId> remap(sfa.node_count(), 0);
  std::vector<std::int64_t> names;
  for (NodeId v = 0; v < sfa.node_count(); ++v) {
    bool interior = region[v] && v != boundary.entry && v != boundary.exit;
    if (interior) continue;
    remap[v] = static_cast<NodeId>(names.size());
    names.push_back(sfa.name(v));
  }

  std::vector<Edge> edges;
  for (const auto& e : sfa.edges()) {
    if (region[e.src] && region[e.dst]) continue;
    edges.push_back(Edge{remap[e.src], remap[e.dst], e.labels});
  }
  edges.push_back(Edge{remap[boundary.entry], remap[boundary.exit], std::move(labels)});
  const std::size_t count = names.size();
  return Sfa(count, remap[sfa.start()], remap[sfa.final_node()], std::move(edges),
             std::move(names));
}

void sort_labels(std::vector<Label>& labels) {
  std::stable_sort(labels.begin(), labels.end(), [](const Label& a, const Label& b) {
    if (a.log_prob != b.log_prob) return a.log_prob > b.log_prob;
    return a.text < b.text;
  });
}

}  // namespace detail

}  // namespace staccato
