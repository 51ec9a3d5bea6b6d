#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "staccato/approx.hpp"

namespace staccato {

void check_partition(const Sfa& sfa, const ChunkPartition& partition) {
  std::vector<int> owner(sfa.edge_count(), -1);
  for (std::size_t b = 0; b < partition.blocks.size(); ++b) {
    const auto& block = partition.blocks[b];
    if (block.empty()) throw std::invalid_argument("partition has an empty block");
    for (EdgeId id : block) {
      if (id >= sfa.edge_count()) throw std::invalid_argument("partition names an unknown edge");
      if (owner[id] != -1) throw std::invalid_argument("edge appears in two blocks");
      owner[id] = static_cast<int>(b);
    }
    // Undirected connectivity through shared endpoints.
    std::vector<NodeId> parent(sfa.node_count());
    std::iota(parent.begin(), parent.end(), NodeId{0});
    auto find = [&](NodeId v) {
      while (parent[v] != v) v = parent[v] = parent[parent[v]];
      return v;
    };
    for (EdgeId id : block) parent[find(sfa.edge(id).src)] = find(sfa.edge(id).dst);
    NodeId root = find(sfa.edge(block.front()).src);
    for (EdgeId id : block) {
      if (find(sfa.edge(id).src) != root) throw std::invalid_argument("block is not connected");
    }
  }
  if (std::find(owner.begin(), owner.end(), -1) != owner.end()) {
    throw std::invalid_argument("partition does not cover every edge");
  }
}

namespace {

struct SegmentTable {
  // Per block: distinct segments in rank order.
  std::vector<std::vector<BlockSegment>> segments;
  // Per path: probability and per-block bitmask of required segments.
  std::vector<double> path_prob;
  std::vector<std::vector<std::uint64_t>> path_needs;
};

SegmentTable build_segments(const Sfa& sfa, const ChunkPartition& partition, std::size_t cap) {
  check_partition(sfa, partition);
  std::vector<std::size_t> owner(sfa.edge_count());
  for (std::size_t b = 0; b < partition.blocks.size(); ++b) {
    for (EdgeId id : partition.blocks[b]) owner[id] = b;
  }

  std::vector<LabeledPath> paths;
  try {
    paths = enumerate_all(sfa, cap);
  } catch (const EnumerationCapExceeded&) {
    throw AssignmentCapExceeded("too many labeled paths for exhaustive assignment search");
  }

  const std::size_t nblocks = partition.blocks.size();
  std::vector<std::map<std::vector<ArcRef>, BlockSegment>> found(nblocks);
  std::vector<std::vector<std::pair<std::size_t, std::vector<ArcRef>>>> path_runs;
  for (const auto& p : paths) {
    std::vector<std::pair<std::size_t, std::vector<ArcRef>>> runs;
    for (const auto& arc : p.arcs) {
      std::size_t b = owner[arc.edge];
      if (runs.empty() || runs.back().first != b) runs.emplace_back(b, std::vector<ArcRef>{});
      runs.back().second.push_back(arc);
    }
    for (const auto& [b, arcs] : runs) {
      if (found[b].count(arcs)) continue;
      BlockSegment seg;
      seg.arcs = arcs;
      double log_prob = 0.0;
      for (const auto& a : arcs) {
        const auto& l = sfa.edge(a.edge).labels[a.label];
        seg.text += l.text;
        log_prob += l.log_prob;
      }
      seg.prob = std::exp(log_prob);
      found[b].emplace(arcs, std::move(seg));
    }
    path_runs.push_back(std::move(runs));
  }

  SegmentTable t;
  t.segments.resize(nblocks);
  std::vector<std::map<std::vector<ArcRef>, std::size_t>> index(nblocks);
  for (std::size_t b = 0; b < nblocks; ++b) {
    for (auto& [arcs, seg] : found[b]) t.segments[b].push_back(seg);
    std::stable_sort(t.segments[b].begin(), t.segments[b].end(),
                     [](const BlockSegment& x, const BlockSegment& y) {
                       if (x.prob != y.prob) return x.prob > y.prob;
                       return x.text < y.text;
                     });
    if (t.segments[b].size() > 64) {
      throw AssignmentCapExceeded("a block has more than 64 distinct segments");
    }
    for (std::size_t i = 0; i < t.segments[b].size(); ++i) index[b][t.segments[b][i].arcs] = i;
  }
  for (std::size_t p = 0; p < paths.size(); ++p) {
    std::vector<std::uint64_t> needs(nblocks, 0);
    for (const auto& [b, arcs] : path_runs[p]) needs[b] |= std::uint64_t{1} << index[b].at(arcs);
    t.path_prob.push_back(paths[p].prob);
    t.path_needs.push_back(std::move(needs));
  }
  return t;
}

double emitted_mass(const SegmentTable& t, const std::vector<std::uint64_t>& chosen) {
  double mass = 0.0;
  for (std::size_t p = 0; p < t.path_prob.size(); ++p) {
    bool ok = true;
    for (std::size_t b = 0; b < chosen.size() && ok; ++b) ok = (t.path_needs[p][b] & ~chosen[b]) == 0;
    if (ok) mass += t.path_prob[p];
  }
  return mass;
}

// All r-subsets of {0..n-1} as bitmasks, in lexicographic order.
std::vector<std::uint64_t> subsets(std::size_t n, std::size_t r) {
  std::vector<std::uint64_t> out;
  std::vector<std::size_t> idx(r);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  while (true) {
    std::uint64_t mask = 0;
    for (auto i : idx) mask |= std::uint64_t{1} << i;
    out.push_back(mask);
    std::size_t i = r;
    while (i > 0 && idx[i - 1] == n - r + i - 1) --i;
    if (i == 0) break;
    ++idx[i - 1];
    for (std::size_t j = i; j < r; ++j) idx[j] = idx[j - 1] + 1;
  }
  return out;
}

AssignmentChoice choice_from(const SegmentTable& t, const std::vector<std::uint64_t>& chosen) {
  AssignmentChoice c;
  c.chosen.resize(chosen.size());
  for (std::size_t b = 0; b < chosen.size(); ++b) {
    for (std::size_t i = 0; i < t.segments[b].size(); ++i) {
      if (chosen[b] >> i & 1) c.chosen[b].push_back(t.segments[b][i]);
    }
  }
  return c;
}

}  // namespace

AssignmentResult best_assignment_bruteforce(const Sfa& sfa, const ChunkPartition& partition,
                                            std::size_t k, std::size_t cap) {
  if (k == 0) throw std::invalid_argument("k must be >= 1");
  auto t = build_segments(sfa, partition, cap);
  const std::size_t nblocks = t.segments.size();

  std::vector<std::vector<std::uint64_t>> options(nblocks);
  double combos = 1.0;
  for (std::size_t b = 0; b < nblocks; ++b) {
    std::size_t n = t.segments[b].size();
    options[b] = subsets(n, std::min(k, n));
    combos *= static_cast<double>(options[b].size());
    if (combos > static_cast<double>(cap)) {
      throw AssignmentCapExceeded("more than " + std::to_string(cap) + " assignments");
    }
  }

  std::vector<std::size_t> digit(nblocks, 0);
  std::vector<std::uint64_t> chosen(nblocks);
  std::vector<std::uint64_t> best_chosen;
  double best_mass = -1.0;
  while (true) {
    for (std::size_t b = 0; b < nblocks; ++b) chosen[b] = options[b][digit[b]];
    double mass = emitted_mass(t, chosen);
    if (mass > best_mass) {
      best_mass = mass;
      best_chosen = chosen;
    }
    std::size_t b = nblocks;
    while (b > 0 && ++digit[b - 1] == options[b - 1].size()) digit[--b] = 0;
    if (b == 0) break;
  }
  return AssignmentResult{choice_from(t, best_chosen), best_mass};
}

double per_block_top_k_mass(const Sfa& sfa, const ChunkPartition& partition, std::size_t k,
                            std::size_t cap) {
  auto t = build_segments(sfa, partition, cap);
  std::vector<std::uint64_t> chosen;
  for (const auto& segs : t.segments) {
    std::size_t r = std::min(k, segs.size());
    chosen.push_back(r == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << r) - 1);
  }
  return emitted_mass(t, chosen);
}

}  // namespace staccato
