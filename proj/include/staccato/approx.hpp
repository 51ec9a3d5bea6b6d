#pragma once

// Chunked top-k approximation of SFAs.
//
// A chunk is a region of the SFA with a single entry and a single exit node
// and no other edge touching its interior. Collapsing a chunk replaces it by
// one edge carrying the chunk's k most likely strings, so every string the
// approximation emits is emitted by the original with the same probability.

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "staccato/inference.hpp"
#include "staccato/sfa.hpp"

namespace staccato {

// A generalized SFA whose edges each keep at most k ranked strings.
// Node names are the ids of the original SFA's nodes.
struct ChunkedSfa {
  Sfa graph;
  // Per edge of graph: names of the original nodes the edge spans (sorted,
  // including both endpoints).
  std::vector<std::vector<std::int64_t>> covered;
  std::size_t m = 0;
  std::size_t k = 0;

  // The ranked strings of one chunk edge.
  RankedStrings chunk(EdgeId edge) const;
};

struct RegionBoundary {
  NodeId entry;
  NodeId exit;
};

// Entry/exit of `region` (a node-membership mask) when it forms a valid chunk.
// Inside the region exactly one node lacks incoming edges and a different one
// lacks outgoing edges. Edges touching interior nodes must stay inside.
std::optional<RegionBoundary> region_boundary(const Sfa& sfa, const std::vector<bool>& region);

// Grows seed to a minimal enclosing valid chunk. Returns sorted node ids.
std::vector<NodeId> find_min_sfa(const Sfa& sfa, std::span<const NodeId> seed);

class InvalidRegion : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Replaces a valid region by a single edge carrying its top-k strings.
// Throws InvalidRegion when the region is not a valid chunk.
Sfa collapse(const Sfa& sfa, std::span<const NodeId> region, std::size_t k);

// Every edge becomes its own chunk holding its top-k labels.
ChunkedSfa per_transition_chunking(const Sfa& sfa, std::size_t k);

// Greedy merging: repeatedly collapse the minimal chunk around the adjacent
// edge pair whose collapse keeps the most total mass, until at most m edges
// remain or nothing can be merged.
ChunkedSfa greedy_approximate(const Sfa& sfa, std::size_t m, std::size_t k);

// ---------------------------------------------------------------------------
// Exhaustive assignment search over an arbitrary edge partition.

struct ChunkPartition {
  std::vector<std::vector<EdgeId>> blocks;
};

// A maximal run of consecutive edges of one block inside a start->final path.
struct BlockSegment {
  std::vector<ArcRef> arcs;
  std::string text;
  double prob = 0.0;

  friend bool operator==(const BlockSegment& a, const BlockSegment& b) { return a.arcs == b.arcs; }
};

struct AssignmentChoice {
  // Per block, the chosen segments (at most k).
  std::vector<std::vector<BlockSegment>> chosen;
};

struct AssignmentResult {
  AssignmentChoice choice;
  double mass = 0.0;
};

class AssignmentCapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Checks that the blocks cover every edge exactly once and that each block
// is connected. Throws std::invalid_argument otherwise.
void check_partition(const Sfa& sfa, const ChunkPartition& partition);

// The assignment of at most k segments per block maximizing the mass of the
// emitted strings. Only subsets of size min(k, #segments) are tried since
// enlarging a choice never lowers its mass. Throws AssignmentCapExceeded when
// the number of assignments or of enumerated paths exceeds cap.
AssignmentResult best_assignment_bruteforce(const Sfa& sfa, const ChunkPartition& partition,
                                            std::size_t k, std::size_t cap);

// Mass emitted when every block keeps its k most probable segments.
double per_block_top_k_mass(const Sfa& sfa, const ChunkPartition& partition, std::size_t k,
                            std::size_t cap);

}  // namespace staccato
