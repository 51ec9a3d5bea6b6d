#pragma once

// Dictionary-based inverted index over chunk graphs.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "staccato/sfa.hpp"

namespace staccato {

// Trie-shaped DFA over lowercase dictionary terms. State 0 is the root and
// doubles as the dead state for step(): no transition ever re-enters it.
class TrieDfa {
 public:
  // Terms are lowercased and deduplicated. Throws std::invalid_argument on an
  // empty term list or an empty term.
  static TrieDfa build(std::span<const std::string> terms);

  static constexpr std::uint32_t kRoot = 0;

  std::uint32_t step(std::uint32_t state, char c) const;
  std::optional<std::uint32_t> term_at(std::uint32_t state) const;
  const std::string& term(std::uint32_t id) const { return terms_.at(id); }
  std::size_t term_count() const { return terms_.size(); }
  std::size_t state_count() const { return children_.size(); }
  bool contains(std::string_view term) const;

 private:
  // Per state: (character, next state) sorted by character.
  std::vector<std::vector<std::pair<char, std::uint32_t>>> children_;
  std::vector<std::int64_t> final_term_;  // -1 if not final
  std::vector<std::string> terms_;
};

struct Posting {
  std::uint32_t line = 0;
  std::uint32_t edge = 0;    // edge id in the line's chunk graph
  std::uint32_t path = 0;    // rank of the string within the edge
  std::uint32_t offset = 0;  // position of the term's first character

  friend bool operator==(const Posting&, const Posting&) = default;
  friend auto operator<=>(const Posting&, const Posting&) = default;
};

class IndexFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class PostingIndex {
 public:
  void add(const std::string& term, const Posting& posting);
  // Sorts and deduplicates every posting list.
  void finalize();
  void merge(const PostingIndex& other);

  // Case-folded lookup; empty when the term has no postings.
  std::span<const Posting> lookup(std::string_view term) const;
  const std::map<std::string, std::vector<Posting>, std::less<>>& terms() const { return lists_; }
  std::size_t posting_count() const;

  // `idx v1` text: one `term<TAB>line:edge:path:offset[,...]` row per term.
  std::string serialize() const;
  static PostingIndex parse(std::string_view text);

 private:
  friend PostingIndex build_index(std::span<const Sfa>, const TrieDfa&, std::size_t);
  std::map<std::string, std::vector<Posting>, std::less<>> lists_;
};

// Start locations of every dictionary term occurring in the strings a chunk
// graph emits, including terms straddling several edges. Edges are visited in
// topological order; partial matches reaching the end of a string are carried
// to the child edges as (trie state, postings) pairs.
PostingIndex build_line_index(const Sfa& chunk_graph, std::uint32_t line, const TrieDfa& trie);

// Per-line construction followed by a merge; `workers` threads build lines
// in parallel.
PostingIndex build_index(std::span<const Sfa> chunk_graphs, const TrieDfa& trie,
                         std::size_t workers = 1);

// The part of a chunk graph around one or more postings.
struct Projection {
  Sfa region;                 // valid sub-SFA, node names as in the chunk graph
  std::vector<NodeId> nodes;  // chunk-graph node ids in the region
  double prefix_mass = 0.0;   // forward mass into the region's entry
  double suffix_mass = 0.0;   // backward mass out of the region's exit
};

// Posting edge plus every node reachable from its head within `depth` edges
// (breadth-first), grown to a valid sub-SFA.
Projection project(const Sfa& chunk_graph, const Posting& posting, std::size_t depth);
// Union of the projections of several postings of one line.
Projection project_union(const Sfa& chunk_graph, std::span<const Posting> postings,
                         std::size_t depth);

}  // namespace staccato
