#pragma once

// Query execution over a whole corpus: file scan and index-assisted.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "staccato/dict_index.hpp"
#include "staccato/query.hpp"
#include "staccato/sfa.hpp"
#include "staccato/store.hpp"

namespace staccato {

inline constexpr std::size_t kDefaultNumAns = 100;
inline constexpr std::size_t kDefaultProjectionSlack = 16;

// Pr[q] for every line's chunk graph.
std::vector<double> line_probabilities(std::span<const Sfa> graphs, const QueryDfa& dfa,
                                       std::size_t workers = 1);

// File scan: evaluates every line.
std::vector<LineMatch> rank_lines(std::span<const Sfa> graphs, const QueryDfa& dfa,
                                  std::size_t num_ans = kDefaultNumAns, std::size_t workers = 1);
std::vector<LineMatch> rank_lines(const Corpus& corpus, const QueryDfa& dfa, const Mode& mode,
                                  std::size_t num_ans = kDefaultNumAns, std::size_t workers = 1);

// Edges explored past a posting: the longest match for star-free patterns,
// otherwise the anchor length plus `slack` (possibly lossy).
std::size_t projection_depth(const QueryDfa& dfa, std::size_t slack = kDefaultProjectionSlack);

struct IndexedResult {
  std::vector<LineMatch> matches;
  bool used_index = false;
  std::string warning;  // set when falling back to a file scan
  std::size_t lines_evaluated = 0;
};

// Looks up the pattern's anchor and evaluates only the lines holding it,
// each over the union of its postings' projections scaled by the boundary
// masses. Falls back to a file scan when the pattern has no anchor or the
// anchor is not a dictionary term.
IndexedResult indexed_query(const QueryDfa& dfa, const PostingIndex& index,
                            const TrieDfa& dictionary, std::span<const Sfa> graphs,
                            std::size_t num_ans = kDefaultNumAns,
                            std::size_t slack = kDefaultProjectionSlack, std::size_t workers = 1);

}  // namespace staccato
