#include "staccato/corpus_query.hpp"

#include <map>

#include "parallel.hpp"

namespace staccato {

std::vector<double> line_probabilities(std::span<const Sfa> graphs, const QueryDfa& dfa,
                                       std::size_t workers) {
  std::vector<double> p(graphs.size(), 0.0);
  detail::parallel_for(graphs.size(), workers, [&](std::size_t i) { p[i] = eval_sfa(dfa, graphs[i]); });
  return p;
}

std::vector<LineMatch> rank_lines(std::span<const Sfa> graphs, const QueryDfa& dfa,
                                  std::size_t num_ans, std::size_t workers) {
  return rank_probabilities(line_probabilities(graphs, dfa, workers), num_ans);
}

std::vector<LineMatch> rank_lines(const Corpus& corpus, const QueryDfa& dfa, const Mode& mode,
                                  std::size_t num_ans, std::size_t workers) {
  auto graphs = corpus.load_graphs(mode, workers);
  return rank_lines(graphs, dfa, num_ans, workers);
}

std::size_t projection_depth(const QueryDfa& dfa, std::size_t slack) {
  if (dfa.max_match_length) return *dfa.max_match_length;
  return (dfa.anchor ? dfa.anchor->size() : 0) + slack;
}

IndexedResult indexed_query(const QueryDfa& dfa, const PostingIndex& index,
                            const TrieDfa& dictionary, std::span<const Sfa> graphs,
                            std::size_t num_ans, std::size_t slack, std::size_t workers) {
  IndexedResult result;
  if (!dfa.anchor || !dictionary.contains(*dfa.anchor)) {
    result.warning = dfa.anchor ? "anchor '" + *dfa.anchor + "' is not in the dictionary"
                                : "pattern has no usable anchor";
    result.warning += "; falling back to a file scan";
    result.matches = rank_lines(graphs, dfa, num_ans, workers);
    result.lines_evaluated = graphs.size();
    return result;
  }
  result.used_index = true;

  std::map<std::uint32_t, std::vector<Posting>> by_line;
  for (const auto& p : index.lookup(*dfa.anchor)) {
    if (p.line < graphs.size()) by_line[p.line].push_back(p);
  }
  std::vector<std::pair<std::uint32_t, std::vector<Posting>>> candidates(by_line.begin(),
                                                                          by_line.end());
  const std::size_t depth = projection_depth(dfa, slack);
  std::vector<double> prob(graphs.size(), 0.0);
  detail::parallel_for(candidates.size(), workers, [&](std::size_t i) {
    const auto& [line, postings] = candidates[i];
    Projection proj = project_union(graphs[line], postings, depth);
    prob[line] = proj.prefix_mass * eval_sfa(dfa, proj.region) * proj.suffix_mass;
  });
  result.lines_evaluated = candidates.size();
  result.matches = rank_probabilities(prob, num_ans);
  return result;
}

}  // namespace staccato
