#include "support/index_oracle.hpp"

#include <cctype>

namespace staccato::testing {

OracleScan scan_postings(const Sfa& graph, std::uint32_t line, const std::vector<std::string>& terms,
                         std::size_t cap) {
  OracleScan out;
  std::set<std::pair<std::string, std::vector<std::pair<EdgeId, std::uint32_t>>>> seen_straddles;
  for (const auto& path : enumerate_all(graph, cap)) {
    // Owner (arc index, offset in its label) of every character.
    std::vector<std::pair<std::size_t, std::uint32_t>> owner;
    std::string text;
    for (std::size_t a = 0; a < path.arcs.size(); ++a) {
      const auto& label = graph.edge(path.arcs[a].edge).labels[path.arcs[a].label];
      for (std::size_t i = 0; i < label.text.size(); ++i) {
        owner.emplace_back(a, static_cast<std::uint32_t>(i));
        text += static_cast<char>(std::tolower(static_cast<unsigned char>(label.text[i])));
      }
    }
    for (const auto& term : terms) {
      for (std::size_t pos = text.find(term); pos != std::string::npos; pos = text.find(term, pos + 1)) {
        auto [a, offset] = owner[pos];
        const ArcRef& arc = path.arcs[a];
        out.postings[term].insert(Posting{line, arc.edge, arc.label, offset});
        std::size_t last = owner[pos + term.size() - 1].first;
        if (last != a) {
          std::vector<std::pair<EdgeId, std::uint32_t>> key;
          for (std::size_t b = a; b <= last; ++b) key.emplace_back(path.arcs[b].edge, path.arcs[b].label);
          if (seen_straddles.emplace(term + "@" + std::to_string(offset), key).second) ++out.straddling;
        }
      }
    }
  }
  return out;
}

PostingSets to_sets(const PostingIndex& index) {
  PostingSets out;
  for (const auto& [term, list] : index.terms()) {
    if (!list.empty()) out[term].insert(list.begin(), list.end());
  }
  return out;
}

}  // namespace staccato::testing
