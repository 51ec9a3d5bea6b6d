#include <algorithm>
#include <cstdio>
#include <cstdlib>

#include "staccato/query.hpp"

namespace staccato {

double eval_sfa(const QueryDfa& dfa, const Sfa& sfa) {
  const std::size_t q = dfa.state_count();
  std::vector<std::vector<double>> mass(sfa.node_count());
  mass[sfa.start()].assign(q, 0.0);
  mass[sfa.start()][dfa.start] = 1.0;

  for (NodeId v : sfa.topo_order()) {
    if (v == sfa.final_node() || mass[v].empty()) continue;
    const auto& here = mass[v];
    for (EdgeId id : sfa.out_edges(v)) {
      const auto& e = sfa.edge(id);
      auto& there = mass[e.dst];
      if (there.empty()) there.assign(q, 0.0);
      for (DfaState s = 0; s < q; ++s) {
        if (here[s] == 0.0) continue;
        for (const auto& l : e.labels) there[dfa.run(s, l.text)] += here[s] * l.prob;
      }
    }
    mass[v].clear();
    mass[v].shrink_to_fit();
  }

  const auto& last = mass[sfa.final_node()];
  double p = 0.0;
  for (DfaState s = 0; s < last.size(); ++s) {
    if (dfa.accepting[s]) p += last[s];
  }
  return p;
}

double eval_strings(const QueryDfa& dfa, const RankedStrings& ranked) {
  double p = 0.0;
  for (const auto& e : ranked.entries) {
    if (dfa.accepts(e.text)) p += e.prob;
  }
  return p;
}

std::vector<LineMatch> rank_probabilities(std::span<const double> probabilities,
                                          std::size_t num_ans) {
  std::vector<LineMatch> out;
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    if (probabilities[i] > 0.0) {
      out.push_back(LineMatch{static_cast<std::uint32_t>(i), probabilities[i], 0});
    }
  }
  // Probabilities equal to 12 significant digits count as ties so that
  // rounding noise between evaluation strategies cannot reorder lines.
  auto key = [](double p) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.11e", p);
    return std::strtod(buf, nullptr);
  };
  std::sort(out.begin(), out.end(), [&](const LineMatch& a, const LineMatch& b) {
    double ka = key(a.probability), kb = key(b.probability);
    if (ka != kb) return ka > kb;
    return a.line < b.line;
  });
  if (out.size() > num_ans) out.resize(num_ans);
  for (std::size_t i = 0; i < out.size(); ++i) out[i].rank = i + 1;
  return out;
}

std::string format_matches_tsv(std::span<const LineMatch> matches) {
  std::string out;
  char buf[64];
  for (const auto& m : matches) {
    std::snprintf(buf, sizeof(buf), "%u\t%.9g\n", m.line, m.probability);
    out += buf;
  }
  return out;
}

std::string format_matches_pretty(std::span<const LineMatch> matches) {
  std::string out = "rank  line      probability\n";
  char buf[96];
  for (const auto& m : matches) {
    std::snprintf(buf, sizeof(buf), "%4zu  %-8u  %.4f\n", m.rank, m.line, m.probability);
    out += buf;
  }
  return out;
}

}  // namespace staccato
