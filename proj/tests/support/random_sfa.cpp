#include "support/random_sfa.hpp"

#include <algorithm>
#include <map>
#include <vector>

namespace staccato::testing {

namespace {

std::size_t uniform(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

std::string random_label(std::mt19937_64& rng, char first, std::size_t alphabet,
                         std::size_t max_length) {
  std::string s(1, first);
  std::size_t len = uniform(rng, 1, max_length);
  while (s.size() < len) s += static_cast<char>('a' + uniform(rng, 0, alphabet - 1));
  return s;
}

}  // namespace

double path_count(const Sfa& sfa) {
  std::vector<double> count(sfa.node_count(), 0.0);
  count[sfa.start()] = 1.0;
  for (NodeId v : sfa.topo_order()) {
    for (EdgeId e : sfa.out_edges(v)) {
      const Edge& edge = sfa.edge(e);
      count[edge.dst] += count[v] * static_cast<double>(edge.labels.size());
    }
  }
  return count[sfa.final_node()];
}

Sfa random_sfa(std::mt19937_64& rng, const RandomSfaOptions& o) {
  const std::size_t alphabet = std::clamp<std::size_t>(o.alphabet, 1, 26);
  for (;;) {
    const std::size_t n = uniform(rng, 2, std::max<std::size_t>(o.max_nodes, 2));
    // Out-neighbours per node; at most `alphabet` since labels need distinct
    // first characters.
    std::vector<std::vector<NodeId>> succ(n);
    auto add = [&](std::size_t u, std::size_t v) {
      if (std::find(succ[u].begin(), succ[u].end(), v) == succ[u].end()) {
        succ[u].push_back(static_cast<NodeId>(v));
      }
    };
    for (std::size_t u = 0; u + 1 < n; ++u) {
      std::size_t degree = uniform(rng, 1, std::min<std::size_t>(alphabet, 3));
      for (std::size_t d = 0; d < degree; ++d) add(u, uniform(rng, u + 1, std::min(n - 1, u + 3)));
    }
    bool ok = true;
    for (std::size_t v = 1; v < n && ok; ++v) {
      bool has_in = false;
      for (std::size_t u = 0; u < v && !has_in; ++u) {
        has_in = std::find(succ[u].begin(), succ[u].end(), v) != succ[u].end();
      }
      if (has_in) continue;
      std::vector<std::size_t> open;
      for (std::size_t u = 0; u < v; ++u) {
        if (succ[u].size() < alphabet) open.push_back(u);
      }
      if (open.empty()) {
        ok = false;
      } else {
        add(open[uniform(rng, 0, open.size() - 1)], v);
      }
    }
    if (!ok) continue;

    std::vector<Edge> edges;
    for (std::size_t u = 0; u + 1 < n; ++u) {
      std::vector<char> letters(alphabet);
      for (std::size_t i = 0; i < alphabet; ++i) letters[i] = static_cast<char>('a' + i);
      std::shuffle(letters.begin(), letters.end(), rng);
      // Every edge gets one letter; leftovers go to random edges.
      std::size_t total = uniform(rng, succ[u].size(), alphabet);
      std::vector<std::vector<char>> per_edge(succ[u].size());
      for (std::size_t i = 0; i < total; ++i) {
        std::size_t slot = i < succ[u].size() ? i : uniform(rng, 0, succ[u].size() - 1);
        per_edge[slot].push_back(letters[i]);
      }
      std::vector<double> weight(total);
      double sum = 0.0;
      for (auto& w : weight) sum += (w = std::uniform_real_distribution<double>(0.05, 1.0)(rng));
      std::size_t j = 0;
      for (std::size_t s = 0; s < succ[u].size(); ++s) {
        Edge e{static_cast<NodeId>(u), succ[u][s], {}};
        for (char c : per_edge[s]) {
          e.labels.push_back(
              Label::from_prob(random_label(rng, c, alphabet, o.max_label_length), weight[j++] / sum));
        }
        edges.push_back(std::move(e));
      }
    }
    Sfa sfa(n, 0, static_cast<NodeId>(n - 1), std::move(edges));
    if (path_count(sfa) <= static_cast<double>(o.max_paths)) return sfa;
  }
}

std::map<std::string, double> emitted(const Sfa& sfa, std::size_t cap) {
  std::map<std::string, double> out;
  for (const auto& p : enumerate_all(sfa, cap)) out[p.text] += p.prob;
  return out;
}

std::string random_pattern(std::mt19937_64& rng, std::size_t alphabet) {
  auto letter = [&] { return std::string(1, static_cast<char>('a' + uniform(rng, 0, alphabet - 1))); };
  auto atom = [&]() -> std::string {
    switch (uniform(rng, 0, 9)) {
      case 0: return "\\x";
      case 1: return "(" + letter() + "|" + letter() + letter() + ")";
      case 2: return "(" + letter() + letter() + ")*";
      case 3: return letter() + "*";
      case 4: return "\\" + letter();
      default: return letter();
    }
  };
  std::string p;
  std::size_t n = uniform(rng, 1, 4);
  for (std::size_t i = 0; i < n; ++i) p += atom();
  if (uniform(rng, 0, 5) == 0) p = "(" + p + "|" + atom() + ")";
  return p;
}

}  // namespace staccato::testing
