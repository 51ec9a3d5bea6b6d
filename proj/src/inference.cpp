#include "staccato/inference.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace staccato {

double RankedStrings::mass() const {
  double m = 0.0;
  for (const auto& e : entries) m += e.prob;
  return m;
}

namespace {

struct Partial {
  double log_prob = 0.0;
  std::string text;
  std::vector<ArcRef> path;
};

}  // namespace

RankedStrings top_k_between(const Sfa& sfa, NodeId from, NodeId to,
                            const std::vector<bool>& edge_mask, std::size_t k) {
  if (k == 0) throw std::invalid_argument("top_k needs k >= 1");
  RankedStrings result;
  result.k = k;

  auto order = sfa.topo_order();
  std::vector<std::vector<Partial>> best(sfa.node_count());
  best[from].push_back(Partial{});

  auto precedes = [&](const Partial& a, const Partial& b) {
    return path_precedes(sfa, a.log_prob, a.text, a.path, b.log_prob, b.text, b.path);
  };

  for (std::size_t i = sfa.topo_index(from); i < order.size(); ++i) {
    NodeId v = order[i];
    if (v == to) break;
    if (best[v].empty()) continue;
    if (best[v].size() > k) {
      std::partial_sort(best[v].begin(), best[v].begin() + k, best[v].end(), precedes);
      best[v].resize(k);
    }
    for (EdgeId id : sfa.out_edges(v)) {
      if (!edge_mask.empty() && !edge_mask[id]) continue;
      const auto& e = sfa.edge(id);
      auto& target = best[e.dst];
      for (std::uint32_t li = 0; li < e.labels.size(); ++li) {
        const auto& l = e.labels[li];
        for (const auto& p : best[v]) {
          Partial q;
          q.log_prob = p.log_prob + l.log_prob;
          q.text.reserve(p.text.size() + l.text.size());
          q.text = p.text;
          q.text += l.text;
          q.path = p.path;
          q.path.push_back(ArcRef{id, li});
          target.push_back(std::move(q));
        }
      }
      if (target.size() > 4 * k) {
        std::partial_sort(target.begin(), target.begin() + k, target.end(), precedes);
        target.resize(k);
      }
    }
    best[v].clear();
    best[v].shrink_to_fit();
  }

  auto& final_list = best[to];
  std::sort(final_list.begin(), final_list.end(), precedes);
  if (final_list.size() > k) final_list.resize(k);
  for (auto& p : final_list) {
    result.entries.push_back(
        RankedEntry{std::move(p.text), std::exp(p.log_prob), p.log_prob, std::move(p.path)});
  }
  return result;
}

RankedStrings top_k(const Sfa& sfa, std::size_t k) {
  return top_k_between(sfa, sfa.start(), sfa.final_node(), {}, k);
}

namespace {

double edge_mass(const Edge& e) {
  double m = 0.0;
  for (const auto& l : e.labels) m += l.prob;
  return m;
}

}  // namespace

std::vector<double> forward_mass(const Sfa& sfa) {
  std::vector<double> f(sfa.node_count(), 0.0);
  f[sfa.start()] = 1.0;
  for (NodeId v : sfa.topo_order()) {
    if (f[v] == 0.0) continue;
    for (EdgeId id : sfa.out_edges(v)) f[sfa.edge(id).dst] += f[v] * edge_mass(sfa.edge(id));
  }
  return f;
}

std::vector<double> backward_mass(const Sfa& sfa) {
  std::vector<double> b(sfa.node_count(), 0.0);
  b[sfa.final_node()] = 1.0;
  auto order = sfa.topo_order();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    NodeId v = *it;
    if (v == sfa.final_node()) continue;
    double sum = 0.0;
    for (EdgeId id : sfa.out_edges(v)) sum += edge_mass(sfa.edge(id)) * b[sfa.edge(id).dst];
    b[v] = sum;
  }
  return b;
}

double total_mass(const Sfa& sfa) { return forward_mass(sfa)[sfa.final_node()]; }

double mass_between(const Sfa& sfa, NodeId from, NodeId to, const std::vector<bool>& edge_mask) {
  std::vector<double> f(sfa.node_count(), 0.0);
  f[from] = 1.0;
  auto order = sfa.topo_order();
  for (std::size_t i = sfa.topo_index(from); i < order.size(); ++i) {
    NodeId v = order[i];
    if (v == to) break;
    if (f[v] == 0.0) continue;
    for (EdgeId id : sfa.out_edges(v)) {
      if (!edge_mask.empty() && !edge_mask[id]) continue;
      f[sfa.edge(id).dst] += f[v] * edge_mass(sfa.edge(id));
    }
  }
  return f[to];
}

double kl_of_retention(double retained_mass) {
  if (!(retained_mass > 0.0) || retained_mass > 1.0 + 1e-12) {
    throw std::domain_error("retained mass must lie in (0,1]");
  }
  return -std::log(retained_mass);
}

}  // namespace staccato
