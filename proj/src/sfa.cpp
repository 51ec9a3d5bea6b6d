#include "staccato/sfa.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <queue>
#include <sstream>

namespace staccato {

Label Label::from_prob(std::string text, double prob) {
  return Label{std::move(text), prob, std::log(prob)};
}

Label Label::from_log_prob(std::string text, double log_prob) {
  return Label{std::move(text), std::exp(log_prob), log_prob};
}

Sfa::Sfa(std::size_t node_count, NodeId start, NodeId final_node,
         std::vector<Edge> edges, std::vector<std::int64_t> node_names)
    : node_names_(std::move(node_names)), start_(start), final_(final_node) {
  if (node_names_.empty()) {
    node_names_.resize(node_count);
    std::iota(node_names_.begin(), node_names_.end(), std::int64_t{0});
  }
  if (node_names_.size() != node_count) {
    throw std::invalid_argument("node name count does not match node count");
  }
  if (node_count == 0) throw std::invalid_argument("an SFA needs at least one node");
  if (start >= node_count || final_node >= node_count) {
    throw std::invalid_argument("start or final node out of range");
  }

  std::map<std::pair<NodeId, NodeId>, std::vector<Label>> merged;
  for (auto& e : edges) {
    if (e.src >= node_count || e.dst >= node_count) {
      throw std::invalid_argument("edge endpoint out of range");
    }
    auto& slot = merged[{e.src, e.dst}];
    for (auto& l : e.labels) slot.push_back(std::move(l));
  }
  edges_.reserve(merged.size());
  for (auto& [key, labels] : merged) {
    edges_.push_back(Edge{key.first, key.second, std::move(labels)});
  }

  out_.assign(node_count, {});
  in_.assign(node_count, {});
  for (EdgeId id = 0; id < edges_.size(); ++id) {
    out_[edges_[id].src].push_back(id);
    in_[edges_[id].dst].push_back(id);
  }

  // Kahn's algorithm, smallest ready id first.
  std::vector<std::size_t> indegree(node_count);
  for (const auto& e : edges_) ++indegree[e.dst];
  std::priority_queue<NodeId, std::vector<NodeId>, std::greater<>> ready;
  for (NodeId v = 0; v < node_count; ++v) {
    if (indegree[v] == 0) ready.push(v);
  }
  std::vector<NodeId> order;
  order.reserve(node_count);
  while (!ready.empty()) {
    NodeId v = ready.top();
    ready.pop();
    order.push_back(v);
    for (EdgeId id : out_[v]) {
      if (--indegree[edges_[id].dst] == 0) ready.push(edges_[id].dst);
    }
  }
  if (order.size() == node_count) {
    topo_ = std::move(order);
    topo_pos_.assign(node_count, 0);
    for (std::size_t i = 0; i < topo_.size(); ++i) topo_pos_[topo_[i]] = i;
  }
}

std::size_t Sfa::arc_count() const {
  std::size_t n = 0;
  for (const auto& e : edges_) n += e.labels.size();
  return n;
}

std::optional<NodeId> Sfa::find_node(std::int64_t name) const {
  auto it = std::find(node_names_.begin(), node_names_.end(), name);
  if (it == node_names_.end()) return std::nullopt;
  return static_cast<NodeId>(it - node_names_.begin());
}

std::optional<EdgeId> Sfa::find_edge(NodeId src, NodeId dst) const {
  for (EdgeId id : out_.at(src)) {
    if (edges_[id].dst == dst) return id;
  }
  return std::nullopt;
}

std::span<const NodeId> Sfa::topo_order() const {
  if (!is_acyclic()) throw std::logic_error("topological order of a cyclic graph");
  return topo_;
}

std::size_t Sfa::topo_index(NodeId node) const {
  if (!is_acyclic()) throw std::logic_error("topological order of a cyclic graph");
  return topo_pos_.at(node);
}

std::vector<bool> Sfa::descendants(NodeId node) const {
  std::vector<bool> seen(node_count(), false);
  std::vector<NodeId> stack{node};
  seen[node] = true;
  while (!stack.empty()) {
    NodeId v = stack.back();
    stack.pop_back();
    for (EdgeId id : out_[v]) {
      NodeId w = edges_[id].dst;
      if (!seen[w]) {
        seen[w] = true;
        stack.push_back(w);
      }
    }
  }
  return seen;
}

std::vector<bool> Sfa::ancestors(NodeId node) const {
  std::vector<bool> seen(node_count(), false);
  std::vector<NodeId> stack{node};
  seen[node] = true;
  while (!stack.empty()) {
    NodeId v = stack.back();
    stack.pop_back();
    for (EdgeId id : in_[v]) {
      NodeId w = edges_[id].src;
      if (!seen[w]) {
        seen[w] = true;
        stack.push_back(w);
      }
    }
  }
  return seen;
}

bool Sfa::leq(NodeId u, NodeId v) const {
  if (u == v) return true;
  if (is_acyclic() && topo_pos_[u] > topo_pos_[v]) return false;
  return descendants(u)[v];
}

double Sfa::outgoing_mass(NodeId node) const {
  double mass = 0.0;
  for (EdgeId id : out_.at(node)) {
    for (const auto& l : edges_[id].labels) mass += l.prob;
  }
  return mass;
}

// ---------------------------------------------------------------------------

std::string_view to_string(DiagnosticKind kind) {
  switch (kind) {
    case DiagnosticKind::kEmptyGraph: return "empty-graph";
    case DiagnosticKind::kCycle: return "cycle";
    case DiagnosticKind::kNoUniqueStart: return "no-unique-start";
    case DiagnosticKind::kNoUniqueFinal: return "no-unique-final";
    case DiagnosticKind::kDisconnectedNode: return "node-off-path";
    case DiagnosticKind::kBadProbability: return "bad-probability";
    case DiagnosticKind::kEmptyLabel: return "empty-label";
    case DiagnosticKind::kNormalization: return "normalization";
    case DiagnosticKind::kUniquePathSurrogate: return "unique-path-surrogate";
  }
  return "unknown";
}

namespace {

std::string node_str(const Sfa& sfa, NodeId v) { return std::to_string(sfa.name(v)); }

}  // namespace

std::vector<Diagnostic> validate(const Sfa& sfa, const ValidateOptions& options) {
  std::vector<Diagnostic> out;
  auto add = [&](DiagnosticKind kind, std::string msg, std::optional<NodeId> node,
                 std::optional<EdgeId> edge) {
    out.push_back(Diagnostic{kind, std::move(msg), node, edge});
  };

  if (sfa.edge_count() == 0) {
    add(DiagnosticKind::kEmptyGraph, "the SFA has no edges", std::nullopt, std::nullopt);
    return out;
  }
  if (!sfa.is_acyclic()) {
    add(DiagnosticKind::kCycle, "the graph contains a cycle", std::nullopt, std::nullopt);
    return out;
  }

  for (NodeId v = 0; v < sfa.node_count(); ++v) {
    if (sfa.in_edges(v).empty() && v != sfa.start()) {
      add(DiagnosticKind::kNoUniqueStart,
          "node " + node_str(sfa, v) + " has no incoming edges but is not the start", v,
          std::nullopt);
    }
    if (sfa.out_edges(v).empty() && v != sfa.final_node()) {
      add(DiagnosticKind::kNoUniqueFinal,
          "node " + node_str(sfa, v) + " has no outgoing edges but is not the final", v,
          std::nullopt);
    }
  }
  if (!sfa.in_edges(sfa.start()).empty()) {
    add(DiagnosticKind::kNoUniqueStart, "start node has incoming edges", sfa.start(),
        std::nullopt);
  }
  if (!sfa.out_edges(sfa.final_node()).empty()) {
    add(DiagnosticKind::kNoUniqueFinal, "final node has outgoing edges", sfa.final_node(),
        std::nullopt);
  }

  auto from_start = sfa.descendants(sfa.start());
  auto to_final = sfa.ancestors(sfa.final_node());
  for (NodeId v = 0; v < sfa.node_count(); ++v) {
    if (!from_start[v] || !to_final[v]) {
      add(DiagnosticKind::kDisconnectedNode,
          "node " + node_str(sfa, v) + " is not on any start-to-final path", v, std::nullopt);
    }
  }

  for (EdgeId id = 0; id < sfa.edge_count(); ++id) {
    const auto& e = sfa.edge(id);
    for (const auto& l : e.labels) {
      if (!(l.prob > 0.0) || l.prob > 1.0 + options.tolerance || !std::isfinite(l.prob)) {
        add(DiagnosticKind::kBadProbability,
            "edge (" + node_str(sfa, e.src) + "," + node_str(sfa, e.dst) +
                ") has a label with probability outside (0,1]",
            std::nullopt, id);
      }
      if (l.text.empty()) {
        add(DiagnosticKind::kEmptyLabel,
            "edge (" + node_str(sfa, e.src) + "," + node_str(sfa, e.dst) + ") has an empty label",
            std::nullopt, id);
      }
    }
  }

  for (NodeId v = 0; v < sfa.node_count(); ++v) {
    if (v == sfa.final_node()) continue;
    double mass = sfa.outgoing_mass(v);
    bool bad = options.require_normalized ? std::abs(mass - 1.0) > options.tolerance
                                          : mass > 1.0 + options.tolerance;
    if (bad) {
      std::ostringstream msg;
      msg.precision(12);
      msg << "outgoing mass of node " << node_str(sfa, v) << " is " << mass << " (deficit "
          << 1.0 - mass << ")";
      add(DiagnosticKind::kNormalization, msg.str(), v, std::nullopt);
    }
  }

  // No two outgoing labels of a node may be equal or prefixes of each other.
  for (NodeId v = 0; v < sfa.node_count(); ++v) {
    std::vector<std::pair<std::string_view, EdgeId>> labels;
    for (EdgeId id : sfa.out_edges(v)) {
      for (const auto& l : sfa.edge(id).labels) labels.emplace_back(l.text, id);
    }
    std::sort(labels.begin(), labels.end());
    for (std::size_t i = 1; i < labels.size(); ++i) {
      const auto& prev = labels[i - 1].first;
      const auto& cur = labels[i].first;
      if (cur.substr(0, prev.size()) == prev) {
        add(DiagnosticKind::kUniquePathSurrogate,
            "node " + node_str(sfa, v) + " has outgoing labels \"" + std::string(prev) +
                "\" and \"" + std::string(cur) + "\" where one is a prefix of the other",
            v, labels[i].second);
      }
    }
  }
  return out;
}

SfaSyntaxError::SfaSyntaxError(std::size_t line, std::size_t column, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) +
                         ": " + what),
      line_(line),
      column_(column) {}

namespace {

std::string join_diagnostics(const std::vector<Diagnostic>& diagnostics) {
  std::string s;
  for (const auto& d : diagnostics) {
    if (!s.empty()) s += "; ";
    s += std::string(to_string(d.kind)) + ": " + d.message;
  }
  return s;
}

}  // namespace

SfaValidationError::SfaValidationError(std::vector<Diagnostic> diagnostics)
    : std::runtime_error("invalid SFA: " + join_diagnostics(diagnostics)),
      diagnostics_(std::move(diagnostics)) {}

// ---------------------------------------------------------------------------

EnumerationCapExceeded::EnumerationCapExceeded(std::size_t cap)
    : std::runtime_error("more than " + std::to_string(cap) + " labeled paths") {}

bool path_precedes(const Sfa& sfa, double log_a, std::string_view text_a,
                   std::span<const ArcRef> arcs_a, double log_b, std::string_view text_b,
                   std::span<const ArcRef> arcs_b) {
  if (log_a != log_b) return log_a > log_b;
  if (text_a != text_b) return text_a < text_b;
  std::size_t n = std::min(arcs_a.size(), arcs_b.size());
  for (std::size_t i = 0; i < n; ++i) {
    NodeId da = sfa.edge(arcs_a[i].edge).dst;
    NodeId db = sfa.edge(arcs_b[i].edge).dst;
    if (da != db) return da < db;
  }
  return arcs_a.size() < arcs_b.size();
}

std::vector<LabeledPath> enumerate_all(const Sfa& sfa, std::size_t cap) {
  std::vector<LabeledPath> out;
  LabeledPath cur;
  std::vector<double> log_stack{0.0};

  std::function<void(NodeId)> walk = [&](NodeId v) {
    if (v == sfa.final_node()) {
      if (out.size() >= cap) throw EnumerationCapExceeded(cap);
      LabeledPath p = cur;
      p.log_prob = log_stack.back();
      p.prob = std::exp(p.log_prob);
      out.push_back(std::move(p));
      return;
    }
    for (EdgeId id : sfa.out_edges(v)) {
      const auto& e = sfa.edge(id);
      for (std::uint32_t li = 0; li < e.labels.size(); ++li) {
        const auto& l = e.labels[li];
        cur.arcs.push_back(ArcRef{id, li});
        cur.text += l.text;
        log_stack.push_back(log_stack.back() + l.log_prob);
        walk(e.dst);
        log_stack.pop_back();
        cur.text.resize(cur.text.size() - l.text.size());
        cur.arcs.pop_back();
      }
    }
  };
  walk(sfa.start());

  std::sort(out.begin(), out.end(), [&](const LabeledPath& a, const LabeledPath& b) {
    return path_precedes(sfa, a.log_prob, a.text, a.arcs, b.log_prob, b.text, b.arcs);
  });
  return out;
}

}  // namespace staccato
