#pragma once

// Stochastic finite automata over strings.
//
// An Sfa is a DAG with one start and one final node. Every edge (a node pair)
// carries one or more labels; each label is a string emitted with a
// conditional probability. Plain OCR automata emit one character per label,
// approximated ("chunked") automata emit longer strings.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace staccato {

using NodeId = std::uint32_t;
using EdgeId = std::uint32_t;

struct Label {
  std::string text;
  double prob = 0.0;
  double log_prob = 0.0;

  static Label from_prob(std::string text, double prob);
  static Label from_log_prob(std::string text, double log_prob);
};

struct Edge {
  NodeId src = 0;
  NodeId dst = 0;
  std::vector<Label> labels;
};

// One step of a labeled path.
struct ArcRef {
  EdgeId edge = 0;
  std::uint32_t label = 0;

  friend bool operator==(const ArcRef&, const ArcRef&) = default;
  friend auto operator<=>(const ArcRef&, const ArcRef&) = default;
};

class Sfa {
 public:
  Sfa() = default;

  // Edges sharing a (src, dst) pair are merged; the edge list is sorted by
  // (src, dst). node_names holds the external id of every dense node and
  // defaults to the identity. Throws std::invalid_argument on out-of-range
  // ids; graph invariants are checked by validate().
  Sfa(std::size_t node_count, NodeId start, NodeId final_node,
      std::vector<Edge> edges, std::vector<std::int64_t> node_names = {});

  std::size_t node_count() const { return node_names_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  std::size_t arc_count() const;
  NodeId start() const { return start_; }
  NodeId final_node() const { return final_; }

  std::span<const Edge> edges() const { return edges_; }
  const Edge& edge(EdgeId id) const { return edges_.at(id); }
  std::span<const EdgeId> out_edges(NodeId node) const { return out_.at(node); }
  std::span<const EdgeId> in_edges(NodeId node) const { return in_.at(node); }

  std::int64_t name(NodeId node) const { return node_names_.at(node); }
  std::span<const std::int64_t> node_names() const { return node_names_; }
  std::optional<NodeId> find_node(std::int64_t name) const;
  std::optional<EdgeId> find_edge(NodeId src, NodeId dst) const;

  bool is_acyclic() const { return !topo_.empty() || node_count() == 0; }

  // Linear extension of the reachability order; ties by ascending node id.
  // Throws std::logic_error on a cyclic graph.
  std::span<const NodeId> topo_order() const;
  std::size_t topo_index(NodeId node) const;

  // True iff v is reachable from u (reflexive).
  bool leq(NodeId u, NodeId v) const;

  std::vector<bool> descendants(NodeId node) const;
  std::vector<bool> ancestors(NodeId node) const;

  // Sum of label probabilities over the outgoing edges of node.
  double outgoing_mass(NodeId node) const;

 private:
  std::vector<std::int64_t> node_names_;
  NodeId start_ = 0;
  NodeId final_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::vector<EdgeId>> out_;
  std::vector<std::vector<EdgeId>> in_;
  std::vector<NodeId> topo_;
  std::vector<std::size_t> topo_pos_;
};

// ---------------------------------------------------------------------------
// Validation

enum class DiagnosticKind {
  kEmptyGraph,
  kCycle,
  kNoUniqueStart,
  kNoUniqueFinal,
  kDisconnectedNode,
  kBadProbability,
  kEmptyLabel,
  kNormalization,
  kUniquePathSurrogate,
};

std::string_view to_string(DiagnosticKind kind);

struct Diagnostic {
  DiagnosticKind kind;
  std::string message;
  std::optional<NodeId> node;
  std::optional<EdgeId> edge;
};

struct ValidateOptions {
  // Full SFAs sum to one at every non-final node; approximations may only
  // have lost mass.
  bool require_normalized = true;
  double tolerance = 1e-9;
};

std::vector<Diagnostic> validate(const Sfa& sfa, const ValidateOptions& options = {});

class SfaSyntaxError : public std::runtime_error {
 public:
  SfaSyntaxError(std::size_t line, std::size_t column, const std::string& what);
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

class SfaValidationError : public std::runtime_error {
 public:
  explicit SfaValidationError(std::vector<Diagnostic> diagnostics);
  const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }

 private:
  std::vector<Diagnostic> diagnostics_;
};

// ---------------------------------------------------------------------------
// sfa-v1 text format

// Parses and validates an sfa-v1 document. Node ids in the document become
// node names; dense ids are assigned in ascending name order.
Sfa parse_sfa(std::string_view text, const ValidateOptions& options = {});
std::string serialize_sfa(const Sfa& sfa);

std::string escape_label(std::string_view text);
// Decodes the body of a quoted label (without the surrounding quotes).
std::string unescape_label(std::string_view body);

// ---------------------------------------------------------------------------
// Enumeration oracle

struct LabeledPath {
  std::vector<ArcRef> arcs;
  std::string text;
  double prob = 0.0;
  double log_prob = 0.0;
};

class EnumerationCapExceeded : public std::runtime_error {
 public:
  explicit EnumerationCapExceeded(std::size_t cap);
};

// Every start->final labeled path, sorted by probability (descending), then
// string, then node sequence. Throws EnumerationCapExceeded past cap paths.
std::vector<LabeledPath> enumerate_all(const Sfa& sfa, std::size_t cap);

// Path order shared with the k-best search.
bool path_precedes(const Sfa& sfa, double log_a, std::string_view text_a,
                   std::span<const ArcRef> arcs_a, double log_b,
                   std::string_view text_b, std::span<const ArcRef> arcs_b);

}  // namespace staccato
