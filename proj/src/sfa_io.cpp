#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <set>

#include "staccato/sfa.hpp"

namespace staccato {

std::string escape_label(std::string_view text) {
  std::string out;
  out.reserve(text.size() + 2);
  for (char c : text) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case ' ': out += "\\s"; break;
      default: out += c;
    }
  }
  return out;
}

std::string unescape_label(std::string_view body) {
  std::string out;
  out.reserve(body.size());
  for (std::size_t i = 0; i < body.size(); ++i) {
    char c = body[i];
    if (c != '\\') {
      out += c;
      continue;
    }
    if (++i == body.size()) throw std::invalid_argument("dangling escape in label");
    switch (body[i]) {
      case '"': out += '"'; break;
      case '\\': out += '\\'; break;
      case 'n': out += '\n'; break;
      case 't': out += '\t'; break;
      case 's': out += ' '; break;
      default: throw std::invalid_argument(std::string("unknown escape \\") + body[i]);
    }
  }
  return out;
}

namespace {

struct Token {
  std::string_view text;
  std::size_t column;  // 1-based
  bool quoted;
};

// Splits a record into whitespace-separated tokens; a double-quoted token may
// contain spaces and '#'. A '#' outside quotes starts a comment.
std::vector<Token> tokenize(std::string_view line, std::size_t line_no) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    char c = line[i];
    if (c == ' ' || c == '\t' || c == '\r') {
      ++i;
      continue;
    }
    if (c == '#') break;
    std::size_t begin = i;
    if (c == '"') {
      ++i;
      while (i < line.size() && line[i] != '"') {
        if (line[i] == '\\') ++i;
        ++i;
      }
      if (i >= line.size()) throw SfaSyntaxError(line_no, begin + 1, "unterminated label");
      ++i;
      tokens.push_back(Token{line.substr(begin + 1, i - begin - 2), begin + 1, true});
      continue;
    }
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r' &&
           line[i] != '#') {
      ++i;
    }
    tokens.push_back(Token{line.substr(begin, i - begin), begin + 1, false});
  }
  return tokens;
}

std::int64_t parse_node(const Token& t, std::size_t line_no) {
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), value);
  if (t.quoted || ec != std::errc{} || ptr != t.text.data() + t.text.size() || value < 0) {
    throw SfaSyntaxError(line_no, t.column,
                         "expected a non-negative node id, got '" + std::string(t.text) + "'");
  }
  return value;
}

double parse_prob(const Token& t, std::size_t line_no) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), value);
  if (t.quoted || ec != std::errc{} || ptr != t.text.data() + t.text.size()) {
    throw SfaSyntaxError(line_no, t.column,
                         "expected a probability, got '" + std::string(t.text) + "'");
  }
  if (!(value > 0.0) || value > 1.0) {
    throw SfaSyntaxError(line_no, t.column,
                         "probability must lie in (0,1], got '" + std::string(t.text) + "'");
  }
  return value;
}

}  // namespace

Sfa parse_sfa(std::string_view text, const ValidateOptions& options) {
  struct RawArc {
    std::int64_t src, dst;
    std::string label;
    double prob;
  };
  std::optional<std::int64_t> start, final_node;
  std::vector<RawArc> arcs;
  bool seen_header = false;
  std::set<std::tuple<std::int64_t, std::int64_t, std::string>> seen_arcs;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;

    auto tokens = tokenize(line, line_no);
    if (tokens.empty()) continue;
    const auto& kw = tokens[0];
    auto expect = [&](std::size_t n) {
      if (tokens.size() != n) {
        throw SfaSyntaxError(line_no, kw.column,
                             "'" + std::string(kw.text) + "' takes " + std::to_string(n - 1) +
                                 " fields, got " + std::to_string(tokens.size() - 1));
      }
    };

    if (!seen_header) {
      if (kw.text != "sfa" || tokens.size() != 2 || tokens[1].text != "v1") {
        throw SfaSyntaxError(line_no, kw.column, "expected header 'sfa v1'");
      }
      seen_header = true;
      continue;
    }
    if (kw.text == "start") {
      expect(2);
      if (start) throw SfaSyntaxError(line_no, kw.column, "multiple start nodes");
      start = parse_node(tokens[1], line_no);
    } else if (kw.text == "final") {
      expect(2);
      if (final_node) throw SfaSyntaxError(line_no, kw.column, "multiple final nodes");
      final_node = parse_node(tokens[1], line_no);
    } else if (kw.text == "arc") {
      expect(5);
      RawArc arc;
      arc.src = parse_node(tokens[1], line_no);
      arc.dst = parse_node(tokens[2], line_no);
      if (!tokens[3].quoted) {
        throw SfaSyntaxError(line_no, tokens[3].column, "label must be a quoted string");
      }
      try {
        arc.label = unescape_label(tokens[3].text);
      } catch (const std::invalid_argument& e) {
        throw SfaSyntaxError(line_no, tokens[3].column, e.what());
      }
      if (arc.label.empty()) throw SfaSyntaxError(line_no, tokens[3].column, "empty label");
      arc.prob = parse_prob(tokens[4], line_no);
      if (!seen_arcs.emplace(arc.src, arc.dst, arc.label).second) {
        throw SfaSyntaxError(line_no, kw.column, "duplicate arc");
      }
      arcs.push_back(std::move(arc));
    } else {
      throw SfaSyntaxError(line_no, kw.column, "unknown record '" + std::string(kw.text) + "'");
    }
  }
  if (!seen_header) throw SfaSyntaxError(1, 1, "missing header 'sfa v1'");
  if (!start) throw SfaSyntaxError(line_no, 1, "missing start record");
  if (!final_node) throw SfaSyntaxError(line_no, 1, "missing final record");

  std::set<std::int64_t> names{*start, *final_node};
  for (const auto& a : arcs) {
    names.insert(a.src);
    names.insert(a.dst);
  }
  std::vector<std::int64_t> name_list(names.begin(), names.end());
  auto dense = [&](std::int64_t name) {
    return static_cast<NodeId>(std::lower_bound(name_list.begin(), name_list.end(), name) -
                               name_list.begin());
  };

  std::vector<Edge> edges;
  edges.reserve(arcs.size());
  for (auto& a : arcs) {
    edges.push_back(Edge{dense(a.src), dense(a.dst), {Label::from_prob(std::move(a.label), a.prob)}});
  }
  Sfa sfa(name_list.size(), dense(*start), dense(*final_node), std::move(edges), name_list);
  auto diagnostics = validate(sfa, options);
  if (!diagnostics.empty()) throw SfaValidationError(std::move(diagnostics));
  return sfa;
}

std::string serialize_sfa(const Sfa& sfa) {
  std::string out = "sfa v1\n";
  out += "start " + std::to_string(sfa.name(sfa.start())) + "\n";
  out += "final " + std::to_string(sfa.name(sfa.final_node())) + "\n";
  char buf[64];
  for (const auto& e : sfa.edges()) {
    for (const auto& l : e.labels) {
      auto res = std::to_chars(buf, buf + sizeof(buf), l.prob);
      out += "arc " + std::to_string(sfa.name(e.src)) + " " + std::to_string(sfa.name(e.dst)) +
             " \"" + escape_label(l.text) + "\" " + std::string(buf, res.ptr) + "\n";
    }
  }
  return out;
}

}  // namespace staccato
