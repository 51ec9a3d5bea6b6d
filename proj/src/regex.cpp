#include <algorithm>
#include <bitset>
#include <cctype>
#include <map>
#include <memory>
#include <queue>

#include "staccato/query.hpp"

namespace staccato {

PatternSyntaxError::PatternSyntaxError(std::size_t position, const std::string& what)
    : std::runtime_error("pattern error at position " + std::to_string(position) + ": " + what),
      position_(position) {}

DfaState QueryDfa::run(DfaState state, std::string_view text) const {
  for (unsigned char c : text) state = next[state][c];
  return state;
}

namespace {

using CharSet = std::bitset<256>;

struct Node {
  enum class Kind { kSet, kConcat, kAlt, kStar } kind;
  CharSet set;
  std::optional<char> literal;  // set for plain or escaped literal characters
  std::vector<std::unique_ptr<Node>> children;
};

using NodePtr = std::unique_ptr<Node>;

NodePtr make(Node::Kind kind) {
  auto n = std::make_unique<Node>();
  n->kind = kind;
  return n;
}

class Parser {
 public:
  Parser(std::string_view pattern, bool case_fold) : p_(pattern), case_fold_(case_fold) {}

  NodePtr parse() {
    if (p_.empty()) throw PatternSyntaxError(0, "empty pattern");
    auto node = alternation();
    if (pos_ != p_.size()) throw PatternSyntaxError(pos_, "unexpected ')'");
    return node;
  }

 private:
  NodePtr alternation() {
    auto first = concatenation();
    if (pos_ >= p_.size() || p_[pos_] != '|') return first;
    auto alt = make(Node::Kind::kAlt);
    alt->children.push_back(std::move(first));
    while (pos_ < p_.size() && p_[pos_] == '|') {
      ++pos_;
      alt->children.push_back(concatenation());
    }
    return alt;
  }

  NodePtr concatenation() {
    auto cat = make(Node::Kind::kConcat);
    std::size_t begin = pos_;
    while (pos_ < p_.size() && p_[pos_] != '|' && p_[pos_] != ')') {
      cat->children.push_back(repetition());
    }
    if (cat->children.empty()) throw PatternSyntaxError(begin, "empty alternative");
    if (cat->children.size() == 1) return std::move(cat->children.front());
    return cat;
  }

  NodePtr repetition() {
    auto node = atom();
    while (pos_ < p_.size() && p_[pos_] == '*') {
      ++pos_;
      auto star = make(Node::Kind::kStar);
      star->children.push_back(std::move(node));
      node = std::move(star);
    }
    return node;
  }

  NodePtr literal(char c) {
    auto n = make(Node::Kind::kSet);
    n->literal = c;
    n->set.set(static_cast<unsigned char>(c));
    if (case_fold_ && std::isalpha(static_cast<unsigned char>(c))) {
      n->set.set(static_cast<unsigned char>(std::tolower(static_cast<unsigned char>(c))));
      n->set.set(static_cast<unsigned char>(std::toupper(static_cast<unsigned char>(c))));
    }
    return n;
  }

  NodePtr atom() {
    char c = p_[pos_];
    if (c == '*') throw PatternSyntaxError(pos_, "'*' has nothing to repeat");
    if (c == '(') {
      std::size_t open = pos_++;
      if (pos_ >= p_.size()) throw PatternSyntaxError(open, "unbalanced '('");
      auto inner = alternation();
      if (pos_ >= p_.size() || p_[pos_] != ')') throw PatternSyntaxError(open, "unbalanced '('");
      ++pos_;
      return inner;
    }
    if (c == '\\') {
      if (pos_ + 1 >= p_.size()) throw PatternSyntaxError(pos_, "dangling '\\'");
      char e = p_[pos_ + 1];
      pos_ += 2;
      if (e == 'd') {
        auto n = make(Node::Kind::kSet);
        for (char d = '0'; d <= '9'; ++d) n->set.set(static_cast<unsigned char>(d));
        return n;
      }
      if (e == 'x') {
        auto n = make(Node::Kind::kSet);
        for (int ch = 0x20; ch <= 0x7e; ++ch) n->set.set(ch);
        return n;
      }
      return literal(e);
    }
    ++pos_;
    return literal(c);
  }

  std::string_view p_;
  bool case_fold_;
  std::size_t pos_ = 0;
};

std::optional<std::size_t> max_length(const Node& n) {
  switch (n.kind) {
    case Node::Kind::kSet: return 1;
    case Node::Kind::kStar: return std::nullopt;
    case Node::Kind::kConcat: {
      std::size_t sum = 0;
      for (const auto& c : n.children) {
        auto l = max_length(*c);
        if (!l) return std::nullopt;
        sum += *l;
      }
      return sum;
    }
    case Node::Kind::kAlt: {
      std::size_t best = 0;
      for (const auto& c : n.children) {
        auto l = max_length(*c);
        if (!l) return std::nullopt;
        best = std::max(best, *l);
      }
      return best;
    }
  }
  return std::nullopt;
}

// Maximal leading run of literal non-space characters.
std::optional<std::string> leading_anchor(const Node& root) {
  std::string word;
  auto take = [&](const Node& n) {
    if (n.kind != Node::Kind::kSet || !n.literal || *n.literal == ' ') return false;
    word += static_cast<char>(std::tolower(static_cast<unsigned char>(*n.literal)));
    return true;
  };
  if (root.kind == Node::Kind::kConcat) {
    for (const auto& c : root.children) {
      if (!take(*c)) break;
    }
  } else {
    take(root);
  }
  if (word.size() < kMinAnchorLength) return std::nullopt;
  return word;
}

// ---------------------------------------------------------------------------
// Thompson construction

struct NfaState {
  std::vector<int> eps;
  CharSet on;
  int to = -1;
};

struct Fragment {
  int start;
  int accept;
};

class Nfa {
 public:
  int add() {
    states.emplace_back();
    return static_cast<int>(states.size()) - 1;
  }

  Fragment build(const Node& n) {
    switch (n.kind) {
      case Node::Kind::kSet: {
        int s = add(), a = add();
        states[s].on = n.set;
        states[s].to = a;
        return {s, a};
      }
      case Node::Kind::kConcat: {
        Fragment f = build(*n.children.front());
        for (std::size_t i = 1; i < n.children.size(); ++i) {
          Fragment g = build(*n.children[i]);
          states[f.accept].eps.push_back(g.start);
          f.accept = g.accept;
        }
        return f;
      }
      case Node::Kind::kAlt: {
        int s = add(), a = add();
        for (const auto& c : n.children) {
          Fragment g = build(*c);
          states[s].eps.push_back(g.start);
          states[g.accept].eps.push_back(a);
        }
        return {s, a};
      }
      case Node::Kind::kStar: {
        int s = add(), a = add();
        Fragment g = build(*n.children.front());
        states[s].eps.push_back(g.start);
        states[s].eps.push_back(a);
        states[g.accept].eps.push_back(g.start);
        states[g.accept].eps.push_back(a);
        return {s, a};
      }
    }
    throw std::logic_error("unreachable");
  }

  std::vector<int> closure(std::vector<int> set) const {
    std::vector<bool> seen(states.size(), false);
    std::vector<int> stack;
    for (int s : set) {
      if (!seen[s]) {
        seen[s] = true;
        stack.push_back(s);
      }
    }
    set.clear();
    while (!stack.empty()) {
      int s = stack.back();
      stack.pop_back();
      set.push_back(s);
      for (int t : states[s].eps) {
        if (!seen[t]) {
          seen[t] = true;
          stack.push_back(t);
        }
      }
    }
    std::sort(set.begin(), set.end());
    return set;
  }

  std::vector<NfaState> states;
};

// Moore partition refinement, then renumbering in breadth-first order from
// the start state.
QueryDfa minimize(const QueryDfa& dfa) {
  const std::size_t n = dfa.state_count();
  std::vector<std::size_t> cls(n);
  for (std::size_t s = 0; s < n; ++s) cls[s] = dfa.accepting[s] ? 1 : 0;
  std::size_t count = 0;
  while (true) {
    std::map<std::vector<std::size_t>, std::size_t> signature;
    std::vector<std::size_t> next_cls(n);
    for (std::size_t s = 0; s < n; ++s) {
      std::vector<std::size_t> sig;
      sig.reserve(257);
      sig.push_back(cls[s]);
      for (int c = 0; c < 256; ++c) sig.push_back(cls[dfa.next[s][c]]);
      auto [it, inserted] = signature.emplace(std::move(sig), signature.size());
      next_cls[s] = it->second;
    }
    bool stable = signature.size() == count;
    count = signature.size();
    cls = std::move(next_cls);
    if (stable) break;
  }

  std::vector<std::optional<DfaState>> id(count);
  std::vector<std::size_t> rep;
  std::queue<std::size_t> queue;
  id[cls[dfa.start]] = 0;
  rep.push_back(dfa.start);
  queue.push(dfa.start);
  while (!queue.empty()) {
    std::size_t s = queue.front();
    queue.pop();
    for (int c = 0; c < 256; ++c) {
      std::size_t t = dfa.next[s][c];
      if (!id[cls[t]]) {
        id[cls[t]] = static_cast<DfaState>(rep.size());
        rep.push_back(t);
        queue.push(t);
      }
    }
  }

  QueryDfa out = dfa;
  out.start = 0;
  out.next.assign(rep.size(), {});
  out.accepting.assign(rep.size(), false);
  for (std::size_t i = 0; i < rep.size(); ++i) {
    out.accepting[i] = dfa.accepting[rep[i]];
    for (int c = 0; c < 256; ++c) out.next[i][c] = *id[cls[dfa.next[rep[i]][c]]];
  }
  return out;
}

}  // namespace

QueryDfa compile_pattern(std::string_view pattern, const CompileOptions& options) {
  auto root = Parser(pattern, options.case_fold).parse();

  Nfa nfa;
  int loop = -1;
  if (!options.whole_string) {
    loop = nfa.add();
    nfa.states[loop].on.set();
    nfa.states[loop].to = loop;
  }
  Fragment f = nfa.build(*root);
  if (loop >= 0) nfa.states[loop].eps.push_back(f.start);
  int entry = loop >= 0 ? loop : f.start;

  QueryDfa dfa;
  dfa.wrapped = !options.whole_string;
  dfa.case_fold = options.case_fold;
  dfa.anchor = leading_anchor(*root);
  dfa.max_match_length = max_length(*root);

  std::map<std::vector<int>, DfaState> ids;
  std::vector<std::vector<int>> sets;
  auto intern = [&](std::vector<int> set) {
    auto [it, inserted] = ids.emplace(set, static_cast<DfaState>(sets.size()));
    if (inserted) {
      sets.push_back(std::move(set));
      dfa.next.emplace_back();
      bool acc = std::binary_search(sets.back().begin(), sets.back().end(), f.accept);
      dfa.accepting.push_back(acc);
    }
    return it->second;
  };
  dfa.start = intern(nfa.closure({entry}));
  for (std::size_t s = 0; s < sets.size(); ++s) {
    if (dfa.wrapped && dfa.accepting[s]) {
      dfa.next[s].fill(static_cast<DfaState>(s));
      continue;
    }
    for (int c = 0; c < 256; ++c) {
      std::vector<int> moved;
      for (int q : sets[s]) {
        if (nfa.states[q].to >= 0 && nfa.states[q].on.test(c)) moved.push_back(nfa.states[q].to);
      }
      DfaState t = intern(nfa.closure(std::move(moved)));
      dfa.next[s][c] = t;
    }
  }
  return minimize(dfa);
}

}  // namespace staccato
