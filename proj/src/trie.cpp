#include <algorithm>
#include <cctype>
#include <set>

#include "staccato/dict_index.hpp"

namespace staccato {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

TrieDfa TrieDfa::build(std::span<const std::string> terms) {
  if (terms.empty()) throw std::invalid_argument("dictionary is empty");
  std::set<std::string> unique;
  for (const auto& t : terms) {
    if (t.empty()) throw std::invalid_argument("dictionary contains an empty term");
    unique.insert(lower(t));
  }

  TrieDfa trie;
  trie.children_.emplace_back();
  trie.final_term_.push_back(-1);
  for (const auto& t : unique) {
    std::uint32_t state = kRoot;
    for (char c : t) {
      auto& kids = trie.children_[state];
      auto it = std::lower_bound(kids.begin(), kids.end(), c,
                                 [](const auto& kv, char ch) { return kv.first < ch; });
      if (it != kids.end() && it->first == c) {
        state = it->second;
        continue;
      }
      auto fresh = static_cast<std::uint32_t>(trie.children_.size());
      kids.insert(it, {c, fresh});
      trie.children_.emplace_back();
      trie.final_term_.push_back(-1);
      state = fresh;
    }
    trie.final_term_[state] = static_cast<std::int64_t>(trie.terms_.size());
    trie.terms_.push_back(t);
  }
  return trie;
}

std::uint32_t TrieDfa::step(std::uint32_t state, char c) const {
  const auto& kids = children_[state];
  auto it = std::lower_bound(kids.begin(), kids.end(), c,
                             [](const auto& kv, char ch) { return kv.first < ch; });
  if (it == kids.end() || it->first != c) return kRoot;
  return it->second;
}

std::optional<std::uint32_t> TrieDfa::term_at(std::uint32_t state) const {
  if (final_term_[state] < 0) return std::nullopt;
  return static_cast<std::uint32_t>(final_term_[state]);
}

bool TrieDfa::contains(std::string_view term) const {
  std::uint32_t state = kRoot;
  for (char c : lower(term)) {
    state = step(state, c);
    if (state == kRoot) return false;
  }
  return term_at(state).has_value();
}

}  // namespace staccato
