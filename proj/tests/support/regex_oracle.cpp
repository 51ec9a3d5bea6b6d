#include "support/regex_oracle.hpp"

#include <regex>
#include <stdexcept>

namespace staccato::testing {

std::string to_ecmascript(std::string_view pattern) {
  std::string out;
  auto literal = [&](char c) {
    if (std::string_view("\\^$.|?*+()[]{}/").find(c) != std::string_view::npos) out += '\\';
    out += c;
  };
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    char c = pattern[i];
    if (c == '\\') {
      if (++i == pattern.size()) throw std::invalid_argument("dangling escape");
      char e = pattern[i];
      if (e == 'd') {
        out += "[0-9]";
      } else if (e == 'x') {
        out += "[ -~]";
      } else {
        literal(e);
      }
    } else if (c == '(' || c == ')' || c == '|' || c == '*') {
      out += c;
    } else {
      literal(c);
    }
  }
  return out;
}

bool oracle_matches(std::string_view pattern, std::string_view text) {
  std::regex re(to_ecmascript(pattern), std::regex::ECMAScript);
  return std::regex_search(text.begin(), text.end(), re);
}

double oracle_probability(std::string_view pattern, const Sfa& sfa, std::size_t cap) {
  std::regex re(to_ecmascript(pattern), std::regex::ECMAScript);
  double p = 0.0;
  for (const auto& path : enumerate_all(sfa, cap)) {
    if (std::regex_search(path.text, re)) p += path.prob;
  }
  return p;
}

}  // namespace staccato::testing
