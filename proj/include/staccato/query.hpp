#pragma once

// Regex queries over SFAs.
//
// Pattern dialect: literal characters, `\d` (a digit), `\x` (any printable
// ASCII character or space), `\<c>` for a literal c, `(...)` grouping, `|`
// alternation and `*` repetition. `.` is a literal dot.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "staccato/inference.hpp"
#include "staccato/sfa.hpp"

namespace staccato {

using DfaState = std::uint32_t;

struct QueryDfa {
  std::vector<std::array<DfaState, 256>> next;
  std::vector<bool> accepting;
  DfaState start = 0;
  // Substring matching: the automaton accepts any string containing a match,
  // and all accepting states collapse into one absorbing state.
  bool wrapped = true;
  bool case_fold = false;
  // Leading literal word of the pattern, lowercased; set when usable as an
  // index lookup key.
  std::optional<std::string> anchor;
  // Longest possible match in characters; unset for patterns with `*`.
  std::optional<std::size_t> max_match_length;

  std::size_t state_count() const { return next.size(); }
  DfaState step(DfaState state, unsigned char c) const { return next[state][c]; }
  DfaState run(DfaState state, std::string_view text) const;
  bool accepts(std::string_view text) const { return accepting[run(start, text)]; }
};

class PatternSyntaxError : public std::runtime_error {
 public:
  PatternSyntaxError(std::size_t position, const std::string& what);
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

struct CompileOptions {
  bool case_fold = false;
  bool whole_string = false;
};

// Anchors shorter than this are not used for index lookups.
inline constexpr std::size_t kMinAnchorLength = 3;

// Syntax tree -> Thompson NFA -> subset construction -> minimized total DFA.
QueryDfa compile_pattern(std::string_view pattern, const CompileOptions& options = {});

// Pr[q]: total probability of the strings the SFA emits that the DFA accepts.
// One forward pass in topological order carries a mass per DFA state at every
// node; multi-character labels advance the DFA one character at a time.
double eval_sfa(const QueryDfa& dfa, const Sfa& sfa);

// Sum of probabilities of the accepted strings.
double eval_strings(const QueryDfa& dfa, const RankedStrings& ranked);

struct LineMatch {
  std::uint32_t line = 0;
  double probability = 0.0;
  std::size_t rank = 0;  // 1-based

  friend bool operator==(const LineMatch&, const LineMatch&) = default;
};

// The num_ans most probable lines with probability > 0, ordered by
// probability descending then line id. probabilities[i] belongs to line i.
std::vector<LineMatch> rank_probabilities(std::span<const double> probabilities,
                                          std::size_t num_ans);

// Tab-separated `line<TAB>probability` rows, 9 significant digits.
std::string format_matches_tsv(std::span<const LineMatch> matches);
// Human-readable table, probabilities rounded to 4 decimals.
std::string format_matches_pretty(std::span<const LineMatch> matches);

}  // namespace staccato
