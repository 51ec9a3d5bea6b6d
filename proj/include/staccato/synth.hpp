#pragma once

// Seeded synthetic OCR corpora with planted queries.
//
// Clean text lines are turned into chain automata with one edge per
// character. Every edge carries `alternatives` candidate characters. Most
// positions are read cleanly (the true character dominates); a `noise`
// fraction are corrupted, where visually similar characters outrank the true
// one, and a few of those are damaged so badly that the true character
// becomes a long shot. Occasionally two characters are also read as one (a merge edge
// skipping a node).

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "staccato/sfa.hpp"
#include "staccato/store.hpp"

namespace staccato {

struct SynthOptions {
  std::size_t lines = 200;
  double noise = 0.15;
  std::uint64_t seed = 1;
  std::size_t alternatives = 30;
  double merge_rate = 0.05;
  // Share of corrupted positions whose glyph is damaged badly enough that
  // the true character falls behind part of the tail.
  double severe_rate = 0.06;
  std::size_t min_length = 40;
  std::size_t max_length = 60;
  // Chance that a line carries a given planted query.
  double plant_rate = 0.12;
};

struct SynthCorpus {
  std::vector<std::string> clean;       // ground-truth text per line
  std::vector<IngestSource> sources;    // sfa v1 text per line
  std::vector<QuerySpec> queries;
  Truth truth;                          // lines whose clean text matches
  std::vector<std::string> dictionary;  // lowercase index terms
};

// The queries planted by generate_corpus.
std::vector<QuerySpec> planted_queries();

// Chain automaton for one clean line.
Sfa noisy_sfa(const std::string& clean, const SynthOptions& options, std::uint64_t line_seed);

SynthCorpus generate_corpus(const SynthOptions& options);

// Ingests the corpus into dir and stores its queries and truth; the
// dictionary goes to dir/dictionary.txt.
Corpus write_synthetic(const std::filesystem::path& dir, const SynthCorpus& corpus);

}  // namespace staccato
