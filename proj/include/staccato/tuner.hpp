#pragma once

// Evaluation harness and automatic (m, k) selection.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "staccato/query.hpp"
#include "staccato/store.hpp"

namespace staccato {

struct SizeSample {
  std::size_t m = 0;
  std::size_t k = 0;
  double bytes = 0.0;
};

// size(m, k) ~ a*m*k + b*k + c bytes.
struct SizeModel {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double r_squared = 0.0;
  // Set when the samples cannot separate the coefficients or carry no
  // variation at all.
  bool degenerate = false;

  double predict(std::size_t m, std::size_t k) const;
  // Largest k whose predicted size stays within budget at this m; 0 when
  // even k = 1 does not fit.
  std::size_t k_for(std::size_t m, double budget_bytes) const;
};

// Least squares over the samples. Throws std::invalid_argument with fewer
// than three samples.
SizeModel fit_size_model(std::span<const SizeSample> samples);

struct QueryScore {
  std::string id;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::vector<std::uint32_t> returned;
  double seconds = 0.0;
};

struct EvalReport {
  std::vector<QueryScore> queries;
  double mean_precision = 0.0;
  double mean_recall = 0.0;
  double mean_f1 = 0.0;
  double seconds = 0.0;  // loading plus every query
};

// Precision and recall over line ids. An empty answer has precision 1; an
// empty relevant set has recall 1.
QueryScore score_query(std::string id, std::span<const LineMatch> returned,
                       const std::set<std::uint32_t>& relevant);

// Throws std::invalid_argument when a result has no truth entry.
EvalReport evaluate(const std::map<std::string, std::vector<LineMatch>>& results,
                    const Truth& truth);

// Loads the mode and scores every query under the top-num_ans cutoff.
// Wall-clock covers loading and querying.
EvalReport evaluate_mode(const Corpus& corpus, const Mode& mode,
                         const std::vector<QuerySpec>& queries, const Truth& truth,
                         std::size_t num_ans = 100, std::size_t workers = 1);

struct TuneOptions {
  double recall_min = 0.9;
  double size_fraction = 0.1;  // budget as a fraction of the full automata's bytes
  std::size_t num_ans = 100;
  std::size_t workers = 1;
  // Keep the artifacts of every probe instead of only the chosen one.
  bool keep_probes = false;
};

struct Probe {
  std::size_t m = 0;
  std::size_t k = 0;  // 0: no k fits the budget at this m
  std::uint64_t bytes = 0;
  double recall = 0.0;
  bool accepted = false;
};

struct TuneResult {
  bool feasible = false;
  std::size_t m = 0;
  std::size_t k = 0;
  std::uint64_t bytes = 0;
  double recall = 0.0;
  std::uint64_t budget_bytes = 0;
  std::uint64_t fullsfa_bytes = 0;
  std::size_t max_edges = 0;
  SizeModel model;
  std::vector<SizeSample> calibration;
  std::vector<Probe> probes;
};

// Upper bound on binary-search probes over m in [1, max_edges].
std::size_t max_probes(std::size_t max_edges);

// Fits the size model on a few calibration points, then binary-searches the
// smallest m whose budget-derived k reaches recall_min, materializing and
// evaluating every probe. Recall need not be monotone in m, so the answer is
// verified, not guaranteed optimal. Throws MissingArtifact without truth.
TuneResult tune(Corpus& corpus, const std::vector<QuerySpec>& queries, const Truth& truth,
                const TuneOptions& options);

// Probe trace as TSV: header, one row per probe, then the outcome.
std::string format_tune_report(const TuneResult& result);

}  // namespace staccato
