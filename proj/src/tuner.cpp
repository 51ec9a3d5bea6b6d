#include "staccato/tuner.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "staccato/corpus_query.hpp"

namespace staccato {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

// ---------------------------------------------------------------------------
// Size model

double SizeModel::predict(std::size_t m, std::size_t k) const {
  return a * static_cast<double>(m) * static_cast<double>(k) + b * static_cast<double>(k) + c;
}

std::size_t SizeModel::k_for(std::size_t m, double budget_bytes) const {
  double slope = a * static_cast<double>(m) + b;
  double room = budget_bytes - c;
  if (slope <= 0.0) return room >= slope ? 1 : 0;
  double k = std::floor(room / slope);
  if (k < 1.0) return 0;
  return static_cast<std::size_t>(std::min(k, 1e9));
}

SizeModel fit_size_model(std::span<const SizeSample> samples) {
  if (samples.size() < 3) throw std::invalid_argument("size model needs at least 3 samples");
  const auto n = static_cast<Eigen::Index>(samples.size());
  Eigen::MatrixXd x(n, 3);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& s = samples[static_cast<std::size_t>(i)];
    x(i, 0) = static_cast<double>(s.m) * static_cast<double>(s.k);
    x(i, 1) = static_cast<double>(s.k);
    x(i, 2) = 1.0;
    y(i) = s.bytes;
  }

  SizeModel model;
  double mean = y.mean();
  double total = (y.array() - mean).square().sum();
  if (total == 0.0) {
    model.c = mean;
    model.r_squared = 1.0;
    model.degenerate = true;
    return model;
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  Eigen::Vector3d beta = qr.solve(y);
  model.a = beta(0);
  model.b = beta(1);
  model.c = beta(2);
  model.degenerate = qr.rank() < 3;
  double residual = (x * beta - y).squaredNorm();
  model.r_squared = 1.0 - residual / total;
  return model;
}

// ---------------------------------------------------------------------------
// Evaluation

QueryScore score_query(std::string id, std::span<const LineMatch> returned,
                       const std::set<std::uint32_t>& relevant) {
  QueryScore s;
  s.id = std::move(id);
  std::set<std::uint32_t> got;
  for (const auto& m : returned) got.insert(m.line);
  s.returned.assign(got.begin(), got.end());
  std::size_t hit = 0;
  for (auto line : got) hit += relevant.count(line);
  s.precision = got.empty() ? 1.0 : static_cast<double>(hit) / static_cast<double>(got.size());
  s.recall = relevant.empty() ? 1.0 : static_cast<double>(hit) / static_cast<double>(relevant.size());
  s.f1 = s.precision + s.recall > 0.0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
  return s;
}

namespace {

void aggregate(EvalReport& report) {
  if (report.queries.empty()) return;
  for (const auto& q : report.queries) {
    report.mean_precision += q.precision;
    report.mean_recall += q.recall;
    report.mean_f1 += q.f1;
  }
  auto n = static_cast<double>(report.queries.size());
  report.mean_precision /= n;
  report.mean_recall /= n;
  report.mean_f1 /= n;
}

const std::set<std::uint32_t>& relevant_for(const Truth& truth, const std::string& id) {
  auto it = truth.find(id);
  if (it == truth.end()) throw std::invalid_argument("no truth for query '" + id + "'");
  return it->second;
}

}  // namespace

EvalReport evaluate(const std::map<std::string, std::vector<LineMatch>>& results,
                    const Truth& truth) {
  EvalReport report;
  for (const auto& [id, matches] : results) {
    report.queries.push_back(score_query(id, matches, relevant_for(truth, id)));
  }
  aggregate(report);
  return report;
}

EvalReport evaluate_mode(const Corpus& corpus, const Mode& mode,
                         const std::vector<QuerySpec>& queries, const Truth& truth,
                         std::size_t num_ans, std::size_t workers) {
  for (const auto& q : queries) relevant_for(truth, q.id);
  EvalReport report;
  auto t0 = Clock::now();
  auto graphs = corpus.load_graphs(mode, workers);
  for (const auto& q : queries) {
    auto tq = Clock::now();
    auto dfa = compile_pattern(q.pattern);
    auto matches = rank_lines(graphs, dfa, num_ans, workers);
    auto s = score_query(q.id, matches, truth.at(q.id));
    s.seconds = seconds_since(tq);
    report.queries.push_back(std::move(s));
  }
  report.seconds = seconds_since(t0);
  aggregate(report);
  return report;
}

// ---------------------------------------------------------------------------
// Tuning

std::size_t max_probes(std::size_t max_edges) {
  std::size_t bits = 0;
  while ((std::size_t{1} << bits) < std::max<std::size_t>(max_edges, 1)) ++bits;
  return bits + 2;
}

TuneResult tune(Corpus& corpus, const std::vector<QuerySpec>& queries, const Truth& truth,
                const TuneOptions& options) {
  for (const auto& q : queries) {
    if (!truth.count(q.id)) throw MissingArtifact("no truth for query '" + q.id + "'");
  }
  TuneResult result;
  const std::size_t n = corpus.line_count();
  for (std::uint32_t i = 0; i < n; ++i) {
    result.max_edges = std::max(result.max_edges, corpus.load_fullsfa(i).edge_count());
  }
  result.fullsfa_bytes = corpus.mode_bytes(Mode::fullsfa());
  result.budget_bytes = static_cast<std::uint64_t>(
      std::floor(options.size_fraction * static_cast<double>(result.fullsfa_bytes)));
  if (n == 0 || result.max_edges == 0) return result;

  std::set<Mode> built;
  auto build = [&](const Mode& mode) {
    if (!corpus.has_mode(mode)) {
      corpus.materialize(mode, options.workers);
      built.insert(mode);
    }
    return corpus.mode_bytes(mode);
  };

  // Calibration: two chunk counts by two string counts.
  const std::size_t m_hi = std::clamp<std::size_t>(result.max_edges / 4, 2, std::max<std::size_t>(result.max_edges, 2));
  for (std::size_t m : {std::size_t{1}, m_hi}) {
    for (std::size_t k : {std::size_t{2}, std::size_t{16}}) {
      auto bytes = build(Mode::staccato(m, k));
      result.calibration.push_back(SizeSample{m, k, static_cast<double>(bytes)});
    }
  }
  result.model = fit_size_model(result.calibration);
  const double budget = static_cast<double>(result.budget_bytes);

  std::size_t lo = 1, hi = result.max_edges;
  std::optional<Probe> best;
  while (lo <= hi && result.probes.size() < max_probes(result.max_edges)) {
    std::size_t mid = lo + (hi - lo) / 2;
    Probe probe;
    probe.m = mid;
    probe.k = result.model.k_for(mid, budget);
    if (probe.k == 0) {
      result.probes.push_back(probe);
      hi = mid - 1;
      continue;
    }
    probe.bytes = build(Mode::staccato(mid, probe.k));
    // The model undershot: shrink the k-dependent part of the size in
    // proportion and measure again.
    for (int retry = 0; retry < 4 && probe.bytes > result.budget_bytes && probe.k > 1; ++retry) {
      const double fixed = std::clamp(result.model.c, 0.0, budget);
      const double scale = (budget - fixed) / std::max(1.0, static_cast<double>(probe.bytes) - fixed);
      auto k = static_cast<std::size_t>(std::floor(static_cast<double>(probe.k) * scale));
      probe.k = std::max<std::size_t>(1, std::min(k, probe.k - 1));
      probe.bytes = build(Mode::staccato(mid, probe.k));
    }
    if (probe.bytes <= result.budget_bytes) {
      probe.recall = evaluate_mode(corpus, Mode::staccato(mid, probe.k), queries, truth,
                                   options.num_ans, options.workers)
                         .mean_recall;
      probe.accepted = probe.recall >= options.recall_min;
    }
    result.probes.push_back(probe);
    if (probe.accepted) {
      best = probe;
      if (mid == 1) break;
      hi = mid - 1;
    } else {
      lo = mid + 1;
    }
  }

  if (best) {
    result.feasible = true;
    result.m = best->m;
    result.k = best->k;
    result.bytes = best->bytes;
    result.recall = best->recall;
  }
  if (!options.keep_probes) {
    for (const auto& mode : built) {
      if (result.feasible && mode == Mode::staccato(result.m, result.k)) continue;
      corpus.drop_mode(mode);
    }
  }
  return result;
}

std::string format_tune_report(const TuneResult& r) {
  std::string out = "# tune v1\n";
  char buf[256];
  std::snprintf(buf, sizeof(buf), "model\t%.9g\t%.9g\t%.9g\t%.6f%s\n", r.model.a, r.model.b,
                r.model.c, r.model.r_squared, r.model.degenerate ? "\tdegenerate" : "");
  out += buf;
  out += "# probe\tm\tk\tbytes\trecall\taccepted\n";
  for (const auto& p : r.probes) {
    std::snprintf(buf, sizeof(buf), "probe\t%zu\t%zu\t%llu\t%.6f\t%s\n", p.m, p.k,
                  static_cast<unsigned long long>(p.bytes), p.recall, p.accepted ? "yes" : "no");
    out += buf;
  }
  if (r.feasible) {
    std::snprintf(buf, sizeof(buf), "result\tfeasible\t%zu\t%zu\t%llu\t%.6f\t%llu\n", r.m, r.k,
                  static_cast<unsigned long long>(r.bytes), r.recall,
                  static_cast<unsigned long long>(r.budget_bytes));
  } else {
    std::snprintf(buf, sizeof(buf), "result\tinfeasible\t\t\t\t\t%llu\n",
                  static_cast<unsigned long long>(r.budget_bytes));
  }
  out += buf;
  return out;
}

}  // namespace staccato
