// Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any
// failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "staccato/approx.hpp"
#include "staccato/corpus_query.hpp"
#include "staccato/dict_index.hpp"
#include "staccato/inference.hpp"
#include "staccato/query.hpp"
#include "staccato/store.hpp"
#include "staccato/synth.hpp"
#include "staccato/tuner.hpp"
#include "support/fixtures.hpp"
#include "support/index_oracle.hpp"
#include "support/random_sfa.hpp"
#include "support/regex_oracle.hpp"

using namespace staccato;
namespace st = staccato::testing;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  std::string first_failure;

  // Records a failed check; the first one is reported.
  void expect(bool ok, const std::string& what) {
    if (!ok && pass) first_failure = what;
    pass = pass && ok;
  }
};

std::set<std::string> keys(const std::map<std::string, double>& m) {
  std::set<std::string> out;
  for (const auto& [k, v] : m) out.insert(k);
  return out;
}

std::vector<NodeId> ids(const Sfa& sfa, std::initializer_list<std::int64_t> names) {
  std::vector<NodeId> out;
  for (auto n : names) out.push_back(*sfa.find_node(n));
  return out;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

// ---------------------------------------------------------------------------

void ford_example(Outcome& o) {
  auto t0 = Clock::now();
  Sfa sfa = st::load_fixture("ford.sfa");
  auto best = top_k(sfa, 1);
  double ford = eval_sfa(compile_pattern("Ford"), sfa);
  double secs = seconds_since(t0);
  o.expect(best.entries.size() == 1 && best.entries[0].text == "F0 rd", "top-1 string is not 'F0 rd'");
  o.expect(!best.entries.empty() && std::abs(best.entries[0].prob - 0.21) <= 0.005,
           "top-1 probability outside 0.21 +- 0.005");
  o.expect(std::abs(ford - 0.12) <= 0.005, "Pr[Ford] outside 0.12 +- 0.005");
  o.expect(secs < 1.0, "slower than 1 s");
  o.detail << "top-1 '" << (best.entries.empty() ? "" : best.entries[0].text) << "' p="
           << fmt("%.5f", best.entries.empty() ? 0.0 : best.entries[0].prob)
           << ", Pr[%Ford%]=" << fmt("%.5f", ford) << ", " << fmt("%.4f", secs) << " s";
}

void merge_example(Outcome& o) {
  Sfa branchy = st::load_fixture("aef_abcd.sfa");
  const std::set<std::string> both{"aef", "abcd"};
  o.expect(keys(st::emitted(branchy)) == both, "fixture does not emit {aef, abcd}");

  Sfa good = collapse(branchy, ids(branchy, {1, 2, 3}), 10);
  auto e13 = good.find_edge(*good.find_node(1), *good.find_node(3));
  o.expect(e13 && good.edge(*e13).labels.size() == 1 && good.edge(*e13).labels[0].text == "bc",
           "collapse({1,2,3}) lacks edge (1,3) emitting bc");
  o.expect(keys(st::emitted(good)) == both, "collapse({1,2,3}) changes the emitted set");

  auto region = find_min_sfa(branchy, ids(branchy, {1, 2, 4}));
  bool has5 = std::find(region.begin(), region.end(), *branchy.find_node(5)) != region.end();
  o.expect(has5, "find_min_sfa({1,2,4}) does not reach node 5");
  Sfa fixed = collapse(branchy, region, 10);
  o.expect(fixed.find_edge(*fixed.find_node(1), *fixed.find_node(5)).has_value(),
           "no collapsed edge (1,5)");
  o.expect(keys(st::emitted(fixed)) == both, "collapsed SFA does not emit exactly {aef, abcd}");
  o.detail << "collapse({1,2,3}) -> (1,3):\"bc\"; find_min_sfa({1,2,4}) has " << region.size()
           << " nodes incl. 5; emitted sets {aef, abcd}";
}

void oracle_suite(Outcome& o) {
  auto t0 = Clock::now();
  std::mt19937_64 rng(20240301);
  st::RandomSfaOptions opt;
  opt.max_nodes = 12;
  opt.alphabet = 4;
  opt.max_paths = 500;
  std::size_t sfas = 0, patterns = 0;
  double worst = 0.0;
  for (int i = 0; i < 500; ++i) {
    opt.alphabet = 2 + rng() % 3;
    Sfa sfa = st::random_sfa(rng, opt);
    ++sfas;
    auto all = enumerate_all(sfa, 100000);
    for (std::size_t k = 1; k <= 5; ++k) {
      auto r = top_k(sfa, k);
      bool ok = r.entries.size() == std::min(k, all.size());
      for (std::size_t j = 0; ok && j < r.entries.size(); ++j) {
        ok = r.entries[j].text == all[j].text && std::abs(r.entries[j].prob - all[j].prob) <= 1e-9;
      }
      o.expect(ok, "top_k differs from the enumeration prefix");
    }
    o.expect(std::abs(total_mass(sfa) - 1.0) <= 1e-9, "total_mass of a full SFA is not 1");
    for (int j = 0; j < 10; ++j) {
      auto p = st::random_pattern(rng, opt.alphabet);
      std::regex re(st::to_ecmascript(p), std::regex::ECMAScript);
      double brute = 0.0;
      for (const auto& path : all) {
        if (std::regex_search(path.text, re)) brute += path.prob;
      }
      double got = eval_sfa(compile_pattern(p), sfa);
      worst = std::max(worst, std::abs(got - brute));
      o.expect(std::abs(got - brute) <= 1e-9, "eval_sfa differs from brute force for " + p);
      ++patterns;
    }
  }
  double secs = seconds_since(t0);
  o.expect(secs < 60.0, "slower than 60 s");
  o.detail << sfas << " SFAs, " << patterns << " patterns, max |eval - brute| = "
           << fmt("%.2e", worst) << ", " << fmt("%.1f", secs) << " s";
}

void extremes(Outcome& o) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 100; ++i) {
    st::RandomSfaOptions opt;
    opt.alphabet = 2 + rng() % 3;
    Sfa sfa = st::random_sfa(rng, opt);
    std::size_t k = 1 + rng() % 5;
    std::set<std::string> best;
    for (const auto& e : top_k(sfa, k).entries) best.insert(e.text);
    o.expect(keys(st::emitted(greedy_approximate(sfa, 1, k).graph)) == best,
             "m = 1 does not emit the top-k set");
    o.expect(keys(st::emitted(greedy_approximate(sfa, sfa.edge_count(), opt.alphabet).graph)) ==
                 keys(st::emitted(sfa)),
             "m = |E|, k = |alphabet| loses strings");
  }
  o.detail << "100 SFAs: m=1 equals top_k; m=|E|, k=|alphabet| equals the full set";
}

void lineage(Outcome& o) {
  std::mt19937_64 rng(5);
  double kept_fraction = 0.0;
  for (int i = 0; i < 200; ++i) {
    Sfa sfa = st::random_sfa(rng);
    std::size_t m = 1 + rng() % sfa.edge_count();
    std::size_t k = 1 + rng() % 5;
    auto approx = greedy_approximate(sfa, m, k);
    auto full = st::emitted(sfa);
    double sum = 0.0;
    for (const auto& [s, p] : st::emitted(approx.graph)) {
      auto it = full.find(s);
      o.expect(it != full.end(), "approximation emits a new string");
      o.expect(it != full.end() && std::abs(it->second - p) <= 1e-9, "probability changed");
      sum += p;
    }
    o.expect(std::abs(total_mass(approx.graph) - sum) <= 1e-9, "total_mass differs from kept sum");
    kept_fraction += sum;
  }
  o.detail << "200 (sfa, m, k) triples, mean retained mass " << fmt("%.3f", kept_fraction / 200);
}

// Two-entry block: per-block top-1 keeps segments that never meet.
Sfa crafted_instance() {
  return parse_sfa(
      "sfa v1\nstart 0\nfinal 4\n"
      "arc 0 1 \"a\" 0.9\narc 0 2 \"b\" 0.1\n"
      "arc 1 3 \"c\" 0.5\narc 1 3 \"e\" 0.5\narc 2 3 \"d\" 1\n"
      "arc 3 4 \"z\" 1\n");
}

void per_block_optimality(Outcome& o) {
  std::mt19937_64 rng(6);
  st::RandomSfaOptions opt;
  opt.max_nodes = 9;
  opt.alphabet = 3;
  opt.max_paths = 300;
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    Sfa base = st::random_sfa(rng, opt);
    // A generalized SFA: chunk edges carrying multi-character strings.
    Sfa g = greedy_approximate(base, 1 + rng() % base.edge_count(), 1 + rng() % 4).graph;
    ChunkPartition p;
    for (EdgeId e = 0; e < g.edge_count(); ++e) p.blocks.push_back({e});
    double brute = best_assignment_bruteforce(g, p, 2, 1u << 24).mass;
    double top = per_block_top_k_mass(g, p, 2, 1u << 24);
    worst = std::max(worst, std::abs(brute - top));
    o.expect(std::abs(brute - top) <= 1e-12, "per-edge optimum differs from per-edge top-k");
  }
  Sfa crafted = crafted_instance();
  ChunkPartition blocks;
  blocks.blocks = {{*crafted.find_edge(0, 1), *crafted.find_edge(0, 2)},
                   {*crafted.find_edge(1, 3), *crafted.find_edge(2, 3)},
                   {*crafted.find_edge(3, 4)}};
  double opt_mass = best_assignment_bruteforce(crafted, blocks, 1, 1u << 20).mass;
  double greedy_mass = per_block_top_k_mass(crafted, blocks, 1, 1u << 20);
  o.expect(opt_mass - greedy_mass > 1e-3, "crafted instance shows no gap");
  o.detail << "100 generalized SFAs, max gap " << fmt("%.1e", worst) << "; crafted: optimum "
           << fmt("%.3f", opt_mass) << " vs per-block top-k " << fmt("%.3f", greedy_mass);
}

void kl_identity(Outcome& o) {
  std::mt19937_64 rng(7);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    Sfa sfa = st::random_sfa(rng);
    auto approx = greedy_approximate(sfa, 1 + rng() % sfa.edge_count(), 1 + rng() % 3);
    auto full = st::emitted(sfa);
    auto kept = st::emitted(approx.graph);
    double z = 0.0;
    for (const auto& [s, p] : kept) z += p;
    double direct = 0.0;
    for (const auto& [s, p] : kept) {
      double cond = p / z;
      direct += cond * std::log(cond / full.at(s));
    }
    double identity = kl_of_retention(total_mass(approx.graph));
    worst = std::max(worst, std::abs(identity - direct));
    o.expect(std::abs(identity - direct) <= 1e-12, "-ln Z differs from the direct KL");
  }
  o.detail << "50 approximations, max |-ln Z - KL| = " << fmt("%.1e", worst);
}

void index_correctness(Outcome& o) {
  std::mt19937_64 rng(8);
  std::size_t corpora = 0, straddling = 0, postings = 0;
  for (int c = 0; c < 60; ++c) {
    std::vector<std::string> dict;
    for (int t = 0; t < 6; ++t) {
      std::string term;
      std::size_t len = 2 + rng() % 3;
      for (std::size_t j = 0; j < len; ++j) term += static_cast<char>('a' + rng() % 3);
      dict.push_back(term);
    }
    auto trie = TrieDfa::build(dict);
    std::vector<std::string> terms;
    for (std::size_t t = 0; t < trie.term_count(); ++t) terms.push_back(trie.term(t));

    std::size_t lines = 1 + rng() % 10;
    std::vector<Sfa> graphs;
    st::PostingSets expected;
    for (std::size_t l = 0; l < lines; ++l) {
      st::RandomSfaOptions opt;
      opt.alphabet = 3;
      opt.max_paths = 30;
      Sfa sfa = st::random_sfa(rng, opt);
      graphs.push_back(greedy_approximate(sfa, 1 + rng() % sfa.edge_count(), 1 + rng() % 4).graph);
      auto scan = st::scan_postings(graphs.back(), static_cast<std::uint32_t>(l), terms);
      straddling += scan.straddling;
      for (auto& [t, set] : scan.postings) expected[t].insert(set.begin(), set.end());
    }
    auto got = st::to_sets(build_index(graphs, trie));
    o.expect(got == expected, "postings differ from the brute-force scan");
    for (const auto& [t, set] : got) postings += set.size();
    ++corpora;
  }
  o.expect(straddling >= 10, "fewer than 10 straddling occurrences");
  o.detail << corpora << " corpora, " << postings << " postings, " << straddling
           << " straddling occurrences";
}

void indexed_vs_scan(Outcome& o) {
  std::size_t bounded = 0, star = 0, lines_total = 0, lines_evaluated = 0;
  for (std::uint64_t seed : {21, 22}) {
    SynthOptions so;
    so.lines = 60;
    so.seed = seed;
    auto synth = generate_corpus(so);
    auto trie = TrieDfa::build(synth.dictionary);
    std::vector<Sfa> full, chunked;
    for (const auto& s : synth.sources) {
      full.push_back(parse_sfa(s.text));
      chunked.push_back(greedy_approximate(full.back(), 10, 25).graph);
    }
    for (const auto* graphs : {&full, &chunked}) {
      auto index = build_index(*graphs, trie);
      for (const char* p : {"Ford", "claim", "Public Law (8|9)\\d", "U.S.C. 2\\d\\d\\d"}) {
        auto dfa = compile_pattern(p);
        auto scan = rank_lines(*graphs, dfa, 100);
        auto fast = indexed_query(dfa, index, trie, *graphs, 100);
        bool same = fast.used_index && fast.matches.size() == scan.size();
        for (std::size_t i = 0; same && i < scan.size(); ++i) {
          same = fast.matches[i].line == scan[i].line &&
                 std::abs(fast.matches[i].probability - scan[i].probability) <= 1e-9;
        }
        o.expect(same, std::string("indexed result differs for ") + p);
        ++bounded;
        lines_total += graphs->size();
        lines_evaluated += fast.lines_evaluated;
      }
      for (const char* p : {"claim\\x*co", "Public\\x*Law", "Ford\\x*(a|e)"}) {
        auto dfa = compile_pattern(p);
        auto scan = rank_lines(*graphs, dfa, 1000);
        std::map<std::uint32_t, double> by_line;
        for (const auto& m : scan) by_line[m.line] = m.probability;
        auto fast = indexed_query(dfa, index, trie, *graphs, 1000);
        for (const auto& m : fast.matches) {
          auto it = by_line.find(m.line);
          o.expect(it != by_line.end() && m.probability <= it->second + 1e-9,
                   std::string("star pattern result not within file scan for ") + p);
        }
        ++star;
      }
    }
  }
  o.detail << bounded << " bounded queries identical, " << star << " star queries contained; "
           << lines_evaluated << "/" << lines_total << " lines evaluated";
}

// Shared by the last two criteria.
struct SyntheticSetup {
  st::TempDir dir{"acceptance"};
  SynthCorpus synth;
  std::optional<Corpus> corpus;
};

SyntheticSetup& synthetic() {
  static std::unique_ptr<SyntheticSetup> s;
  if (!s) {
    s = std::make_unique<SyntheticSetup>();
    SynthOptions o;
    o.lines = 200;
    o.noise = 0.15;
    o.seed = 7;
    s->synth = generate_corpus(o);
    s->corpus = write_synthetic(s->dir.path(), s->synth);
  }
  return *s;
}

void tradeoff(Outcome& o) {
  auto& s = synthetic();
  Corpus& corpus = *s.corpus;
  const Mode map = Mode::map(), mid = Mode::staccato(10, 25), full = Mode::fullsfa();
  corpus.materialize(map);
  corpus.materialize(mid);
  std::map<Mode, EvalReport> best;
  // Best of three wall-clock runs per mode.
  for (int rep = 0; rep < 3; ++rep) {
    for (const auto& mode : {map, mid, full}) {
      auto r = evaluate_mode(corpus, mode, s.synth.queries, s.synth.truth);
      if (!best.count(mode) || r.seconds < best[mode].seconds) best[mode] = r;
    }
  }
  double r_map = best[map].mean_recall, r_mid = best[mid].mean_recall, r_full = best[full].mean_recall;
  double t_map = best[map].seconds, t_mid = best[mid].seconds, t_full = best[full].seconds;
  o.expect(s.synth.queries.size() >= 5, "fewer than 5 planted queries");
  o.expect(r_map < r_mid, "recall(map) >= recall(10,25)");
  o.expect(r_mid < r_full, "recall(10,25) >= recall(fullsfa)");
  o.expect(r_full == 1.0, "recall(fullsfa) != 1");
  o.expect(t_map < t_mid, "wall-clock(map) >= wall-clock(staccato)");
  o.expect(t_mid < t_full, "wall-clock(staccato) >= wall-clock(fullsfa)");
  o.detail << "recall map " << fmt("%.3f", r_map) << " < (10,25) " << fmt("%.3f", r_mid)
           << " < fullsfa " << fmt("%.3f", r_full) << "; seconds map " << fmt("%.4f", t_map)
           << " < staccato " << fmt("%.4f", t_mid) << " < fullsfa " << fmt("%.4f", t_full);
}

void tuner(Outcome& o) {
  std::vector<SizeSample> planted;
  for (std::size_t m : {1, 7, 35, 45}) {
    for (std::size_t k : {1, 45, 80}) planted.push_back({m, k, 20.0 * m * k + 58.0 * k + 45540.0});
  }
  auto model = fit_size_model(planted);
  o.expect(std::abs(model.a - 20) <= 1e-6 && std::abs(model.b - 58) <= 1e-6,
           "planted coefficients not recovered");

  auto& s = synthetic();
  Corpus& corpus = *s.corpus;
  TuneOptions opt;
  opt.recall_min = 0.9;
  opt.size_fraction = 0.10;
  auto r = tune(corpus, s.synth.queries, s.synth.truth, opt);
  o.expect(r.feasible, "tune reported infeasible");
  o.expect(r.probes.size() <= max_probes(r.max_edges), "too many probes");
  std::uint64_t bytes = 0;
  double recall = 0.0;
  if (r.feasible) {
    const Mode chosen = Mode::staccato(r.m, r.k);
    corpus.drop_mode(chosen);
    corpus.materialize(chosen);
    bytes = corpus.mode_bytes(chosen);
    recall = evaluate_mode(corpus, chosen, s.synth.queries, s.synth.truth).mean_recall;
    o.expect(recall >= 0.9, "re-materialized recall below 0.9");
    o.expect(bytes <= r.budget_bytes, "re-materialized size over budget");
  }
  o.detail << "(m,k)=(" << r.m << "," << r.k << "), recall " << fmt("%.3f", recall) << ", "
           << bytes << "/" << r.budget_bytes << " bytes, " << r.probes.size() << " probes (bound "
           << max_probes(r.max_edges) << "); planted fit a=" << fmt("%.6f", model.a)
           << " b=" << fmt("%.6f", model.b);
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria = {
      {"Ford worked example", ford_example},
      {"merge worked example", merge_example},
      {"oracle equivalence suite", oracle_suite},
      {"approximation extremes", extremes},
      {"sufficient lineage", lineage},
      {"per-block optimality and the crafted counterexample", per_block_optimality},
      {"KL identity", kl_identity},
      {"index correctness", index_correctness},
      {"indexed query vs file scan", indexed_vs_scan},
      {"recall and runtime tradeoff", tradeoff},
      {"tuner closed loop", tuner},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    auto t0 = Clock::now();
    try {
      criteria[i].second(o);
    } catch (const std::exception& e) {
      o.expect(false, std::string("exception: ") + e.what());
    }
    std::string detail = o.detail.str();
    if (!o.pass) detail = o.first_failure + (detail.empty() ? "" : "; " + detail);
    std::printf("%s %2zu %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", i + 1,
                criteria[i].first.c_str(), detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
    if (!o.pass) ++failures;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
