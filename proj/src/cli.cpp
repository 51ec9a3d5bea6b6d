#include "staccato/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <optional>

#include "staccato/corpus_query.hpp"
#include "staccato/dict_index.hpp"
#include "staccato/store.hpp"
#include "staccato/synth.hpp"
#include "staccato/tuner.hpp"

namespace staccato::cli {

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Config {
  std::string corpus = ".";
  std::string format = "tsv";
  std::size_t workers = 1;
  std::string mode = "fullsfa";
  std::optional<std::size_t> m;
  std::optional<std::size_t> k;
  std::size_t num_ans = kDefaultNumAns;
  std::string dict;
  std::string pattern;
  bool indexed = false;
  bool case_fold = false;
  std::string queries;
  std::string truth;
  double recall = 0.9;
  double size_pct = 10.0;
  std::string ingest_dir;
  std::vector<std::string> files;
  SynthOptions synth;
};

bool pretty(const Config& c) { return c.format == "pretty"; }

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

Mode unique_mode(const Corpus& corpus, ModeKind kind, const char* name) {
  std::optional<Mode> found;
  for (const auto& m : corpus.manifest().modes) {
    if (m.kind != kind) continue;
    if (found) throw UsageError(std::string("several ") + name + " modes exist; pass --m/--k");
    found = m;
  }
  if (!found) throw StoreError(std::string("no ") + name + " mode has been materialized");
  return *found;
}

Mode resolve_mode(const Corpus& corpus, const Config& c) {
  if (c.mode == "fullsfa") return Mode::fullsfa();
  if (c.mode == "map") return Mode::map();
  if (c.mode == "kmap") return c.k ? Mode::kmap(*c.k) : unique_mode(corpus, ModeKind::kKmap, "kmap");
  if (c.mode == "staccato") {
    if (c.m && c.k) return Mode::staccato(*c.m, *c.k);
    if (c.m || c.k) throw UsageError("staccato mode needs both --m and --k");
    return unique_mode(corpus, ModeKind::kStaccato, "staccato");
  }
  try {
    return Mode::from_tag(c.mode);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

void require_mode(const Corpus& corpus, const Mode& mode) {
  if (!corpus.has_mode(mode)) throw StoreError("mode not materialized: " + mode.tag());
}

std::vector<QuerySpec> queries_for(const Corpus& corpus, const Config& c) {
  if (!c.queries.empty()) return parse_queries(read_file(c.queries));
  return corpus.load_queries();
}

Truth truth_for(const Corpus& corpus, const Config& c) {
  if (!c.truth.empty()) return parse_truth(read_file(c.truth));
  return corpus.load_truth();
}

// ---------------------------------------------------------------------------

int cmd_ingest(const Config& c, std::ostream& out) {
  std::vector<std::filesystem::path> files(c.files.begin(), c.files.end());
  auto corpus = Corpus::ingest_files(c.ingest_dir, files);
  out << "ingested " << corpus.line_count() << " lines into " << c.ingest_dir << "\n";
  return kOk;
}

int cmd_materialize(const Config& c, const Mode& mode, std::ostream& out) {
  auto corpus = Corpus::open(c.corpus);
  corpus.materialize(mode, c.workers);
  out << "materialized " << mode.tag() << " (" << corpus.mode_bytes(mode) << " bytes)\n";
  return kOk;
}

int cmd_index(const Config& c, std::ostream& out) {
  auto corpus = Corpus::open(c.corpus);
  Mode mode = (c.m || c.k) ? (c.m && c.k ? Mode::staccato(*c.m, *c.k)
                                         : throw UsageError("index needs both --m and --k"))
                           : resolve_mode(corpus, c);
  require_mode(corpus, mode);
  auto terms = parse_dictionary(read_file(c.dict));
  if (terms.empty()) throw StoreError("dictionary " + c.dict + " has no terms");
  auto trie = TrieDfa::build(terms);
  auto graphs = corpus.load_graphs(mode, c.workers);
  auto index = build_index(graphs, trie, c.workers);
  corpus.write_index(mode, index, terms);
  out << "indexed " << mode.tag() << ": " << index.terms().size() << " terms, "
      << index.posting_count() << " postings\n";
  return kOk;
}

int cmd_query(const Config& c, std::ostream& out, std::ostream& err) {
  auto corpus = Corpus::open(c.corpus);
  Mode mode = resolve_mode(corpus, c);
  require_mode(corpus, mode);
  CompileOptions opts;
  opts.case_fold = c.case_fold;
  auto dfa = compile_pattern(c.pattern, opts);
  auto graphs = corpus.load_graphs(mode, c.workers);
  std::vector<LineMatch> matches;
  if (c.indexed) {
    if (!corpus.has_index(mode)) throw StoreError("no index for mode " + mode.tag());
    auto index = corpus.load_index(mode);
    auto dict = corpus.load_dictionary(mode);
    auto trie = TrieDfa::build(dict);
    auto r = indexed_query(dfa, index, trie, graphs, c.num_ans, kDefaultProjectionSlack, c.workers);
    if (!r.warning.empty()) err << "warning: " << r.warning << "\n";
    matches = std::move(r.matches);
  } else {
    matches = rank_lines(graphs, dfa, c.num_ans, c.workers);
  }
  out << (pretty(c) ? format_matches_pretty(matches) : format_matches_tsv(matches));
  return kOk;
}

void print_report(const EvalReport& r, const Config& c, std::ostream& out) {
  if (pretty(c)) {
    char buf[160];
    out << "query             precision  recall   f1       returned  seconds\n";
    for (const auto& q : r.queries) {
      std::snprintf(buf, sizeof(buf), "%-16s  %9.4f  %6.4f  %6.4f  %8zu  %7.4f\n", q.id.c_str(),
                    q.precision, q.recall, q.f1, q.returned.size(), q.seconds);
      out << buf;
    }
    std::snprintf(buf, sizeof(buf), "%-16s  %9.4f  %6.4f  %6.4f  %8s  %7.4f\n", "mean",
                  r.mean_precision, r.mean_recall, r.mean_f1, "", r.seconds);
    out << buf;
    return;
  }
  for (const auto& q : r.queries) {
    out << q.id << '\t' << fmt("%.6f", q.precision) << '\t' << fmt("%.6f", q.recall) << '\t'
        << fmt("%.6f", q.f1) << '\t' << q.returned.size() << '\t' << fmt("%.6f", q.seconds)
        << '\n';
  }
  out << "mean\t" << fmt("%.6f", r.mean_precision) << '\t' << fmt("%.6f", r.mean_recall) << '\t'
      << fmt("%.6f", r.mean_f1) << "\t\t" << fmt("%.6f", r.seconds) << '\n';
}

int cmd_eval(const Config& c, std::ostream& out) {
  auto corpus = Corpus::open(c.corpus);
  Mode mode = resolve_mode(corpus, c);
  require_mode(corpus, mode);
  auto report = evaluate_mode(corpus, mode, queries_for(corpus, c), truth_for(corpus, c),
                              c.num_ans, c.workers);
  print_report(report, c, out);
  return kOk;
}

int cmd_tune(const Config& c, std::ostream& out) {
  auto corpus = Corpus::open(c.corpus);
  TuneOptions opts;
  opts.recall_min = c.recall;
  opts.size_fraction = c.size_pct / 100.0;
  opts.num_ans = c.num_ans;
  opts.workers = c.workers;
  auto result = tune(corpus, queries_for(corpus, c), truth_for(corpus, c), opts);
  out << format_tune_report(result);
  return result.feasible ? kOk : kInfeasible;
}

int cmd_bench(const Config& c, std::ostream& out) {
  auto corpus = Corpus::open(c.corpus);
  std::vector<QuerySpec> queries;
  std::optional<Truth> truth;
  if (!c.queries.empty() || corpus.manifest().artifacts.count("queries.tsv")) {
    queries = queries_for(corpus, c);
  }
  if (!c.truth.empty() || corpus.has_truth()) truth = truth_for(corpus, c);
  auto sizes = corpus.measure_size();
  if (pretty(c)) out << "mode                     bytes       predicted   seconds   recall\n";
  for (const auto& s : sizes.modes) {
    double seconds = 0.0;
    std::string recall = "-";
    if (truth) {
      auto r = evaluate_mode(corpus, s.mode, queries, *truth, c.num_ans, c.workers);
      seconds = r.seconds;
      recall = fmt("%.4f", r.mean_recall);
    } else {
      auto t0 = std::chrono::steady_clock::now();
      auto graphs = corpus.load_graphs(s.mode, c.workers);
      for (const auto& q : queries) rank_lines(graphs, compile_pattern(q.pattern), c.num_ans, c.workers);
      seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
    if (pretty(c)) {
      char buf[160];
      std::snprintf(buf, sizeof(buf), "%-22s  %10llu  %10llu  %8.4f  %s\n", s.mode.tag().c_str(),
                    static_cast<unsigned long long>(s.measured_bytes),
                    static_cast<unsigned long long>(s.predicted_bytes), seconds, recall.c_str());
      out << buf;
    } else {
      out << s.mode.tag() << '\t' << s.measured_bytes << '\t' << s.predicted_bytes << '\t'
          << fmt("%.6f", seconds) << '\t' << recall << '\n';
    }
  }
  return kOk;
}

int cmd_gen(const Config& c, std::ostream& out) {
  auto synth = generate_corpus(c.synth);
  auto corpus = write_synthetic(c.corpus, synth);
  out << "generated " << corpus.line_count() << " lines with " << synth.queries.size()
      << " planted queries in " << c.corpus << "\n";
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Config c;
  CLI::App app{"Probabilistic OCR corpora stored as stochastic automata", "staccato"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--corpus", c.corpus, "Corpus directory")->capture_default_str();
  app.add_option("--format", c.format, "Output format")
      ->check(CLI::IsMember({"tsv", "pretty"}))
      ->capture_default_str();
  app.add_option("--workers", c.workers, "Worker threads for per-line work")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  auto positive = CLI::PositiveNumber;
  auto add_mk = [&](CLI::App* sub, bool required) {
    auto* m = sub->add_option("--m", c.m, "Chunk budget m")->check(positive);
    auto* k = sub->add_option("--k", c.k, "Strings kept per chunk k")->check(positive);
    if (required) {
      m->required();
      k->required();
    }
  };
  auto add_mode = [&](CLI::App* sub) {
    sub->add_option("--mode", c.mode, "fullsfa, map, kmap, staccato or a mode tag")
        ->capture_default_str();
  };
  auto add_num_ans = [&](CLI::App* sub) {
    sub->add_option("--num-ans", c.num_ans, "Lines returned per query")
        ->check(positive)
        ->capture_default_str();
  };

  auto* ingest = app.add_subcommand("ingest", "Store sfa v1 files as a new corpus");
  ingest->add_option("dir", c.ingest_dir, "Corpus directory")->required();
  ingest->add_option("files", c.files, "SFA files, one line each")->required();

  auto* approximate = app.add_subcommand("approximate", "Materialize STACCATO(m, k)");
  add_mk(approximate, true);

  auto* kmap = app.add_subcommand("kmap", "Materialize the k most likely strings per line");
  kmap->add_option("--k", c.k, "Strings kept per line")->check(positive)->required();

  auto* index = app.add_subcommand("index", "Build the dictionary index of a mode");
  index->add_option("--dict", c.dict, "Dictionary file, one term per line")->required();
  add_mk(index, false);
  add_mode(index);

  auto* query = app.add_subcommand("query", "Rank lines by match probability");
  query->add_option("--pattern", c.pattern, "Regular expression")->required();
  add_mode(query);
  add_mk(query, false);
  add_num_ans(query);
  query->add_flag("--indexed", c.indexed, "Use the dictionary index of the mode");
  query->add_flag("--ci", c.case_fold, "Case-insensitive matching");

  auto* eval = app.add_subcommand("eval", "Precision and recall against ground truth");
  eval->add_option("--queries", c.queries, "Queries file (default: the corpus queries)");
  eval->add_option("--truth", c.truth, "Truth file (default: the corpus truth)");
  add_mode(eval);
  add_mk(eval, false);
  add_num_ans(eval);

  auto* tune_cmd = app.add_subcommand("tune", "Choose (m, k) for a recall target and size budget");
  tune_cmd->add_option("--recall", c.recall, "Minimum mean recall")
      ->check(CLI::Range(0.0, 1.0))
      ->required();
  tune_cmd->add_option("--size-pct", c.size_pct, "Budget in percent of the full automata's bytes")
      ->check(CLI::Range(0.0, 100.0))
      ->required();
  tune_cmd->add_option("--queries", c.queries, "Queries file (default: the corpus queries)");
  tune_cmd->add_option("--truth", c.truth, "Truth file (default: the corpus truth)");
  add_num_ans(tune_cmd);

  auto* bench = app.add_subcommand("bench", "Wall-clock and size per materialized mode");
  bench->add_option("--queries", c.queries, "Queries file (default: the corpus queries)");
  bench->add_option("--truth", c.truth, "Truth file (default: the corpus truth)");
  add_num_ans(bench);

  auto* gen = app.add_subcommand("gen", "Generate a synthetic OCR corpus with planted queries");
  gen->add_option("--lines", c.synth.lines, "Number of lines")->capture_default_str();
  gen->add_option("--noise", c.synth.noise, "Fraction of corrupted characters")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  gen->add_option("--seed", c.synth.seed, "Random seed")->capture_default_str();
  gen->add_option("--alternatives", c.synth.alternatives, "Candidate characters per position")
      ->check(positive)
      ->capture_default_str();
  gen->add_option("--merge-rate", c.synth.merge_rate, "Chance of a two-into-one merge edge")
      ->check(CLI::Range(0.0, 0.5))
      ->capture_default_str();

  std::vector<const char*> argv{"staccato"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kUsage;
  }

  try {
    if (ingest->parsed()) return cmd_ingest(c, out);
    if (approximate->parsed()) return cmd_materialize(c, Mode::staccato(*c.m, *c.k), out);
    if (kmap->parsed()) return cmd_materialize(c, Mode::kmap(*c.k), out);
    if (index->parsed()) return cmd_index(c, out);
    if (query->parsed()) return cmd_query(c, out, err);
    if (eval->parsed()) return cmd_eval(c, out);
    if (tune_cmd->parsed()) return cmd_tune(c, out);
    if (bench->parsed()) return cmd_bench(c, out);
    if (gen->parsed()) return cmd_gen(c, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  }
  return kUsage;
}

}  // namespace staccato::cli
