#include "staccato/synth.hpp"

#include <algorithm>
#include <array>
#include <random>
#include <set>

#include "staccato/query.hpp"

namespace staccato {

namespace {

using Rng = std::mt19937_64;

const std::vector<std::string>& vocabulary() {
  static const std::vector<std::string> words = {
      "the",     "of",       "and",     "to",      "in",       "section", "act",
      "court",   "states",   "united",  "amended", "provided", "under",   "such",
      "shall",   "title",    "person",  "motor",   "company",  "report",  "federal",
      "code",    "payment",  "account", "record",  "district", "general", "service",
      "board",   "property", "notice",  "year",    "total",    "members", "office",
      "program", "hearing",  "taxes",   "rules",   "water",    "land",    "county",
      "trust",   "income",   "review",  "order",   "period",   "annual",  "number"};
  return words;
}

const char* confusions(char c) {
  switch (c) {
    case 'a': return "oe@";
    case 'b': return "h6";
    case 'c': return "eo(";
    case 'd': return "cl";
    case 'e': return "co";
    case 'f': return "t";
    case 'g': return "9q";
    case 'h': return "bn";
    case 'i': return "l1j!";
    case 'j': return "i";
    case 'k': return "h";
    case 'l': return "1I|";
    case 'm': return "nw";
    case 'n': return "rmh";
    case 'o': return "0ae";
    case 'p': return "q";
    case 'q': return "gp";
    case 'r': return "n";
    case 's': return "5S";
    case 't': return "f+";
    case 'u': return "vn";
    case 'v': return "uy";
    case 'w': return "v";
    case 'y': return "v";
    case 'z': return "2";
    case 'C': return "G(";
    case 'F': return "EP";
    case 'L': return "I";
    case 'P': return "FR";
    case 'S': return "5s";
    case 'U': return "VO";
    case '0': return "oO8";
    case '1': return "l7I";
    case '2': return "Z7";
    case '3': return "8";
    case '4': return "A";
    case '5': return "S6";
    case '6': return "b5";
    case '7': return "1";
    case '8': return "3B0";
    case '9': return "g";
    case '.': return ",'";
    case ',': return ".";
    case ' ': return "._";
    default: return "";
  }
}

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

std::size_t pick(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

std::string digits(Rng& rng, std::size_t n) {
  std::string out;
  for (std::size_t i = 0; i < n; ++i) out += static_cast<char>('0' + pick(rng, 10));
  return out;
}

// Candidate characters for one position: the truth, its confusions, then a
// random fill from printable ASCII.
std::vector<char> candidates(char truth, std::size_t count, Rng& rng) {
  std::vector<char> out{truth};
  for (const char* p = confusions(truth); *p; ++p) {
    if (std::find(out.begin(), out.end(), *p) == out.end()) out.push_back(*p);
  }
  std::vector<char> pool;
  for (int c = 0x20; c <= 0x7e; ++c) {
    if (c != '"' && c != '\\' && std::find(out.begin(), out.end(), c) == out.end()) {
      pool.push_back(static_cast<char>(c));
    }
  }
  std::shuffle(pool.begin(), pool.end(), rng);
  for (std::size_t i = 0; out.size() < count && i < pool.size(); ++i) out.push_back(pool[i]);
  if (out.size() > count) out.resize(std::max<std::size_t>(count, 1));
  return out;
}

// Geometrically decaying weights summing to `mass`.
std::vector<double> tail(std::size_t n, double mass, Rng& rng) {
  std::vector<double> w(n);
  double ratio = uniform(rng, 0.55, 0.75);
  double x = 1.0, sum = 0.0;
  for (auto& v : w) {
    v = x * uniform(rng, 0.8, 1.2);
    sum += v;
    x *= ratio;
  }
  for (auto& v : w) v *= mass / sum;
  return w;
}

std::string planted_phrase(std::size_t query, Rng& rng) {
  switch (query) {
    case 0: return "Ford";
    case 1: return std::array<const char*, 3>{"claim", "claims", "claimant"}[pick(rng, 3)];
    case 2: return "Public Law " + std::string(1, pick(rng, 2) ? '8' : '9') + digits(rng, 1);
    case 3: return "U.S.C. 2" + digits(rng, 3);
    default:
      return std::string(pick(rng, 2) ? "no" : "num") + "." + (pick(rng, 2) ? "2" : "8");
  }
}

std::string distractor(Rng& rng) {
  switch (pick(rng, 5)) {
    case 0: return "Fort";
    case 1: return "clam";
    case 2: return "Public Law 7" + digits(rng, 1);
    case 3: return "U.S.C. 1" + digits(rng, 3);
    default: return "no.5";
  }
}

std::string clean_line(const SynthOptions& o, Rng& rng) {
  const auto& words = vocabulary();
  std::size_t target = o.min_length + pick(rng, o.max_length - o.min_length + 1);
  std::vector<std::string> tokens;
  std::size_t length = 0;
  auto push = [&](std::string t) {
    length += t.size() + (tokens.empty() ? 0 : 1);
    tokens.push_back(std::move(t));
  };
  std::vector<std::string> extra;
  for (std::size_t q = 0; q < 5; ++q) {
    if (uniform(rng, 0.0, 1.0) < o.plant_rate) extra.push_back(planted_phrase(q, rng));
  }
  if (uniform(rng, 0.0, 1.0) < 0.15) extra.push_back(distractor(rng));
  std::shuffle(extra.begin(), extra.end(), rng);
  for (auto& e : extra) length += e.size() + 1;
  while (length < target) push(words[pick(rng, words.size())]);
  for (auto& e : extra) {
    tokens.insert(tokens.begin() + static_cast<std::ptrdiff_t>(pick(rng, tokens.size() + 1)),
                  std::move(e));
  }
  std::string line;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) line += ' ';
    line += tokens[i];
  }
  if (!line.empty() && line[0] >= 'a' && line[0] <= 'z') line[0] = static_cast<char>(line[0] - 32);
  return line;
}

}  // namespace

std::vector<QuerySpec> planted_queries() {
  return {{"ford", "Ford"},
          {"claim", "claim"},
          {"public_law", "Public Law (8|9)\\d"},
          {"usc", "U.S.C. 2\\d\\d\\d"},
          {"number", "(no|num).(2|8)"}};
}

Sfa noisy_sfa(const std::string& clean, const SynthOptions& o, std::uint64_t line_seed) {
  Rng rng(line_seed);
  const std::size_t n = clean.size();
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i) {
    auto chars = candidates(clean[i], std::max<std::size_t>(o.alternatives, 1), rng);
    std::vector<double> prob(chars.size(), 0.0);
    if (chars.size() == 1) {
      prob[0] = 1.0;
    } else if (uniform(rng, 0.0, 1.0) < o.noise) {
      // Corrupted: one to three look-alikes beat the true character.
      std::size_t strong = std::min<std::size_t>(1 + pick(rng, 3), chars.size() - 1);
      double weakest = 1.0;
      for (std::size_t j = 1; j <= strong; ++j) {
        prob[j] = uniform(rng, 0.2, 0.4);
        weakest = std::min(weakest, prob[j]);
      }
      // A damaged glyph leaves the true character behind part of the tail.
      prob[0] = uniform(rng, 0.0, 1.0) < o.severe_rate ? uniform(rng, 0.002, 0.01)
                                                       : weakest * uniform(rng, 0.5, 0.9);
      auto rest = tail(chars.size() - 1 - strong, 0.1, rng);
      std::copy(rest.begin(), rest.end(), prob.begin() + static_cast<std::ptrdiff_t>(strong + 1));
    } else {
      prob[0] = uniform(rng, 0.75, 0.95);
      auto rest = tail(chars.size() - 1, 1.0 - prob[0], rng);
      std::copy(rest.begin(), rest.end(), prob.begin() + 1);
    }

    double merge = 0.0;
    char merge_char = 0;
    if (i + 2 <= n && uniform(rng, 0.0, 1.0) < o.merge_rate) {
      for (int attempt = 0; attempt < 32 && !merge_char; ++attempt) {
        auto ch = static_cast<char>('a' + pick(rng, 26));
        if (std::find(chars.begin(), chars.end(), ch) == chars.end()) merge_char = ch;
      }
      if (merge_char) merge = uniform(rng, 0.02, 0.08);
    }

    double sum = 0.0;
    for (double p : prob) sum += p;
    Edge e{static_cast<NodeId>(i), static_cast<NodeId>(i + 1), {}};
    for (std::size_t j = 0; j < chars.size(); ++j) {
      e.labels.push_back(Label::from_prob(std::string(1, chars[j]), prob[j] / sum * (1.0 - merge)));
    }
    edges.push_back(std::move(e));
    if (merge_char) {
      edges.push_back(Edge{static_cast<NodeId>(i), static_cast<NodeId>(i + 2),
                           {Label::from_prob(std::string(1, merge_char), merge)}});
    }
  }
  return Sfa(n + 1, 0, static_cast<NodeId>(n), std::move(edges));
}

SynthCorpus generate_corpus(const SynthOptions& o) {
  if (o.min_length == 0 || o.max_length < o.min_length) {
    throw std::invalid_argument("line lengths must satisfy 0 < min <= max");
  }
  SynthCorpus out;
  out.queries = planted_queries();
  Rng rng(o.seed);
  std::vector<QueryDfa> dfas;
  for (const auto& q : out.queries) {
    dfas.push_back(compile_pattern(q.pattern));
    out.truth[q.id];
  }
  for (std::size_t i = 0; i < o.lines; ++i) {
    std::string line = clean_line(o, rng);
    std::uint64_t line_seed = rng();
    out.sources.push_back(IngestSource{"synthetic_" + std::to_string(i),
                                       serialize_sfa(noisy_sfa(line, o, line_seed))});
    for (std::size_t q = 0; q < dfas.size(); ++q) {
      if (dfas[q].accepts(line)) out.truth[out.queries[q].id].insert(static_cast<std::uint32_t>(i));
    }
    out.clean.push_back(std::move(line));
  }
  std::set<std::string> dict(vocabulary().begin(), vocabulary().end());
  for (const char* t : {"ford", "claim", "public", "law", "u.s.c.", "no", "num"}) dict.insert(t);
  out.dictionary.assign(dict.begin(), dict.end());
  return out;
}

Corpus write_synthetic(const std::filesystem::path& dir, const SynthCorpus& synth) {
  Corpus corpus = Corpus::ingest(dir, synth.sources);
  corpus.write_queries(synth.queries);
  corpus.write_truth(synth.truth);
  std::string dict;
  for (const auto& t : synth.dictionary) dict += t + "\n";
  write_file_atomic(dir / "dictionary.txt", dict);
  return corpus;
}

}  // namespace staccato
