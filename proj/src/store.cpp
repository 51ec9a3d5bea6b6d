#include "staccato/store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "parallel.hpp"

namespace staccato {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kManifest = "manifest.tsv";
constexpr std::string_view kTruth = "truth.tsv";
constexpr std::string_view kQueries = "queries.tsv";

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  while (true) {
    auto pos = line.find(sep);
    out.push_back(line.substr(0, pos));
    if (pos == std::string_view::npos) break;
    line.remove_prefix(pos + 1);
  }
  return out;
}

// Iterates the data rows of a `# <table> v1` file.
class TsvReader {
 public:
  TsvReader(std::string_view text, std::string_view table, std::string name)
      : text_(text), name_(std::move(name)) {
    std::string header = "# " + std::string(table) + " v1";
    std::string_view first;
    if (!next_line(first) || first != header) fail("expected header '" + header + "'");
  }

  bool next(std::vector<std::string_view>& fields) {
    std::string_view line;
    while (next_line(line)) {
      if (line.empty() || line.front() == '#') continue;
      fields = split(line, '\t');
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw CorruptionError(name_ + ":" + std::to_string(line_no_) + ": " + what);
  }

  template <class T>
  T number(std::string_view field) const {
    T value{};
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size()) {
      fail("malformed number '" + std::string(field) + "'");
    }
    return value;
  }

  std::uint64_t hex(std::string_view field) const {
    std::uint64_t value = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value, 16);
    if (ec != std::errc{} || ptr != field.data() + field.size()) {
      fail("malformed checksum '" + std::string(field) + "'");
    }
    return value;
  }

 private:
  bool next_line(std::string_view& line) {
    if (text_.empty()) return false;
    auto nl = text_.find('\n');
    line = text_.substr(0, nl);
    text_ = nl == std::string_view::npos ? std::string_view{} : text_.substr(nl + 1);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++line_no_;
    return true;
  }

  std::string_view text_;
  std::string name_;
  std::size_t line_no_ = 0;
};

std::string format_log_prob(double lp) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", lp);
  return buf;
}

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string clean_field(std::string s) {
  for (auto& c : s) {
    if (c == '\t' || c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

std::string join_names(std::span<const std::int64_t> names) {
  std::string out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(names[i]);
  }
  return out;
}

std::string fullsfa_path(std::uint32_t line) { return "fullsfa/" + std::to_string(line) + ".sfa"; }
std::string kmap_path(std::size_t k) { return "kmap_k" + std::to_string(k) + ".tsv"; }
std::string staccato_dir(std::size_t m, std::size_t k) {
  return "staccato_m" + std::to_string(m) + "_k" + std::to_string(k);
}
std::string index_path(const Mode& mode) { return "index_" + mode.tag() + ".idx"; }
std::string dict_path(const Mode& mode) { return "index_" + mode.tag() + ".dict"; }

std::string serialize_manifest(const CorpusManifest& m) {
  std::string out = "# manifest v1\n";
  out += "corpus\t" + m.corpus_id + "\n";
  for (const auto& l : m.lines) {
    out += "line\t" + std::to_string(l.line) + "\t" + clean_field(l.source) + "\t" +
           std::to_string(l.line_number) + "\n";
  }
  for (const auto& mode : m.modes) out += "mode\t" + mode.tag() + "\n";
  for (const auto& [path, rec] : m.artifacts) {
    out += "artifact\t" + path + "\t" + std::to_string(rec.bytes) + "\t" + hex64(rec.checksum) +
           "\n";
  }
  return out;
}

CorpusManifest parse_manifest(std::string_view text, const std::string& name) {
  CorpusManifest m;
  TsvReader reader(text, "manifest", name);
  std::vector<std::string_view> f;
  while (reader.next(f)) {
    if (f[0] == "corpus" && f.size() == 2) {
      m.corpus_id = std::string(f[1]);
    } else if (f[0] == "line" && f.size() == 4) {
      LineRecord rec{reader.number<std::uint32_t>(f[1]), std::string(f[2]),
                     reader.number<std::uint32_t>(f[3])};
      if (rec.line != m.lines.size()) reader.fail("line ids must be dense and ascending");
      m.lines.push_back(std::move(rec));
    } else if (f[0] == "mode" && f.size() == 2) {
      try {
        m.modes.insert(Mode::from_tag(f[1]));
      } catch (const std::invalid_argument& e) {
        reader.fail(e.what());
      }
    } else if (f[0] == "artifact" && f.size() == 4) {
      m.artifacts[std::string(f[1])] =
          ArtifactRecord{reader.number<std::uint64_t>(f[2]), reader.hex(f[3])};
    } else {
      reader.fail("unrecognized manifest row");
    }
  }
  return m;
}

std::string serialize_ranked_rows(std::uint32_t line, std::optional<EdgeId> edge,
                                   const std::vector<Label>& labels) {
  std::string out;
  for (std::size_t r = 0; r < labels.size(); ++r) {
    out += std::to_string(line) + '\t';
    if (edge) out += std::to_string(*edge) + '\t';
    out += std::to_string(r) + '\t' + escape_label(labels[r].text) + '\t' +
           format_log_prob(labels[r].log_prob) + '\n';
  }
  return out;
}

std::vector<Label> to_labels(const RankedStrings& ranked) {
  std::vector<Label> labels;
  for (const auto& e : ranked.entries) labels.push_back(Label{e.text, e.prob, e.log_prob});
  return labels;
}

RankedStrings to_ranked(const std::vector<Label>& labels, std::size_t k) {
  RankedStrings r;
  r.k = k;
  for (const auto& l : labels) r.entries.push_back(RankedEntry{l.text, l.prob, l.log_prob, {}});
  return r;
}

// Rows `line [edge] rank string logprob` into per-line (per-edge) label lists.
using LabelTable = std::vector<std::vector<std::vector<Label>>>;

LabelTable parse_ranked_rows(std::string_view text, std::string_view table,
                             const std::string& name, std::size_t lines, bool with_edge) {
  LabelTable out(lines);
  TsvReader reader(text, table, name);
  std::vector<std::string_view> f;
  const std::size_t width = with_edge ? 5 : 4;
  while (reader.next(f)) {
    if (f.size() != width) reader.fail("expected " + std::to_string(width) + " fields");
    auto line = reader.number<std::uint32_t>(f[0]);
    if (line >= lines) reader.fail("line id out of range");
    std::size_t edge = with_edge ? reader.number<std::uint32_t>(f[1]) : 0;
    std::size_t i = with_edge ? 2 : 1;
    auto rank = reader.number<std::uint32_t>(f[i]);
    auto& slot = out[line];
    if (slot.size() <= edge) slot.resize(edge + 1);
    if (rank != slot[edge].size()) reader.fail("ranks must be dense and ascending");
    std::string body;
    try {
      body = unescape_label(f[i + 1]);
    } catch (const std::invalid_argument& e) {
      reader.fail(e.what());
    }
    slot[edge].push_back(Label::from_log_prob(std::move(body), reader.number<double>(f[i + 2])));
  }
  return out;
}

std::vector<std::int64_t> parse_names(const TsvReader& reader, std::string_view field) {
  std::vector<std::int64_t> out;
  if (field.empty()) return out;
  for (auto part : split(field, ',')) out.push_back(reader.number<std::int64_t>(part));
  return out;
}

struct GraphShape {
  std::vector<std::int64_t> names;
  std::int64_t start = 0;
  std::int64_t final_node = 0;
  struct EdgeRow {
    std::int64_t src, dst;
    std::vector<std::int64_t> covered;
  };
  std::vector<EdgeRow> edges;
};

}  // namespace

// ---------------------------------------------------------------------------
// Modes, hashing, files

std::string Mode::tag() const {
  switch (kind) {
    case ModeKind::kFullSfa: return "fullsfa";
    case ModeKind::kKmap: return "kmap_k" + std::to_string(k);
    case ModeKind::kStaccato: return staccato_dir(m, k);
  }
  return {};
}

Mode Mode::from_tag(std::string_view tag) {
  auto bad = [&] { return std::invalid_argument("unknown mode '" + std::string(tag) + "'"); };
  auto number = [&](std::string_view s) {
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || v == 0) throw bad();
    return v;
  };
  if (tag == "fullsfa") return fullsfa();
  if (tag.starts_with("kmap_k")) return kmap(number(tag.substr(6)));
  if (tag.starts_with("staccato_m")) {
    auto rest = tag.substr(10);
    auto sep = rest.find("_k");
    if (sep == std::string_view::npos) throw bad();
    return staccato(number(rest.substr(0, sep)), number(rest.substr(sep + 2)));
  }
  throw bad();
}

const ModeSize* SizeReport::find(const Mode& mode) const {
  for (const auto& s : modes) {
    if (s.mode == mode) return &s;
  }
  return nullptr;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingArtifact("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const fs::path& path, const std::string& bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw StoreError("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw StoreError("short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

CorpusLock::CorpusLock(const fs::path& dir) : path_(dir / ".lock") {
  fs::create_directories(dir);
  int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
  if (fd < 0) throw LockError("corpus is locked by another writer: " + path_.string());
  std::string pid = std::to_string(::getpid()) + "\n";
  [[maybe_unused]] auto n = ::write(fd, pid.data(), pid.size());
  ::close(fd);
}

CorpusLock::~CorpusLock() {
  std::error_code ec;
  fs::remove(path_, ec);
}

// ---------------------------------------------------------------------------
// Truth and queries

Truth parse_truth(std::string_view text) {
  Truth truth;
  TsvReader reader(text, "truth", std::string(kTruth));
  std::vector<std::string_view> f;
  while (reader.next(f)) {
    if (f.size() == 1 && !f[0].empty()) {
      truth[std::string(f[0])];
      continue;
    }
    if (f.size() != 2 || f[0].empty()) reader.fail("expected query_id<TAB>line_id");
    truth[std::string(f[0])].insert(reader.number<std::uint32_t>(f[1]));
  }
  return truth;
}

std::string serialize_truth(const Truth& truth) {
  std::string out = "# truth v1\n";
  for (const auto& [query, lines] : truth) {
    // A query without relevant lines keeps a bare row so it is not lost.
    if (lines.empty()) out += query + "\n";
    for (auto line : lines) out += query + "\t" + std::to_string(line) + "\n";
  }
  return out;
}

std::vector<QuerySpec> parse_queries(std::string_view text) {
  std::vector<QuerySpec> out;
  TsvReader reader(text, "queries", std::string(kQueries));
  std::vector<std::string_view> f;
  while (reader.next(f)) {
    if (f.size() != 2 || f[0].empty() || f[1].empty()) reader.fail("expected query_id<TAB>pattern");
    out.push_back(QuerySpec{std::string(f[0]), std::string(f[1])});
  }
  return out;
}

std::string serialize_queries(const std::vector<QuerySpec>& queries) {
  std::string out = "# queries v1\n";
  for (const auto& q : queries) out += clean_field(q.id) + "\t" + clean_field(q.pattern) + "\n";
  return out;
}

std::vector<std::string> parse_dictionary(std::string_view text) {
  std::set<std::string> terms;
  for (auto line : split(text, '\n')) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) {
      line.remove_suffix(1);
    }
    if (line.empty() || line.front() == '#') continue;
    std::string t(line);
    for (auto& c : t) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    terms.insert(std::move(t));
  }
  return {terms.begin(), terms.end()};
}

// ---------------------------------------------------------------------------
// Corpus

Corpus Corpus::ingest(const fs::path& dir, const std::vector<IngestSource>& sources) {
  std::string identity;
  for (const auto& s : sources) {
    try {
      parse_sfa(s.text);
    } catch (const std::exception& e) {
      throw StoreError(s.name + ": " + e.what());
    }
    identity += s.name;
    identity += '\0';
    identity += s.text;
    identity += '\0';
  }

  CorpusLock lock(dir);
  std::optional<CorpusManifest> previous;
  if (fs::exists(dir / kManifest)) {
    try {
      previous = parse_manifest(read_file(dir / kManifest), std::string(kManifest));
    } catch (const StoreError&) {
      // Unreadable catalog: nothing to clean up by name.
    }
  }

  CorpusManifest manifest;
  manifest.corpus_id = hex64(fnv1a64(identity));
  manifest.modes.insert(Mode::fullsfa());
  Corpus corpus(dir, std::move(manifest));
  for (std::size_t i = 0; i < sources.size(); ++i) {
    auto line = static_cast<std::uint32_t>(i);
    corpus.manifest_.lines.push_back(LineRecord{line, sources[i].name, 0});
    corpus.write_artifact(fullsfa_path(line), sources[i].text);
  }
  corpus.commit_manifest();

  if (previous) {
    for (const auto& [path, rec] : previous->artifacts) {
      if (!corpus.manifest_.artifacts.count(path)) {
        std::error_code ec;
        fs::remove(dir / path, ec);
      }
    }
  }
  return corpus;
}

Corpus Corpus::ingest_files(const fs::path& dir, const std::vector<fs::path>& files) {
  std::vector<IngestSource> sources;
  for (const auto& f : files) sources.push_back(IngestSource{f.filename().string(), read_file(f)});
  return ingest(dir, sources);
}

Corpus Corpus::open(const fs::path& dir) {
  if (!fs::exists(dir / kManifest)) throw StoreError("no corpus at " + dir.string());
  return Corpus(dir, parse_manifest(read_file(dir / kManifest), (dir / kManifest).string()));
}

std::string Corpus::read_artifact(const std::string& rel) const {
  auto it = manifest_.artifacts.find(rel);
  if (it == manifest_.artifacts.end()) throw MissingArtifact("artifact not in manifest: " + rel);
  std::string bytes;
  try {
    bytes = read_file(dir_ / rel);
  } catch (const MissingArtifact&) {
    throw CorruptionError("artifact listed in manifest is missing: " + rel);
  }
  if (bytes.size() != it->second.bytes || fnv1a64(bytes) != it->second.checksum) {
    throw CorruptionError("checksum mismatch: " + rel);
  }
  return bytes;
}

void Corpus::write_artifact(const std::string& rel, const std::string& bytes) {
  write_file_atomic(dir_ / rel, bytes);
  manifest_.artifacts[rel] = ArtifactRecord{bytes.size(), fnv1a64(bytes)};
}

void Corpus::commit_manifest() { write_file_atomic(dir_ / kManifest, serialize_manifest(manifest_)); }

std::vector<std::string> Corpus::mode_artifacts(const Mode& mode) const {
  switch (mode.kind) {
    case ModeKind::kFullSfa: {
      std::vector<std::string> out;
      for (const auto& l : manifest_.lines) out.push_back(fullsfa_path(l.line));
      return out;
    }
    case ModeKind::kKmap: return {kmap_path(mode.k)};
    case ModeKind::kStaccato: {
      auto d = staccato_dir(mode.m, mode.k);
      return {d + "/graph.tsv", d + "/data.tsv"};
    }
  }
  return {};
}

void Corpus::materialize(const Mode& mode, std::size_t workers) {
  if (mode.kind == ModeKind::kFullSfa) return;
  if (mode.k == 0 || (mode.kind == ModeKind::kStaccato && mode.m == 0)) {
    throw std::invalid_argument("m and k must be at least 1");
  }
  const std::size_t n = line_count();
  std::vector<Sfa> full(n);
  detail::parallel_for(n, workers, [&](std::size_t i) {
    full[i] = load_fullsfa(static_cast<std::uint32_t>(i));
  });

  CorpusLock lock(dir_);
  if (mode.kind == ModeKind::kKmap) {
    std::vector<std::string> rows(n);
    detail::parallel_for(n, workers, [&](std::size_t i) {
      rows[i] = serialize_ranked_rows(static_cast<std::uint32_t>(i), std::nullopt,
                                      to_labels(top_k(full[i], mode.k)));
    });
    std::string out = "# kmap v1\n";
    for (const auto& r : rows) out += r;
    write_artifact(kmap_path(mode.k), out);
  } else {
    std::vector<std::string> graph_rows(n), data_rows(n);
    detail::parallel_for(n, workers, [&](std::size_t i) {
      auto line = static_cast<std::uint32_t>(i);
      ChunkedSfa c = greedy_approximate(full[i], mode.m, mode.k);
      const Sfa& g = c.graph;
      std::string gr = "line\t" + std::to_string(line) + "\t" + join_names(g.node_names()) + "\t" +
                       std::to_string(g.name(g.start())) + "\t" +
                       std::to_string(g.name(g.final_node())) + "\n";
      std::string dr;
      for (EdgeId id = 0; id < g.edge_count(); ++id) {
        const auto& e = g.edge(id);
        gr += "edge\t" + std::to_string(line) + "\t" + std::to_string(id) + "\t" +
              std::to_string(g.name(e.src)) + "\t" + std::to_string(g.name(e.dst)) + "\t" +
              join_names(c.covered[id]) + "\n";
        dr += serialize_ranked_rows(line, id, e.labels);
      }
      graph_rows[i] = std::move(gr);
      data_rows[i] = std::move(dr);
    });
    std::string graph = "# staccato_graph v1\n";
    std::string data = "# staccato_data v1\n";
    for (std::size_t i = 0; i < n; ++i) {
      graph += graph_rows[i];
      data += data_rows[i];
    }
    auto d = staccato_dir(mode.m, mode.k);
    write_artifact(d + "/graph.tsv", graph);
    write_artifact(d + "/data.tsv", data);
  }
  manifest_.modes.insert(mode);
  commit_manifest();
}

void Corpus::drop_mode(const Mode& mode) {
  if (mode.kind == ModeKind::kFullSfa || !has_mode(mode)) return;
  CorpusLock lock(dir_);
  auto stale = mode_artifacts(mode);
  manifest_.modes.erase(mode);
  for (const auto& rel : stale) manifest_.artifacts.erase(rel);
  commit_manifest();
  std::error_code ec;
  for (const auto& rel : stale) fs::remove(dir_ / rel, ec);
  if (mode.kind == ModeKind::kStaccato) fs::remove(dir_ / staccato_dir(mode.m, mode.k), ec);
}

Sfa Corpus::load_fullsfa(std::uint32_t line) const {
  if (line >= line_count()) throw MissingArtifact("no line " + std::to_string(line));
  auto rel = fullsfa_path(line);
  try {
    return parse_sfa(read_artifact(rel));
  } catch (const SfaSyntaxError& e) {
    throw CorruptionError(rel + ": " + e.what());
  } catch (const SfaValidationError& e) {
    throw CorruptionError(rel + ": " + e.what());
  }
}

RankedStrings Corpus::load_kmap(std::uint32_t line, std::size_t k) const {
  if (!has_mode(Mode::kmap(k))) throw MissingArtifact("mode not materialized: kmap_k" + std::to_string(k));
  if (line >= line_count()) throw MissingArtifact("no line " + std::to_string(line));
  auto rel = kmap_path(k);
  auto table = parse_ranked_rows(read_artifact(rel), "kmap", rel, line_count(), false);
  if (table[line].empty()) return to_ranked({}, k);
  return to_ranked(table[line][0], k);
}

namespace {

std::vector<GraphShape> parse_graph_table(std::string_view text, const std::string& name,
                                          std::size_t lines) {
  std::vector<GraphShape> shapes(lines);
  std::vector<bool> seen(lines, false);
  TsvReader reader(text, "staccato_graph", name);
  std::vector<std::string_view> f;
  while (reader.next(f)) {
    if (f[0] == "line" && f.size() == 5) {
      auto line = reader.number<std::uint32_t>(f[1]);
      if (line >= lines) reader.fail("line id out of range");
      shapes[line].names = parse_names(reader, f[2]);
      shapes[line].start = reader.number<std::int64_t>(f[3]);
      shapes[line].final_node = reader.number<std::int64_t>(f[4]);
      seen[line] = true;
    } else if (f[0] == "edge" && f.size() == 6) {
      auto line = reader.number<std::uint32_t>(f[1]);
      if (line >= lines || !seen[line]) reader.fail("edge row before its line row");
      auto id = reader.number<std::uint32_t>(f[2]);
      if (id != shapes[line].edges.size()) reader.fail("edge ids must be dense and ascending");
      shapes[line].edges.push_back(GraphShape::EdgeRow{reader.number<std::int64_t>(f[3]),
                                                       reader.number<std::int64_t>(f[4]),
                                                       parse_names(reader, f[5])});
    } else {
      reader.fail("unrecognized graph row");
    }
  }
  for (std::size_t i = 0; i < lines; ++i) {
    if (!seen[i]) throw CorruptionError(name + ": line " + std::to_string(i) + " missing");
  }
  return shapes;
}

ChunkedSfa assemble(const GraphShape& shape, std::vector<std::vector<Label>> labels,
                    std::size_t m, std::size_t k, const std::string& name) {
  std::map<std::int64_t, NodeId> dense;
  for (std::size_t i = 0; i < shape.names.size(); ++i) {
    dense[shape.names[i]] = static_cast<NodeId>(i);
  }
  auto id = [&](std::int64_t n) {
    auto it = dense.find(n);
    if (it == dense.end()) throw CorruptionError(name + ": unknown node " + std::to_string(n));
    return it->second;
  };
  if (labels.size() < shape.edges.size()) labels.resize(shape.edges.size());
  if (labels.size() > shape.edges.size()) throw CorruptionError(name + ": data for unknown edge");
  std::vector<Edge> edges;
  ChunkedSfa c;
  for (std::size_t e = 0; e < shape.edges.size(); ++e) {
    if (labels[e].empty()) throw CorruptionError(name + ": edge without strings");
    edges.push_back(Edge{id(shape.edges[e].src), id(shape.edges[e].dst), std::move(labels[e])});
    c.covered.push_back(shape.edges[e].covered);
  }
  c.graph = Sfa(shape.names.size(), id(shape.start), id(shape.final_node), std::move(edges),
                shape.names);
  if (c.graph.edge_count() != shape.edges.size()) {
    throw CorruptionError(name + ": duplicate chunk edge");
  }
  c.m = m;
  c.k = k;
  return c;
}

}  // namespace

ChunkedSfa Corpus::load_staccato(std::uint32_t line, std::size_t m, std::size_t k) const {
  Mode mode = Mode::staccato(m, k);
  if (!has_mode(mode)) throw MissingArtifact("mode not materialized: " + mode.tag());
  if (line >= line_count()) throw MissingArtifact("no line " + std::to_string(line));
  auto d = staccato_dir(m, k);
  auto shapes = parse_graph_table(read_artifact(d + "/graph.tsv"), d + "/graph.tsv", line_count());
  auto data = parse_ranked_rows(read_artifact(d + "/data.tsv"), "staccato_data", d + "/data.tsv",
                                line_count(), true);
  return assemble(shapes[line], std::move(data[line]), m, k, d);
}

std::vector<Sfa> Corpus::load_graphs(const Mode& mode, std::size_t workers) const {
  if (!has_mode(mode)) throw MissingArtifact("mode not materialized: " + mode.tag());
  const std::size_t n = line_count();
  std::vector<Sfa> out(n);
  switch (mode.kind) {
    case ModeKind::kFullSfa:
      detail::parallel_for(n, workers, [&](std::size_t i) {
        out[i] = load_fullsfa(static_cast<std::uint32_t>(i));
      });
      break;
    case ModeKind::kKmap: {
      auto rel = kmap_path(mode.k);
      auto table = parse_ranked_rows(read_artifact(rel), "kmap", rel, n, false);
      for (std::size_t i = 0; i < n; ++i) {
        if (table[i].empty() || table[i][0].empty()) {
          throw CorruptionError(rel + ": line " + std::to_string(i) + " has no strings");
        }
        out[i] = Sfa(2, 0, 1, {Edge{0, 1, std::move(table[i][0])}});
      }
      break;
    }
    case ModeKind::kStaccato: {
      auto d = staccato_dir(mode.m, mode.k);
      auto shapes = parse_graph_table(read_artifact(d + "/graph.tsv"), d + "/graph.tsv", n);
      auto data = parse_ranked_rows(read_artifact(d + "/data.tsv"), "staccato_data",
                                    d + "/data.tsv", n, true);
      detail::parallel_for(n, workers, [&](std::size_t i) {
        out[i] = assemble(shapes[i], std::move(data[i]), mode.m, mode.k, d).graph;
      });
      break;
    }
  }
  return out;
}

std::uint64_t Corpus::mode_bytes(const Mode& mode) const {
  if (!has_mode(mode)) throw MissingArtifact("mode not materialized: " + mode.tag());
  std::uint64_t total = 0;
  for (const auto& rel : mode_artifacts(mode)) {
    auto it = manifest_.artifacts.find(rel);
    if (it != manifest_.artifacts.end()) total += it->second.bytes;
  }
  return total;
}

SizeReport Corpus::measure_size() const {
  SizeReport report;
  for (const auto& mode : manifest_.modes) {
    ModeSize s;
    s.mode = mode;
    s.measured_bytes = mode_bytes(mode);
    for (const auto& g : load_graphs(mode)) {
      for (const auto& e : g.edges()) {
        for (const auto& l : e.labels) s.predicted_bytes += l.text.size() + 16;
      }
    }
    report.modes.push_back(s);
  }
  return report;
}

void Corpus::write_truth(const Truth& truth) {
  CorpusLock lock(dir_);
  write_artifact(std::string(kTruth), serialize_truth(truth));
  commit_manifest();
}

Truth Corpus::load_truth() const {
  if (!has_truth()) throw MissingArtifact("corpus has no truth table");
  return parse_truth(read_artifact(std::string(kTruth)));
}

bool Corpus::has_truth() const { return manifest_.artifacts.count(std::string(kTruth)) > 0; }

void Corpus::write_queries(const std::vector<QuerySpec>& queries) {
  CorpusLock lock(dir_);
  write_artifact(std::string(kQueries), serialize_queries(queries));
  commit_manifest();
}

std::vector<QuerySpec> Corpus::load_queries() const {
  return parse_queries(read_artifact(std::string(kQueries)));
}

void Corpus::write_index(const Mode& mode, const PostingIndex& index,
                         const std::vector<std::string>& dictionary) {
  std::set<std::string> terms;
  for (const auto& t : dictionary) {
    std::string folded = clean_field(t);
    for (auto& c : folded) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (!folded.empty()) terms.insert(std::move(folded));
  }
  std::string dict;
  for (const auto& t : terms) dict += t + "\n";
  CorpusLock lock(dir_);
  write_artifact(dict_path(mode), dict);
  write_artifact(index_path(mode), index.serialize());
  commit_manifest();
}

std::vector<std::string> Corpus::load_dictionary(const Mode& mode) const {
  return parse_dictionary(read_artifact(dict_path(mode)));
}

PostingIndex Corpus::load_index(const Mode& mode) const {
  auto rel = index_path(mode);
  try {
    return PostingIndex::parse(read_artifact(rel));
  } catch (const IndexFormatError& e) {
    throw CorruptionError(rel + ": " + e.what());
  }
}

bool Corpus::has_index(const Mode& mode) const {
  return manifest_.artifacts.count(index_path(mode)) > 0;
}

}  // namespace staccato
