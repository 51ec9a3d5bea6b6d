#pragma once

// File-backed corpus store.
//
// Layout of a corpus directory:
//   manifest.tsv                   catalog: lines, modes, artifact checksums
//   fullsfa/<line>.sfa             ingested automata, stored verbatim
//   kmap_k<k>.tsv                  k best strings per line
//   staccato_m<m>_k<k>/graph.tsv   chunk graph structure per line
//   staccato_m<m>_k<k>/data.tsv    ranked strings per chunk edge
//   truth.tsv, queries.tsv         planted queries and their relevant lines
//   index_<mode>.idx, .dict        posting index over a mode's chunk graphs
//
// Every file is written to a temporary name and renamed into place; the
// manifest is renamed last, so a crash leaves the previous state intact.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "staccato/approx.hpp"
#include "staccato/dict_index.hpp"
#include "staccato/inference.hpp"
#include "staccato/sfa.hpp"

namespace staccato {

enum class ModeKind { kFullSfa, kKmap, kStaccato };

struct Mode {
  ModeKind kind = ModeKind::kFullSfa;
  std::size_t m = 0;
  std::size_t k = 0;

  static Mode fullsfa() { return {}; }
  static Mode map() { return kmap(1); }
  static Mode kmap(std::size_t k) { return {ModeKind::kKmap, 0, k}; }
  static Mode staccato(std::size_t m, std::size_t k) { return {ModeKind::kStaccato, m, k}; }

  // "fullsfa", "kmap_k<k>", "staccato_m<m>_k<k>".
  std::string tag() const;
  // Inverse of tag(); std::invalid_argument on anything else.
  static Mode from_tag(std::string_view tag);

  friend bool operator==(const Mode&, const Mode&) = default;
  friend auto operator<=>(const Mode&, const Mode&) = default;
};

struct LineRecord {
  std::uint32_t line = 0;
  std::string source;
  std::uint32_t line_number = 0;

  friend bool operator==(const LineRecord&, const LineRecord&) = default;
};

struct ArtifactRecord {
  std::uint64_t bytes = 0;
  std::uint64_t checksum = 0;  // FNV-1a 64 of the file bytes

  friend bool operator==(const ArtifactRecord&, const ArtifactRecord&) = default;
};

struct CorpusManifest {
  std::string corpus_id;
  std::vector<LineRecord> lines;
  std::set<Mode> modes;
  std::map<std::string, ArtifactRecord> artifacts;  // by path relative to the corpus

  friend bool operator==(const CorpusManifest&, const CorpusManifest&) = default;
};

struct ModeSize {
  Mode mode;
  std::uint64_t measured_bytes = 0;
  // Cost model: every stored string costs its length plus 16 bytes of
  // metadata. On a chain of length l, m chunks of k strings cost lk + 16mk.
  std::uint64_t predicted_bytes = 0;
};

struct SizeReport {
  std::vector<ModeSize> modes;

  const ModeSize* find(const Mode& mode) const;
};

struct QuerySpec {
  std::string id;
  std::string pattern;

  friend bool operator==(const QuerySpec&, const QuerySpec&) = default;
};

// query id -> relevant line ids.
using Truth = std::map<std::string, std::set<std::uint32_t>>;

class StoreError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class CorruptionError : public StoreError {
 public:
  using StoreError::StoreError;
};
class MissingArtifact : public StoreError {
 public:
  using StoreError::StoreError;
};
class LockError : public StoreError {
 public:
  using StoreError::StoreError;
};

std::uint64_t fnv1a64(std::string_view bytes);

// Advisory single-writer lock: `.lock` created exclusively, removed on
// destruction.
class CorpusLock {
 public:
  explicit CorpusLock(const std::filesystem::path& dir);
  ~CorpusLock();
  CorpusLock(const CorpusLock&) = delete;
  CorpusLock& operator=(const CorpusLock&) = delete;

 private:
  std::filesystem::path path_;
};

struct IngestSource {
  std::string name;  // source document name
  std::string text;  // sfa v1 text
};

class Corpus {
 public:
  // Parses and validates every source before touching the directory; the
  // first failure throws naming its source and nothing is written.
  // Replaces any corpus already in dir.
  static Corpus ingest(const std::filesystem::path& dir, const std::vector<IngestSource>& sources);
  static Corpus ingest_files(const std::filesystem::path& dir,
                             const std::vector<std::filesystem::path>& files);
  // StoreError if dir holds no manifest.
  static Corpus open(const std::filesystem::path& dir);

  const std::filesystem::path& dir() const { return dir_; }
  const CorpusManifest& manifest() const { return manifest_; }
  std::size_t line_count() const { return manifest_.lines.size(); }
  bool has_mode(const Mode& mode) const { return manifest_.modes.count(mode) > 0; }

  // Builds and stores a k-MAP or STACCATO mode from the full automata.
  void materialize(const Mode& mode, std::size_t workers = 1);
  // Removes a materialized mode and its artifacts; the full automata stay.
  void drop_mode(const Mode& mode);

  Sfa load_fullsfa(std::uint32_t line) const;
  RankedStrings load_kmap(std::uint32_t line, std::size_t k) const;
  ChunkedSfa load_staccato(std::uint32_t line, std::size_t m, std::size_t k) const;

  // Every line of a mode as a chunk graph: the automaton itself, a single
  // edge holding the k best strings, or the STACCATO chunk graph.
  std::vector<Sfa> load_graphs(const Mode& mode, std::size_t workers = 1) const;

  std::uint64_t mode_bytes(const Mode& mode) const;
  SizeReport measure_size() const;

  void write_truth(const Truth& truth);
  Truth load_truth() const;
  bool has_truth() const;
  void write_queries(const std::vector<QuerySpec>& queries);
  std::vector<QuerySpec> load_queries() const;

  // The dictionary is kept next to the index (index_<mode>.dict, one term
  // per line) so queries can tell absent terms from terms without postings.
  void write_index(const Mode& mode, const PostingIndex& index,
                   const std::vector<std::string>& dictionary);
  PostingIndex load_index(const Mode& mode) const;
  std::vector<std::string> load_dictionary(const Mode& mode) const;
  bool has_index(const Mode& mode) const;

 private:
  Corpus(std::filesystem::path dir, CorpusManifest manifest)
      : dir_(std::move(dir)), manifest_(std::move(manifest)) {}

  std::string read_artifact(const std::string& rel) const;
  void write_artifact(const std::string& rel, const std::string& bytes);
  void commit_manifest();
  std::vector<std::string> mode_artifacts(const Mode& mode) const;

  std::filesystem::path dir_;
  CorpusManifest manifest_;
};

// Truth and query tables on their own, for files outside a corpus.
Truth parse_truth(std::string_view text);
std::string serialize_truth(const Truth& truth);
std::vector<QuerySpec> parse_queries(std::string_view text);
std::string serialize_queries(const std::vector<QuerySpec>& queries);
// One term per line; blank lines and '#' comments skipped. Returns the
// lowercased terms sorted and deduplicated.
std::vector<std::string> parse_dictionary(std::string_view text);

std::string read_file(const std::filesystem::path& path);
// Writes to a temporary sibling and renames it over path.
void write_file_atomic(const std::filesystem::path& path, const std::string& bytes);

}  // namespace staccato
