#include <algorithm>
#include <cctype>
#include <charconv>
#include <map>
#include <set>

#include "parallel.hpp"
#include "staccato/dict_index.hpp"

namespace staccato {

namespace {

char fold(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = fold(c);
  return out;
}

// Partial term matches alive at one point of the scan: trie state -> start
// locations of the characters consumed so far. The root is never a key.
using Active = std::map<std::uint32_t, std::set<Posting>>;

void merge_into(Active& into, const Active& from) {
  for (const auto& [state, starts] : from) into[state].insert(starts.begin(), starts.end());
}

}  // namespace

// ---------------------------------------------------------------------------
// PostingIndex

void PostingIndex::add(const std::string& term, const Posting& posting) {
  lists_[lower(term)].push_back(posting);
}

void PostingIndex::finalize() {
  for (auto& [term, list] : lists_) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
}

void PostingIndex::merge(const PostingIndex& other) {
  for (const auto& [term, list] : other.lists_) {
    auto& mine = lists_[term];
    mine.insert(mine.end(), list.begin(), list.end());
  }
  finalize();
}

std::span<const Posting> PostingIndex::lookup(std::string_view term) const {
  auto it = lists_.find(lower(term));
  if (it == lists_.end()) return {};
  return it->second;
}

std::size_t PostingIndex::posting_count() const {
  std::size_t n = 0;
  for (const auto& [term, list] : lists_) n += list.size();
  return n;
}

std::string PostingIndex::serialize() const {
  std::string out = "idx v1\n";
  for (const auto& [term, list] : lists_) {
    if (list.empty()) continue;
    out += term;
    out += '\t';
    for (std::size_t i = 0; i < list.size(); ++i) {
      const auto& p = list[i];
      if (i) out += ',';
      out += std::to_string(p.line) + ':' + std::to_string(p.edge) + ':' +
             std::to_string(p.path) + ':' + std::to_string(p.offset);
    }
    out += '\n';
  }
  return out;
}

PostingIndex PostingIndex::parse(std::string_view text) {
  PostingIndex index;
  std::size_t line_no = 0;
  bool header = false;
  while (!text.empty()) {
    auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    auto fail = [&](const std::string& what) {
      throw IndexFormatError("index line " + std::to_string(line_no) + ": " + what);
    };
    if (!header) {
      if (line != "idx v1") fail("expected header 'idx v1'");
      header = true;
      continue;
    }
    auto tab = line.find('\t');
    if (tab == std::string_view::npos || tab == 0) fail("expected term<TAB>postings");
    std::string term(line.substr(0, tab));
    std::string_view rest = line.substr(tab + 1);
    auto& list = index.lists_[term];
    while (!rest.empty()) {
      auto comma = rest.find(',');
      std::string_view item = rest.substr(0, comma);
      rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
      std::uint32_t fields[4];
      const char* p = item.data();
      const char* end = item.data() + item.size();
      for (int f = 0; f < 4; ++f) {
        auto [ptr, ec] = std::from_chars(p, end, fields[f]);
        if (ec != std::errc{}) fail("malformed posting '" + std::string(item) + "'");
        p = ptr;
        if (f < 3) {
          if (p == end || *p != ':') fail("malformed posting '" + std::string(item) + "'");
          ++p;
        }
      }
      if (p != end) fail("malformed posting '" + std::string(item) + "'");
      list.push_back(Posting{fields[0], fields[1], fields[2], fields[3]});
    }
    if (list.empty()) fail("term without postings");
  }
  if (!header) throw IndexFormatError("index is empty: expected header 'idx v1'");
  index.finalize();
  return index;
}

// ---------------------------------------------------------------------------
// Construction

PostingIndex build_line_index(const Sfa& chunk_graph, std::uint32_t line, const TrieDfa& trie) {
  PostingIndex index;
  std::vector<Active> arriving(chunk_graph.node_count());

  auto emit = [&](std::uint32_t state, const std::set<Posting>& starts) {
    if (auto term = trie.term_at(state)) {
      for (const auto& p : starts) index.add(trie.term(*term), p);
    }
  };

  for (NodeId v : chunk_graph.topo_order()) {
    const Active incoming = std::move(arriving[v]);
    arriving[v].clear();
    for (EdgeId id : chunk_graph.out_edges(v)) {
      const auto& e = chunk_graph.edge(id);
      for (std::uint32_t rank = 0; rank < e.labels.size(); ++rank) {
        Active active = incoming;
        const auto& text = e.labels[rank].text;
        for (std::uint32_t off = 0; off < text.size(); ++off) {
          char c = fold(text[off]);
          Active stepped;
          for (const auto& [state, starts] : active) {
            auto to = trie.step(state, c);
            if (to != TrieDfa::kRoot) stepped[to].insert(starts.begin(), starts.end());
          }
          auto fresh = trie.step(TrieDfa::kRoot, c);
          if (fresh != TrieDfa::kRoot) stepped[fresh].insert(Posting{line, id, rank, off});
          for (const auto& [state, starts] : stepped) emit(state, starts);
          active = std::move(stepped);
        }
        merge_into(arriving[e.dst], active);
      }
    }
  }
  index.finalize();
  return index;
}

PostingIndex build_index(std::span<const Sfa> chunk_graphs, const TrieDfa& trie,
                         std::size_t workers) {
  std::vector<PostingIndex> shards(chunk_graphs.size());
  detail::parallel_for(chunk_graphs.size(), workers, [&](std::size_t i) {
    shards[i] = build_line_index(chunk_graphs[i], static_cast<std::uint32_t>(i), trie);
  });
  PostingIndex index;
  for (const auto& shard : shards) {
    for (const auto& [term, list] : shard.lists_) {
      auto& mine = index.lists_[term];
      mine.insert(mine.end(), list.begin(), list.end());
    }
  }
  index.finalize();
  return index;
}

}  // namespace staccato
