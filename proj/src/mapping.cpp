#include "kgeval/mapping.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace kgeval {

namespace {

// Fuzzy candidate generation falls back to a full key scan below this size;
// larger indices only consider keys sharing at least one token.
constexpr size_t kFullScanLimit = 100000;

std::vector<uint32_t> decode_utf8(std::string_view s) {
  std::vector<uint32_t> out;
  out.reserve(s.size());
  size_t i = 0;
  while (i < s.size()) {
    const unsigned char c = static_cast<unsigned char>(s[i]);
    uint32_t cp = c;
    size_t extra = 0;
    if (c >= 0xF0)
      cp = c & 0x07, extra = 3;
    else if (c >= 0xE0)
      cp = c & 0x0F, extra = 2;
    else if (c >= 0xC0)
      cp = c & 0x1F, extra = 1;
    if (extra > 0) {
      if (i + extra >= s.size()) {  // truncated sequence: keep raw byte
        out.push_back(c);
        ++i;
        continue;
      }
      bool ok = true;
      uint32_t acc = cp;
      for (size_t k = 1; k <= extra; ++k) {
        const unsigned char cc = static_cast<unsigned char>(s[i + k]);
        if ((cc & 0xC0) != 0x80) {
          ok = false;
          break;
        }
        acc = (acc << 6) | (cc & 0x3F);
      }
      if (!ok) {
        out.push_back(c);
        ++i;
        continue;
      }
      out.push_back(acc);
      i += extra + 1;
    } else {
      out.push_back(cp);
      ++i;
    }
  }
  return out;
}

void encode_utf8(std::string& out, uint32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

// Lowercasing for the scripts that show up in benchmark labels: ASCII,
// Latin-1, Latin Extended-A, Greek, Cyrillic. Other codepoints pass through.
uint32_t lower_codepoint(uint32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return cp + 32;
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 32;
  if (cp >= 0x100 && cp <= 0x137) return (cp % 2 == 0) ? cp + 1 : cp;
  if (cp >= 0x139 && cp <= 0x148) return (cp % 2 == 1) ? cp + 1 : cp;
  if (cp >= 0x14A && cp <= 0x177) return (cp % 2 == 0) ? cp + 1 : cp;
  if (cp == 0x178) return 0xFF;
  if (cp >= 0x179 && cp <= 0x17E) return (cp % 2 == 1) ? cp + 1 : cp;
  if (cp >= 0x391 && cp <= 0x3A9 && cp != 0x3A2) return cp + 32;
  if (cp >= 0x410 && cp <= 0x42F) return cp + 32;
  if (cp >= 0x400 && cp <= 0x40F) return cp + 80;
  return cp;
}

bool is_space_or_punct(uint32_t cp) {
  if (cp < 0x80) {
    const bool alnum = (cp >= '0' && cp <= '9') || (cp >= 'a' && cp <= 'z') ||
                       (cp >= 'A' && cp <= 'Z');
    return !alnum;  // ASCII punctuation, controls, and whitespace
  }
  if (cp >= 0xA0 && cp <= 0xBF) return true;     // Latin-1 punctuation/symbols
  if (cp == 0xD7 || cp == 0xF7) return true;     // multiplication/division signs
  if (cp >= 0x2000 && cp <= 0x206F) return true; // general punctuation
  if (cp >= 0x3000 && cp <= 0x303F) return true; // CJK punctuation
  return false;
}

std::vector<std::string> split_tokens(std::string_view normalized) {
  std::vector<std::string> tokens;
  size_t start = 0;
  while (start < normalized.size()) {
    size_t end = normalized.find(' ', start);
    if (end == std::string_view::npos) end = normalized.size();
    if (end > start) tokens.emplace_back(normalized.substr(start, end - start));
    start = end + 1;
  }
  return tokens;
}

std::string join_sorted_tokens(std::vector<std::string> tokens) {
  std::sort(tokens.begin(), tokens.end());
  std::string out;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

size_t levenshtein(const std::vector<uint32_t>& a, const std::vector<uint32_t>& b) {
  const size_t m = a.size(), n = b.size();
  if (m == 0) return n;
  if (n == 0) return m;
  std::vector<size_t> prev(n + 1), cur(n + 1);
  for (size_t j = 0; j <= n; ++j) prev[j] = j;
  for (size_t i = 1; i <= m; ++i) {
    cur[0] = i;
    for (size_t j = 1; j <= n; ++j) {
      const size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[n];
}

double sorted_similarity(const std::vector<uint32_t>& a, const std::vector<uint32_t>& b) {
  const size_t max_len = std::max(a.size(), b.size());
  if (max_len == 0) return 1.0;
  const size_t dist = levenshtein(a, b);
  return 1.0 - static_cast<double>(dist) / static_cast<double>(max_len);
}

}  // namespace

const char* map_method_name(MapMethod m) {
  switch (m) {
    case MapMethod::Uri: return "uri";
    case MapMethod::SameAs: return "same-as";
    case MapMethod::Label: return "label";
  }
  return "?";
}

void EntityMapping::merge(const EntityMapping& other) {
  for (const auto& [id, entry] : other.entries_) entries_.emplace(id, entry);
}

std::string EntityMapping::to_tsv(const KnowledgeGraph& graph) const {
  std::ostringstream os;
  os << "dataset_id\tkg_iri\tconfidence\tmethod\n";
  std::vector<uint32_t> ids;
  ids.reserve(entries_.size());
  for (const auto& [id, entry] : entries_) ids.push_back(id);
  std::sort(ids.begin(), ids.end());
  char buf[32];
  for (uint32_t id : ids) {
    const MapEntry& e = entries_.at(id);
    std::snprintf(buf, sizeof(buf), "%.6f", e.confidence);
    os << id << '\t' << graph.entity_iri(e.kg_entity) << '\t' << buf << '\t'
       << map_method_name(e.method) << '\n';
  }
  return os.str();
}

EntityMapping EntityMapping::from_tsv(const std::string& text, const KnowledgeGraph& graph) {
  EntityMapping mapping;
  std::istringstream is(text);
  std::string line;
  bool header = true;
  size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (header) {
      header = false;
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string> cols;
    size_t start = 0;
    while (true) {
      size_t tab = line.find('\t', start);
      cols.push_back(line.substr(start, tab == std::string::npos ? tab : tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (cols.size() != 4) throw ParseError("mapping TSV expects 4 columns", line_no);
    MapEntry entry;
    auto kg = graph.find_entity(cols[1]);
    if (!kg) throw ParseError("unknown KG IRI " + cols[1], line_no);
    entry.kg_entity = *kg;
    entry.confidence = std::stod(cols[2]);
    if (cols[3] == "uri")
      entry.method = MapMethod::Uri;
    else if (cols[3] == "same-as")
      entry.method = MapMethod::SameAs;
    else if (cols[3] == "label")
      entry.method = MapMethod::Label;
    else
      throw ParseError("unknown mapping method " + cols[3], line_no);
    mapping.insert(static_cast<uint32_t>(std::stoul(cols[0])), entry);
  }
  return mapping;
}

std::string normalize_label(std::string_view s) {
  const std::vector<uint32_t> cps = decode_utf8(s);
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (uint32_t cp : cps) {
    if (is_space_or_punct(cp)) {
      if (!out.empty()) pending_space = true;
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    encode_utf8(out, lower_codepoint(cp));
  }
  return out;
}

double token_sort_similarity(std::string_view a, std::string_view b) {
  const std::string sa = join_sorted_tokens(split_tokens(a));
  const std::string sb = join_sorted_tokens(split_tokens(b));
  return sorted_similarity(decode_utf8(sa), decode_utf8(sb));
}

std::string canonical_label_key(std::string_view s) {
  return join_sorted_tokens(split_tokens(normalize_label(s)));
}

LabelIndex LabelIndex::build(const KnowledgeGraph& graph) {
  LabelIndex index;
  index.degree_.resize(graph.entity_count());
  for (EntityId e = 0; e < graph.entity_count(); ++e) index.degree_[e] = graph.degree(e);

  for (EntityId e = 0; e < graph.entity_count(); ++e) {
    if (graph.is_blank(e)) continue;  // blank nodes are not mapping candidates
    for (const std::string& label : graph.labels_of(e)) {
      std::string key = canonical_label_key(label);
      if (key.empty()) continue;
      auto [it, inserted] =
          index.key_ids_.emplace(std::move(key), static_cast<uint32_t>(index.keys_.size()));
      if (inserted) {
        index.keys_.push_back(it->first);
        index.postings_.emplace_back();
      }
      index.postings_[it->second].push_back(e);
    }
  }

  for (auto& posting : index.postings_) {
    std::sort(posting.begin(), posting.end(), [&](EntityId a, EntityId b) {
      if (index.degree_[a] != index.degree_[b]) return index.degree_[a] > index.degree_[b];
      return a < b;
    });
    posting.erase(std::unique(posting.begin(), posting.end()), posting.end());
  }

  for (uint32_t kid = 0; kid < index.keys_.size(); ++kid)
    for (const std::string& tok : split_tokens(index.keys_[kid]))
      index.token_index_[tok].push_back(kid);

  return index;
}

std::optional<LabelIndex::Match> LabelIndex::pick_best(const std::vector<uint32_t>& key_ids,
                                                       double score) const {
  EntityId best = 0;
  bool have = false;
  for (uint32_t kid : key_ids) {
    for (EntityId e : postings_[kid]) {
      if (!have || degree_[e] > degree_[best] || (degree_[e] == degree_[best] && e < best)) {
        best = e;
        have = true;
      }
    }
  }
  if (!have) return std::nullopt;
  return Match{best, score};
}

std::optional<LabelIndex::Match> LabelIndex::best_match(std::string_view raw_label,
                                                        double threshold) const {
  const std::string query = canonical_label_key(raw_label);
  if (query.empty()) return std::nullopt;

  if (auto it = key_ids_.find(query); it != key_ids_.end())
    return Match{postings_[it->second][0], 1.0};
  if (threshold >= 1.0) return std::nullopt;

  const std::vector<uint32_t> qcps = decode_utf8(query);
  double best_score = 0.0;
  std::vector<uint32_t> best_keys;

  auto consider = [&](uint32_t kid) {
    const std::string& key = keys_[kid];
    // Length bound on the similarity prunes most candidates.
    const size_t klen = decode_utf8(key).size();
    const size_t max_len = std::max(qcps.size(), klen);
    const size_t diff = qcps.size() > klen ? qcps.size() - klen : klen - qcps.size();
    const double bound = 1.0 - static_cast<double>(diff) / static_cast<double>(max_len);
    if (bound < threshold || bound < best_score) return;
    const double score = sorted_similarity(qcps, decode_utf8(key));
    if (score < threshold) return;
    if (score > best_score) {
      best_score = score;
      best_keys.clear();
      best_keys.push_back(kid);
    } else if (score == best_score) {
      best_keys.push_back(kid);
    }
  };

  if (keys_.size() < kFullScanLimit) {
    for (uint32_t kid = 0; kid < keys_.size(); ++kid) consider(kid);
  } else {
    std::vector<uint32_t> seen;
    for (const std::string& tok : split_tokens(query)) {
      auto it = token_index_.find(tok);
      if (it == token_index_.end()) continue;
      for (uint32_t kid : it->second) seen.push_back(kid);
    }
    std::sort(seen.begin(), seen.end());
    seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
    for (uint32_t kid : seen) consider(kid);
  }

  if (best_keys.empty()) return std::nullopt;
  return pick_best(best_keys, best_score);
}

EntityMapping map_by_uri(const KnowledgeGraph& graph, std::span<const DatasetEntity> entities) {
  // Reverse same-as lookup: external IRI -> candidate entities.
  std::unordered_map<std::string, std::vector<EntityId>> reverse;
  for (EntityId e = 0; e < graph.entity_count(); ++e)
    for (const std::string& iri : graph.sameas_of(e)) reverse[iri].push_back(e);

  EntityMapping mapping;
  for (const DatasetEntity& ent : entities) {
    if (ent.uris.empty()) continue;
    bool mapped = false;
    for (const std::string& uri : ent.uris) {
      if (auto id = graph.find_entity(uri)) {
        mapping.insert(ent.id, MapEntry{*id, 1.0, MapMethod::Uri});
        mapped = true;
        break;
      }
    }
    if (mapped) continue;

    EntityId best = 0;
    bool have = false;
    for (const std::string& uri : ent.uris) {
      auto it = reverse.find(uri);
      if (it == reverse.end()) continue;
      for (EntityId e : it->second) {
        if (!have || graph.degree(e) > graph.degree(best) ||
            (graph.degree(e) == graph.degree(best) && e < best)) {
          best = e;
          have = true;
        }
      }
    }
    if (have) mapping.insert(ent.id, MapEntry{best, 1.0, MapMethod::SameAs});
  }
  return mapping;
}

EntityMapping map_by_label(const LabelIndex& index, std::span<const DatasetEntity> entities,
                           double threshold, const EntityMapping* skip, int threads) {
  if (!(threshold > 0.0 && threshold <= 1.0))
    throw ConfigError("label mapper threshold must lie in (0, 1]");

  std::vector<size_t> todo;
  todo.reserve(entities.size());
  for (size_t i = 0; i < entities.size(); ++i)
    if (!skip || !skip->contains(entities[i].id)) todo.push_back(i);

  std::vector<std::optional<LabelIndex::Match>> results(todo.size());
  if (threads > 1) {
#pragma omp parallel for schedule(dynamic, 16) num_threads(threads)
    for (int64_t i = 0; i < static_cast<int64_t>(todo.size()); ++i)
      results[i] = index.best_match(entities[todo[i]].label, threshold);
  } else {
    for (size_t i = 0; i < todo.size(); ++i)
      results[i] = index.best_match(entities[todo[i]].label, threshold);
  }

  EntityMapping mapping;
  for (size_t i = 0; i < todo.size(); ++i)
    if (results[i])
      mapping.insert(entities[todo[i]].id,
                     MapEntry{results[i]->entity, results[i]->score, MapMethod::Label});
  return mapping;
}

EntityMapping run_mapper_chain(const KnowledgeGraph& graph, const LabelIndex& index,
                               std::span<const DatasetEntity> entities,
                               std::span<const MapperStep> chain, int threads) {
  if (chain.empty()) throw ConfigError("mapper chain must contain at least one mapper");
  EntityMapping mapping;
  for (const MapperStep& step : chain) {
    EntityMapping next;
    switch (step.kind) {
      case MapperStep::Kind::Uri: {
        std::vector<DatasetEntity> remaining;
        for (const DatasetEntity& e : entities)
          if (!mapping.contains(e.id)) remaining.push_back(e);
        next = map_by_uri(graph, remaining);
        break;
      }
      case MapperStep::Kind::Label:
        next = map_by_label(index, entities, step.threshold, &mapping, threads);
        break;
    }
    mapping.merge(next);
  }
  return mapping;
}

}  // namespace kgeval
