#include "bioel/data.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "bioel/bytes.hpp"
#include "bioel/error.hpp"
#include "bioel/rng.hpp"

namespace bioel {

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  if (in.bad()) throw DataError("error reading file: " + path);
  return lines;
}

}  // namespace

std::vector<EntityRecord> load_kb(const std::string& path) {
  const std::vector<std::string> lines = read_lines(path);
  std::vector<EntityRecord> kb;
  std::map<std::string, std::size_t> by_id;
  std::set<std::string> has_primary;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    if (line.empty()) continue;
    const std::string where = path + ":" + std::to_string(i + 1);
    const auto fields = split_tabs(line);
    if (fields.size() != 3) {
      throw DataError(where + ": expected entity_id<TAB>name<TAB>P|A");
    }
    const std::string& id = fields[0];
    const std::string& name = fields[1];
    const std::string& role = fields[2];
    if (id.empty()) throw DataError(where + ": empty entity id");
    if (name.empty()) throw DataError(where + ": empty name");
    if (role != "P" && role != "A") {
      throw DataError(where + ": name role must be P or A, got \"" + role + "\"");
    }
    auto it = by_id.find(id);
    if (it == by_id.end()) {
      it = by_id.emplace(id, kb.size()).first;
      kb.push_back(EntityRecord{id, "", {}});
    }
    EntityRecord& rec = kb[it->second];
    if (role == "P") {
      if (!has_primary.insert(id).second) {
        throw DataError(where + ": entity " + id + " has more than one primary name");
      }
      rec.primary = name;
    } else {
      rec.alternatives.push_back(name);
    }
  }
  if (kb.empty()) throw DataError(path + ": empty knowledge base");
  for (const EntityRecord& rec : kb) {
    if (rec.primary.empty()) {
      throw DataError(path + ": entity " + rec.id + " has no primary name");
    }
  }
  return kb;
}

void save_kb(const std::string& path, const std::vector<EntityRecord>& kb) {
  std::ostringstream out;
  for (const EntityRecord& rec : kb) {
    out << rec.id << '\t' << rec.primary << "\tP\n";
    for (const std::string& alt : rec.alternatives) {
      out << rec.id << '\t' << alt << "\tA\n";
    }
  }
  write_text_file(path, out.str());
}

Dataset load_dataset(const std::string& path, const std::vector<EntityRecord>* kb,
                     const std::string& split) {
  const std::vector<std::string> lines = read_lines(path);
  Dataset ds;
  ds.split = split;
  std::set<std::string> known;
  if (kb) {
    for (const EntityRecord& rec : *kb) known.insert(rec.id);
  }
  std::string unresolved;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    if (line.empty()) continue;
    const std::string where = path + ":" + std::to_string(i + 1);
    const auto fields = split_tabs(line);
    if (fields.size() != 2 || fields[0].empty() || fields[1].empty()) {
      throw DataError(where + ": expected mention_text<TAB>gold_entity_id");
    }
    if (kb && known.count(fields[1]) == 0) {
      unresolved += (unresolved.empty() ? "" : "; ") + where + ": unknown entity " + fields[1];
    }
    ds.rows.push_back(DatasetRow{fields[0], fields[1]});
  }
  if (!unresolved.empty()) {
    throw DataError("unresolvable gold entity ids: " + unresolved);
  }
  if (ds.rows.empty()) throw DataError(path + ": empty dataset");
  return ds;
}

void save_dataset(const std::string& path, const Dataset& ds) {
  std::ostringstream out;
  for (const DatasetRow& row : ds.rows) {
    out << row.mention << '\t' << row.entity_id << '\n';
  }
  write_text_file(path, out.str());
}

void save_embedding(const std::string& path, const Matd& table) {
  ByteWriter w;
  w.raw("EMB1", 4);
  w.u32(std::uint32_t(table.rows()));
  w.u32(std::uint32_t(table.cols()));
  for (Eigen::Index i = 0; i < table.rows(); ++i) {
    for (Eigen::Index j = 0; j < table.cols(); ++j) {
      w.f32(float(table(i, j)));
    }
  }
  write_file(path, w.bytes());
}

Matd load_embedding(const std::string& path) {
  const auto bytes = read_file(path);
  ByteReader r(bytes);
  char magic[4];
  r.raw(magic, 4);
  if (std::string(magic, 4) != "EMB1") {
    throw DataError(path + ": not an embedding file (bad magic)");
  }
  const std::uint32_t rows = r.u32();
  const std::uint32_t cols = r.u32();
  Matd table(rows, cols);
  for (std::uint32_t i = 0; i < rows; ++i) {
    for (std::uint32_t j = 0; j < cols; ++j) {
      table(i, j) = double(r.f32());
    }
  }
  if (!r.done()) throw DataError(path + ": trailing bytes in embedding file");
  return table;
}

namespace {

const char* kOnsets[] = {"b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z"};
const char* kVowels[] = {"a", "e", "i", "o", "u"};
const char* kCodas[] = {"", "", "n", "r", "s", "l"};

std::string random_name(Rng& rng) {
  const int syllables = 2 + int(rng.below(2));  // 2-3 syllables
  std::string name;
  for (int s = 0; s < syllables; ++s) {
    name += kOnsets[rng.below(std::size(kOnsets))];
    name += kVowels[rng.below(std::size(kVowels))];
    if (s + 1 == syllables) name += kCodas[rng.below(std::size(kCodas))];
  }
  return name;
}

std::string edited(const std::string& base, Rng& rng) {
  std::string s = base;
  const int edits = 1 + int(rng.below(2));  // 1-2 edits
  for (int e = 0; e < edits; ++e) {
    switch (rng.below(4)) {
      case 0: {  // swap adjacent characters
        if (s.size() >= 2) {
          const std::size_t i = rng.below(s.size() - 1);
          std::swap(s[i], s[i + 1]);
        }
        break;
      }
      case 1: {  // drop a character
        if (s.size() >= 2) s.erase(rng.below(s.size()), 1);
        break;
      }
      case 2: {  // duplicate a character
        const std::size_t i = rng.below(s.size());
        s.insert(i, 1, s[i]);
        break;
      }
      default: {  // append a suffix character
        s += kVowels[rng.below(std::size(kVowels))];
        break;
      }
    }
  }
  return s;
}

// Distinct-from-everything variant; falls back to deterministic suffixes if
// random edits keep colliding.
std::string fresh_variant(const std::string& base, Rng& rng, std::set<std::string>& used) {
  for (int attempt = 0; attempt < 64; ++attempt) {
    std::string v = edited(base, rng);
    if (!v.empty() && used.insert(v).second) return v;
  }
  for (int k = 0;; ++k) {
    std::string v = base + kVowels[k % std::size(kVowels)] + std::to_string(k);
    if (used.insert(v).second) return v;
  }
}

}  // namespace

SyntheticCorpus generate_synthetic_corpus(int n_entities, int variants_per_entity,
                                          std::uint64_t seed) {
  if (n_entities < 2) throw ConfigError("synthetic corpus needs at least 2 entities");
  if (variants_per_entity < 1) throw ConfigError("synthetic corpus needs at least 1 variant");
  Rng rng(Rng::mix(seed, 0x636f7270));
  SyntheticCorpus corpus;
  corpus.train.split = "train";
  corpus.dev.split = "dev";
  corpus.test.split = "test";
  std::set<std::string> used;
  for (int e = 0; e < n_entities; ++e) {
    std::string primary = random_name(rng);
    while (!used.insert(primary).second) primary = random_name(rng);
    char id[16];
    std::snprintf(id, sizeof id, "E%06d", e + 1);
    EntityRecord rec{id, primary, {}};
    for (int v = 0; v < variants_per_entity; ++v) {
      rec.alternatives.push_back(fresh_variant(primary, rng, used));
    }
    for (int v = 0; v < variants_per_entity; ++v) {
      corpus.train.rows.push_back(DatasetRow{fresh_variant(primary, rng, used), rec.id});
    }
    corpus.dev.rows.push_back(DatasetRow{fresh_variant(primary, rng, used), rec.id});
    corpus.test.rows.push_back(DatasetRow{fresh_variant(primary, rng, used), rec.id});
    corpus.kb.push_back(std::move(rec));
  }

  // Vocabulary: specials, single characters with continuations, and the
  // generator's syllables so clean names tokenize into a few pieces.
  std::set<std::string> tokens;
  const std::string alphabet = "abcdefghijklmnopqrstuvwxyz0123456789";
  for (char c : alphabet) {
    tokens.insert(std::string(1, c));
    tokens.insert("##" + std::string(1, c));
  }
  for (const char* o : kOnsets) {
    for (const char* v : kVowels) {
      tokens.insert(std::string(o) + v);
      tokens.insert("##" + std::string(o) + v);
    }
  }
  corpus.vocab_tokens = {"[PAD]", "[UNK]", "[CLS]", "[SEP]"};
  corpus.vocab_tokens.insert(corpus.vocab_tokens.end(), tokens.begin(), tokens.end());
  return corpus;
}

}  // namespace bioel
