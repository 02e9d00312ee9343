#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bioel/matrix.hpp"

namespace bioel {

// KB entity: unique nonempty id, one primary name, any number of alternatives.
struct EntityRecord {
  std::string id;
  std::string primary;
  std::vector<std::string> alternatives;
};

struct DatasetRow {
  std::string mention;
  std::string entity_id;
};

struct Dataset {
  std::vector<DatasetRow> rows;
  std::string split;  // train / dev / test
};

// kb.tsv: entity_id \t name \t P|A, one name per line. Exactly one P row per
// entity; malformed rows are rejected with their line number.
std::vector<EntityRecord> load_kb(const std::string& path);
void save_kb(const std::string& path, const std::vector<EntityRecord>& kb);

// dataset.tsv: mention_text \t gold_entity_id. When a KB is given, every
// gold id must resolve; offending rows are reported with line numbers.
Dataset load_dataset(const std::string& path, const std::vector<EntityRecord>* kb = nullptr,
                     const std::string& split = "");
void save_dataset(const std::string& path, const Dataset& ds);

// Embedding file: magic "EMB1", u32 V, u32 d, then V*d float32 row-major,
// little-endian.
void save_embedding(const std::string& path, const Matd& table);
Matd load_embedding(const std::string& path);

struct SyntheticCorpus {
  std::vector<EntityRecord> kb;
  Dataset train;
  Dataset dev;
  Dataset test;
  std::vector<std::string> vocab_tokens;  // covers every generated string
};

// Desk-scale corpus: pronounceable entity names plus seeded character-level
// edit variants (swap, drop, duplicate, suffix). KB alternatives and the
// train/dev/test mentions are all distinct strings; every gold id resolves.
SyntheticCorpus generate_synthetic_corpus(int n_entities, int variants_per_entity,
                                          std::uint64_t seed);

}  // namespace bioel
