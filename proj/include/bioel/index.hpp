#pragma once

#include <functional>
#include <string>
#include <vector>

#include "bioel/data.hpp"
#include "bioel/encoder.hpp"

namespace bioel {

// Precomputed unit vectors for every KB name (primary first, then
// alternatives, in KB order). Immutable after build; cosine against unit
// rows is a plain dot product.
struct NameIndex {
  Matf vectors;                        // M x d, rows have unit L2 norm
  std::vector<std::string> names;      // row -> name string
  std::vector<int> owner;              // row -> entity ordinal
  std::vector<std::string> entity_ids; // ordinal -> entity id
  Hash32 fingerprint{};                // hash of the encoder checkpoint

  Eigen::Index rows() const { return vectors.rows(); }
  Eigen::Index dim() const { return vectors.cols(); }
};

struct Linked {
  std::string entity_id;
  float score;
  int row;  // best-scoring name row for this entity
};

// Applied to a name's token sequence before encoding (probe perturbations).
using TokenTransform =
    std::function<TokenSequence(const TokenSequence& tokens, std::size_t ordinal)>;

NameIndex build_index(const Encoder& encoder, const std::vector<EntityRecord>& kb,
                      int threads = 1, const EncodeOptions& opts = {},
                      const TokenTransform& transform = nullptr);

Vecf to_unit_query(const Matd& raw);

// Exact scan: cosine of the unit query against every row, entities
// deduplicated to their best-scoring name, ties broken by lower row index,
// top k entities returned in descending score order.
std::vector<Linked> rank_entities(const Vecf& unit_query, const NameIndex& index, int k,
                                  int threads = 1);

// Naive full-sort oracle with the identical ranking contract.
std::vector<Linked> brute_force_scan(const Vecf& unit_query, const NameIndex& index, int k);

std::vector<Linked> link(const Encoder& encoder, const std::string& mention,
                         const NameIndex& index, int k, const EncodeOptions& opts = {},
                         int threads = 1);

// Index persistence: magic "NIDX1", u32 M, u32 d, float32 unit-vector rows,
// length-prefixed (name, entity id) pairs, 32-byte encoder fingerprint.
void save_index(const std::string& path, const NameIndex& index);
NameIndex load_index(const std::string& path);

}  // namespace bioel
