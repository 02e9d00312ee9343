#include "bioel/index.hpp"

#include <algorithm>
#include <map>

#include "bioel/bytes.hpp"
#include "bioel/error.hpp"
#include "bioel/parallel.hpp"

namespace bioel {

namespace {

// Shared scoring kernel; using the same per-row reduction in both the tiled
// scan and the oracle keeps their scores bitwise identical.
inline float row_score(const NameIndex& index, Eigen::Index row, const Vecf& q) {
  const float s = index.vectors.row(row).dot(q);
  return std::min(1.0f, std::max(-1.0f, s));
}

constexpr Eigen::Index kScanBlock = 8192;

std::vector<float> all_scores(const Vecf& q, const NameIndex& index, int threads) {
  std::vector<float> scores(std::size_t(index.rows()));
  const Eigen::Index blocks = (index.rows() + kScanBlock - 1) / kScanBlock;
  parallel_for(std::size_t(blocks), threads, [&](std::size_t b) {
    const Eigen::Index begin = Eigen::Index(b) * kScanBlock;
    const Eigen::Index end = std::min(index.rows(), begin + kScanBlock);
    for (Eigen::Index i = begin; i < end; ++i) {
      scores[std::size_t(i)] = row_score(index, i, q);
    }
  });
  return scores;
}

}  // namespace

NameIndex build_index(const Encoder& encoder, const std::vector<EntityRecord>& kb, int threads,
                      const EncodeOptions& opts, const TokenTransform& transform) {
  if (kb.empty()) throw DataError("cannot index an empty knowledge base");
  NameIndex index;
  for (std::size_t e = 0; e < kb.size(); ++e) {
    const EntityRecord& rec = kb[e];
    if (rec.primary.empty()) throw DataError("entity " + rec.id + " has an empty name");
    index.entity_ids.push_back(rec.id);
    index.names.push_back(rec.primary);
    index.owner.push_back(int(e));
    for (const std::string& alt : rec.alternatives) {
      if (alt.empty()) throw DataError("entity " + rec.id + " has an empty name");
      index.names.push_back(alt);
      index.owner.push_back(int(e));
    }
  }
  const Eigen::Index m = Eigen::Index(index.names.size());
  index.vectors.resize(m, encoder.output_dim());
  parallel_for(std::size_t(m), threads, [&](std::size_t row) {
    TokenSequence toks = encoder.tokenize(index.names[row]);
    if (transform) toks = transform(toks, row);
    const Vecf unit = to_unit_query(encoder.encode_tokens(toks, opts));
    index.vectors.row(Eigen::Index(row)) = unit.transpose();
  });
  index.fingerprint = encoder.fingerprint();
  return index;
}

Vecf to_unit_query(const Matd& raw) {
  if (raw.rows() != 1) throw InvariantError("expected a single encoded vector");
  const double norm = raw.row(0).norm();
  if (norm < 1e-12) throw InvariantError("cannot normalize a zero vector");
  const Matd unit = raw / norm;
  Vecf q(raw.cols());
  for (Eigen::Index j = 0; j < raw.cols(); ++j) q(j) = float(unit(0, j));
  return q;
}

std::vector<Linked> rank_entities(const Vecf& unit_query, const NameIndex& index, int k,
                                  int threads) {
  if (k < 1) throw ConfigError("k must be at least 1");
  if (index.rows() == 0) throw DataError("empty index");
  if (unit_query.size() != index.dim()) {
    throw InvariantError("query dimension does not match the index");
  }
  const std::vector<float> scores = all_scores(unit_query, index, threads);

  // Best row per entity; earlier rows win ties because later rows only
  // replace on strictly greater scores.
  std::vector<int> best_row(index.entity_ids.size(), -1);
  for (Eigen::Index i = 0; i < index.rows(); ++i) {
    const int e = index.owner[std::size_t(i)];
    const int cur = best_row[std::size_t(e)];
    if (cur < 0 || scores[std::size_t(i)] > scores[std::size_t(cur)]) {
      best_row[std::size_t(e)] = int(i);
    }
  }
  std::vector<int> order;
  order.reserve(index.entity_ids.size());
  for (std::size_t e = 0; e < index.entity_ids.size(); ++e) {
    if (best_row[e] >= 0) order.push_back(int(e));
  }
  const std::size_t take = std::min<std::size_t>(std::size_t(k), order.size());
  auto better = [&](int a, int b) {
    const float sa = scores[std::size_t(best_row[std::size_t(a)])];
    const float sb = scores[std::size_t(best_row[std::size_t(b)])];
    if (sa != sb) return sa > sb;
    return best_row[std::size_t(a)] < best_row[std::size_t(b)];
  };
  std::partial_sort(order.begin(), order.begin() + std::ptrdiff_t(take), order.end(), better);
  std::vector<Linked> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) {
    const int e = order[i];
    const int row = best_row[std::size_t(e)];
    out.push_back(Linked{index.entity_ids[std::size_t(e)], scores[std::size_t(row)], row});
  }
  return out;
}

std::vector<Linked> brute_force_scan(const Vecf& unit_query, const NameIndex& index, int k) {
  if (k < 1) throw ConfigError("k must be at least 1");
  if (index.rows() == 0) throw DataError("empty index");
  std::vector<std::pair<float, int>> scored;
  scored.reserve(std::size_t(index.rows()));
  for (Eigen::Index i = 0; i < index.rows(); ++i) {
    scored.emplace_back(row_score(index, i, unit_query), int(i));
  }
  std::stable_sort(scored.begin(), scored.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  std::vector<Linked> out;
  std::vector<bool> taken(index.entity_ids.size(), false);
  for (const auto& [score, row] : scored) {
    const int e = index.owner[std::size_t(row)];
    if (taken[std::size_t(e)]) continue;
    taken[std::size_t(e)] = true;
    out.push_back(Linked{index.entity_ids[std::size_t(e)], score, row});
    if (int(out.size()) == k) break;
  }
  return out;
}

std::vector<Linked> link(const Encoder& encoder, const std::string& mention,
                         const NameIndex& index, int k, const EncodeOptions& opts, int threads) {
  if (mention.empty()) throw DataError("empty mention");
  return rank_entities(to_unit_query(encoder.encode(mention, opts)), index, k, threads);
}

void save_index(const std::string& path, const NameIndex& index) {
  ByteWriter w;
  w.raw("NIDX1", 5);
  w.u32(std::uint32_t(index.rows()));
  w.u32(std::uint32_t(index.dim()));
  for (Eigen::Index i = 0; i < index.rows(); ++i) {
    for (Eigen::Index j = 0; j < index.dim(); ++j) w.f32(index.vectors(i, j));
  }
  for (std::size_t i = 0; i < index.names.size(); ++i) {
    w.str(index.names[i]);
    w.str(index.entity_ids[std::size_t(index.owner[i])]);
  }
  w.raw(index.fingerprint.data(), index.fingerprint.size());
  write_file(path, w.bytes());
}

NameIndex load_index(const std::string& path) {
  const auto bytes = read_file(path);
  ByteReader r(bytes);
  char magic[5];
  r.raw(magic, 5);
  if (std::string(magic, 5) != "NIDX1") throw DataError(path + ": not an index file (bad magic)");
  const std::uint32_t m = r.u32();
  const std::uint32_t d = r.u32();
  NameIndex index;
  index.vectors.resize(m, d);
  for (std::uint32_t i = 0; i < m; ++i) {
    for (std::uint32_t j = 0; j < d; ++j) index.vectors(i, j) = r.f32();
  }
  std::map<std::string, int> ordinals;
  for (std::uint32_t i = 0; i < m; ++i) {
    index.names.push_back(r.str());
    const std::string id = r.str();
    auto it = ordinals.find(id);
    if (it == ordinals.end()) {
      it = ordinals.emplace(id, int(index.entity_ids.size())).first;
      index.entity_ids.push_back(id);
    }
    index.owner.push_back(it->second);
  }
  r.raw(index.fingerprint.data(), index.fingerprint.size());
  if (!r.done()) throw DataError(path + ": trailing bytes in index file");
  return index;
}

}  // namespace bioel
