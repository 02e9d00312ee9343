#include "bioel/training.hpp"

#include <chrono>
#include <cmath>
#include <deque>
#include <map>
#include <set>

#include "bioel/error.hpp"
#include "bioel/parallel.hpp"
#include "bioel/rng.hpp"

namespace bioel {

namespace {

// Fixed number of gradient accumulation shards. Items map to shards by index
// alone, and shards reduce in index order, so sums are independent of how
// many worker threads actually run.
constexpr std::size_t kGradShards = 8;

}  // namespace

void TrainConfig::validate() const {
  if (learning_rate < 0.0) throw ConfigError("learning rate must be non-negative");
  if (batch_size < 2) throw ConfigError("batch size must be at least 2 for in-batch negatives");
  if (epochs < 1) throw ConfigError("epochs must be positive");
  if (temperature <= 0.0) throw ConfigError("temperature must be positive");
  if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0) {
    throw ConfigError("Adam betas must lie in [0, 1)");
  }
  if (epsilon <= 0.0) throw ConfigError("Adam epsilon must be positive");
}

Var contrastive_loss(Var mention_vecs, Var name_vecs, double temperature) {
  if (temperature <= 0.0) throw ConfigError("temperature must be positive");
  if (mention_vecs.rows() != name_vecs.rows() || mention_vecs.cols() != name_vecs.cols()) {
    throw InvariantError("contrastive_loss: batch shapes disagree");
  }
  if (mention_vecs.rows() < 1) throw InvariantError("contrastive_loss: empty batch");
  const Var m = row_l2_normalize(mention_vecs);
  const Var n = row_l2_normalize(name_vecs);
  const Var logits = scale(matmul(m, transpose(n)), 1.0 / temperature);
  return diagonal_nll(logits);
}

double contrastive_loss_value(const Matd& mention_vecs, const Matd& name_vecs,
                              double temperature) {
  Graph g;
  return contrastive_loss(g.input(mention_vecs), g.input(name_vecs), temperature).value()(0, 0);
}

AdamOptimizer::AdamOptimizer(ParamStore& store, const TrainConfig& cfg)
    : store_(store), cfg_(cfg) {
  m_.resize(std::size_t(store_.size()));
  v_.resize(std::size_t(store_.size()));
  for (int i = 0; i < store_.size(); ++i) {
    if (!store_.trainable(i)) continue;
    m_[std::size_t(i)] = Matd::Zero(store_[i].rows(), store_[i].cols());
    v_[std::size_t(i)] = Matd::Zero(store_[i].rows(), store_[i].cols());
  }
}

void AdamOptimizer::step(const std::vector<Matd>& grads) {
  if (int(grads.size()) != store_.size()) {
    throw InvariantError("adam step: gradient count does not match the parameter store");
  }
  ++step_;
  const double bias1 = 1.0 - std::pow(cfg_.beta1, double(step_));
  const double bias2 = 1.0 - std::pow(cfg_.beta2, double(step_));
  for (int i = 0; i < store_.size(); ++i) {
    if (!store_.trainable(i)) continue;
    const Matd& g = grads[std::size_t(i)];
    Matd& value = store_[i];
    if (g.rows() != value.rows() || g.cols() != value.cols()) {
      throw InvariantError("adam step: gradient shape mismatch for " + store_.name(i));
    }
    Matd& m = m_[std::size_t(i)];
    Matd& v = v_[std::size_t(i)];
    m = cfg_.beta1 * m + (1.0 - cfg_.beta1) * g;
    v = cfg_.beta2 * v + (1.0 - cfg_.beta2) * g.array().square().matrix();
    value.array() -= cfg_.learning_rate * (m.array() / bias1) /
                     ((v.array() / bias2).sqrt() + cfg_.epsilon);
  }
}

namespace {

struct TrainRow {
  TokenSequence mention;
  TokenSequence name;
  int entity = 0;
};

struct ItemTrace {
  Graph graph;
  Var joint;  // 2 x d: mention vector stacked on name vector
};

}  // namespace

TrainResult train(Encoder& model, const Dataset& train_set, const std::vector<EntityRecord>& kb,
                  const TrainConfig& cfg) {
  cfg.validate();
  if (train_set.rows.empty()) throw DataError("empty training set");
  std::map<std::string, int> entity_ord;
  for (std::size_t e = 0; e < kb.size(); ++e) entity_ord.emplace(kb[e].id, int(e));

  // Each dataset row trains against the gold primary name, plus one extra
  // row per alternative name.
  std::vector<TrainRow> rows;
  for (const DatasetRow& row : train_set.rows) {
    auto it = entity_ord.find(row.entity_id);
    if (it == entity_ord.end()) {
      throw DataError("training row references unknown entity " + row.entity_id);
    }
    const EntityRecord& rec = kb[std::size_t(it->second)];
    TokenSequence mention = model.tokenize(row.mention);
    rows.push_back(TrainRow{mention, model.tokenize(rec.primary), it->second});
    for (const std::string& alt : rec.alternatives) {
      rows.push_back(TrainRow{mention, model.tokenize(alt), it->second});
    }
  }

  ParamStore& store = model.store_mut();
  AdamOptimizer adam(store, cfg);
  const int d = model.output_dim();

  // Per-shard gradient buffers plus the reduced per-step gradient.
  std::vector<std::vector<Matd>> shard(kGradShards);
  std::vector<Matd> grads(std::size_t(store.size()));
  for (auto& s : shard) s.resize(std::size_t(store.size()));
  for (int i = 0; i < store.size(); ++i) {
    if (!store.trainable(i)) continue;
    grads[std::size_t(i)] = Matd::Zero(store[i].rows(), store[i].cols());
    for (auto& s : shard) s[std::size_t(i)] = Matd::Zero(store[i].rows(), store[i].cols());
  }

  TrainResult result;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    Rng rng(Rng::mix(cfg.seed, std::uint64_t(epoch)));
    std::vector<std::size_t> order(rows.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[std::size_t(rng.below(i))]);
    }

    // Batches never hold two rows with the same entity: duplicate gold names
    // inside a batch would be false negatives for the loss.
    std::vector<std::vector<std::size_t>> batches;
    std::deque<std::size_t> deferred;
    std::size_t at = 0;
    while (at < order.size() || !deferred.empty()) {
      std::vector<std::size_t> batch;
      std::set<int> seen;
      for (std::size_t scan = 0; scan < deferred.size() && int(batch.size()) < cfg.batch_size;) {
        const std::size_t row = deferred[scan];
        if (seen.insert(rows[row].entity).second) {
          batch.push_back(row);
          deferred.erase(deferred.begin() + std::ptrdiff_t(scan));
        } else {
          ++scan;
        }
      }
      while (at < order.size() && int(batch.size()) < cfg.batch_size) {
        const std::size_t row = order[at++];
        if (seen.insert(rows[row].entity).second) {
          batch.push_back(row);
        } else {
          deferred.push_back(row);
        }
      }
      batches.push_back(std::move(batch));
    }

    double loss_sum = 0.0;
    std::size_t loss_rows = 0;
    for (const auto& batch : batches) {
      const std::size_t b = batch.size();
      if (b < 2) continue;  // a single row carries no in-batch negatives

      std::vector<ItemTrace> traces(b);
      std::vector<std::vector<Var>> bound(b);
      const std::size_t shard_size = (b + kGradShards - 1) / kGradShards;

      parallel_for(kGradShards, cfg.threads, [&](std::size_t s) {
        for (std::size_t item = s * shard_size; item < std::min(b, (s + 1) * shard_size);
             ++item) {
          const TrainRow& row = rows[batch[item]];
          ItemTrace& trace = traces[item];
          std::vector<Var>& vars = bound[item];
          vars.reserve(std::size_t(store.size()));
          for (int i = 0; i < store.size(); ++i) {
            Matd* sink = store.trainable(i) ? &shard[s][std::size_t(i)] : nullptr;
            vars.push_back(trace.graph.param(store[i], sink));
          }
          const Var mention = model.build_graph(trace.graph, row.mention, vars);
          const Var name = model.build_graph(trace.graph, row.name, vars);
          trace.joint = concat_rows({mention, name});
        }
      });

      Matd mention_vecs(Eigen::Index(b), d);
      Matd name_vecs(Eigen::Index(b), d);
      for (std::size_t item = 0; item < b; ++item) {
        mention_vecs.row(Eigen::Index(item)) = traces[item].joint.value().row(0);
        name_vecs.row(Eigen::Index(item)) = traces[item].joint.value().row(1);
      }
      Graph head;
      const Var m = head.input(mention_vecs, true);
      const Var n = head.input(name_vecs, true);
      const Var loss = contrastive_loss(m, n, cfg.temperature);
      head.backward(loss);
      loss_sum += loss.value()(0, 0) * double(b);
      loss_rows += b;

      const Matd& dm = m.grad();
      const Matd& dn = n.grad();
      parallel_for(kGradShards, cfg.threads, [&](std::size_t s) {
        for (std::size_t item = s * shard_size; item < std::min(b, (s + 1) * shard_size);
             ++item) {
          Matd seed(2, d);
          seed.row(0) = dm.row(Eigen::Index(item));
          seed.row(1) = dn.row(Eigen::Index(item));
          traces[item].graph.backward(traces[item].joint, seed);
        }
      });

      for (int i = 0; i < store.size(); ++i) {
        if (!store.trainable(i)) continue;
        Matd& g = grads[std::size_t(i)];
        g.setZero();
        for (auto& s : shard) {
          g += s[std::size_t(i)];
          s[std::size_t(i)].setZero();
        }
      }
      adam.step(grads);
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.mean_loss = loss_rows ? loss_sum / double(loss_rows) : 0.0;
    stats.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    result.epochs.push_back(stats);
  }
  return result;
}

}  // namespace bioel
