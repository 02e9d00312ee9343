#pragma once

#include <cstdint>
#include <vector>

#include "bioel/data.hpp"
#include "bioel/encoder.hpp"
#include "bioel/graph.hpp"

namespace bioel {

struct TrainConfig {
  double learning_rate = 0.001;
  int batch_size = 64;
  int epochs = 20;
  double temperature = 0.05;
  std::uint64_t seed = 1;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int threads = 1;

  void validate() const;  // throws ConfigError
};

// In-batch-negatives objective: rows are L2-normalized, logits are
// cosine / temperature, and each mention's positive is its own gold name.
// Returns the mean over rows of -log softmax(logits_i)[i].
Var contrastive_loss(Var mention_vecs, Var name_vecs, double temperature);
double contrastive_loss_value(const Matd& mention_vecs, const Matd& name_vecs,
                              double temperature);

// Adam with bias correction over a store's trainable tensors; frozen tensors
// are skipped entirely.
class AdamOptimizer {
 public:
  AdamOptimizer(ParamStore& store, const TrainConfig& cfg);
  // grads[i] pairs with store[i]; frozen entries may be empty.
  void step(const std::vector<Matd>& grads);
  std::int64_t steps() const { return step_; }

 private:
  ParamStore& store_;
  TrainConfig cfg_;
  std::vector<Matd> m_;
  std::vector<Matd> v_;
  std::int64_t step_ = 0;
};

struct EpochStats {
  int epoch = 0;
  double mean_loss = 0.0;
  double wall_seconds = 0.0;
};

struct TrainResult {
  std::vector<EpochStats> epochs;
};

// Contrastive dual-encoder training. Each dataset row yields a
// (mention, primary-name) pair plus one (mention, alternative-name) pair per
// alternative; batches never repeat an entity. Deterministic given the seed,
// independent of the thread count.
TrainResult train(Encoder& model, const Dataset& train_set,
                  const std::vector<EntityRecord>& kb, const TrainConfig& cfg);

}  // namespace bioel
