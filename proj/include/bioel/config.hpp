#pragma once

#include <memory>
#include <string>

#include "bioel/encoder.hpp"
#include "bioel/rescnn.hpp"
#include "bioel/training.hpp"
#include "bioel/transformer.hpp"

namespace bioel {

// Flat key = value run configuration. Every encoder and training field has a
// key; command-line flags override file values.
struct RunConfig {
  std::string model = "rescnn";  // rescnn | transformer

  // rescnn
  std::string pooling = "max";  // max | self_attention
  int d_model = 300;
  int n_blocks = 4;
  std::vector<int> kernel_widths = {1, 3, 5};
  int filters_per_width = 100;
  int embed_dim = 768;
  bool embedding_frozen = true;
  std::string embedding_path;

  // transformer
  int tf_layers = 2;
  int tf_heads = 4;
  int tf_d_model = 128;
  int tf_ffn_hidden = 512;

  // tokenizer
  int max_len = 25;
  bool lowercase = true;
  std::string vocab_path;

  // training
  double learning_rate = 0.001;
  int batch_size = 64;
  int epochs = 20;
  double temperature = 0.05;
  std::uint64_t seed = 1;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  ResCnnConfig rescnn() const;
  TransformerConfig transformer() const;
  TrainConfig train(int threads) const;
};

// Applies one key=value; unknown keys and malformed values raise ConfigError
// naming the key.
void apply_config_entry(RunConfig& cfg, const std::string& key, const std::string& value);

// `key = value` lines, '#' comments, blank lines allowed.
RunConfig load_run_config(const std::string& path);

// Fixed-order key=value text of the effective configuration.
std::string canonical_config_text(const RunConfig& cfg);

// Fresh model per the configuration: random-init parameters (and embedding
// table, unless embedding_path supplies one).
std::unique_ptr<Encoder> build_model(const RunConfig& cfg, Vocab vocab);

// Kind-dispatched load.
std::unique_ptr<Encoder> model_from_checkpoint(const Checkpoint& ckpt);
std::unique_ptr<Encoder> model_from_checkpoint_file(const std::string& path);

}  // namespace bioel
