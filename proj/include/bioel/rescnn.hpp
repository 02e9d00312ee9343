#pragma once

#include <cstdint>

#include "bioel/encoder.hpp"

namespace bioel {

enum class Pooling { kMax, kSelfAttention };

struct ResCnnConfig {
  int embed_dim = 768;
  int d_model = 300;
  int n_blocks = 4;
  std::vector<int> kernel_widths = {1, 3, 5};
  int filters_per_width = 100;
  Pooling pooling = Pooling::kMax;
  int max_len = 25;
  bool lowercase = true;
  bool embedding_frozen = true;

  void validate() const;  // throws ConfigError
};

// Trainable parameters of the default configuration, frozen embedding table
// excluded: the input projection, every block's filter banks and
// position-wise map, and the self-attention pooling head when selected.
long long rescnn_parameter_count(const ResCnnConfig& cfg);

// Residual convolutional text encoder: frozen (or trainable) token
// embeddings, a projection to d_model, n_blocks residual encoding blocks
// (parallel odd-width convolutions, ReLU, position-wise linear map, skip
// connection) and a pooling head over content positions. encode() returns
// the raw, unnormalized vector.
class ResCnnEncoder : public Encoder {
 public:
  // `embedding` is V x embed_dim; remaining weights are N(0, 0.02), biases 0.
  ResCnnEncoder(ResCnnConfig cfg, Vocab vocab, Matd embedding, std::uint64_t seed);
  // Random N(0, 0.02) embedding table as well (synthetic experiments).
  static std::unique_ptr<ResCnnEncoder> random_init(ResCnnConfig cfg, Vocab vocab,
                                                    std::uint64_t seed);
  static std::unique_ptr<ResCnnEncoder> from_checkpoint(const Checkpoint& ckpt);

  const ResCnnConfig& config() const { return cfg_; }
  int output_dim() const override { return cfg_.d_model; }
  std::uint8_t checkpoint_kind() const override { return kKindResCnn; }

  Var build_graph(Graph& g, const TokenSequence& tokens, std::span<const Var> bound,
                  const EncodeOptions& opts = {}) const override;

  // One encoding block applied to an L x d_model state (exposed for tests).
  Var encoding_block(int block, Var h, std::span<const Var> bound) const;

  Checkpoint to_checkpoint() const override;

 private:
  ResCnnConfig cfg_;
  int embed_idx_ = -1;
  int proj_w_ = -1, proj_b_ = -1;
  struct BlockIdx {
    std::vector<int> conv_w, conv_b;  // per kernel width
    int ffn_w = -1, ffn_b = -1;
  };
  std::vector<BlockIdx> blocks_;
  int pool_w_ = -1, pool_b_ = -1, pool_ctx_ = -1;
  std::uint64_t seed_ = 0;
};

}  // namespace bioel
