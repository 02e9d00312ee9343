#pragma once

#include <cstdint>

#include "bioel/encoder.hpp"

namespace bioel {

struct TransformerConfig {
  int layers = 2;
  int heads = 4;
  int d_model = 128;
  int ffn_hidden = 512;
  int max_len = 25;
  bool lowercase = true;

  int head_dim() const { return d_model / heads; }
  void validate() const;  // throws ConfigError
};

// Additive attention scope mask: entry (i, j) is 0 when |i - j| <= floor(w/2)
// and -inf otherwise, so the diagonal is never masked. On the last layer the
// [CLS] query row (and, optionally, its key column) is fully unmasked.
Matd build_scope_mask(Eigen::Index len, int window, bool last_layer, Eigen::Index cls_index = 0,
                      bool cls_column_exempt = false);

// Scaled dot-product attention over one head: softmax(q k^T / sqrt(p) + mask) v
// with p the per-head width.
Var attention(Var q, Var k, Var v, const Matd& mask);

// Small pre-LayerNorm Transformer encoder pooled at [CLS]. The scope mask is
// an evaluation-time option; training traces never set it.
class TransformerEncoder : public Encoder {
 public:
  TransformerEncoder(TransformerConfig cfg, Vocab vocab, std::uint64_t seed);
  static std::unique_ptr<TransformerEncoder> from_checkpoint(const Checkpoint& ckpt);

  const TransformerConfig& config() const { return cfg_; }
  int output_dim() const override { return cfg_.d_model; }
  bool attention_scoped() const override { return true; }
  std::uint8_t checkpoint_kind() const override { return kKindTransformer; }

  Var build_graph(Graph& g, const TokenSequence& tokens, std::span<const Var> bound,
                  const EncodeOptions& opts = {}) const override;

  Checkpoint to_checkpoint() const override;

 private:
  TransformerConfig cfg_;
  int embed_idx_ = -1, pos_idx_ = -1;
  struct LayerIdx {
    int ln1_g = -1, ln1_b = -1;
    int wq = -1, bq = -1, wk = -1, bk = -1, wv = -1, bv = -1, wo = -1, bo = -1;
    int ln2_g = -1, ln2_b = -1;
    int ffn1_w = -1, ffn1_b = -1, ffn2_w = -1, ffn2_b = -1;
  };
  std::vector<LayerIdx> layers_;
  int ln_out_g_ = -1, ln_out_b_ = -1;
  std::uint64_t seed_ = 0;
};

}  // namespace bioel
