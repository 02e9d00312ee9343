#include "bioel/transformer.hpp"

#include <cmath>
#include <limits>

#include "bioel/error.hpp"
#include "bioel/rng.hpp"

namespace bioel {

namespace {

constexpr double kInitStd = 0.02;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

Matd normal_matrix(Eigen::Index rows, Eigen::Index cols, double std, Rng& rng) {
  Matd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = std * rng.normal();
  }
  return m;
}

}  // namespace

void TransformerConfig::validate() const {
  if (layers < 1 || heads < 1 || d_model < 1 || ffn_hidden < 1) {
    throw ConfigError("transformer dimensions must be positive");
  }
  if (d_model % heads != 0) {
    throw ConfigError("d_model must be divisible by heads: " + std::to_string(d_model) + " / " +
                      std::to_string(heads));
  }
  if (max_len < 3) throw ConfigError("max_len must be at least 3");
}

Matd build_scope_mask(Eigen::Index len, int window, bool last_layer, Eigen::Index cls_index,
                      bool cls_column_exempt) {
  if (window < 1 || window % 2 == 0) {
    throw ConfigError("attention window must be odd and positive, got " + std::to_string(window));
  }
  const Eigen::Index half = window / 2;
  Matd mask(len, len);
  for (Eigen::Index i = 0; i < len; ++i) {
    for (Eigen::Index j = 0; j < len; ++j) {
      mask(i, j) = std::abs(i - j) <= half ? 0.0 : kNegInf;
    }
  }
  if (last_layer && cls_index >= 0 && cls_index < len) {
    mask.row(cls_index).setZero();
    if (cls_column_exempt) mask.col(cls_index).setZero();
  }
  return mask;
}

Var attention(Var q, Var k, Var v, const Matd& mask) {
  if (q.cols() != k.cols() || k.rows() != v.rows()) {
    throw InvariantError("attention: query/key/value shapes disagree");
  }
  const double scaling = 1.0 / std::sqrt(double(q.cols()));
  const Var logits = scale(matmul(q, transpose(k)), scaling);
  return matmul(masked_softmax(logits, mask), v);
}

TransformerEncoder::TransformerEncoder(TransformerConfig cfg, Vocab vocab, std::uint64_t seed)
    : Encoder(std::move(vocab), TokenizerConfig{cfg.lowercase, cfg.max_len}), cfg_(cfg) {
  cfg_.validate();
  Rng rng(Rng::mix(seed, 0x7472616e));
  const int d = cfg_.d_model;
  embed_idx_ = store_.add("embedding.table", normal_matrix(vocab_.size(), d, kInitStd, rng), true);
  pos_idx_ = store_.add("embedding.position", normal_matrix(cfg_.max_len, d, kInitStd, rng), true);
  for (int l = 0; l < cfg_.layers; ++l) {
    LayerIdx idx;
    const std::string p = "layer" + std::to_string(l) + ".";
    idx.ln1_g = store_.add(p + "ln1.gain", Matd::Ones(1, d), true);
    idx.ln1_b = store_.add(p + "ln1.bias", Matd::Zero(1, d), true);
    idx.wq = store_.add(p + "attn.query.weight", normal_matrix(d, d, kInitStd, rng), true);
    idx.bq = store_.add(p + "attn.query.bias", Matd::Zero(1, d), true);
    idx.wk = store_.add(p + "attn.key.weight", normal_matrix(d, d, kInitStd, rng), true);
    idx.bk = store_.add(p + "attn.key.bias", Matd::Zero(1, d), true);
    idx.wv = store_.add(p + "attn.value.weight", normal_matrix(d, d, kInitStd, rng), true);
    idx.bv = store_.add(p + "attn.value.bias", Matd::Zero(1, d), true);
    idx.wo = store_.add(p + "attn.out.weight", normal_matrix(d, d, kInitStd, rng), true);
    idx.bo = store_.add(p + "attn.out.bias", Matd::Zero(1, d), true);
    idx.ln2_g = store_.add(p + "ln2.gain", Matd::Ones(1, d), true);
    idx.ln2_b = store_.add(p + "ln2.bias", Matd::Zero(1, d), true);
    idx.ffn1_w = store_.add(p + "ffn.in.weight", normal_matrix(d, cfg_.ffn_hidden, kInitStd, rng),
                            true);
    idx.ffn1_b = store_.add(p + "ffn.in.bias", Matd::Zero(1, cfg_.ffn_hidden), true);
    idx.ffn2_w = store_.add(p + "ffn.out.weight",
                            normal_matrix(cfg_.ffn_hidden, d, kInitStd, rng), true);
    idx.ffn2_b = store_.add(p + "ffn.out.bias", Matd::Zero(1, d), true);
    layers_.push_back(idx);
  }
  ln_out_g_ = store_.add("ln_out.gain", Matd::Ones(1, d), true);
  ln_out_b_ = store_.add("ln_out.bias", Matd::Zero(1, d), true);
  seed_ = seed;
}

Var TransformerEncoder::build_graph(Graph& g, const TokenSequence& tokens,
                                    std::span<const Var> bound,
                                    const EncodeOptions& opts) const {
  const Eigen::Index len = tokens.size();
  if (len > cfg_.max_len) {
    throw InvariantError("token sequence longer than max_len");
  }
  const int p = cfg_.head_dim();
  Var x = add(gather_rows(bound[std::size_t(embed_idx_)], tokens.ids),
              slice_rows(bound[std::size_t(pos_idx_)], 0, len));

  // Padding keys are masked out everywhere; a position always sees itself,
  // so no row can end up fully masked.
  Matd pad_mask = Matd::Zero(len, len);
  for (Eigen::Index j = Eigen::Index(tokens.real_len); j < len; ++j) {
    for (Eigen::Index i = 0; i < len; ++i) {
      if (i != j) pad_mask(i, j) = kNegInf;
    }
  }

  for (int l = 0; l < cfg_.layers; ++l) {
    const LayerIdx& idx = layers_[std::size_t(l)];
    Matd mask = pad_mask;
    if (opts.attention_window != 0) {
      const Matd scope = build_scope_mask(len, opts.attention_window, l + 1 == cfg_.layers, 0,
                                          opts.cls_column_exempt);
      for (Eigen::Index i = 0; i < len; ++i) {
        for (Eigen::Index j = 0; j < len; ++j) {
          if (scope(i, j) == kNegInf) mask(i, j) = kNegInf;
        }
      }
    }
    const Var a = layer_norm(x, bound[std::size_t(idx.ln1_g)], bound[std::size_t(idx.ln1_b)]);
    const Var q = linear(a, bound[std::size_t(idx.wq)], bound[std::size_t(idx.bq)]);
    const Var k = linear(a, bound[std::size_t(idx.wk)], bound[std::size_t(idx.bk)]);
    const Var v = linear(a, bound[std::size_t(idx.wv)], bound[std::size_t(idx.bv)]);
    std::vector<Var> heads;
    heads.reserve(std::size_t(cfg_.heads));
    for (int h = 0; h < cfg_.heads; ++h) {
      heads.push_back(attention(slice_cols(q, Eigen::Index(h) * p, p),
                                slice_cols(k, Eigen::Index(h) * p, p),
                                slice_cols(v, Eigen::Index(h) * p, p), mask));
    }
    x = add(x, linear(concat_cols(heads), bound[std::size_t(idx.wo)], bound[std::size_t(idx.bo)]));
    const Var f = layer_norm(x, bound[std::size_t(idx.ln2_g)], bound[std::size_t(idx.ln2_b)]);
    const Var hidden = relu(linear(f, bound[std::size_t(idx.ffn1_w)], bound[std::size_t(idx.ffn1_b)]));
    x = add(x, linear(hidden, bound[std::size_t(idx.ffn2_w)], bound[std::size_t(idx.ffn2_b)]));
  }
  x = layer_norm(x, bound[std::size_t(ln_out_g_)], bound[std::size_t(ln_out_b_)]);
  return slice_rows(x, 0, 1);  // final hidden state at [CLS]
}

Checkpoint TransformerEncoder::to_checkpoint() const {
  Checkpoint ckpt;
  ckpt.kind = kKindTransformer;
  ckpt.config["d_model"] = std::to_string(cfg_.d_model);
  ckpt.config["ffn_hidden"] = std::to_string(cfg_.ffn_hidden);
  ckpt.config["heads"] = std::to_string(cfg_.heads);
  ckpt.config["layers"] = std::to_string(cfg_.layers);
  ckpt.config["lowercase"] = cfg_.lowercase ? "true" : "false";
  ckpt.config["max_len"] = std::to_string(cfg_.max_len);
  ckpt.config["seed"] = std::to_string(seed_);
  ckpt.config["vocab"] = join_vocab(vocab_);
  ckpt.tensors = tensor_blobs();
  return ckpt;
}

std::unique_ptr<TransformerEncoder> TransformerEncoder::from_checkpoint(const Checkpoint& ckpt) {
  if (ckpt.kind != kKindTransformer) {
    throw DataError("checkpoint holds a different model kind (expected the transformer)");
  }
  TransformerConfig cfg;
  cfg.d_model = int(config_int(ckpt.config, "d_model"));
  cfg.ffn_hidden = int(config_int(ckpt.config, "ffn_hidden"));
  cfg.heads = int(config_int(ckpt.config, "heads"));
  cfg.layers = int(config_int(ckpt.config, "layers"));
  cfg.lowercase = config_bool(ckpt.config, "lowercase");
  cfg.max_len = int(config_int(ckpt.config, "max_len"));
  Vocab vocab = split_vocab(config_get(ckpt.config, "vocab"));
  const std::uint64_t seed = config_u64(ckpt.config, "seed");
  auto model = std::make_unique<TransformerEncoder>(cfg, std::move(vocab), seed);
  model->load_tensors(ckpt.tensors);
  return model;
}

}  // namespace bioel
