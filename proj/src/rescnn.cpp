#include "bioel/rescnn.hpp"

#include <limits>

#include "bioel/error.hpp"
#include "bioel/rng.hpp"

namespace bioel {

namespace {

constexpr double kInitStd = 0.02;

Matd normal_matrix(Eigen::Index rows, Eigen::Index cols, double std, Rng& rng) {
  Matd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = std * rng.normal();
  }
  return m;
}

std::string widths_csv(const std::vector<int>& widths) {
  std::string s;
  for (std::size_t i = 0; i < widths.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(widths[i]);
  }
  return s;
}

}  // namespace

void ResCnnConfig::validate() const {
  if (embed_dim < 1 || d_model < 1 || n_blocks < 0 || filters_per_width < 1) {
    throw ConfigError("encoder dimensions must be positive");
  }
  if (kernel_widths.empty()) throw ConfigError("at least one kernel width is required");
  for (int k : kernel_widths) {
    if (k < 1 || k % 2 == 0) {
      throw ConfigError("kernel widths must be odd and positive, got " + std::to_string(k));
    }
  }
  if (int(kernel_widths.size()) * filters_per_width != d_model) {
    throw ConfigError("filters_per_width * number of widths must equal d_model (residual "
                      "addition requires it): " +
                      std::to_string(filters_per_width) + " * " +
                      std::to_string(kernel_widths.size()) + " != " + std::to_string(d_model));
  }
  if (max_len < 3) throw ConfigError("max_len must be at least 3");
}

long long rescnn_parameter_count(const ResCnnConfig& cfg) {
  const long long d = cfg.d_model;
  long long per_block = 0;
  for (int k : cfg.kernel_widths) per_block += (long long)k * d * cfg.filters_per_width;
  per_block += (long long)cfg.kernel_widths.size() * cfg.filters_per_width;  // conv biases
  per_block += d * d + d;                                                    // position-wise map
  long long total = (long long)cfg.embed_dim * d + d + cfg.n_blocks * per_block;
  if (cfg.pooling == Pooling::kSelfAttention) total += d * d + d + d;
  return total;
}

ResCnnEncoder::ResCnnEncoder(ResCnnConfig cfg, Vocab vocab, Matd embedding, std::uint64_t seed)
    : Encoder(std::move(vocab), TokenizerConfig{cfg.lowercase, cfg.max_len}), cfg_(cfg) {
  cfg_.validate();
  if (embedding.rows() != vocab_.size() || embedding.cols() != cfg_.embed_dim) {
    throw DataError("embedding table is " + std::to_string(embedding.rows()) + "x" +
                    std::to_string(embedding.cols()) + ", expected " +
                    std::to_string(vocab_.size()) + "x" + std::to_string(cfg_.embed_dim));
  }
  Rng rng(Rng::mix(seed, 0x7265736e));
  embed_idx_ = store_.add("embedding.table", std::move(embedding), !cfg_.embedding_frozen);
  proj_w_ = store_.add("proj.weight", normal_matrix(cfg_.embed_dim, cfg_.d_model, kInitStd, rng),
                       true);
  proj_b_ = store_.add("proj.bias", Matd::Zero(1, cfg_.d_model), true);
  for (int b = 0; b < cfg_.n_blocks; ++b) {
    BlockIdx idx;
    const std::string prefix = "block" + std::to_string(b) + ".";
    for (int k : cfg_.kernel_widths) {
      const std::string conv = prefix + "conv" + std::to_string(k) + ".";
      idx.conv_w.push_back(store_.add(
          conv + "weight",
          normal_matrix(Eigen::Index(k) * cfg_.d_model, cfg_.filters_per_width, kInitStd, rng),
          true));
      idx.conv_b.push_back(store_.add(conv + "bias", Matd::Zero(1, cfg_.filters_per_width), true));
    }
    idx.ffn_w = store_.add(prefix + "ffn.weight",
                           normal_matrix(cfg_.d_model, cfg_.d_model, kInitStd, rng), true);
    idx.ffn_b = store_.add(prefix + "ffn.bias", Matd::Zero(1, cfg_.d_model), true);
    blocks_.push_back(idx);
  }
  if (cfg_.pooling == Pooling::kSelfAttention) {
    pool_w_ = store_.add("pool.weight", normal_matrix(cfg_.d_model, cfg_.d_model, kInitStd, rng),
                         true);
    pool_b_ = store_.add("pool.bias", Matd::Zero(1, cfg_.d_model), true);
    pool_ctx_ = store_.add("pool.context", normal_matrix(1, cfg_.d_model, kInitStd, rng), true);
  }
  seed_ = seed;
}

std::unique_ptr<ResCnnEncoder> ResCnnEncoder::random_init(ResCnnConfig cfg, Vocab vocab,
                                                          std::uint64_t seed) {
  Rng rng(Rng::mix(seed, 0x656d6264));
  Matd table = normal_matrix(vocab.size(), cfg.embed_dim, kInitStd, rng);
  return std::make_unique<ResCnnEncoder>(std::move(cfg), std::move(vocab), std::move(table),
                                         seed);
}

Var ResCnnEncoder::encoding_block(int block, Var h, std::span<const Var> bound) const {
  const BlockIdx& idx = blocks_[std::size_t(block)];
  std::vector<Var> convs;
  convs.reserve(cfg_.kernel_widths.size());
  for (std::size_t w = 0; w < cfg_.kernel_widths.size(); ++w) {
    convs.push_back(conv1d_same(h, bound[std::size_t(idx.conv_w[w])],
                                bound[std::size_t(idx.conv_b[w])], cfg_.kernel_widths[w]));
  }
  const Var activated = relu(concat_cols(convs));
  const Var mapped = linear(activated, bound[std::size_t(idx.ffn_w)], bound[std::size_t(idx.ffn_b)]);
  return add(h, mapped);
}

Var ResCnnEncoder::build_graph(Graph& g, const TokenSequence& tokens, std::span<const Var> bound,
                               const EncodeOptions& opts) const {
  if (opts.attention_window != 0) {
    throw ConfigError("attention scope restriction requires an attention encoder; this model "
                      "has no attention to restrict");
  }
  const Var emb = gather_rows(bound[std::size_t(embed_idx_)], tokens.ids);
  Var h = linear(emb, bound[std::size_t(proj_w_)], bound[std::size_t(proj_b_)]);
  const bool padded = tokens.padding() > 0;
  const std::vector<bool> real = tokens.real_mask();
  // Padding rows are zeroed before and after every block so they behave
  // exactly like the convolution's zero padding.
  if (padded) h = mask_rows(h, real);
  for (int b = 0; b < cfg_.n_blocks; ++b) {
    h = encoding_block(b, h, bound);
    if (padded) h = mask_rows(h, real);
  }
  const std::vector<bool> content = tokens.content_mask();
  bool any = false;
  for (bool f : content) any = any || f;
  if (!any) throw InvariantError("no content positions to pool over");
  if (cfg_.pooling == Pooling::kMax) {
    return pool_max(h, content);
  }
  const Var scores =
      matmul(bioel::tanh(linear(h, bound[std::size_t(pool_w_)], bound[std::size_t(pool_b_)])),
             transpose(bound[std::size_t(pool_ctx_)]));
  Matd mask(1, h.rows());
  for (Eigen::Index i = 0; i < h.rows(); ++i) {
    mask(0, i) = content[std::size_t(i)] ? 0.0 : -std::numeric_limits<double>::infinity();
  }
  const Var weights = masked_softmax(transpose(scores), mask);
  return matmul(weights, h);
}

Checkpoint ResCnnEncoder::to_checkpoint() const {
  Checkpoint ckpt;
  ckpt.kind = kKindResCnn;
  ckpt.config["d_model"] = std::to_string(cfg_.d_model);
  ckpt.config["embed_dim"] = std::to_string(cfg_.embed_dim);
  ckpt.config["embedding_frozen"] = cfg_.embedding_frozen ? "true" : "false";
  ckpt.config["filters_per_width"] = std::to_string(cfg_.filters_per_width);
  ckpt.config["kernel_widths"] = widths_csv(cfg_.kernel_widths);
  ckpt.config["lowercase"] = cfg_.lowercase ? "true" : "false";
  ckpt.config["max_len"] = std::to_string(cfg_.max_len);
  ckpt.config["n_blocks"] = std::to_string(cfg_.n_blocks);
  ckpt.config["pooling"] = cfg_.pooling == Pooling::kMax ? "max" : "self_attention";
  ckpt.config["seed"] = std::to_string(seed_);
  ckpt.config["vocab"] = join_vocab(vocab_);
  ckpt.tensors = tensor_blobs();
  return ckpt;
}

std::unique_ptr<ResCnnEncoder> ResCnnEncoder::from_checkpoint(const Checkpoint& ckpt) {
  if (ckpt.kind != kKindResCnn) {
    throw DataError("checkpoint holds a different model kind (expected the convolutional "
                    "encoder)");
  }
  ResCnnConfig cfg;
  cfg.d_model = int(config_int(ckpt.config, "d_model"));
  cfg.embed_dim = int(config_int(ckpt.config, "embed_dim"));
  cfg.embedding_frozen = config_bool(ckpt.config, "embedding_frozen");
  cfg.filters_per_width = int(config_int(ckpt.config, "filters_per_width"));
  cfg.kernel_widths = config_int_list(ckpt.config, "kernel_widths");
  cfg.lowercase = config_bool(ckpt.config, "lowercase");
  cfg.max_len = int(config_int(ckpt.config, "max_len"));
  cfg.n_blocks = int(config_int(ckpt.config, "n_blocks"));
  const std::string& pooling = config_get(ckpt.config, "pooling");
  if (pooling == "max") {
    cfg.pooling = Pooling::kMax;
  } else if (pooling == "self_attention") {
    cfg.pooling = Pooling::kSelfAttention;
  } else {
    throw DataError("unknown pooling in checkpoint: " + pooling);
  }
  Vocab vocab = split_vocab(config_get(ckpt.config, "vocab"));
  const std::uint64_t seed = config_u64(ckpt.config, "seed");
  Matd table = Matd::Zero(vocab.size(), cfg.embed_dim);
  auto model = std::make_unique<ResCnnEncoder>(cfg, std::move(vocab), std::move(table), seed);
  model->load_tensors(ckpt.tensors);
  return model;
}

}  // namespace bioel
