#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "bioel/checkpoint.hpp"
#include "bioel/graph.hpp"
#include "bioel/matrix.hpp"
#include "bioel/sha256.hpp"
#include "bioel/tokenizer.hpp"

namespace bioel {

// Named parameter tensors in a stable order; the order defines the layout of
// gradient buffers, optimizer state and checkpoint tensors.
class ParamStore {
 public:
  int add(std::string name, Matd value, bool trainable);
  int size() const { return int(values_.size()); }
  const Matd& operator[](int i) const { return values_[std::size_t(i)]; }
  Matd& operator[](int i) { return values_[std::size_t(i)]; }
  const std::string& name(int i) const { return names_[std::size_t(i)]; }
  bool trainable(int i) const { return trainable_[std::size_t(i)]; }
  int find(const std::string& name) const;  // -1 when absent
  long long trainable_count() const;

 private:
  std::vector<std::string> names_;
  std::vector<Matd> values_;
  std::vector<bool> trainable_;
};

struct EncodeOptions {
  // Odd attention window; 0 leaves attention unrestricted. Only attention
  // encoders accept a nonzero value.
  int attention_window = 0;
  // Also exempt the [CLS] key column (not just its query row) at the last
  // layer when the window is set.
  bool cls_column_exempt = false;
};

// Dual-encoder side: maps a text (or token sequence) to one raw vector.
class Encoder {
 public:
  virtual ~Encoder() = default;

  const Vocab& vocab() const { return vocab_; }
  const TokenizerConfig& tokenizer_config() const { return tok_cfg_; }
  TokenSequence tokenize(const std::string& text) const { return bioel::tokenize(text, vocab_, tok_cfg_); }

  Matd encode(const std::string& text, const EncodeOptions& opts = {}) const;
  Matd encode_tokens(const TokenSequence& tokens, const EncodeOptions& opts = {}) const;

  virtual int output_dim() const = 0;
  virtual bool attention_scoped() const { return false; }
  virtual std::uint8_t checkpoint_kind() const = 0;

  const ParamStore& store() const { return store_; }
  ParamStore& store_mut() { return store_; }

  // Builds the forward trace on g. `bound` holds one leaf per store entry,
  // in store order.
  virtual Var build_graph(Graph& g, const TokenSequence& tokens, std::span<const Var> bound,
                          const EncodeOptions& opts = {}) const = 0;

  virtual Checkpoint to_checkpoint() const = 0;
  // SHA-256 of the serialized checkpoint; identifies the exact parameters.
  Hash32 fingerprint() const;

 protected:
  Encoder(Vocab vocab, TokenizerConfig tok_cfg) : vocab_(std::move(vocab)), tok_cfg_(tok_cfg) {}
  std::vector<TensorBlob> tensor_blobs() const;
  void load_tensors(const std::vector<TensorBlob>& tensors);

  Vocab vocab_;
  TokenizerConfig tok_cfg_;
  ParamStore store_;
};

// Space-joined vocabulary tokens for embedding in checkpoint config text.
std::string join_vocab(const Vocab& vocab);
Vocab split_vocab(const std::string& joined);

}  // namespace bioel
