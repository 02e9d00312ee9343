#include "bioel/encoder.hpp"

#include <cctype>
#include <set>
#include <sstream>

#include "bioel/error.hpp"

namespace bioel {

int ParamStore::add(std::string name, Matd value, bool trainable) {
  if (find(name) >= 0) throw InvariantError("duplicate parameter name: " + name);
  names_.push_back(std::move(name));
  values_.push_back(std::move(value));
  trainable_.push_back(trainable);
  return int(values_.size()) - 1;
}

int ParamStore::find(const std::string& name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return int(i);
  }
  return -1;
}

long long ParamStore::trainable_count() const {
  long long count = 0;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (trainable_[i]) count += values_[i].size();
  }
  return count;
}

Matd Encoder::encode(const std::string& text, const EncodeOptions& opts) const {
  bool empty = true;
  for (unsigned char c : text) {
    if (!std::isspace(c)) {
      empty = false;
      break;
    }
  }
  if (empty) throw DataError("cannot encode an empty text");
  return encode_tokens(tokenize(text), opts);
}

Matd Encoder::encode_tokens(const TokenSequence& tokens, const EncodeOptions& opts) const {
  Graph g;
  std::vector<Var> bound;
  bound.reserve(std::size_t(store_.size()));
  for (int i = 0; i < store_.size(); ++i) bound.push_back(g.leaf(store_[i]));
  return build_graph(g, tokens, bound, opts).value();
}

Hash32 Encoder::fingerprint() const {
  return sha256(serialize_checkpoint(to_checkpoint()));
}

std::vector<TensorBlob> Encoder::tensor_blobs() const {
  std::vector<TensorBlob> blobs;
  blobs.reserve(std::size_t(store_.size()));
  for (int i = 0; i < store_.size(); ++i) blobs.push_back(to_blob(store_.name(i), store_[i]));
  return blobs;
}

void Encoder::load_tensors(const std::vector<TensorBlob>& tensors) {
  std::set<std::string> seen;
  for (const TensorBlob& blob : tensors) {
    const int i = store_.find(blob.name);
    if (i < 0) throw DataError("unknown tensor name in checkpoint: " + blob.name);
    const Matd m = from_blob(blob);
    if (m.rows() != store_[i].rows() || m.cols() != store_[i].cols()) {
      throw DataError("checkpoint tensor " + blob.name + " has shape " +
                      std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                      ", expected " + std::to_string(store_[i].rows()) + "x" +
                      std::to_string(store_[i].cols()));
    }
    store_[i] = m;
    seen.insert(blob.name);
  }
  for (int i = 0; i < store_.size(); ++i) {
    if (seen.count(store_.name(i)) == 0) {
      throw DataError("checkpoint is missing tensor: " + store_.name(i));
    }
  }
}

std::string join_vocab(const Vocab& vocab) {
  std::string joined;
  for (std::size_t i = 0; i < vocab.tokens.size(); ++i) {
    if (i) joined += ' ';
    joined += vocab.tokens[i];
  }
  return joined;
}

Vocab split_vocab(const std::string& joined) {
  std::vector<std::string> tokens;
  std::istringstream in(joined);
  std::string tok;
  while (in >> tok) tokens.push_back(tok);
  return make_vocab(std::move(tokens));
}

}  // namespace bioel
