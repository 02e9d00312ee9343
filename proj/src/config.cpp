#include "bioel/config.hpp"

#include <fstream>
#include <sstream>

#include "bioel/data.hpp"
#include "bioel/error.hpp"

namespace bioel {

namespace {

int to_int(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key " + key + " expects an integer, got \"" + value + "\"");
  }
}

double to_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key " + key + " expects a number, got \"" + value + "\"");
  }
}

std::uint64_t to_u64(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key " + key + " expects an unsigned integer, got \"" + value +
                      "\"");
  }
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError("config key " + key + " expects true/false, got \"" + value + "\"");
}

std::vector<int> to_int_list(const std::string& key, const std::string& value) {
  std::vector<int> out;
  std::size_t start = 0;
  while (start <= value.size()) {
    std::size_t comma = value.find(',', start);
    if (comma == std::string::npos) comma = value.size();
    out.push_back(to_int(key, value.substr(start, comma - start)));
    start = comma + 1;
  }
  return out;
}

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

}  // namespace

ResCnnConfig RunConfig::rescnn() const {
  ResCnnConfig c;
  c.embed_dim = embed_dim;
  c.d_model = d_model;
  c.n_blocks = n_blocks;
  c.kernel_widths = kernel_widths;
  c.filters_per_width = filters_per_width;
  c.pooling = pooling == "self_attention" ? Pooling::kSelfAttention : Pooling::kMax;
  c.max_len = max_len;
  c.lowercase = lowercase;
  c.embedding_frozen = embedding_frozen;
  return c;
}

TransformerConfig RunConfig::transformer() const {
  TransformerConfig c;
  c.layers = tf_layers;
  c.heads = tf_heads;
  c.d_model = tf_d_model;
  c.ffn_hidden = tf_ffn_hidden;
  c.max_len = max_len;
  c.lowercase = lowercase;
  return c;
}

TrainConfig RunConfig::train(int threads) const {
  TrainConfig c;
  c.learning_rate = learning_rate;
  c.batch_size = batch_size;
  c.epochs = epochs;
  c.temperature = temperature;
  c.seed = seed;
  c.beta1 = beta1;
  c.beta2 = beta2;
  c.epsilon = epsilon;
  c.threads = threads;
  return c;
}

void apply_config_entry(RunConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "model") {
    if (value != "rescnn" && value != "transformer") {
      throw ConfigError("config key model must be rescnn or transformer, got \"" + value + "\"");
    }
    cfg.model = value;
  } else if (key == "pooling") {
    if (value != "max" && value != "self_attention") {
      throw ConfigError("config key pooling must be max or self_attention, got \"" + value +
                        "\"");
    }
    cfg.pooling = value;
  } else if (key == "d_model") {
    cfg.d_model = to_int(key, value);
  } else if (key == "n_blocks") {
    cfg.n_blocks = to_int(key, value);
  } else if (key == "kernel_widths") {
    cfg.kernel_widths = to_int_list(key, value);
  } else if (key == "filters_per_width") {
    cfg.filters_per_width = to_int(key, value);
  } else if (key == "embed_dim") {
    cfg.embed_dim = to_int(key, value);
  } else if (key == "embedding_frozen") {
    cfg.embedding_frozen = to_bool(key, value);
  } else if (key == "embedding_path") {
    cfg.embedding_path = value;
  } else if (key == "tf_layers") {
    cfg.tf_layers = to_int(key, value);
  } else if (key == "tf_heads") {
    cfg.tf_heads = to_int(key, value);
  } else if (key == "tf_d_model") {
    cfg.tf_d_model = to_int(key, value);
  } else if (key == "tf_ffn_hidden") {
    cfg.tf_ffn_hidden = to_int(key, value);
  } else if (key == "max_len") {
    cfg.max_len = to_int(key, value);
  } else if (key == "lowercase") {
    cfg.lowercase = to_bool(key, value);
  } else if (key == "vocab_path") {
    cfg.vocab_path = value;
  } else if (key == "learning_rate") {
    cfg.learning_rate = to_double(key, value);
  } else if (key == "batch_size") {
    cfg.batch_size = to_int(key, value);
  } else if (key == "epochs") {
    cfg.epochs = to_int(key, value);
  } else if (key == "temperature") {
    cfg.temperature = to_double(key, value);
  } else if (key == "seed") {
    cfg.seed = to_u64(key, value);
  } else if (key == "beta1") {
    cfg.beta1 = to_double(key, value);
  } else if (key == "beta2") {
    cfg.beta2 = to_double(key, value);
  } else if (key == "epsilon") {
    cfg.epsilon = to_double(key, value);
  } else {
    throw ConfigError("unknown config key: " + key);
  }
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open config file: " + path);
  RunConfig cfg;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const std::string trimmed = trim(line);
    if (trimmed.empty()) continue;
    const std::size_t eq = trimmed.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
    }
    apply_config_entry(cfg, trim(trimmed.substr(0, eq)), trim(trimmed.substr(eq + 1)));
  }
  if (in.bad()) throw DataError("error reading config file: " + path);
  return cfg;
}

std::string canonical_config_text(const RunConfig& cfg) {
  std::ostringstream out;
  out << "model = " << cfg.model << "\n";
  out << "pooling = " << cfg.pooling << "\n";
  out << "d_model = " << cfg.d_model << "\n";
  out << "n_blocks = " << cfg.n_blocks << "\n";
  out << "kernel_widths = ";
  for (std::size_t i = 0; i < cfg.kernel_widths.size(); ++i) {
    out << (i ? "," : "") << cfg.kernel_widths[i];
  }
  out << "\n";
  out << "filters_per_width = " << cfg.filters_per_width << "\n";
  out << "embed_dim = " << cfg.embed_dim << "\n";
  out << "embedding_frozen = " << (cfg.embedding_frozen ? "true" : "false") << "\n";
  out << "embedding_path = " << cfg.embedding_path << "\n";
  out << "tf_layers = " << cfg.tf_layers << "\n";
  out << "tf_heads = " << cfg.tf_heads << "\n";
  out << "tf_d_model = " << cfg.tf_d_model << "\n";
  out << "tf_ffn_hidden = " << cfg.tf_ffn_hidden << "\n";
  out << "max_len = " << cfg.max_len << "\n";
  out << "lowercase = " << (cfg.lowercase ? "true" : "false") << "\n";
  out << "vocab_path = " << cfg.vocab_path << "\n";
  out << "learning_rate = " << cfg.learning_rate << "\n";
  out << "batch_size = " << cfg.batch_size << "\n";
  out << "epochs = " << cfg.epochs << "\n";
  out << "temperature = " << cfg.temperature << "\n";
  out << "seed = " << cfg.seed << "\n";
  out << "beta1 = " << cfg.beta1 << "\n";
  out << "beta2 = " << cfg.beta2 << "\n";
  out << "epsilon = " << cfg.epsilon << "\n";
  return out.str();
}

std::unique_ptr<Encoder> build_model(const RunConfig& cfg, Vocab vocab) {
  if (cfg.model == "transformer") {
    return std::make_unique<TransformerEncoder>(cfg.transformer(), std::move(vocab), cfg.seed);
  }
  if (!cfg.embedding_path.empty()) {
    Matd table = load_embedding(cfg.embedding_path);
    return std::make_unique<ResCnnEncoder>(cfg.rescnn(), std::move(vocab), std::move(table),
                                           cfg.seed);
  }
  return ResCnnEncoder::random_init(cfg.rescnn(), std::move(vocab), cfg.seed);
}

std::unique_ptr<Encoder> model_from_checkpoint(const Checkpoint& ckpt) {
  if (ckpt.kind == kKindTransformer) return TransformerEncoder::from_checkpoint(ckpt);
  return ResCnnEncoder::from_checkpoint(ckpt);
}

std::unique_ptr<Encoder> model_from_checkpoint_file(const std::string& path) {
  return model_from_checkpoint(load_checkpoint(path));
}

}  // namespace bioel
