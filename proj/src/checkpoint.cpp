#include "bioel/checkpoint.hpp"

#include "bioel/bytes.hpp"
#include "bioel/error.hpp"

namespace bioel {

std::string config_text(const std::map<std::string, std::string>& config) {
  std::string text;
  for (const auto& [key, value] : config) {
    text += key;
    text += '=';
    text += value;
    text += '\n';
  }
  return text;
}

namespace {

std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> config;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    const std::string line = text.substr(start, end - start);
    start = end + 1;
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) throw DataError("checkpoint config line without '='");
    config[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return config;
}

}  // namespace

std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& ckpt) {
  ByteWriter w;
  w.raw("RCNN1", 5);
  w.u16(ckpt.version);
  w.u8(ckpt.kind);
  w.str(config_text(ckpt.config));
  w.u32(std::uint32_t(ckpt.tensors.size()));
  for (const TensorBlob& t : ckpt.tensors) {
    w.str(t.name);
    w.u8(std::uint8_t(t.dims.size()));
    std::size_t count = 1;
    for (std::uint32_t d : t.dims) {
      w.u32(d);
      count *= d;
    }
    if (count != t.data.size()) {
      throw InvariantError("checkpoint tensor " + t.name + " has inconsistent dims");
    }
    for (float v : t.data) w.f32(v);
  }
  return w.take();
}

Checkpoint parse_checkpoint(const std::vector<std::uint8_t>& bytes) {
  ByteReader r(bytes);
  char magic[5];
  r.raw(magic, 5);
  if (std::string(magic, 5) != "RCNN1") throw DataError("not a checkpoint (bad magic)");
  Checkpoint ckpt;
  ckpt.version = r.u16();
  if (ckpt.version != 1) {
    throw DataError("unsupported checkpoint version " + std::to_string(ckpt.version));
  }
  ckpt.kind = r.u8();
  if (ckpt.kind != kKindResCnn && ckpt.kind != kKindTransformer) {
    throw DataError("unknown checkpoint model kind " + std::to_string(ckpt.kind));
  }
  ckpt.config = parse_config_text(r.str());
  const std::uint32_t n = r.u32();
  ckpt.tensors.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    TensorBlob t;
    t.name = r.str();
    const std::uint8_t rank = r.u8();
    std::size_t count = 1;
    for (std::uint8_t d = 0; d < rank; ++d) {
      t.dims.push_back(r.u32());
      count *= t.dims.back();
    }
    t.data.resize(count);
    for (std::size_t j = 0; j < count; ++j) t.data[j] = r.f32();
    ckpt.tensors.push_back(std::move(t));
  }
  if (!r.done()) throw DataError("trailing bytes in checkpoint");
  return ckpt;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  write_file(path, serialize_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::string& path) {
  try {
    return parse_checkpoint(read_file(path));
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

const std::string& config_get(const std::map<std::string, std::string>& config,
                              const std::string& key) {
  auto it = config.find(key);
  if (it == config.end()) throw DataError("checkpoint config is missing key: " + key);
  return it->second;
}

long long config_int(const std::map<std::string, std::string>& config, const std::string& key) {
  const std::string& s = config_get(config, key);
  try {
    std::size_t used = 0;
    const long long v = std::stoll(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DataError("checkpoint config key " + key + " is not an integer: " + s);
  }
}

std::uint64_t config_u64(const std::map<std::string, std::string>& config,
                         const std::string& key) {
  const std::string& s = config_get(config, key);
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DataError("checkpoint config key " + key + " is not an unsigned integer: " + s);
  }
}

bool config_bool(const std::map<std::string, std::string>& config, const std::string& key) {
  const std::string& s = config_get(config, key);
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw DataError("checkpoint config key " + key + " is not a boolean: " + s);
}

std::vector<int> config_int_list(const std::map<std::string, std::string>& config,
                                 const std::string& key) {
  const std::string& s = config_get(config, key);
  std::vector<int> values;
  std::size_t start = 0;
  while (start <= s.size()) {
    std::size_t comma = s.find(',', start);
    if (comma == std::string::npos) comma = s.size();
    const std::string piece = s.substr(start, comma - start);
    try {
      std::size_t used = 0;
      values.push_back(std::stoi(piece, &used));
      if (used != piece.size()) throw std::invalid_argument(piece);
    } catch (const std::exception&) {
      throw DataError("checkpoint config key " + key + " is not an integer list: " + s);
    }
    start = comma + 1;
  }
  return values;
}

TensorBlob to_blob(const std::string& name, const Matd& m) {
  TensorBlob t;
  t.name = name;
  if (m.rows() == 1) {
    t.dims = {std::uint32_t(m.cols())};
  } else {
    t.dims = {std::uint32_t(m.rows()), std::uint32_t(m.cols())};
  }
  t.data.reserve(std::size_t(m.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      t.data.push_back(float(m(i, j)));
    }
  }
  return t;
}

Matd from_blob(const TensorBlob& blob) {
  Eigen::Index rows = 1, cols = 1;
  if (blob.dims.size() == 1) {
    cols = blob.dims[0];
  } else if (blob.dims.size() == 2) {
    rows = blob.dims[0];
    cols = blob.dims[1];
  } else {
    throw DataError("checkpoint tensor " + blob.name + " has unsupported rank " +
                    std::to_string(blob.dims.size()));
  }
  Matd m(rows, cols);
  std::size_t at = 0;
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      m(i, j) = double(blob.data[at++]);
    }
  }
  return m;
}

}  // namespace bioel
