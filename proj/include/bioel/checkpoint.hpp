#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "bioel/matrix.hpp"

namespace bioel {

constexpr std::uint8_t kKindResCnn = 0;
constexpr std::uint8_t kKindTransformer = 1;

struct TensorBlob {
  std::string name;
  std::vector<std::uint32_t> dims;  // rank = dims.size()
  std::vector<float> data;          // row-major
};

// Serialized model: magic "RCNN1", u16 version, u8 kind, length-prefixed
// canonical key=value config text, u32 tensor count, then per tensor a
// length-prefixed name, u8 rank, u32 dims and a float32 little-endian
// payload. The byte stream round-trips losslessly.
struct Checkpoint {
  std::uint16_t version = 1;
  std::uint8_t kind = kKindResCnn;
  std::map<std::string, std::string> config;  // canonical: sorted key=value lines
  std::vector<TensorBlob> tensors;
};

std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint parse_checkpoint(const std::vector<std::uint8_t>& bytes);
void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

// 1xN matrices are stored rank-1, everything else rank-2.
TensorBlob to_blob(const std::string& name, const Matd& m);
Matd from_blob(const TensorBlob& blob);

std::string config_text(const std::map<std::string, std::string>& config);

// Strict typed accessors over a checkpoint config map; missing keys and
// malformed values raise DataError naming the key.
const std::string& config_get(const std::map<std::string, std::string>& config,
                              const std::string& key);
long long config_int(const std::map<std::string, std::string>& config, const std::string& key);
std::uint64_t config_u64(const std::map<std::string, std::string>& config,
                         const std::string& key);
bool config_bool(const std::map<std::string, std::string>& config, const std::string& key);
std::vector<int> config_int_list(const std::map<std::string, std::string>& config,
                                 const std::string& key);

}  // namespace bioel
