#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace bioel {

using Hash32 = std::array<std::uint8_t, 32>;

Hash32 sha256(const std::uint8_t* data, std::size_t len);
Hash32 sha256(const std::vector<std::uint8_t>& data);
Hash32 sha256(const std::string& data);

std::string hex(const Hash32& h);

}  // namespace bioel
