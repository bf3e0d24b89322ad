#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "rotornav/mnn.hpp"

namespace rotornav {

// Binary model container, little-endian, doubles as IEEE-754 binary64:
//
//   u32 magic            'MNNB' (0x424E4E4D)
//   u32 format_version   currently 1
//   f64 gamma
//   u32 input_dim
//   u32 layer_count
//   per layer:
//     u32 in_dim
//     u32 out_dim
//     u32 activation     0 = tanh, 1 = linear
//     f64[out*in]  W, row-major
//     f64[out*out] Q, row-major
//     f64[out]     alpha
//
// Memory state is not stored; a loaded network starts from zeroed memory.
inline constexpr std::uint32_t kModelMagic = 0x424E4E4Du;
inline constexpr std::uint32_t kModelFormatVersion = 1;

std::vector<std::uint8_t> serialize_model(const MnnNetwork& net);
MnnNetwork deserialize_model(const std::vector<std::uint8_t>& bytes);

void save_model(const MnnNetwork& net, const std::filesystem::path& path);
MnnNetwork load_model(const std::filesystem::path& path);

}  // namespace rotornav
