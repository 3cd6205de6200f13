#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pansr/nn/model.hpp"

namespace pansr::nn {

/// Versioned binary container:
///   "PANSRCKP" magic, u32 version,
///   architecture (name, input convention, in_channels, layer table),
///   init record (scheme, seed), u64 training step,
///   then every parameter tensor in layer order as its 4-d shape followed by
///   little-endian float32 values.
/// Strings are u32 length + bytes; all integers little-endian.
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  Model model;
  std::uint64_t step = 0;
};

void save_checkpoint(const std::filesystem::path& path, const Model& model, std::uint64_t step = 0);
std::vector<std::uint8_t> encode_checkpoint(const Model& model, std::uint64_t step = 0);

/// Throws IoError when the file cannot be read and ValidationError when its
/// content is malformed, of an unknown version, or inconsistent.
Checkpoint load_checkpoint(const std::filesystem::path& path);
Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes);

/// "<checkpoint>.history.json"
std::filesystem::path history_path(const std::filesystem::path& checkpoint);

}  // namespace pansr::nn
