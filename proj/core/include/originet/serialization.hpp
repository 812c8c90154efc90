#pragma once

#include <filesystem>
#include <optional>

#include "originet/originet.hpp"

namespace originet {

// Weight file layout (all integers little-endian uint32, floats float64 LE):
//   "OGNW" | version | config text length | config text (model keys)
//   | tensor count | per tensor: name length, name, rank, dims..., values
//   | block count | per block: populated flag, then mean[C], var[C] if populated
// The file ends exactly after the last block. No timestamps are stored.
inline constexpr std::uint32_t kWeightFormatVersion = 1;

void save_weights(const OrigiNet& model, const std::filesystem::path& path);

/// Throws FormatError on corrupt or truncated files, IoError when unreadable,
/// ConfigError when `expected` is given and differs from the embedded config.
OrigiNet load_weights(const std::filesystem::path& path,
                      const std::optional<ModelConfig>& expected = std::nullopt);

}  // namespace originet
