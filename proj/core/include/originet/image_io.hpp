#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "originet/image.hpp"

namespace originet {

// 8-bit image files. Format is chosen by extension: .png, .pgm (P5/P2) and
// .ppm (P6/P3). Values are read as 0..255 doubles; on write they are rounded
// and clamped to 0..255.
Image read_image(const std::filesystem::path& path);
void write_image(const std::filesystem::path& path, const Image& img);

bool is_image_file(const std::filesystem::path& path);

/// Image files directly inside `dir`, sorted lexicographically by filename.
std::vector<std::filesystem::path> list_frame_files(const std::filesystem::path& dir);

// Raw planar video: five little-endian int32 header fields
//   magic ("RVID"), height, width, channels, frame count
// followed by float64 little-endian pixels, frame-major, each frame planar.
inline constexpr std::uint32_t kRawVideoMagic = 0x44495652;  // "RVID" as LE bytes

std::vector<Image> read_raw_video(const std::filesystem::path& path);
void write_raw_video(const std::filesystem::path& path, const std::vector<Image>& frames);

bool is_raw_video_file(const std::filesystem::path& path);

}  // namespace originet
