#include "originet/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "originet/error.hpp"

namespace fs = std::filesystem;

namespace originet {

namespace {

std::string lower_extension(const fs::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

unsigned char to_byte(double v) {
  if (!std::isfinite(v)) throw NumericError("write_image: non-finite pixel");
  return static_cast<unsigned char>(std::clamp(std::lround(v), 0L, 255L));
}

// Interleaved bytes <-> planar doubles.
Image from_interleaved(const unsigned char* data, std::size_t channels, std::size_t height,
                       std::size_t width) {
  Image img(channels, height, width);
  for (std::size_t y = 0; y < height; ++y)
    for (std::size_t x = 0; x < width; ++x)
      for (std::size_t c = 0; c < channels; ++c)
        img.at(c, y, x) = data[(y * width + x) * channels + c];
  return img;
}

std::vector<unsigned char> to_interleaved(const Image& img) {
  std::vector<unsigned char> out(img.pixels.size());
  for (std::size_t y = 0; y < img.height; ++y)
    for (std::size_t x = 0; x < img.width; ++x)
      for (std::size_t c = 0; c < img.channels; ++c)
        out[(y * img.width + x) * img.channels + c] = to_byte(img.at(c, y, x));
  return out;
}

Image read_png(const fs::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.string().c_str())) {
    throw FormatError("cannot decode PNG " + path.string() + ": " + image.message);
  }
  const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  std::vector<unsigned char> buffer(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw FormatError("cannot decode PNG " + path.string() + ": " + msg);
  }
  return from_interleaved(buffer.data(), color ? 3 : 1, image.height, image.width);
}

void write_png(const fs::path& path, const Image& img) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width);
  image.height = static_cast<png_uint_32>(img.height);
  image.format = img.channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  const std::vector<unsigned char> bytes = to_interleaved(img);
  if (!png_image_write_to_file(&image, path.string().c_str(), 0, bytes.data(), 0, nullptr)) {
    throw IoError("cannot write PNG " + path.string() + ": " + image.message);
  }
}

// Reads the next whitespace-separated header token, skipping # comments.
std::string pnm_token(std::istream& in) {
  std::string token;
  char ch;
  while (in.get(ch)) {
    if (ch == '#') {
      std::string discard;
      std::getline(in, discard);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(ch))) {
      if (!token.empty()) break;
      continue;
    }
    token.push_back(ch);
  }
  return token;
}

Image read_pnm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const std::string magic = pnm_token(in);
  const bool gray = magic == "P5" || magic == "P2";
  const bool binary = magic == "P5" || magic == "P6";
  if (!gray && magic != "P6" && magic != "P3") {
    throw FormatError(path.string() + ": unsupported PNM magic '" + magic + "'");
  }
  std::size_t width = 0, height = 0, maxval = 0;
  try {
    width = std::stoul(pnm_token(in));
    height = std::stoul(pnm_token(in));
    maxval = std::stoul(pnm_token(in));
  } catch (const std::exception&) {
    throw FormatError(path.string() + ": malformed PNM header");
  }
  if (width == 0 || height == 0 || maxval == 0 || maxval > 255) {
    throw FormatError(path.string() + ": only 8-bit PNM images are supported");
  }
  const std::size_t channels = gray ? 1 : 3;
  std::vector<unsigned char> data(width * height * channels);
  if (binary) {
    in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size()));
    if (static_cast<std::size_t>(in.gcount()) != data.size()) {
      throw FormatError(path.string() + ": truncated pixel data");
    }
  } else {
    for (auto& v : data) {
      unsigned value = 0;
      if (!(in >> value)) throw FormatError(path.string() + ": truncated pixel data");
      v = static_cast<unsigned char>(std::min(value, 255U));
    }
  }
  Image img = from_interleaved(data.data(), channels, height, width);
  if (maxval != 255) {
    for (double& p : img.pixels) p = p * 255.0 / static_cast<double>(maxval);
  }
  return img;
}

void write_pnm(const fs::path& path, const Image& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << (img.channels == 3 ? "P6" : "P5") << '\n' << img.width << ' ' << img.height << "\n255\n";
  const std::vector<unsigned char> bytes = to_interleaved(img);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

void put_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& in, const fs::path& path) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) {
    throw FormatError(path.string() + ": truncated raw video header");
  }
  return static_cast<std::uint32_t>(b[0]) | static_cast<std::uint32_t>(b[1]) << 8 |
         static_cast<std::uint32_t>(b[2]) << 16 | static_cast<std::uint32_t>(b[3]) << 24;
}

}  // namespace

bool is_image_file(const fs::path& path) {
  const std::string ext = lower_extension(path);
  return ext == ".png" || ext == ".pgm" || ext == ".ppm";
}

bool is_raw_video_file(const fs::path& path) {
  const std::string ext = lower_extension(path);
  return ext == ".raw" || ext == ".rvid";
}

Image read_image(const fs::path& path) {
  if (!fs::exists(path)) throw IoError("image not found: " + path.string());
  const std::string ext = lower_extension(path);
  if (ext == ".png") return read_png(path);
  if (ext == ".pgm" || ext == ".ppm") return read_pnm(path);
  throw FormatError("unsupported image extension: " + path.string());
}

void write_image(const fs::path& path, const Image& img) {
  if (path.empty()) throw IoError("write_image: empty path");
  if (img.channels != 1 && img.channels != 3) {
    throw ArgumentError("write_image: only 1- or 3-channel images can be written");
  }
  const std::string ext = lower_extension(path);
  if (ext == ".png") return write_png(path, img);
  if (ext == ".pgm" || ext == ".ppm") return write_pnm(path, img);
  throw FormatError("unsupported image extension: " + path.string());
}

std::vector<fs::path> list_frame_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && is_image_file(entry.path())) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });
  return files;
}

std::vector<Image> read_raw_video(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  if (get_u32(in, path) != kRawVideoMagic) throw FormatError(path.string() + ": bad raw video magic");
  const std::uint32_t height = get_u32(in, path);
  const std::uint32_t width = get_u32(in, path);
  const std::uint32_t channels = get_u32(in, path);
  const std::uint32_t frames = get_u32(in, path);
  if (height == 0 || width == 0 || channels == 0 || frames == 0) {
    throw FormatError(path.string() + ": raw video header has a zero dimension");
  }
  std::vector<Image> video;
  video.reserve(frames);
  for (std::uint32_t f = 0; f < frames; ++f) {
    Image img(channels, height, width);
    for (double& p : img.pixels) {
      std::uint64_t bits = 0;
      unsigned char b[8];
      if (!in.read(reinterpret_cast<char*>(b), 8)) {
        throw FormatError(path.string() + ": truncated raw video pixel data");
      }
      for (int k = 7; k >= 0; --k) bits = bits << 8 | b[k];
      p = std::bit_cast<double>(bits);
    }
    video.push_back(std::move(img));
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw FormatError(path.string() + ": trailing bytes after raw video data");
  }
  return video;
}

void write_raw_video(const fs::path& path, const std::vector<Image>& frames) {
  if (path.empty()) throw IoError("write_raw_video: empty path");
  if (frames.empty()) throw ArgumentError("write_raw_video: no frames");
  for (const Image& f : frames) {
    if (!f.same_geometry(frames.front())) throw DimensionError("write_raw_video: frame shapes differ");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  const Image& first = frames.front();
  put_u32(out, kRawVideoMagic);
  put_u32(out, static_cast<std::uint32_t>(first.height));
  put_u32(out, static_cast<std::uint32_t>(first.width));
  put_u32(out, static_cast<std::uint32_t>(first.channels));
  put_u32(out, static_cast<std::uint32_t>(frames.size()));
  for (const Image& f : frames) {
    for (double p : f.pixels) {
      std::uint64_t bits = std::bit_cast<std::uint64_t>(p);
      unsigned char b[8];
      for (int k = 0; k < 8; ++k, bits >>= 8) b[k] = static_cast<unsigned char>(bits);
      out.write(reinterpret_cast<const char*>(b), 8);
    }
  }
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace originet
