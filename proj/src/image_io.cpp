#include "adgen/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cstring>
#include <fstream>
#include <iterator>

#include "adgen/error.hpp"

namespace adgen {
namespace {

std::string lower_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open image " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

FrameBuffer decode_png(const std::vector<std::uint8_t>& bytes,
                       const std::filesystem::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    throw InputError("undecodable image " + path.string() + ": " + image.message);
  }
  image.format = PNG_FORMAT_RGB;
  FrameBuffer frame;
  frame.width = static_cast<int>(image.width);
  frame.height = static_cast<int>(image.height);
  frame.pixels.resize(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, frame.pixels.data(), 0, nullptr)) {
    std::string msg = image.message;
    png_image_free(&image);
    throw InputError("undecodable image " + path.string() + ": " + msg);
  }
  return frame;
}

// Binary P6 with maxval 255.
FrameBuffer decode_ppm(const std::vector<std::uint8_t>& bytes,
                       const std::filesystem::path& path) {
  std::size_t pos = 0;
  auto fail = [&]() -> FrameBuffer { throw InputError("undecodable image " + path.string()); };
  auto next_token = [&]() -> std::string {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
    std::string tok;
    while (pos < bytes.size() && !std::isspace(bytes[pos])) tok.push_back(static_cast<char>(bytes[pos++]));
    return tok;
  };
  if (next_token() != "P6") return fail();
  int w = 0, h = 0, maxval = 0;
  try {
    w = std::stoi(next_token());
    h = std::stoi(next_token());
    maxval = std::stoi(next_token());
  } catch (const std::exception&) {
    return fail();
  }
  ++pos;  // single whitespace before raster
  if (w <= 0 || h <= 0 || maxval != 255) return fail();
  const auto need = static_cast<std::size_t>(w) * h * 3;
  if (bytes.size() < pos + need) return fail();
  FrameBuffer frame;
  frame.width = w;
  frame.height = h;
  frame.pixels.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                      bytes.begin() + static_cast<std::ptrdiff_t>(pos + need));
  return frame;
}

}  // namespace

bool is_supported_image(const std::filesystem::path& path) {
  const auto ext = lower_extension(path);
  return ext == ".png" || ext == ".ppm";
}

FrameBuffer read_image(const std::filesystem::path& path) {
  const auto bytes = read_bytes(path);
  if (lower_extension(path) == ".ppm") return decode_ppm(bytes, path);
  return decode_png(bytes, path);
}

std::vector<std::uint8_t> encode_png(const FrameBuffer& frame) {
  if (!frame.valid()) throw PreconditionError("cannot encode an invalid frame");
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(frame.width);
  image.height = static_cast<png_uint_32>(frame.height);
  image.format = PNG_FORMAT_RGB;
  png_alloc_size_t size = 0;
  if (!png_image_write_get_memory_size(image, size, 0, frame.pixels.data(), 0, nullptr)) {
    throw Error(std::string("png encode failed: ") + image.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, frame.pixels.data(), 0,
                                 nullptr)) {
    throw Error(std::string("png encode failed: ") + image.message);
  }
  out.resize(size);
  return out;
}

void write_png(const std::filesystem::path& path, const FrameBuffer& frame) {
  const auto bytes = encode_png(frame);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

}  // namespace adgen
