#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "adgen/types.hpp"

namespace adgen {

// Decodes a PNG or binary PPM (P6) file into an RGB frame. Alpha is dropped,
// grayscale is expanded. Throws InputError on undecodable input.
FrameBuffer read_image(const std::filesystem::path& path);

std::vector<std::uint8_t> encode_png(const FrameBuffer& frame);
void write_png(const std::filesystem::path& path, const FrameBuffer& frame);

bool is_supported_image(const std::filesystem::path& path);

}  // namespace adgen
