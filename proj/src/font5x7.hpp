#pragma once

#include <array>
#include <cstdint>

namespace adgen::font {

// Column-major glyphs for ASCII 0x20..0x7E; bit 0 is the top row.
using Glyph = std::array<std::uint8_t, 5>;
const Glyph& glyph(char c);

}  // namespace adgen::font
