#pragma once

#include <filesystem>

#include "xspa/grid.hpp"

namespace xspa {

/// Reads an 8-bit PNG into a [0,1] grid. Gray maps to 1 channel, RGB/RGBA
/// to 3 (alpha is dropped). Throws InvalidInput on unreadable files.
Grid read_png(const std::filesystem::path& path);

/// Writes a 1- or 3-channel [0,1] grid as an 8-bit PNG. Values are clamped
/// then quantized with round-to-nearest.
void write_png(const std::filesystem::path& path, const Grid& image);

/// Quantize to the 8-bit lattice without touching disk (round trip of the
/// PNG encoding, used by the quantization-robust check).
Grid quantize_8bit(const Grid& image);

}  // namespace xspa
