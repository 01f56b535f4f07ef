#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "xspa/grid.hpp"

namespace xspa {

/// Parametric description of the X-shaped support: cross-center position
/// as fractions of the image extent, two line angles, a length ratio
/// relative to the shorter image side, and a line width in pixels.
struct XMaskSpec {
    double rho_col = 0.5;
    double rho_row = 0.5;
    double angle1 = 0.0;  // radians
    double angle2 = 0.0;
    double length_ratio = 1.0;  // in (0, 1]
    int line_width = 1;         // >= 1

    bool operator==(const XMaskSpec&) const = default;
};

struct PixelCoord {
    int row = 0;
    int col = 0;
    bool operator==(const PixelCoord&) const = default;
    bool operator<(const PixelCoord& o) const {
        return row != o.row ? row < o.row : col < o.col;
    }
};

using PixelPath = std::vector<PixelCoord>;

/// Rasterized realization of an XMaskSpec: binary mask, explicit support
/// set, and the ordered centerline path per diagonal.
struct XMask {
    std::vector<std::uint8_t> mask;  // H*W row-major, 0/1
    std::vector<PixelCoord> support; // sorted row-major
    std::vector<PixelPath> paths;    // one per non-empty diagonal, in angle order
    ImageShape shape;
    XMaskSpec spec;

    bool contains(int row, int col) const {
        return mask[static_cast<std::size_t>(row) * shape.width + col] != 0;
    }
    std::size_t support_size() const { return support.size(); }
};

struct ValidationReport {
    bool ok = true;
    std::vector<std::string> violations;
};

/// Checks every XMaskSpec/ImageShape invariant and reports all violations.
/// Never throws.
ValidationReport validate_spec(const XMaskSpec& spec, const ImageShape& shape);

/// Rasterizes the two centerline segments (half-length
/// length_ratio * min(H,W) * sqrt(2)/2 measured along each line, clipped to
/// the image) and expands them by Chebyshev radius floor(line_width/2).
/// Throws InvalidInput when the spec fails validation, and when the support
/// is empty after border truncation.
XMask build_x_mask(const XMaskSpec& spec, const ImageShape& shape);

/// |support| / (H*W).
double mask_coverage(const XMask& mask);

/// Support pixels highlighted over the base image; without a base image,
/// returns the single-channel 0/1 mask itself.
Grid render_mask_preview(const XMask& mask, const Grid* base_image = nullptr);

/// Plain-text path listing: "row,col" per pixel, one blank line between paths.
std::string paths_to_text(const XMask& mask);

/// Zeroes all off-support entries of g in place.
void apply_support(const XMask& mask, Grid& g);

/// True when g is exactly zero on every off-support pixel.
bool zero_off_support(const XMask& mask, const Grid& g);

}  // namespace xspa
