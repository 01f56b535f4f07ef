#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "xspa/errors.hpp"

namespace xspa {

/// Image dimensions. Channel count is 1 (gray) or 3 (RGB).
struct ImageShape {
    int height = 0;
    int width = 0;
    int channels = 3;

    bool operator==(const ImageShape&) const = default;
    std::size_t pixel_count() const { return static_cast<std::size_t>(height) * width; }
};

void validate_shape(const ImageShape& shape);

/// Dense channels-first (C,H,W) grid of doubles. Used for images,
/// perturbations, momenta, and gradients alike.
class Grid {
public:
    Grid() = default;
    Grid(int channels, int height, int width, double fill = 0.0)
        : channels_(channels), height_(height), width_(width),
          data_(static_cast<std::size_t>(channels) * height * width, fill) {
        if (channels <= 0 || height <= 0 || width <= 0)
            throw InvalidInput("Grid: dimensions must be positive");
    }
    explicit Grid(const ImageShape& s, double fill = 0.0) : Grid(s.channels, s.height, s.width, fill) {}

    int channels() const { return channels_; }
    int height() const { return height_; }
    int width() const { return width_; }
    ImageShape shape() const { return {height_, width_, channels_}; }
    std::size_t size() const { return data_.size(); }

    double& at(int c, int h, int w) { return data_[index(c, h, w)]; }
    double at(int c, int h, int w) const { return data_[index(c, h, w)]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::vector<double>& raw() { return data_; }
    const std::vector<double>& raw() const { return data_; }

    bool same_shape(const Grid& other) const {
        return channels_ == other.channels_ && height_ == other.height_ && width_ == other.width_;
    }
    bool operator==(const Grid&) const = default;

    static Grid zeros_like(const Grid& g) { return Grid(g.channels_, g.height_, g.width_); }

private:
    std::size_t index(int c, int h, int w) const {
        return (static_cast<std::size_t>(c) * height_ + h) * width_ + w;
    }

    int channels_ = 0;
    int height_ = 0;
    int width_ = 0;
    std::vector<double> data_;
};

/// Throws InvalidInput when the two grids disagree in any dimension.
void require_same_shape(const Grid& a, const Grid& b, const char* where);

/// Largest absolute entry; 0 for an empty grid.
double max_abs(const Grid& g);

/// Mean of absolute values over all entries.
double mean_abs(const Grid& g);

bool all_finite(const Grid& g);

}  // namespace xspa
