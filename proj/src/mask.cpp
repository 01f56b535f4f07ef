#include "xspa/mask.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace xspa {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Pixel (h,w) has its center at continuous point (w+0.5, h+0.5); x runs
// along columns, y along rows.
struct Segment {
    double cx, cy;      // continuous center
    double dir_x, dir_y;
    double t_lo, t_hi;  // clipped parameter range; empty when t_lo > t_hi
    bool empty = true;
};

// Intersect the parameter range with { t : lo <= c + t*d <= hi }.
bool clip_axis(double c, double d, double lo, double hi, double& t_lo, double& t_hi) {
    constexpr double kParallel = 1e-15;
    if (std::abs(d) < kParallel) return c >= lo && c <= hi;
    double a = (lo - c) / d;
    double b = (hi - c) / d;
    if (a > b) std::swap(a, b);
    t_lo = std::max(t_lo, a);
    t_hi = std::min(t_hi, b);
    return t_lo <= t_hi;
}

Segment make_segment(const XMaskSpec& spec, const ImageShape& shape, double angle) {
    Segment s;
    s.cx = spec.rho_col * shape.width;
    s.cy = spec.rho_row * shape.height;
    s.dir_x = std::cos(angle);
    s.dir_y = std::sin(angle);
    const double half_len =
        spec.length_ratio * std::min(shape.height, shape.width) * std::sqrt(2.0) / 2.0;
    s.t_lo = -half_len;
    s.t_hi = half_len;
    // clip to the pixel-center rectangle before rasterizing
    bool ok = clip_axis(s.cx, s.dir_x, 0.5, shape.width - 0.5, s.t_lo, s.t_hi) &&
              clip_axis(s.cy, s.dir_y, 0.5, shape.height - 0.5, s.t_lo, s.t_hi);
    s.empty = !ok || s.t_lo > s.t_hi;
    return s;
}

int clamp_int(long v, int lo, int hi) {
    return static_cast<int>(std::clamp(v, static_cast<long>(lo), static_cast<long>(hi)));
}

// Walk the clipped segment from its low-parameter end, one step per major
// axis pixel, evaluating the minor coordinate from the continuous line so
// that subsegments of the same line rasterize to subsets.
PixelPath rasterize(const Segment& s, const ImageShape& shape) {
    PixelPath path;
    if (s.empty) return path;
    const double x0 = s.cx + s.t_lo * s.dir_x;
    const double y0 = s.cy + s.t_lo * s.dir_y;
    const double x1 = s.cx + s.t_hi * s.dir_x;
    const double y1 = s.cy + s.t_hi * s.dir_y;

    if (std::abs(s.dir_x) >= std::abs(s.dir_y)) {
        const double slope = s.dir_y / s.dir_x;
        const int w_start = clamp_int(std::lround(x0 - 0.5), 0, shape.width - 1);
        const int w_end = clamp_int(std::lround(x1 - 0.5), 0, shape.width - 1);
        const int step = w_end >= w_start ? 1 : -1;
        for (int w = w_start;; w += step) {
            const double y = s.cy + ((w + 0.5) - s.cx) * slope;
            const int h = clamp_int(std::lround(y - 0.5), 0, shape.height - 1);
            path.push_back({h, w});
            if (w == w_end) break;
        }
    } else {
        const double slope = s.dir_x / s.dir_y;
        const int h_start = clamp_int(std::lround(y0 - 0.5), 0, shape.height - 1);
        const int h_end = clamp_int(std::lround(y1 - 0.5), 0, shape.height - 1);
        const int step = h_end >= h_start ? 1 : -1;
        for (int h = h_start;; h += step) {
            const double x = s.cx + ((h + 0.5) - s.cy) * slope;
            const int w = clamp_int(std::lround(x - 0.5), 0, shape.width - 1);
            path.push_back({h, w});
            if (h == h_end) break;
        }
    }
    return path;
}

}  // namespace

ValidationReport validate_spec(const XMaskSpec& spec, const ImageShape& shape) {
    ValidationReport report;
    auto fail = [&report](const std::string& msg) {
        report.ok = false;
        report.violations.push_back(msg);
    };
    if (!(spec.rho_col > 0.0 && spec.rho_col < 1.0)) fail("rho_col out of range");
    if (!(spec.rho_row > 0.0 && spec.rho_row < 1.0)) fail("rho_row out of range");
    if (!(spec.length_ratio > 0.0 && spec.length_ratio <= 1.0))
        fail("length_ratio out of range");
    if (spec.line_width < 1) fail("line_width must be >= 1");
    const double angle_gap = std::remainder(spec.angle1 - spec.angle2, kPi);
    if (std::abs(angle_gap) < 1e-9) fail("degenerate angles");
    if (shape.height < 1 || shape.width < 1) fail("image shape must be positive");
    if (shape.channels != 1 && shape.channels != 3) fail("channels must be 1 or 3");
    return report;
}

XMask build_x_mask(const XMaskSpec& spec, const ImageShape& shape) {
    const ValidationReport report = validate_spec(spec, shape);
    if (!report.ok) {
        std::string msg = "build_x_mask: invalid spec:";
        for (const auto& v : report.violations) msg += " " + v + ";";
        throw InvalidInput(msg);
    }

    XMask out;
    out.shape = shape;
    out.spec = spec;
    out.mask.assign(static_cast<std::size_t>(shape.height) * shape.width, 0);

    for (double angle : {spec.angle1, spec.angle2}) {
        PixelPath path = rasterize(make_segment(spec, shape, angle), shape);
        if (!path.empty()) out.paths.push_back(std::move(path));
    }
    if (out.paths.empty())
        throw InvalidInput("build_x_mask: degenerate mask, support empty after border truncation");

    const int radius = spec.line_width / 2;
    for (const auto& path : out.paths) {
        for (const auto& p : path) {
            const int h0 = std::max(0, p.row - radius);
            const int h1 = std::min(shape.height - 1, p.row + radius);
            const int w0 = std::max(0, p.col - radius);
            const int w1 = std::min(shape.width - 1, p.col + radius);
            for (int h = h0; h <= h1; ++h)
                for (int w = w0; w <= w1; ++w)
                    out.mask[static_cast<std::size_t>(h) * shape.width + w] = 1;
        }
    }

    for (int h = 0; h < shape.height; ++h)
        for (int w = 0; w < shape.width; ++w)
            if (out.mask[static_cast<std::size_t>(h) * shape.width + w]) out.support.push_back({h, w});

    if (out.support.empty())
        throw InvalidInput("build_x_mask: degenerate mask, support empty after border truncation");
    return out;
}

double mask_coverage(const XMask& mask) {
    if (mask.support.empty()) throw InvalidInput("mask_coverage: empty support");
    return static_cast<double>(mask.support.size()) /
           static_cast<double>(mask.shape.pixel_count());
}

Grid render_mask_preview(const XMask& mask, const Grid* base_image) {
    if (base_image == nullptr) {
        Grid out(1, mask.shape.height, mask.shape.width, 0.0);
        for (const auto& p : mask.support) out.at(0, p.row, p.col) = 1.0;
        return out;
    }
    if (base_image->height() != mask.shape.height || base_image->width() != mask.shape.width)
        throw InvalidInput("render_mask_preview: base image shape mismatch");
    Grid out = *base_image;
    for (const auto& p : mask.support) {
        if (out.channels() == 3) {
            out.at(0, p.row, p.col) = 1.0;
            out.at(1, p.row, p.col) = 0.0;
            out.at(2, p.row, p.col) = 0.0;
        } else {
            out.at(0, p.row, p.col) = 1.0;
        }
    }
    return out;
}

std::string paths_to_text(const XMask& mask) {
    std::ostringstream os;
    for (std::size_t i = 0; i < mask.paths.size(); ++i) {
        if (i > 0) os << "\n";
        for (const auto& p : mask.paths[i]) os << p.row << "," << p.col << "\n";
    }
    return os.str();
}

void apply_support(const XMask& mask, Grid& g) {
    if (g.height() != mask.shape.height || g.width() != mask.shape.width)
        throw InvalidInput("apply_support: shape mismatch");
    for (int c = 0; c < g.channels(); ++c)
        for (int h = 0; h < g.height(); ++h)
            for (int w = 0; w < g.width(); ++w)
                if (!mask.contains(h, w)) g.at(c, h, w) = 0.0;
}

bool zero_off_support(const XMask& mask, const Grid& g) {
    for (int c = 0; c < g.channels(); ++c)
        for (int h = 0; h < g.height(); ++h)
            for (int w = 0; w < g.width(); ++w)
                if (!mask.contains(h, w) && g.at(c, h, w) != 0.0) return false;
    return true;
}

}  // namespace xspa
