#include "xspa/grid.hpp"

#include <cmath>
#include <string>

namespace xspa {

void validate_shape(const ImageShape& shape) {
    if (shape.height < 8) throw InvalidInput("ImageShape: height must be >= 8");
    if (shape.width < 8) throw InvalidInput("ImageShape: width must be >= 8");
    if (shape.channels != 1 && shape.channels != 3)
        throw InvalidInput("ImageShape: channels must be 1 or 3");
}

void require_same_shape(const Grid& a, const Grid& b, const char* where) {
    if (!a.same_shape(b))
        throw InvalidInput(std::string(where) + ": shape mismatch (" +
                           std::to_string(a.channels()) + "x" + std::to_string(a.height()) + "x" +
                           std::to_string(a.width()) + " vs " + std::to_string(b.channels()) +
                           "x" + std::to_string(b.height()) + "x" + std::to_string(b.width()) +
                           ")");
}

double max_abs(const Grid& g) {
    double m = 0.0;
    for (double v : g.raw()) m = std::max(m, std::abs(v));
    return m;
}

double mean_abs(const Grid& g) {
    if (g.size() == 0) return 0.0;
    double s = 0.0;
    for (double v : g.raw()) s += std::abs(v);
    return s / static_cast<double>(g.size());
}

bool all_finite(const Grid& g) {
    for (double v : g.raw())
        if (!std::isfinite(v)) return false;
    return true;
}

}  // namespace xspa
