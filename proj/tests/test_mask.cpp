#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "oracles.hpp"
#include "xspa/config.hpp"
#include "xspa/mask.hpp"
#include "xspa/rng.hpp"

using namespace xspa;

namespace {

constexpr double kPi = 3.14159265358979323846;

XMaskSpec diag_spec(double r = 1.0, int b = 1) {
    XMaskSpec spec;
    spec.angle1 = kPi / 4.0;
    spec.angle2 = 3.0 * kPi / 4.0;
    spec.length_ratio = r;
    spec.line_width = b;
    return spec;
}

std::set<PixelCoord> support_set(const XMask& m) {
    return {m.support.begin(), m.support.end()};
}

XMaskSpec random_spec(Rng& rng) {
    XMaskSpec spec;
    spec.rho_col = rng.uniform(0.1, 0.9);
    spec.rho_row = rng.uniform(0.1, 0.9);
    spec.angle1 = rng.uniform(0.0, kPi);
    spec.angle2 = spec.angle1 + rng.uniform(0.3, kPi - 0.3);
    spec.length_ratio = rng.uniform(0.2, 1.0);
    spec.line_width = 1 + static_cast<int>(rng.uniform_int(5));
    return spec;
}

}  // namespace

TEST_CASE("validate_spec reports violations") {
    const ImageShape shape{224, 224, 3};
    CHECK(validate_spec(diag_spec(0.9, 2), shape).ok);

    XMaskSpec bad_r = diag_spec();
    bad_r.length_ratio = 0.0;
    const auto r_report = validate_spec(bad_r, shape);
    CHECK_FALSE(r_report.ok);
    CHECK(std::find(r_report.violations.begin(), r_report.violations.end(),
                    "length_ratio out of range") != r_report.violations.end());

    XMaskSpec bad_angles = diag_spec();
    bad_angles.angle2 = bad_angles.angle1;
    const auto a_report = validate_spec(bad_angles, shape);
    CHECK_FALSE(a_report.ok);
    CHECK(std::find(a_report.violations.begin(), a_report.violations.end(), "degenerate angles") !=
          a_report.violations.end());

    // angles equal modulo pi are degenerate too
    XMaskSpec mod_pi = diag_spec();
    mod_pi.angle2 = mod_pi.angle1 + kPi;
    CHECK_FALSE(validate_spec(mod_pi, shape).ok);

    XMaskSpec bad_rho = diag_spec();
    bad_rho.rho_col = 1.0;
    CHECK_FALSE(validate_spec(bad_rho, shape).ok);
}

TEST_CASE("5x5 width-1 full diagonals are exactly the two diagonals") {
    const XMask m = build_x_mask(diag_spec(), {5, 5, 1});
    CHECK(m.support.size() == 9);  // center shared
    REQUIRE(m.paths.size() == 2);
    CHECK(m.paths[0].size() == 5);
    CHECK(m.paths[1].size() == 5);
    for (int i = 0; i < 5; ++i) {
        CHECK(m.contains(i, i));
        CHECK(m.contains(i, 4 - i));
    }
    CHECK(mask_coverage(m) == doctest::Approx(0.36));
}

TEST_CASE("default config geometry hits the calibrated coverage band") {
    const RunConfig cfg = default_config();
    const XMask m = build_x_mask(cfg.mask.spec, cfg.mask.shape);
    const double coverage = mask_coverage(m);
    CHECK(coverage >= 0.015);
    CHECK(coverage <= 0.020);
    // frozen calibration value
    CHECK(coverage == doctest::Approx(0.017459).epsilon(1e-6));
}

TEST_CASE("invalid specs are rejected by build_x_mask") {
    CHECK_THROWS_AS(build_x_mask(diag_spec(0.0), {16, 16, 1}), InvalidInput);
    XMaskSpec degen = diag_spec();
    degen.angle2 = degen.angle1;
    CHECK_THROWS_AS(build_x_mask(degen, {16, 16, 1}), InvalidInput);
}

TEST_CASE("fully truncated segments raise a degenerate-mask error") {
    XMaskSpec spec = diag_spec(0.001);
    spec.rho_col = 0.001;
    spec.rho_row = 0.001;
    CHECK_THROWS_WITH_AS(build_x_mask(spec, {224, 224, 3}),
                         doctest::Contains("degenerate mask"), InvalidInput);
}

TEST_CASE("rasterization equals the brute-force neighborhood oracle") {
    Rng rng(20240811);
    for (int trial = 0; trial < 80; ++trial) {
        const ImageShape shape{8 + static_cast<int>(rng.uniform_int(57)),
                               8 + static_cast<int>(rng.uniform_int(57)), 1};
        const XMaskSpec spec = random_spec(rng);
        XMask m;
        std::set<PixelCoord> oracle;
        try {
            m = build_x_mask(spec, shape);
            oracle = oracles::brute_force_support(spec, shape);
        } catch (const InvalidInput&) {
            continue;  // degenerate truncation; both sides agree it is empty
        }
        REQUIRE_MESSAGE(support_set(m) == oracle,
                        "mismatch at trial " << trial << " shape " << shape.height << "x"
                                             << shape.width);
    }
}

TEST_CASE("symmetry under rotation and flips for the centered X") {
    for (int side : {16, 17, 33}) {
        const XMask m = build_x_mask(diag_spec(0.8, 3), {side, side, 1});
        const auto set = support_set(m);
        for (const auto& p : set) {
            CHECK(set.count({p.col, side - 1 - p.row}));  // 90 degrees
            CHECK(set.count({side - 1 - p.row, p.col}));  // vertical flip
            CHECK(set.count({p.row, side - 1 - p.col}));  // horizontal flip
        }
    }
}

TEST_CASE("support grows monotonically in width and length") {
    Rng rng(77);
    for (int trial = 0; trial < 20; ++trial) {
        const ImageShape shape{8 + static_cast<int>(rng.uniform_int(40)),
                               8 + static_cast<int>(rng.uniform_int(40)), 1};
        XMaskSpec spec = random_spec(rng);
        spec.length_ratio = rng.uniform(0.2, 0.8);

        const auto base = support_set(build_x_mask(spec, shape));

        XMaskSpec wider = spec;
        wider.line_width = spec.line_width + 2;
        const auto wide_set = support_set(build_x_mask(wider, shape));
        for (const auto& p : base) CHECK(wide_set.count(p));

        XMaskSpec longer = spec;
        longer.length_ratio = std::min(1.0, spec.length_ratio + rng.uniform(0.05, 0.2));
        const auto long_set = support_set(build_x_mask(longer, shape));
        for (const auto& p : base) CHECK(long_set.count(p));
    }
}

TEST_CASE("paths are contained, connected, ordered, and end near the half-length") {
    Rng rng(99);
    for (int trial = 0; trial < 30; ++trial) {
        const ImageShape shape{8 + static_cast<int>(rng.uniform_int(50)),
                               8 + static_cast<int>(rng.uniform_int(50)), 1};
        const XMaskSpec spec = random_spec(rng);
        XMask m;
        try {
            m = build_x_mask(spec, shape);
        } catch (const InvalidInput&) {
            continue;
        }
        const double half =
            spec.length_ratio * std::min(shape.height, shape.width) * std::sqrt(2.0) / 2.0;
        const double cx = spec.rho_col * shape.width;
        const double cy = spec.rho_row * shape.height;
        for (const auto& path : m.paths) {
            REQUIRE_FALSE(path.empty());
            for (std::size_t i = 0; i < path.size(); ++i) {
                CHECK(m.contains(path[i].row, path[i].col));
                if (i > 0) {
                    CHECK(std::abs(path[i].row - path[i - 1].row) <= 1);
                    CHECK(std::abs(path[i].col - path[i - 1].col) <= 1);
                }
            }
            for (const auto endpoint : {path.front(), path.back()}) {
                const double ex = endpoint.col + 0.5 - cx;
                const double ey = endpoint.row + 0.5 - cy;
                CHECK(std::sqrt(ex * ex + ey * ey) <= half + 1.0 + 1e-9);
            }
        }
    }
}

TEST_CASE("identical spec and shape build bit-identical masks") {
    Rng rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        const XMaskSpec spec = random_spec(rng);
        const ImageShape shape{32, 48, 3};
        const XMask a = build_x_mask(spec, shape);
        const XMask b = build_x_mask(spec, shape);
        CHECK(a.mask == b.mask);
        CHECK(a.support == b.support);
        CHECK(a.paths == b.paths);
    }
}

TEST_CASE("render_mask_preview") {
    const XMask m = build_x_mask(diag_spec(0.9, 3), {16, 16, 3});

    const Grid bare = render_mask_preview(m);
    CHECK(bare.channels() == 1);
    CHECK(bare.height() == 16);
    CHECK(bare.width() == 16);
    for (int h = 0; h < 16; ++h)
        for (int w = 0; w < 16; ++w)
            CHECK(bare.at(0, h, w) == (m.contains(h, w) ? 1.0 : 0.0));

    Grid gray(3, 16, 16, 0.5);
    const Grid highlighted = render_mask_preview(m, &gray);
    CHECK(highlighted.shape() == gray.shape());
    for (int h = 0; h < 16; ++h)
        for (int w = 0; w < 16; ++w) {
            if (m.contains(h, w)) {
                CHECK(highlighted.at(0, h, w) == 1.0);
                CHECK(highlighted.at(1, h, w) == 0.0);
            } else {
                CHECK(highlighted.at(0, h, w) == 0.5);
            }
        }

    Grid wrong(3, 8, 8, 0.5);
    CHECK_THROWS_AS(render_mask_preview(m, &wrong), InvalidInput);
}

TEST_CASE("paths_to_text lists row,col per pixel with a blank separator") {
    const XMask m = build_x_mask(diag_spec(), {5, 5, 1});
    const std::string text = paths_to_text(m);
    CHECK(text.find("0,0\n1,1\n2,2\n3,3\n4,4\n") != std::string::npos);
    CHECK(text.find("\n\n") != std::string::npos);  // separator between paths
    CHECK(text.find("0,4\n1,3\n2,2\n3,1\n4,0\n") != std::string::npos);
}

TEST_CASE("apply_support and zero_off_support") {
    const XMask m = build_x_mask(diag_spec(0.9, 1), {8, 8, 1});
    Grid g(1, 8, 8, 1.0);
    CHECK_FALSE(zero_off_support(m, g));
    apply_support(m, g);
    CHECK(zero_off_support(m, g));
    for (const auto& p : m.support) CHECK(g.at(0, p.row, p.col) == 1.0);
}
