#pragma once

// Generators and independent oracles shared by the unit tests.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "rsd/field_core.hpp"

namespace test {

// Star-shaped polygon around c: sorted random angles, radii in [rmin, rmax].
inline rsd::PolyCurve random_star_polygon(std::mt19937_64& gen, rsd::Vec2 c, double rmin, double rmax,
                                          int nv) {
    std::uniform_real_distribution<double> ang(0.0, 2.0 * M_PI);
    std::uniform_real_distribution<double> rad(rmin, rmax);
    std::vector<double> th(static_cast<std::size_t>(nv));
    for (auto& t : th) t = ang(gen);
    std::sort(th.begin(), th.end());
    rsd::PolyCurve g;
    for (double t : th) {
        const double r = rad(gen);
        g.vertices.push_back({c.x + r * std::cos(t), c.y + r * std::sin(t)});
    }
    return g;
}

// Area by midpoint quadrature of the indicator along horizontal chords (even-odd rule),
// independent of the shoelace formula.
inline double polygon_area_by_quadrature(const std::vector<rsd::Vec2>& poly, int rows = 20000) {
    double ymin = poly[0].y, ymax = poly[0].y;
    for (const auto& p : poly) {
        ymin = std::min(ymin, p.y);
        ymax = std::max(ymax, p.y);
    }
    const double dy = (ymax - ymin) / rows;
    double area = 0.0;
    const std::size_t n = poly.size();
    for (int r = 0; r < rows; ++r) {
        const double y = ymin + (r + 0.5) * dy;
        std::vector<double> xs;
        for (std::size_t k = 0; k < n; ++k) {
            const auto a = poly[k], b = poly[(k + 1) % n];
            if ((a.y <= y) != (b.y <= y)) xs.push_back(a.x + (y - a.y) / (b.y - a.y) * (b.x - a.x));
        }
        std::sort(xs.begin(), xs.end());
        for (std::size_t k = 0; k + 1 < xs.size(); k += 2) area += (xs[k + 1] - xs[k]) * dy;
    }
    return area;
}

// Smooth field with curl whose finite-difference truncation error does not cancel.
inline rsd::MatrixField trig_field(int n, double L = 1.5) {
    return rsd::MatrixField::sample(rsd::Grid2{n, L}, [](rsd::Vec2 p) {
        return rsd::Mat2{std::sin(3 * p.y), std::sin(2 * p.x) * std::cos(p.y), std::exp(p.x) * p.y,
                         std::cos(2 * p.x + p.y)};
    });
}

}  // namespace test
