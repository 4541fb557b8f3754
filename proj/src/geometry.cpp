#include "rsd/geometry.hpp"

#include <algorithm>

namespace rsd {

namespace {

template <typename T>
T tree_sum(std::span<const T> xs) {
    if (xs.empty()) return T{};
    if (xs.size() <= 8) {
        T s = xs[0];
        for (std::size_t i = 1; i < xs.size(); ++i) s += xs[i];
        return s;
    }
    const std::size_t half = xs.size() / 2;
    T a = tree_sum(xs.subspan(0, half));
    a += tree_sum(xs.subspan(half));
    return a;
}

}  // namespace

double pairwise_sum(std::span<const double> xs) { return tree_sum(xs); }
Vec2 pairwise_sum(std::span<const Vec2> xs) { return tree_sum(xs); }

double polygon_signed_area(std::span<const Vec2> poly) {
    const std::size_t n = poly.size();
    if (n < 3) return 0.0;
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += cross(poly[i], poly[(i + 1) % n]);
    return 0.5 * s;
}

std::vector<Vec2> clip_convex(const std::vector<Vec2>& subject, std::span<const Vec2> clip) {
    std::vector<Vec2> out = subject;
    const std::size_t m = clip.size();
    for (std::size_t e = 0; e < m && !out.empty(); ++e) {
        const Vec2 a = clip[e];
        const Vec2 b = clip[(e + 1) % m];
        const Vec2 ab = b - a;
        std::vector<Vec2> in;
        in.swap(out);
        const std::size_t k = in.size();
        for (std::size_t i = 0; i < k; ++i) {
            const Vec2 p = in[i];
            const Vec2 q = in[(i + 1) % k];
            const double sp = cross(ab, p - a);
            const double sq = cross(ab, q - a);
            if (sp >= 0.0) out.push_back(p);
            if ((sp >= 0.0) != (sq >= 0.0)) {
                const double t = sp / (sp - sq);
                out.push_back(p + (q - p) * t);
            }
        }
    }
    return out;
}

std::vector<Vec2> inscribed_ngon(Vec2 c, double r, int n) {
    std::vector<Vec2> p(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        const double t = 2.0 * M_PI * k / n;
        p[static_cast<std::size_t>(k)] = {c.x + r * std::cos(t), c.y + r * std::sin(t)};
    }
    return p;
}

bool segments_intersect(Vec2 p1, Vec2 p2, Vec2 q1, Vec2 q2) {
    auto orient = [](Vec2 a, Vec2 b, Vec2 c) {
        const double v = cross(b - a, c - a);
        return (v > 0.0) - (v < 0.0);
    };
    auto on_seg = [](Vec2 a, Vec2 b, Vec2 c) {
        return std::min(a.x, b.x) <= c.x && c.x <= std::max(a.x, b.x) &&
               std::min(a.y, b.y) <= c.y && c.y <= std::max(a.y, b.y);
    };
    const int o1 = orient(p1, p2, q1), o2 = orient(p1, p2, q2);
    const int o3 = orient(q1, q2, p1), o4 = orient(q1, q2, p2);
    if (o1 != o2 && o3 != o4) return true;
    if (o1 == 0 && on_seg(p1, p2, q1)) return true;
    if (o2 == 0 && on_seg(p1, p2, q2)) return true;
    if (o3 == 0 && on_seg(q1, q2, p1)) return true;
    if (o4 == 0 && on_seg(q1, q2, p2)) return true;
    return false;
}

}  // namespace rsd
