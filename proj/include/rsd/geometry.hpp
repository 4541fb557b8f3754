#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace rsd {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator-() const { return {-x, -y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator/(double s) const { return {x / s, y / s}; }
    Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
    Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }
    bool operator==(const Vec2&) const = default;
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }
inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
inline double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Vec2& a) { return std::hypot(a.x, a.y); }
// counter-clockwise quarter turn, J x
inline Vec2 perp(const Vec2& a) { return {-a.y, a.x}; }

// row-major 2x2
struct Mat2 {
    double a00 = 0.0, a01 = 0.0, a10 = 0.0, a11 = 0.0;

    static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
    static Mat2 diag(double d0, double d1) { return {d0, 0.0, 0.0, d1}; }

    Mat2 operator+(const Mat2& o) const { return {a00 + o.a00, a01 + o.a01, a10 + o.a10, a11 + o.a11}; }
    Mat2 operator-(const Mat2& o) const { return {a00 - o.a00, a01 - o.a01, a10 - o.a10, a11 - o.a11}; }
    Mat2 operator*(double s) const { return {a00 * s, a01 * s, a10 * s, a11 * s}; }
    Mat2 operator*(const Mat2& o) const {
        return {a00 * o.a00 + a01 * o.a10, a00 * o.a01 + a01 * o.a11,
                a10 * o.a00 + a11 * o.a10, a10 * o.a01 + a11 * o.a11};
    }
    Vec2 operator*(const Vec2& v) const { return {a00 * v.x + a01 * v.y, a10 * v.x + a11 * v.y}; }
    Mat2& operator+=(const Mat2& o) { a00 += o.a00; a01 += o.a01; a10 += o.a10; a11 += o.a11; return *this; }
    bool operator==(const Mat2&) const = default;

    Mat2 transpose() const { return {a00, a10, a01, a11}; }
    double det() const { return a00 * a11 - a01 * a10; }
    double frob2() const { return a00 * a00 + a01 * a01 + a10 * a10 + a11 * a11; }
    double frob() const { return std::sqrt(frob2()); }
    Vec2 row(int i) const { return i == 0 ? Vec2{a00, a01} : Vec2{a10, a11}; }
    Vec2 col(int j) const { return j == 0 ? Vec2{a00, a10} : Vec2{a01, a11}; }
    Mat2 inverse() const {
        const double d = det();
        return {a11 / d, -a01 / d, -a10 / d, a00 / d};
    }
    bool finite() const {
        return std::isfinite(a00) && std::isfinite(a01) && std::isfinite(a10) && std::isfinite(a11);
    }
};

inline Mat2 operator*(double s, const Mat2& m) { return m * s; }

// Deterministic pairwise (tree) summation.  Order depends only on the input
// order, so results are bitwise reproducible.
double pairwise_sum(std::span<const double> xs);
Vec2 pairwise_sum(std::span<const Vec2> xs);

// 8-point Gauss-Legendre on [-1, 1]; only the positive half, the rule is symmetric.
struct GaussLegendre8 {
    static constexpr std::array<double, 4> nodes = {
        0.1834346424956498049394761, 0.5255324099163289858177390,
        0.7966664774136267395915539, 0.9602898564975362316835609};
    static constexpr std::array<double, 4> weights = {
        0.3626837833783619829651504, 0.3137066458778872873379622,
        0.2223810344533744705443560, 0.1012285362903762591525314};
};

double polygon_signed_area(std::span<const Vec2> poly);

// Sutherland-Hodgman clip of `subject` against the convex counter-clockwise polygon `clip`.
std::vector<Vec2> clip_convex(const std::vector<Vec2>& subject, std::span<const Vec2> clip);

// Counter-clockwise regular n-gon inscribed in the circle (c, r).
std::vector<Vec2> inscribed_ngon(Vec2 c, double r, int n);

bool segments_intersect(Vec2 p1, Vec2 p2, Vec2 q1, Vec2 q2);

}  // namespace rsd
