#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <vector>

#include "rsd/geometry.hpp"

namespace rsd {

struct Params {
    double epsilon = 0.0;
    double alpha = 0.0;
    double L = 0.0;
    double tau = 0.0;
    double lambda = 0.0;
    double ell = 0.0;

    // Throws std::invalid_argument naming the violated constraint.
    void validate() const;
};

Mat2 rotation(double angle);
Mat2 closest_rotation(const Mat2& m);
double dist_SO2(const Mat2& m);

// Uniform grid on [-L, L]^2, node (i, j) at (-L + i h, -L + j h), stored at j * n + i.
struct Grid2 {
    int n = 2;
    double L = 1.0;

    double h() const { return 2.0 * L / (n - 1); }
    Vec2 node(int i, int j) const { return {-L + i * h(), -L + j * h()}; }
    std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * n + i; }
    std::size_t size() const { return static_cast<std::size_t>(n) * n; }
    bool contains(Vec2 p, double slack = 1e-12) const {
        return p.x >= -L - slack && p.x <= L + slack && p.y >= -L - slack && p.y <= L + slack;
    }
    // Cell containing p (clamped) and the local coordinates in [0, 1]^2.
    void locate(Vec2 p, int& i, int& j, double& s, double& t) const;
};

struct ScalarField {
    Grid2 grid;
    std::vector<double> v;

    ScalarField() = default;
    explicit ScalarField(Grid2 g, double fill = 0.0) : grid(g), v(g.size(), fill) {}
    double& at(int i, int j) { return v[grid.index(i, j)]; }
    double at(int i, int j) const { return v[grid.index(i, j)]; }
    double interpolate(Vec2 p) const;
    static ScalarField sample(Grid2 g, const std::function<double(Vec2)>& f);
};

struct MatrixField {
    Grid2 grid;
    std::vector<Mat2> v;

    MatrixField() = default;
    explicit MatrixField(Grid2 g, Mat2 fill = {}) : grid(g), v(g.size(), fill) {}
    Mat2& at(int i, int j) { return v[grid.index(i, j)]; }
    const Mat2& at(int i, int j) const { return v[grid.index(i, j)]; }
    Mat2 interpolate(Vec2 p) const;
    ScalarField component(int r, int c) const;
    static MatrixField sample(Grid2 g, const std::function<Mat2(Vec2)>& f);
};

// Centered differences inside, first-order one-sided on the boundary.
std::array<ScalarField, 2> gradient_fd(const ScalarField& f);

// Row-wise curl d1 A(i,2) - d2 A(i,1); throws std::invalid_argument for n < 3.
std::array<ScalarField, 2> curl_fd(const MatrixField& field);

struct PolyCurve {
    std::vector<Vec2> vertices;
    bool closed = true;

    // Throws std::invalid_argument if the curve is open, too short, degenerate or self-intersecting.
    void validate() const;
    double signed_area() const;
    PolyCurve reversed() const;
    static PolyCurve circle(Vec2 c, double r, int n);
};

struct CoreBall {
    Vec2 center;
    double radius = 0.0;
};

struct CoreSet {
    std::vector<CoreBall> balls;

    // Centers must lie in [-L+ell, L-ell] x [-L, L].
    void validate(const Params& p) const;
    bool in_dilated(Vec2 x, double extra) const;
    double distance_to_centers(Vec2 x) const;
};

// Circulation of each row of the bilinear interpolant along gamma.  Segments are
// split at grid lines, so the 8-point rule is exact on every piece.
Vec2 line_integral(const MatrixField& field, const PolyCurve& gamma);

enum class BurgersClass { Zero, Quantized, Violation };

struct BurgersVerdict {
    BurgersClass cls = BurgersClass::Zero;
    double magnitude = 0.0;
};

double default_burgers_tol(const Params& p);
BurgersVerdict classify_burgers(Vec2 b, const Params& p, double tol);
inline BurgersVerdict classify_burgers(Vec2 b, const Params& p) {
    return classify_burgers(b, p, default_burgers_tol(p));
}
const char* to_string(BurgersClass c);

// max over rows of | oint V.t + oint (grad V t) . x |.  For curl-free V this is the
// same as (grad V) x . t; the transposed form is the one valid for every C^1 field.
double repr_burgers_residual(const MatrixField& field, const PolyCurve& gamma);

// -oint [[x, x_perp], [-x_perp, x]] . (grad A11, grad A22) t, with x measured from `origin`.
// Equals the Burgers vector when A is curl and divergence free near gamma.
Vec2 repr_burgers_harmonic(const MatrixField& field, const PolyCurve& gamma, Vec2 origin);

namespace detail {
// Integrates integrand(point) . (direction) over gamma with the split-segment rule.
// integrand returns, per row, the vector dotted with the tangent.
Vec2 curve_quadrature(const Grid2& grid, const PolyCurve& gamma,
                      const std::function<std::array<Vec2, 2>(Vec2)>& integrand);
}  // namespace detail

}  // namespace rsd
