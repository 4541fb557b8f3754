#include "rsd/field_core.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace rsd {

void Params::validate() const {
    auto fail = [](const std::string& what) { throw std::invalid_argument("params: " + what); };
    if (!(epsilon > 0.0)) fail("epsilon must be positive");
    if (!(alpha > 0.0)) fail("alpha must be positive");
    if (!(L > 0.0)) fail("L must be positive");
    if (!(tau > 0.0)) fail("tau must be positive");
    if (!(lambda > 0.0)) fail("lambda must be positive");
    if (!(ell > 0.0)) fail("ell must be positive");
    if (alpha > 0.125) fail("alpha must not exceed 1/8");
    if (!(ell < L / 4.0)) fail("ell must be below L/4");
    if (!(lambda * epsilon < ell)) fail("lambda*epsilon must be below ell");
}

Mat2 rotation(double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    return {c, -s, s, c};
}

Mat2 closest_rotation(const Mat2& m) {
    // projection onto span{I, J}, then normalize
    const double a = 0.5 * (m.a00 + m.a11);
    const double b = 0.5 * (m.a10 - m.a01);
    const double r = std::hypot(a, b);
    if (r == 0.0) return Mat2::identity();
    return {a / r, -b / r, b / r, a / r};
}

double dist_SO2(const Mat2& m) { return (m - closest_rotation(m)).frob(); }

void Grid2::locate(Vec2 p, int& i, int& j, double& s, double& t) const {
    const double hh = h();
    const double fx = (p.x + L) / hh;
    const double fy = (p.y + L) / hh;
    i = std::clamp(static_cast<int>(std::floor(fx)), 0, n - 2);
    j = std::clamp(static_cast<int>(std::floor(fy)), 0, n - 2);
    s = fx - i;
    t = fy - j;
}

double ScalarField::interpolate(Vec2 p) const {
    int i, j;
    double s, t;
    grid.locate(p, i, j, s, t);
    return (1 - s) * (1 - t) * at(i, j) + s * (1 - t) * at(i + 1, j) + (1 - s) * t * at(i, j + 1) +
           s * t * at(i + 1, j + 1);
}

ScalarField ScalarField::sample(Grid2 g, const std::function<double(Vec2)>& f) {
    ScalarField out(g);
    for (int j = 0; j < g.n; ++j)
        for (int i = 0; i < g.n; ++i) out.at(i, j) = f(g.node(i, j));
    return out;
}

Mat2 MatrixField::interpolate(Vec2 p) const {
    int i, j;
    double s, t;
    grid.locate(p, i, j, s, t);
    return at(i, j) * ((1 - s) * (1 - t)) + at(i + 1, j) * (s * (1 - t)) +
           at(i, j + 1) * ((1 - s) * t) + at(i + 1, j + 1) * (s * t);
}

ScalarField MatrixField::component(int r, int c) const {
    ScalarField out(grid);
    for (std::size_t k = 0; k < v.size(); ++k) {
        const Mat2& m = v[k];
        out.v[k] = r == 0 ? (c == 0 ? m.a00 : m.a01) : (c == 0 ? m.a10 : m.a11);
    }
    return out;
}

MatrixField MatrixField::sample(Grid2 g, const std::function<Mat2(Vec2)>& f) {
    MatrixField out(g);
    for (int j = 0; j < g.n; ++j)
        for (int i = 0; i < g.n; ++i) out.at(i, j) = f(g.node(i, j));
    return out;
}

std::array<ScalarField, 2> gradient_fd(const ScalarField& f) {
    const Grid2& g = f.grid;
    const int n = g.n;
    const double h = g.h();
    std::array<ScalarField, 2> d{ScalarField(g), ScalarField(g)};
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            if (i == 0) d[0].at(i, j) = (f.at(1, j) - f.at(0, j)) / h;
            else if (i == n - 1) d[0].at(i, j) = (f.at(n - 1, j) - f.at(n - 2, j)) / h;
            else d[0].at(i, j) = (f.at(i + 1, j) - f.at(i - 1, j)) / (2 * h);
            if (j == 0) d[1].at(i, j) = (f.at(i, 1) - f.at(i, 0)) / h;
            else if (j == n - 1) d[1].at(i, j) = (f.at(i, n - 1) - f.at(i, n - 2)) / h;
            else d[1].at(i, j) = (f.at(i, j + 1) - f.at(i, j - 1)) / (2 * h);
        }
    }
    return d;
}

std::array<ScalarField, 2> curl_fd(const MatrixField& field) {
    if (field.grid.n < 3) throw std::invalid_argument("curl_fd: grid too small (n < 3)");
    std::array<ScalarField, 2> out;
    for (int r = 0; r < 2; ++r) {
        const auto g1 = gradient_fd(field.component(r, 1));
        const auto g0 = gradient_fd(field.component(r, 0));
        out[r] = ScalarField(field.grid);
        for (std::size_t k = 0; k < out[r].v.size(); ++k) out[r].v[k] = g1[0].v[k] - g0[1].v[k];
    }
    return out;
}

void PolyCurve::validate() const {
    if (!closed) throw std::invalid_argument("curve: not closed");
    const std::size_t m = vertices.size();
    if (m < 3) throw std::invalid_argument("curve: fewer than 3 vertices");
    if (signed_area() == 0.0) throw std::invalid_argument("curve: zero signed area");
    for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t b = a + 1; b < m; ++b) {
            const bool adjacent = b == a + 1 || (a == 0 && b == m - 1);
            if (adjacent) continue;
            if (segments_intersect(vertices[a], vertices[(a + 1) % m], vertices[b], vertices[(b + 1) % m]))
                throw std::invalid_argument("curve: self-intersection");
        }
    }
}

double PolyCurve::signed_area() const { return polygon_signed_area(vertices); }

PolyCurve PolyCurve::reversed() const {
    PolyCurve r = *this;
    std::reverse(r.vertices.begin(), r.vertices.end());
    return r;
}

PolyCurve PolyCurve::circle(Vec2 c, double r, int n) { return {inscribed_ngon(c, r, n), true}; }

void CoreSet::validate(const Params& p) const {
    for (const auto& b : balls) {
        if (!(b.center.x >= -p.L + p.ell && b.center.x <= p.L - p.ell && b.center.y >= -p.L &&
              b.center.y <= p.L))
            throw std::invalid_argument("core set: center outside [-L+ell, L-ell] x [-L, L]");
    }
}

bool CoreSet::in_dilated(Vec2 x, double extra) const {
    for (const auto& b : balls)
        if (norm(x - b.center) < b.radius + extra) return true;
    return false;
}

double CoreSet::distance_to_centers(Vec2 x) const {
    double d = INFINITY;
    for (const auto& b : balls) d = std::min(d, norm(x - b.center));
    return d;
}

namespace detail {

Vec2 curve_quadrature(const Grid2& grid, const PolyCurve& gamma,
                      const std::function<std::array<Vec2, 2>(Vec2)>& integrand) {
    const auto& vs = gamma.vertices;
    const std::size_t m = vs.size();
    for (const auto& p : vs)
        if (!grid.contains(p)) throw std::out_of_range("curve exits the grid domain");

    struct SegSum {
        Vec2 lo, hi;
        Vec2 value;
    };
    std::vector<SegSum> segs;
    segs.reserve(m);
    const double h = grid.h();
    const double L = grid.L;
    const std::size_t nseg = gamma.closed ? m : m - 1;
    for (std::size_t k = 0; k < nseg; ++k) {
        Vec2 a = vs[k], b = vs[(k + 1) % m];
        // canonical direction makes reversal an exact sign flip
        const bool flip = (b.x < a.x) || (b.x == a.x && b.y < a.y);
        if (flip) std::swap(a, b);
        const Vec2 d = b - a;
        std::vector<double> ts{0.0, 1.0};
        auto add_cuts = [&](double a0, double d0) {
            if (d0 == 0.0) return;
            const double lo = std::min(a0, a0 + d0), hi = std::max(a0, a0 + d0);
            const int k0 = static_cast<int>(std::ceil((lo + L) / h));
            const int k1 = static_cast<int>(std::floor((hi + L) / h));
            for (int q = k0; q <= k1; ++q) {
                const double t = (-L + q * h - a0) / d0;
                if (t > 0.0 && t < 1.0) ts.push_back(t);
            }
        };
        add_cuts(a.x, d.x);
        add_cuts(a.y, d.y);
        std::sort(ts.begin(), ts.end());
        ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
        std::vector<Vec2> pieces;
        pieces.reserve(ts.size());
        for (std::size_t q = 0; q + 1 < ts.size(); ++q) {
            const Vec2 p0 = a + d * ts[q];
            const Vec2 p1 = a + d * ts[q + 1];
            const Vec2 mid = (p0 + p1) * 0.5;
            const Vec2 half = (p1 - p0) * 0.5;
            Vec2 acc{};
            for (std::size_t g = 0; g < GaussLegendre8::nodes.size(); ++g) {
                const double xi = GaussLegendre8::nodes[g];
                const auto fp = integrand(mid + half * xi);
                const auto fm = integrand(mid - half * xi);
                const double w = GaussLegendre8::weights[g];
                acc.x += w * (dot(fp[0], half) + dot(fm[0], half));
                acc.y += w * (dot(fp[1], half) + dot(fm[1], half));
            }
            pieces.push_back(acc);
        }
        Vec2 val = pairwise_sum(pieces);
        if (flip) val = -val;
        segs.push_back({a, b, val});
    }
    std::sort(segs.begin(), segs.end(), [](const SegSum& s, const SegSum& t) {
        if (s.lo.x != t.lo.x) return s.lo.x < t.lo.x;
        if (s.lo.y != t.lo.y) return s.lo.y < t.lo.y;
        if (s.hi.x != t.hi.x) return s.hi.x < t.hi.x;
        return s.hi.y < t.hi.y;
    });
    std::vector<Vec2> vals;
    vals.reserve(segs.size());
    for (const auto& s : segs) vals.push_back(s.value);
    return pairwise_sum(vals);
}

}  // namespace detail

Vec2 line_integral(const MatrixField& field, const PolyCurve& gamma) {
    return detail::curve_quadrature(field.grid, gamma, [&](Vec2 p) {
        const Mat2 a = field.interpolate(p);
        return std::array<Vec2, 2>{a.row(0), a.row(1)};
    });
}

double default_burgers_tol(const Params& p) { return 0.05 * p.tau * p.epsilon; }

BurgersVerdict classify_burgers(Vec2 b, const Params& p, double tol) {
    const double mag = norm(b);
    if (mag <= tol) return {BurgersClass::Zero, mag};
    if (mag >= p.tau * p.epsilon - tol) return {BurgersClass::Quantized, mag};
    return {BurgersClass::Violation, mag};
}

const char* to_string(BurgersClass c) {
    switch (c) {
        case BurgersClass::Zero: return "Zero";
        case BurgersClass::Quantized: return "Quantized";
        case BurgersClass::Violation: return "Violation";
    }
    return "?";
}

namespace {

struct RowGradients {
    std::array<ScalarField, 2> d_first;   // gradient of A(r,0)
    std::array<ScalarField, 2> d_second;  // gradient of A(r,1)
};

RowGradients row_gradients(const MatrixField& f, int r) {
    return {gradient_fd(f.component(r, 0)), gradient_fd(f.component(r, 1))};
}

Vec2 centroid(const PolyCurve& g) {
    Vec2 c{};
    for (const auto& p : g.vertices) c += p;
    return c / static_cast<double>(g.vertices.size());
}

}  // namespace

double repr_burgers_residual(const MatrixField& field, const PolyCurve& gamma) {
    // the identity holds for any origin; the centroid keeps |x| small
    const Vec2 o = centroid(gamma);
    const std::array<RowGradients, 2> g{row_gradients(field, 0), row_gradients(field, 1)};
    const Vec2 lhs = line_integral(field, gamma);
    const Vec2 rhs = detail::curve_quadrature(field.grid, gamma, [&](Vec2 p) {
        const Vec2 x = p - o;
        std::array<Vec2, 2> out;
        for (int r = 0; r < 2; ++r) {
            const double v00 = g[r].d_first[0].interpolate(p), v01 = g[r].d_first[1].interpolate(p);
            const double v10 = g[r].d_second[0].interpolate(p), v11 = g[r].d_second[1].interpolate(p);
            // (grad V t) . x = t . (grad V^T x)
            out[r] = {v00 * x.x + v10 * x.y, v01 * x.x + v11 * x.y};
        }
        return out;
    });
    return std::max(std::abs(lhs.x + rhs.x), std::abs(lhs.y + rhs.y));
}

Vec2 repr_burgers_harmonic(const MatrixField& field, const PolyCurve& gamma, Vec2 origin) {
    const auto g11 = gradient_fd(field.component(0, 0));
    const auto g22 = gradient_fd(field.component(1, 1));
    const Vec2 v = detail::curve_quadrature(field.grid, gamma, [&](Vec2 p) {
        const Vec2 x = p - origin;
        const Vec2 xp = perp(x);
        const Vec2 a{g11[0].interpolate(p), g11[1].interpolate(p)};
        const Vec2 d{g22[0].interpolate(p), g22[1].interpolate(p)};
        return std::array<Vec2, 2>{Vec2{dot(x, a), dot(xp, a)}, Vec2{-dot(xp, d), dot(x, d)}};
    });
    return -v;
}

}  // namespace rsd
