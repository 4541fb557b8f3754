#include "rsd/grain_boundary.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "rsd/energies.hpp"

namespace rsd {

double DyadicFrame::tile_center(int k) const { return -static_cast<double>(N) * H + (2 * k + 1) * H; }

DyadicFrame build_frame(const Params& p) {
    p.validate();
    DyadicFrame f;
    f.r0 = 0.5 * p.lambda * p.epsilon;
    f.b = p.tau * p.epsilon;
    f.H = f.b / (4.0 * std::sin(p.alpha));
    const double tiles = p.L / f.H;
    const double rounded = std::round(tiles);
    if (std::abs(tiles - rounded) > 1e-9 * tiles || static_cast<long>(rounded) % 2 != 0 || rounded < 2)
        throw std::invalid_argument("grain boundary: L / H = " + std::to_string(tiles) +
                                    " is not an even integer; eps must be 4 L sin(alpha) / (tau 2k)");
    f.N = static_cast<int>(rounded);
    f.H = p.L / f.N;
    if (f.H < 1.5 * f.r0) throw std::invalid_argument("grain boundary: tile smaller than the core square");
    if (f.H > p.L - p.ell) throw std::invalid_argument("grain boundary: strip reaches the boundary bands");
    f.nbar = static_cast<int>(std::floor(std::log2(1.0 / p.alpha)));
    f.r.push_back(f.r0);
    for (double r = 2.0 * f.r0; r <= f.H / 1.5; r *= 2.0) f.r.push_back(r);
    f.r.push_back(f.H);
    f.m = static_cast<int>(f.r.size()) - 1;
    return f;
}

double compatible_epsilon(double alpha, double L, double tau, double eps_max) {
    // eps = 4 L sin(alpha) / (tau N), N even and as small as eps <= eps_max allows
    const double q = 4.0 * L * std::sin(alpha) / tau;
    double N = 2.0 * std::ceil(q / eps_max / 2.0 - 1e-12);
    if (N < 2) N = 2;
    return q / N;
}

namespace {

enum class Kind { C1, C2, C3, C4, TL, TR, D, O };

struct TileTri {
    std::array<Vec2, 3> x, w1, w;
    int level;
};

struct TileBuilder {
    DyadicFrame f;
    Mat2 Ra, Rm;
    double ca;
    Vec2 cL, cR;

    TileBuilder(const Params& p) : f(build_frame(p)) {
        Ra = rotation(p.alpha);
        Rm = rotation(-p.alpha);
        ca = std::cos(p.alpha);
        cL = {-0.5 * f.b, 0.0};
        cR = {0.5 * f.b, 0.0};
    }

    static Vec2 pos(Kind k, double r) {
        switch (k) {
            case Kind::C1: return {-r, r};
            case Kind::C2: return {r, r};
            case Kind::C3: return {r, -r};
            case Kind::C4: return {-r, -r};
            case Kind::TL:
            case Kind::TR: return {0.0, r};
            case Kind::D: return {0.0, -r};
            case Kind::O: break;
        }
        return {0.0, 0.0};
    }

    // the outer corners are not slipped, so v2 stays a rotation on the outer side triangles
    Vec2 slip(Kind k, int n) const {
        if (k == Kind::TL || (k == Kind::C1 && n < f.m)) return cL;
        if (k == Kind::TR || (k == Kind::C2 && n < f.m)) return cR;
        return {};
    }

    Vec2 value(Kind k, int n) const {
        const Vec2 x = pos(k, f.r[static_cast<std::size_t>(n)]);
        switch (k) {
            case Kind::C1: return n < f.m ? Ra * (x + cL) : Ra * x;
            case Kind::C2: return n < f.m ? Rm * (x + cR) : Rm * x;
            case Kind::C3: return Rm * x;
            case Kind::C4: return Ra * x;
            case Kind::TL: return ca * x + cL;
            case Kind::TR: return ca * x + cR;
            case Kind::D: return ca * x;
            case Kind::O: break;
        }
        return {0.0, 0.0};
    }

    void push(std::vector<TileTri>& out, std::array<std::pair<Kind, int>, 3> v, int level) const {
        TileTri t;
        t.level = level;
        for (std::size_t i = 0; i < 3; ++i) {
            const auto [k, n] = v[i];
            t.x[i] = pos(k, f.r[static_cast<std::size_t>(n)]);
            t.w1[i] = t.x[i] + slip(k, n);
            t.w[i] = value(k, n);
        }
        out.push_back(t);
    }

    std::vector<TileTri> triangles() const {
        using K = Kind;
        std::vector<TileTri> out;
        push(out, {{{K::O, 0}, {K::C3, 0}, {K::C2, 0}}}, 0);
        push(out, {{{K::O, 0}, {K::C2, 0}, {K::TR, 0}}}, 0);
        push(out, {{{K::O, 0}, {K::TL, 0}, {K::C1, 0}}}, 0);
        push(out, {{{K::O, 0}, {K::C1, 0}, {K::C4, 0}}}, 0);
        push(out, {{{K::O, 0}, {K::C4, 0}, {K::D, 0}}}, 0);
        push(out, {{{K::O, 0}, {K::D, 0}, {K::C3, 0}}}, 0);
        for (int n = 1; n <= f.m; ++n) {
            const int i = n - 1;
            // side trapezoids
            push(out, {{{K::C1, n}, {K::C1, i}, {K::C4, i}}}, n);
            push(out, {{{K::C1, n}, {K::C4, i}, {K::C4, n}}}, n);
            push(out, {{{K::C2, n}, {K::C3, i}, {K::C3, n}}}, n);
            push(out, {{{K::C2, n}, {K::C2, i}, {K::C3, i}}}, n);
            // top, split at the slip line x = 0
            push(out, {{{K::C1, n}, {K::TL, n}, {K::C1, i}}}, n);
            push(out, {{{K::C1, i}, {K::TL, n}, {K::TL, i}}}, n);
            push(out, {{{K::TR, i}, {K::TR, n}, {K::C2, i}}}, n);
            push(out, {{{K::TR, n}, {K::C2, n}, {K::C2, i}}}, n);
            // bottom
            push(out, {{{K::C3, n}, {K::C3, i}, {K::D, n}}}, n);
            push(out, {{{K::C3, i}, {K::D, n}, {K::D, i}}}, n);
            push(out, {{{K::D, i}, {K::D, n}, {K::C4, i}}}, n);
            push(out, {{{K::D, n}, {K::C4, i}, {K::C4, n}}}, n);
        }
        return out;
    }
};

}  // namespace

PiecewiseAffineMap build_v(const Params& p) {
    const TileBuilder tb(p);
    PiecewiseAffineMap m;
    for (const auto& t : tb.triangles()) m.add(t.x[0], t.x[1], t.x[2], t.w[0], t.w[1], t.w[2], t.level, 0);
    m.finalize();
    return m;
}

PiecewiseAffineMap build_v1(const Params& p) {
    const TileBuilder tb(p);
    PiecewiseAffineMap m;
    for (const auto& t : tb.triangles()) m.add(t.x[0], t.x[1], t.x[2], t.w1[0], t.w1[1], t.w1[2], t.level, 0);
    m.finalize();
    return m;
}

PiecewiseAffineMap build_v2(const Params& p) {
    const TileBuilder tb(p);
    PiecewiseAffineMap m;
    for (const auto& t : tb.triangles()) {
        const double a = cross(t.x[1] - t.x[0], t.x[2] - t.x[0]);
        const double a1 = cross(t.w1[1] - t.w1[0], t.w1[2] - t.w1[0]);
        if (!(a1 * a > 0.0) || std::abs(a1) < 1e-9 * std::abs(a))
            throw std::invalid_argument("build_v2: the slip map folds a triangle at ring " +
                                        std::to_string(t.level) + "; tau / lambda is too large");
        m.add(t.w1[0], t.w1[1], t.w1[2], t.w[0], t.w[1], t.w[2], t.level, 0);
    }
    m.finalize();
    return m;
}

GrainBoundary compose_tile(const Params& p) {
    const TileBuilder tb(p);
    const auto tris = tb.triangles();
    GrainBoundary gb;
    gb.frame = tb.f;
    const DyadicFrame& f = gb.frame;
    const Mat2 Ra = tb.Ra, Rm = tb.Rm;
    for (int k = 0; k < f.N; ++k) {
        const Vec2 c{0.0, f.tile_center(k)};
        const Vec2 o = Ra * c;
        for (const auto& t : tris)
            gb.u.add(t.x[0] + c, t.x[1] + c, t.x[2] + c, t.w[0] + o, t.w[1] + o, t.w[2] + o, t.level, k);
        gb.cores.balls.push_back({c, p.lambda * p.epsilon});
    }
    const double L = p.L, H = f.H;
    const std::array<Vec2, 4> left{{{-L, -L}, {-H, -L}, {-H, L}, {-L, L}}};
    const std::array<Vec2, 4> right{{{H, -L}, {L, -L}, {L, L}, {H, L}}};
    gb.u.add(left[0], left[1], left[2], Ra * left[0], Ra * left[1], Ra * left[2]);
    gb.u.add(left[0], left[2], left[3], Ra * left[0], Ra * left[2], Ra * left[3]);
    gb.u.add(right[0], right[1], right[2], Rm * right[0], Rm * right[1], Rm * right[2]);
    gb.u.add(right[0], right[2], right[3], Rm * right[0], Rm * right[2], Rm * right[3]);
    gb.u.finalize();
    return gb;
}

double gb_elastic_energy(const PiecewiseAffineMap& u, const CoreSet& S, const Params& p) {
    const double le = p.lambda * p.epsilon;
    std::vector<std::vector<Vec2>> disks;
    for (const auto& b : S.balls) disks.push_back(inscribed_ngon(b.center, b.radius + le, 64));
    std::vector<double> terms;
    terms.reserve(u.size());
    for (const auto& t : u.pieces()) {
        const double d = dist_SO2(t.grad);
        if (d == 0.0) continue;
        double lx = INFINITY, hx = -INFINITY, ly = INFINITY, hy = -INFINITY;
        for (const auto& v : t.x) {
            lx = std::min(lx, v.x);
            hx = std::max(hx, v.x);
            ly = std::min(ly, v.y);
            hy = std::max(hy, v.y);
        }
        double area = t.area();
        const std::vector<Vec2> tri(t.x.begin(), t.x.end());
        for (std::size_t c = 0; c < S.balls.size(); ++c) {
            const auto& b = S.balls[c];
            const double R = b.radius + le;
            if (b.center.x + R < lx || b.center.x - R > hx || b.center.y + R < ly || b.center.y - R > hy) continue;
            const auto clipped = clip_convex(tri, disks[c]);
            if (clipped.size() >= 3) area -= polygon_signed_area(clipped);
        }
        if (area <= 0.0) continue;
        terms.push_back(area * d * d);
    }
    return pairwise_sum(terms) / p.tau;
}

std::vector<GbScanRow> gb_scan(const std::vector<double>& alphas, const Params& base) {
    if (alphas.empty()) throw std::invalid_argument("gb_scan: empty alpha list");
    std::vector<GbScanRow> rows;
    for (double a : alphas) {
        Params p = base;
        p.alpha = a;
        p.epsilon = compatible_epsilon(a, p.L, p.tau, p.L / 1024.0);
        const GrainBoundary gb = compose_tile(p);
        GbScanRow r;
        r.alpha = a;
        r.epsilon = p.epsilon;
        r.N = gb.frame.N;
        r.E_el = gb_elastic_energy(gb.u, gb.cores, p);
        r.E_core = core_energy(gb.cores, p);
        r.F = r.E_el + r.E_core;
        r.ratio = r.F / (p.tau * p.epsilon * a * p.L * (std::abs(std::log2(a)) + 1.0));
        rows.push_back(r);
    }
    return rows;
}

}  // namespace rsd
