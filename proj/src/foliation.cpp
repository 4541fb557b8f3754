#include "rsd/foliation.hpp"

#include <algorithm>
#include <cmath>
#include <array>
#include <functional>
#include <tuple>
#include <ostream>
#include <stdexcept>
#include <string>

namespace rsd {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;

bool lex_less(Vec2 a, Vec2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); }

// angles (in [0, 2 pi)) where the circle (c, rho) meets the circle (q, s)
void crossing_angles(Vec2 c, double rho, Vec2 q, double s, std::vector<double>& out) {
    const Vec2 d = c - q;
    const double dd = norm(d);
    if (dd == 0.0) return;
    const double cosv = (s * s - dd * dd - rho * rho) / (2.0 * rho * dd);
    if (!(cosv > -1.0 && cosv < 1.0)) return;
    const double base = std::atan2(d.y, d.x), w = std::acos(cosv);
    for (double t : {base + w, base - w}) {
        double a = std::fmod(t, kTwoPi);
        if (a < 0) a += kTwoPi;
        out.push_back(a);
    }
}

}  // namespace

double perimeter_in_annulus(const BallFamily& balls) {
    const auto& B = balls.balls;
    std::vector<double> total;
    for (std::size_t i = 0; i < B.size(); ++i) {
        const Vec2 c = B[i].center;
        const double rho = B[i].radius;
        std::vector<double> cuts{0.0, kTwoPi};
        crossing_angles(c, rho, {0, 0}, 1.0, cuts);
        crossing_angles(c, rho, {0, 0}, 0.5, cuts);
        for (std::size_t j = 0; j < B.size(); ++j)
            if (j != i) crossing_angles(c, rho, B[j].center, B[j].radius, cuts);
        std::sort(cuts.begin(), cuts.end());
        double len = 0.0;
        for (std::size_t a = 0; a + 1 < cuts.size(); ++a) {
            const double t0 = cuts[a], t1 = cuts[a + 1];
            if (t1 <= t0) continue;
            const double tm = 0.5 * (t0 + t1);
            const Vec2 y = c + Vec2{std::cos(tm), std::sin(tm)} * rho;
            const double ry = norm(y);
            if (ry < 0.5 || ry >= 1.0) continue;
            bool covered = false;
            for (std::size_t j = 0; j < B.size() && !covered; ++j)
                if (j != i && norm(y - B[j].center) < B[j].radius) covered = true;
            // a duplicated ball contributes its circle once
            for (std::size_t j = 0; j < i && !covered; ++j)
                if (B[j].center == c && B[j].radius == rho) covered = true;
            if (!covered) len += t1 - t0;
        }
        total.push_back(len * rho);
    }
    return pairwise_sum(total);
}

namespace {

std::pair<double, double> deltas_unchecked(const BallFamily& balls, double delta0) {
    const auto& B = balls.balls;
    double s = 0.5 + delta0;
    for (bool moved = true; moved;) {
        moved = false;
        for (const auto& b : B) {
            const double d = norm(b.center);
            if (d - b.radius < s && s < d + b.radius) {
                s = d + b.radius;
                moved = true;
            }
        }
    }
    const double d1 = s - 0.5;
    s = 1.0 - delta0;
    for (bool moved = true; moved;) {
        moved = false;
        for (const auto& b : B) {
            const double d = norm(b.center);
            if (d - b.radius < s && s < d + b.radius) {
                s = d - b.radius;
                moved = true;
            }
        }
    }
    return {d1, 1.0 - s};
}

void check_perimeter(const BallFamily& balls, double bound, const char* who) {
    const double per = perimeter_in_annulus(balls);
    if (per > bound)
        throw std::invalid_argument(std::string(who) + ": perimeter " + std::to_string(per) +
                                    " in the annulus exceeds " + std::to_string(bound));
}

}  // namespace

std::pair<double, double> compute_deltas(const BallFamily& balls, double delta0) {
    if (!(delta0 > 0.0 && delta0 < 0.25)) throw std::invalid_argument("compute_deltas: delta0 must lie in (0, 1/4)");
    check_perimeter(balls, delta0, "compute_deltas");
    return deltas_unchecked(balls, delta0);
}

int CoverHierarchy::vertex_count() const {
    int n = 0;
    for (const auto& l : I) n += static_cast<int>(l.size());
    return n;
}

std::vector<std::pair<int, int>> CoverHierarchy::degree2_children() const {
    std::vector<std::pair<int, int>> out;
    for (int k = 2; k <= K - 1; ++k)
        for (std::size_t a = 0; a < I[static_cast<std::size_t>(k)].size(); ++a) {
            if (degree[static_cast<std::size_t>(k)][a] != 2) continue;
            const auto& below = edge[static_cast<std::size_t>(k - 1)];
            for (std::size_t b = 0; b < below.size(); ++b)
                if (below[b] == static_cast<int>(a)) out.push_back({k, I[static_cast<std::size_t>(k - 1)][b]});
        }
    return out;
}

bool CoverHierarchy::leaf_bound_holds() const {
    // root position of every vertex, then per-tree counts
    std::vector<std::vector<int>> root(I.size());
    root[static_cast<std::size_t>(K)].resize(I[static_cast<std::size_t>(K)].size());
    for (std::size_t a = 0; a < root[static_cast<std::size_t>(K)].size(); ++a) root[static_cast<std::size_t>(K)][a] = static_cast<int>(a);
    for (int k = K - 1; k >= 0; --k) {
        const auto ku = static_cast<std::size_t>(k);
        root[ku].resize(I[ku].size());
        for (std::size_t a = 0; a < I[ku].size(); ++a) root[ku][a] = root[ku + 1][static_cast<std::size_t>(edge[ku][a])];
    }
    const std::size_t nroots = I[static_cast<std::size_t>(K)].size();
    std::vector<int> nv(nroots, 0), n1(nroots, 0), n2(nroots, 0);
    for (std::size_t k = 0; k < I.size(); ++k)
        for (std::size_t a = 0; a < I[k].size(); ++a) {
            const auto t = static_cast<std::size_t>(root[k][a]);
            ++nv[t];
            n1[t] += degree[k][a] == 1;
            n2[t] += degree[k][a] == 2;
        }
    for (std::size_t t = 0; t < nroots; ++t)
        if (nv[t] > 1 && nv[t] > 2 * n1[t] + n2[t]) return false;
    return true;
}

CoverHierarchy build_hierarchy(const std::vector<Vec2>& points, double c0, double M) {
    if (points.empty()) throw std::invalid_argument("build_hierarchy: no points");
    if (!(M > 34.0)) throw std::invalid_argument("build_hierarchy: M must exceed 34");
    if (!(c0 > 0.0)) throw std::invalid_argument("build_hierarchy: c0 must be positive");
    CoverHierarchy h;
    h.points = points;
    h.M = M;
    const auto N = static_cast<double>(points.size());
    h.r0 = c0 / N;
    h.K = static_cast<int>(std::floor(0.5 * std::log(N)));
    std::vector<int> order(points.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return lex_less(points[static_cast<std::size_t>(a)], points[static_cast<std::size_t>(b)]);
    });
    double r = h.r0;
    for (int k = 0; k <= h.K; ++k, r *= M) {
        h.r.push_back(r);
        std::vector<int> level;
        for (int i : order) {
            bool ok = true;
            for (int j : level)
                if (norm(points[static_cast<std::size_t>(i)] - points[static_cast<std::size_t>(j)]) < r) {
                    ok = false;
                    break;
                }
            if (ok) level.push_back(i);
        }
        h.I.push_back(std::move(level));
    }
    for (int k = 0; k < h.K; ++k) {
        const auto& lo = h.I[static_cast<std::size_t>(k)];
        const auto& hi = h.I[static_cast<std::size_t>(k + 1)];
        std::vector<int> e(lo.size());
        for (std::size_t a = 0; a < lo.size(); ++a) {
            double best = INFINITY;
            for (std::size_t b = 0; b < hi.size(); ++b) {
                const double d = norm(points[static_cast<std::size_t>(lo[a])] - points[static_cast<std::size_t>(hi[b])]);
                if (d < best) {
                    best = d;
                    e[a] = static_cast<int>(b);
                }
            }
        }
        h.edge.push_back(std::move(e));
    }
    h.degree.resize(h.I.size());
    h.pruned.resize(h.I.size());
    for (int k = 0; k <= h.K; ++k) {
        const auto ku = static_cast<std::size_t>(k);
        h.degree[ku].assign(h.I[ku].size(), k < h.K ? 1 : 0);
        h.pruned[ku].assign(h.I[ku].size(), 0);
        if (k > 0)
            for (int b : h.edge[ku - 1]) ++h.degree[ku][static_cast<std::size_t>(b)];
    }
    for (int k = h.K - 1; k >= 0; --k) {
        const auto ku = static_cast<std::size_t>(k);
        for (std::size_t a = 0; a < h.I[ku].size(); ++a) {
            const auto par = static_cast<std::size_t>(h.edge[ku][a]);
            const bool par_cut = k + 1 < h.K && h.degree[ku + 1][par] == 2;
            h.pruned[ku][a] = h.pruned[ku + 1][par] || par_cut;
        }
    }
    return h;
}

// ---- the foliation function

namespace {

double eta(double t, double lo, double hi) {
    if (t <= lo) return 1.0;
    if (t >= hi) return 0.0;
    return (hi - t) / (hi - lo);
}

}  // namespace

double FoliationFn::phi0(Vec2 y) const {
    const double r = norm(y);
    if (r >= 1.0 - delta2) return 0.0;
    if (r <= 0.5 + delta1) return 1.0;
    return std::clamp(slope * (1.0 - delta2 - r), 0.0, 1.0);
}

double FoliationFn::phi1(Vec2 y) const {
    const double lo = std::min(c1(), c2()), hi = std::max(c1(), c2());
    for (const auto& s : sites) {
        const double t = norm(y - s.center) / s.rbar;
        if (t < hi) {
            const double e = eta(t, lo, hi);
            return e * s.phi_bar + (1.0 - e) * phi0(y);
        }
    }
    return phi0(y);
}

double FoliationFn::psi(double t) const {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    double before = 0.0;  // length of the excluded set below t
    for (const auto& [a, b] : cut) {
        if (t < a) break;
        if (t <= b) {
            // constant on the whole interval, pinned to the end values at 0 and 1
            if (a <= 0.0) return 0.0;
            if (b >= 1.0) return 1.0;
            t = a;
            break;
        }
        before += b - a;
    }
    return std::clamp((t - before) / (1.0 - cut_length), 0.0, 1.0);
}

double FoliationFn::operator()(Vec2 x) const { return psi(phi1((x - p) / scale)); }

Vec2 FoliationFn::gradient(Vec2 x) const {
    const Vec2 y = (x - p) / scale;
    const double t = phi1(y);
    if (t <= 0.0 || t >= 1.0) return {0.0, 0.0};
    for (const auto& [a, b] : cut)
        if (a <= t && t <= b) return {0.0, 0.0};
    const double r = norm(y);
    Vec2 g0{0.0, 0.0};
    if (r > 0.5 + delta1 && r < 1.0 - delta2) g0 = y * (-slope / r);
    Vec2 g1 = g0;
    const double lo = std::min(c1(), c2()), hi = std::max(c1(), c2());
    for (const auto& s : sites) {
        const Vec2 d = y - s.center;
        const double dn = norm(d), tt = dn / s.rbar;
        if (tt < hi) {
            const double e = eta(tt, lo, hi);
            g1 = g0 * (1.0 - e);
            if (tt > lo) g1 += d * ((-1.0 / (hi - lo)) * (s.phi_bar - phi0(y)) / (dn * s.rbar));
            break;
        }
    }
    return g1 * (1.0 / ((1.0 - cut_length) * scale));
}

std::vector<double> FoliationFn::plateaus() const {
    std::vector<double> v;
    for (const auto& [a, b] : cut) {
        const double val = psi(0.5 * (a + b));
        if (val > 0.0 && val < 1.0) v.push_back(val);
    }
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

void FoliationFn::dump(std::ostream& os, int n) const {
    const auto old = os.precision(17);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const Vec2 y{-1.0 + 2.0 * (i + 0.5) / n, -1.0 + 2.0 * (j + 0.5) / n};
            const Vec2 x = p + y * scale;
            os << x.x << ' ' << x.y << ' ' << (*this)(x) << '\n';
        }
    os.precision(old);
}

namespace {

// average of f over the disk (c, R): 16 Gauss-Legendre panels in r, 128 midpoints in angle
double disk_average(const std::function<double(Vec2)>& f, Vec2 c, double R) {
    std::vector<double> terms;
    const int panels = 16, nth = 128;
    for (int pnl = 0; pnl < panels; ++pnl) {
        const double a = R * pnl / panels, b = R * (pnl + 1) / panels;
        const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        for (std::size_t q = 0; q < 4; ++q)
            for (int sgn : {-1, 1}) {
                const double r = mid + sgn * half * GaussLegendre8::nodes[q];
                const double w = half * GaussLegendre8::weights[q] * r * (kTwoPi / nth);
                for (int k = 0; k < nth; ++k) {
                    const double th = kTwoPi * (k + 0.5) / nth;
                    terms.push_back(w * f(c + Vec2{std::cos(th), std::sin(th)} * r));
                }
            }
    }
    return pairwise_sum(terms) / (M_PI * R * R);
}

FoliationFn build_foliation(const BallFamily& balls, double delta0, double M) {
    FoliationFn f;
    f.M = M;
    f.delta0 = delta0;
    std::tie(f.delta1, f.delta2) = deltas_unchecked(balls, delta0);
    f.slope = 1.0 / (0.5 - f.delta1 - f.delta2);
    const auto& B = balls.balls;
    const double lo = std::min(f.c1(), f.c2()), hi = std::max(f.c1(), f.c2());
    if (!B.empty()) {
        std::vector<Vec2> pts;
        for (const auto& b : B) pts.push_back(b.center);
        const CoverHierarchy h = build_hierarchy(pts, 2.0 * delta0, M);
        f.r0 = h.r0;
        std::vector<int> J;
        int kmax = 0;
        for (const auto& [k, i0] : h.degree2_children()) {
            J.push_back(i0);
            kmax = std::max(kmax, k);
        }
        std::sort(J.begin(), J.end());
        J.erase(std::unique(J.begin(), J.end()), J.end());
        if (!J.empty()) {
            // radii r_{k-1} for the detected annuli; a larger start radius finds the trivially empty
            // annulus around the whole point set
            const auto sel = make_deg2_disjoint(pts, J, h.r[static_cast<std::size_t>(kmax - 1)], 1.0 / M, M, kmax - 1);
            for (int j : sel.chosen) {
                const Vec2 c = pts[static_cast<std::size_t>(j)];
                const double rb = sel.r[static_cast<std::size_t>(j)];
                // sites reaching the boundary circles would move the boundary values
                if (norm(c) + hi * rb >= 1.0 || norm(c) - hi * rb <= 0.5) continue;
                const double avg = disk_average([&](Vec2 y) { return f.phi0(y); }, c, f.c2() * rb);
                f.sites.push_back({c, rb, avg});
            }
        }
    }
    f.lip_phi1 = f.slope * (f.sites.empty() ? 1.0 : 1.0 + 2.0 * f.c2() / (hi - lo));
    return f;
}

}  // namespace

FoliationFn foliate(const BallFamily& balls, double delta0, double M) {
    if (!(delta0 > 0.0 && delta0 < 0.25)) throw std::invalid_argument("foliate: delta0 must lie in (0, 1/4)");
    if (!(M > 34.0)) throw std::invalid_argument("foliate: M must exceed 34");
    for (std::size_t i = 0; i < balls.balls.size(); ++i)
        if (!(balls.balls[i].radius > 0.0))
            throw std::invalid_argument("foliate: ball " + std::to_string(i) + " has no positive radius");
    check_perimeter(balls, delta0, "foliate");
    FoliationFn f = build_foliation(balls, delta0, M);
    // delta0 <= 1 / (16 Lip(phi1)) is needed for the excluded set; shrink once
    if (delta0 > 1.0 / (16.0 * f.lip_phi1)) f = build_foliation(balls, 1.0 / (16.0 * f.lip_phi1), M);

    std::vector<std::pair<double, double>> iv;
    const double lo = std::min(f.c1(), f.c2()), hi = std::max(f.c1(), f.c2());
    (void)lo;
    for (const auto& b : balls.balls) {
        const double rad = 2.0 * b.radius + f.r0;
        bool near_site = false;
        for (const auto& s : f.sites)
            if (norm(b.center - s.center) < rad + hi * s.rbar) near_site = true;
        double a, c;
        if (!near_site) {
            // phi1 = phi0 is radial and non-increasing in |y|
            const double d = norm(b.center);
            a = f.phi0(Vec2{d + rad, 0.0});
            c = f.phi0(Vec2{std::max(0.0, d - rad), 0.0});
        } else {
            const double v = f.phi1(b.center);
            a = v - f.lip_phi1 * rad;
            c = v + f.lip_phi1 * rad;
        }
        const double pad = 1e-12;
        iv.push_back({std::max(0.0, a - pad), std::min(1.0, c + pad)});
    }
    std::sort(iv.begin(), iv.end());
    for (const auto& x : iv) {
        if (!f.cut.empty() && x.first <= f.cut.back().second)
            f.cut.back().second = std::max(f.cut.back().second, x.second);
        else
            f.cut.push_back(x);
    }
    std::vector<double> lens;
    for (const auto& [a, b] : f.cut) lens.push_back(b - a);
    f.cut_length = pairwise_sum(lens);
    if (f.cut_length > 0.5)
        throw std::invalid_argument("foliate: excluded set has length " + std::to_string(f.cut_length) + " > 1/2");
    return f;
}

FoliationFn foliate_scaled(Vec2 p, double R, const BallFamily& balls, double delta0, double M) {
    if (!(R > 0.0)) throw std::invalid_argument("foliate_scaled: R must be positive");
    BallFamily unit;
    for (const auto& b : balls.balls) unit.balls.push_back({(b.center - p) / (2.0 * R), b.radius / (2.0 * R)});
    // H^1 <= delta0 R in the original frame is H^1 <= delta0 / 2 in the unit frame
    check_perimeter(unit, 0.5 * delta0, "foliate_scaled");
    FoliationFn f = foliate(unit, delta0, M);
    f.p = p;
    f.scale = 2.0 * R;
    return f;
}

double foliation_energy(const FoliationFn& phi, const BallFamily& balls, int grid_n) {
    if (grid_n < 256) throw std::invalid_argument("foliation_energy: grid_n must be at least 256");
    const double s = phi.scale, cell = 2.0 * s / grid_n;
    std::vector<double> rows(static_cast<std::size_t>(grid_n), 0.0);
    for (int j = 0; j < grid_n; ++j) {
        std::vector<double> terms;
        for (int i = 0; i < grid_n; ++i) {
            const Vec2 x = phi.p + Vec2{-s + (i + 0.5) * cell, -s + (j + 0.5) * cell};
            const double r = norm(x - phi.p);
            if (r <= 0.5 * s || r >= s) continue;
            const Vec2 g = phi.gradient(x);
            const double g2 = dot(g, g);
            if (g2 == 0.0) continue;
            double d = std::min(r - 0.5 * s, s - r);
            bool inside = false;
            for (const auto& b : balls.balls) {
                const double db = norm(x - b.center) - b.radius;
                if (db < 0.0) {
                    inside = true;
                    break;
                }
                d = std::min(d, db);
            }
            if (inside) continue;
            terms.push_back(g2 / (d * d) * cell * cell);
        }
        rows[static_cast<std::size_t>(j)] = pairwise_sum(terms);
    }
    return pairwise_sum(rows);
}

// ---- flux identity

namespace {

struct ContourIntegrals {
    Vec2 circulation;  // oint A . t
    Vec2 repr;         // -oint [[x, x_perp], [-x_perp, x]] (grad A11, grad A22) t
};

struct FluxData {
    const MatrixField& A;
    ScalarField phi;
    std::array<ScalarField, 2> g11, g22;
    Vec2 origin;
};

ContourIntegrals contour_integrals(const FluxData& fd, double h) {
    const Grid2& g = fd.A.grid;
    const int n = g.n;
    for (int k = 0; k < n; ++k)
        for (const auto& [i, j] : {std::pair{k, 0}, std::pair{k, n - 1}, std::pair{0, k}, std::pair{n - 1, k}})
            if (fd.phi.at(i, j) > h)
                throw std::invalid_argument("flux_identity_check: level set at h = " + std::to_string(h) +
                                            " reaches the grid boundary");
    std::vector<Vec2> circ, rep;
    auto integrate = [&](Vec2 a, Vec2 b) {
        const Vec2 t = b - a;
        Vec2 c{0, 0}, r{0, 0};
        for (std::size_t q = 0; q < 4; ++q)
            for (int sgn : {-1, 1}) {
                const double w = 0.5 * GaussLegendre8::weights[q];
                const Vec2 x = a + t * (0.5 + 0.5 * sgn * GaussLegendre8::nodes[q]);
                const Mat2 m = fd.A.interpolate(x);
                c += Vec2{m.a00 * t.x + m.a01 * t.y, m.a10 * t.x + m.a11 * t.y} * w;
                const Vec2 xo = x - fd.origin, xp = perp(xo);
                const Vec2 a11{fd.g11[0].interpolate(x), fd.g11[1].interpolate(x)};
                const Vec2 a22{fd.g22[0].interpolate(x), fd.g22[1].interpolate(x)};
                r += Vec2{dot(Vec2{dot(xo, a11), dot(xp, a11)}, t), dot(Vec2{-dot(xp, a22), dot(xo, a22)}, t)} * w;
            }
        circ.push_back(c);
        rep.push_back(-r);
    };
    for (int j = 0; j + 1 < n; ++j)
        for (int i = 0; i + 1 < n; ++i) {
            const double v[4] = {fd.phi.at(i, j), fd.phi.at(i + 1, j), fd.phi.at(i + 1, j + 1), fd.phi.at(i, j + 1)};
            const bool in[4] = {v[0] > h, v[1] > h, v[2] > h, v[3] > h};
            if (in[0] == in[1] && in[1] == in[2] && in[2] == in[3]) continue;
            const Vec2 c[4] = {g.node(i, j), g.node(i + 1, j), g.node(i + 1, j + 1), g.node(i, j + 1)};
            Vec2 e[4];
            bool cross[4];
            for (int k = 0; k < 4; ++k) {
                const int l = (k + 1) % 4;
                cross[k] = in[k] != in[l];
                if (cross[k]) e[k] = c[k] + (c[l] - c[k]) * ((h - v[k]) / (v[l] - v[k]));
            }
            std::vector<std::pair<int, int>> segs;
            int cnt = cross[0] + cross[1] + cross[2] + cross[3];
            if (cnt == 2) {
                int a = -1, b = -1;
                for (int k = 0; k < 4; ++k)
                    if (cross[k]) (a < 0 ? a : b) = k;
                segs.push_back({a, b});
            } else {
                const bool centre = 0.25 * (v[0] + v[1] + v[2] + v[3]) > h;
                if (centre == in[0])
                    segs = {{0, 1}, {2, 3}};
                else
                    segs = {{3, 0}, {1, 2}};
            }
            for (auto [ka, kb] : segs) {
                Vec2 a = e[ka], b = e[kb];
                // {phi > h} on the left
                const Vec2 m = (a + b) * 0.5;
                const double u = (m.x - c[0].x) / g.h(), w = (m.y - c[0].y) / g.h();
                const Vec2 grad{(v[1] - v[0]) * (1 - w) + (v[2] - v[3]) * w, (v[3] - v[0]) * (1 - u) + (v[2] - v[1]) * u};
                if (dot(perp(b - a), grad) < 0.0) std::swap(a, b);
                integrate(a, b);
            }
        }
    if (circ.empty())
        throw std::invalid_argument("flux_identity_check: empty level set at h = " + std::to_string(h));
    return {pairwise_sum(circ), pairwise_sum(rep)};
}

}  // namespace

FluxCheck flux_identity_check(const MatrixField& A, const FoliationFn& phi, Vec2 p, double R, int levels,
                              double curl_tol) {
    if (levels < 1) throw std::invalid_argument("flux_identity_check: levels must be positive");
    const Grid2& g = A.grid;
    if (!(R > 0.0) || std::abs(p.x) + 2.0 * R >= g.L - g.h() || std::abs(p.y) + 2.0 * R >= g.L - g.h())
        throw std::invalid_argument("flux_identity_check: B(p, 2R) is not inside the grid");
    FluxData fd{A, ScalarField::sample(g, [&](Vec2 x) { return phi(x); }), gradient_fd(A.component(0, 0)),
                gradient_fd(A.component(1, 1)), p};
    if (std::isfinite(curl_tol)) {
        const auto curl = curl_fd(A);
        for (int j = 0; j < g.n; ++j)
            for (int i = 0; i < g.n; ++i) {
                const Vec2 gp = phi.gradient(g.node(i, j));
                if (gp.x == 0.0 && gp.y == 0.0) continue;
                if (std::max(std::abs(curl[0].at(i, j)), std::abs(curl[1].at(i, j))) > curl_tol)
                    throw std::invalid_argument("flux_identity_check: curl exceeds curl_tol where grad phi != 0");
            }
    }
    std::vector<double> v{0.0};
    for (double x : phi.plateaus()) v.push_back(x);
    v.push_back(1.0);
    const std::size_t L = v.size() - 1;  // gaps (v_k, v_{k+1}), k = 0..L-1
    std::vector<Vec2> gamma(L), repr_terms;
    for (std::size_t k = 0; k < L; ++k) {
        const double gap = v[k + 1] - v[k];
        gamma[k] = contour_integrals(fd, v[k] + 0.5 * gap).circulation;
        std::vector<Vec2> inner;
        for (int m = 0; m < levels; ++m) inner.push_back(contour_integrals(fd, v[k] + (m + 0.5) / levels * gap).repr);
        repr_terms.push_back(pairwise_sum(inner) * (gap / levels));
    }
    FluxCheck out;
    out.plateaus = static_cast<int>(L) - 1;
    out.lhs = gamma[0];
    std::vector<Vec2> rhs = repr_terms;
    for (std::size_t i = 1; i < L; ++i) rhs.push_back((gamma[i - 1] - gamma[i]) * (1.0 - v[i]));
    out.rhs = pairwise_sum(rhs);
    out.residual = norm(out.lhs - out.rhs);
    return out;
}

}  // namespace rsd
