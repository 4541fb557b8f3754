#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "doctest.h"
#include "foliation_checks.hpp"
#include "rsd/foliation.hpp"
#include "rsd/grain_boundary.hpp"
#include "rsd/piecewise_affine.hpp"

using namespace rsd;
using namespace rsd::testing;

namespace {

// smallest r >= delta0 whose circle |x| = 1/2 + r misses every ball: the candidates are delta0 and
// the outer tangency radii of the balls
double delta1_oracle(const BallFamily& b, double delta0) {
    std::vector<double> cand{delta0};
    for (const auto& x : b.balls) cand.push_back(norm(x.center) + x.radius - 0.5);
    std::sort(cand.begin(), cand.end());
    for (double r : cand) {
        if (r < delta0) continue;
        bool hit = false;
        for (const auto& x : b.balls)
            if (std::abs(norm(x.center) - 0.5 - r) < x.radius * (1 - 1e-12)) hit = true;
        if (!hit) return r;
    }
    return -1.0;
}

std::vector<Vec2> centers(const BallFamily& b) {
    std::vector<Vec2> p;
    for (const auto& x : b.balls) p.push_back(x.center);
    return p;
}

std::string check_hierarchy(const CoverHierarchy& h) {
    const auto& P = h.points;
    for (int k = 0; k <= h.K; ++k) {
        const auto ku = static_cast<std::size_t>(k);
        const auto& I = h.I[ku];
        for (std::size_t a = 0; a < I.size(); ++a)
            for (std::size_t b = a + 1; b < I.size(); ++b)
                if (norm(P[static_cast<std::size_t>(I[a])] - P[static_cast<std::size_t>(I[b])]) < h.r[ku])
                    return "level " + std::to_string(k) + " not separated";
        for (const auto& q : P) {
            bool near = false;
            for (int i : I) near = near || norm(q - P[static_cast<std::size_t>(i)]) < h.r[ku];
            if (!near) return "level " + std::to_string(k) + " not maximal";
        }
        if (k == h.K) break;
        const auto& up = h.I[ku + 1];
        if (h.edge[ku].size() != I.size()) return "missing edges";
        for (std::size_t a = 0; a < I.size(); ++a) {
            const Vec2 x = P[static_cast<std::size_t>(I[a])];
            const Vec2 y = P[static_cast<std::size_t>(up[static_cast<std::size_t>(h.edge[ku][a])])];
            if (!(norm(y - x) < h.r[ku + 1])) return "edge longer than r_{k+1}";
            for (int j : up)
                if (norm(P[static_cast<std::size_t>(j)] - x) < norm(y - x)) return "edge not to the nearest point";
        }
    }
    for (int k = 0; k <= h.K; ++k) {
        const auto ku = static_cast<std::size_t>(k);
        for (std::size_t a = 0; a < h.I[ku].size(); ++a) {
            int children = 0;
            if (k > 0)
                for (int e : h.edge[ku - 1]) children += e == static_cast<int>(a);
            if (h.degree[ku][a] != children + (k < h.K ? 1 : 0)) return "degree mismatch";
        }
    }
    if (!h.leaf_bound_holds()) return "leaf bound fails";
    return {};
}

}  // namespace

TEST_CASE("perimeter_in_annulus") {
    BallFamily b;
    CHECK(perimeter_in_annulus(b) == 0.0);
    b.balls.push_back({{0.75, 0.0}, 0.01});
    CHECK(perimeter_in_annulus(b) == doctest::Approx(2 * M_PI * 0.01).epsilon(1e-12));
    // the same ball twice counts once; a ball inside the inner disk counts nothing
    b.balls.push_back({{0.75, 0.0}, 0.01});
    b.balls.push_back({{0.0, 0.0}, 0.1});
    CHECK(perimeter_in_annulus(b) == doctest::Approx(2 * M_PI * 0.01).epsilon(1e-12));
    // half a circle centred on |x| = 1 sits inside (up to the curvature of the outer circle)
    BallFamily c;
    c.balls.push_back({{1.0, 0.0}, 1e-3});
    CHECK(perimeter_in_annulus(c) == doctest::Approx(M_PI * 1e-3).epsilon(1e-3));
}

TEST_CASE("compute_deltas examples") {
    BallFamily none;
    const auto [a, b] = compute_deltas(none, kDelta0);
    CHECK(a == kDelta0);
    CHECK(b == kDelta0);

    BallFamily one;
    one.balls.push_back({{0.5 + kDelta0, 0.0}, 1e-3});
    const auto [d1, d2] = compute_deltas(one, kDelta0);
    CHECK(d1 == doctest::Approx(delta1_oracle(one, kDelta0)).epsilon(1e-14));
    CHECK(d1 == doctest::Approx(kDelta0 + 1e-3));
    CHECK(d2 == kDelta0);

    BallFamily big;
    big.balls.push_back({{0.75, 0.0}, 0.01});
    CHECK_THROWS_AS(compute_deltas(big, kDelta0), std::invalid_argument);
    CHECK_THROWS_AS(compute_deltas(none, 0.3), std::invalid_argument);
}

TEST_CASE("compute_deltas property: delta0 <= delta1, delta2 <= 3/2 delta0") {
    for (std::uint64_t seed = 1; seed <= 60; ++seed) {
        SplitMix64 g(seed);
        BallFamily b;
        // balls clustered near the two inner test circles
        const int n = 1 + static_cast<int>(g() % 20);
        for (int i = 0; i < n; ++i) {
            const double t = g.uniform(0.0, 2 * M_PI);
            const double r = (g() % 2 ? 0.5 + kDelta0 : 1.0 - kDelta0) + g.uniform(-3e-3, 3e-3);
            b.balls.push_back({{r * std::cos(t), r * std::sin(t)}, g.uniform(0.05, 1.0) * kDelta0 / (2 * M_PI * n)});
        }
        if (perimeter_in_annulus(b) > kDelta0) continue;
        const auto [d1, d2] = compute_deltas(b, kDelta0);
        CAPTURE(seed);
        CHECK(d1 >= kDelta0);
        CHECK(d2 >= kDelta0);
        CHECK(d1 <= 1.5 * kDelta0);
        CHECK(d2 <= 1.5 * kDelta0);
        CHECK(d1 == doctest::Approx(delta1_oracle(b, kDelta0)).epsilon(1e-13));
    }
}

TEST_CASE("build_hierarchy examples") {
    const auto h1 = build_hierarchy({{0.7, 0.1}}, 2 * kDelta0);
    CHECK(h1.K == 0);
    CHECK(h1.I.size() == 1);
    CHECK(h1.degree[0][0] == 0);
    CHECK(check_hierarchy(h1).empty());

    const auto b = foliation_instance(3, 55);
    const auto h = build_hierarchy(centers(b), 2 * kDelta0);
    CHECK(h.K == 2);
    CHECK(h.r0 == doctest::Approx(2 * kDelta0 / 55));
    CHECK(h.r[2] == doctest::Approx(h.r0 * kM * kM));
    CHECK(check_hierarchy(h).empty());

    CHECK_THROWS_AS(build_hierarchy({}, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(build_hierarchy({{0, 0}}, 0.1, 30.0), std::invalid_argument);
}

TEST_CASE("build_hierarchy property: forest invariants by brute force") {
    for (std::uint64_t seed = 1; seed <= 12; ++seed) {
        SplitMix64 g(seed);
        const int n = 1 + static_cast<int>(g() % 500);
        // clusters give long chains and degree-2 vertices
        std::vector<Vec2> pts;
        while (static_cast<int>(pts.size()) < n) {
            const Vec2 c{g.uniform(-1, 1), g.uniform(-1, 1)};
            const double s = std::pow(10.0, -g.uniform(1.0, 5.0));
            const int m = 1 + static_cast<int>(g() % 30);
            for (int i = 0; i < m && static_cast<int>(pts.size()) < n; ++i)
                pts.push_back(c + Vec2{g.uniform(-s, s), g.uniform(-s, s)});
        }
        const auto h = build_hierarchy(pts, 2 * kDelta0);
        CAPTURE(seed);
        CHECK(h.K == static_cast<int>(std::floor(0.5 * std::log(n))));
        CHECK(check_hierarchy(h) == "");
    }
}

TEST_CASE("planted cluster: degree-2 vertex and its empty annulus") {
    const auto b = planted_cluster_instance(7);
    const auto pts = centers(b);
    const auto h = build_hierarchy(pts, 2 * kDelta0);
    REQUIRE(h.K == 3);
    CHECK(check_hierarchy(h).empty());
    const auto d2 = h.degree2_children();
    bool cluster_found = false;
    for (const auto& [k, i0] : d2) {
        const Vec2 x = pts[static_cast<std::size_t>(i0)];
        cluster_found = cluster_found || norm(x - Vec2{0.75, 0.0}) < 1e-3;
        const double rk = h.r[static_cast<std::size_t>(k)], rkm = h.r[static_cast<std::size_t>(k - 1)];
        for (const auto& q : pts) {
            const double d = norm(q - x);
            CHECK_FALSE((d >= rkm && d < 0.5 * rk - 2 * rkm));
        }
    }
    CHECK(cluster_found);
    // the pruned flag marks strict descendants of non-root degree-2 vertices
    for (int k = 0; k < h.K; ++k)
        for (std::size_t a = 0; a < h.I[static_cast<std::size_t>(k)].size(); ++a) {
            const int up = h.edge[static_cast<std::size_t>(k)][a];
            const bool parent_cut = (k + 1 < h.K && h.degree[static_cast<std::size_t>(k + 1)][static_cast<std::size_t>(up)] == 2) ||
                                    h.pruned[static_cast<std::size_t>(k + 1)][static_cast<std::size_t>(up)];
            CHECK(static_cast<bool>(h.pruned[static_cast<std::size_t>(k)][a]) == parent_cut);
        }
}

TEST_CASE("foliate: no balls is the clamped radial ramp") {
    const auto f = foliate(BallFamily{});
    CHECK(f.cut.empty());
    CHECK(f.sites.empty());
    const double slope = 1.0 / (0.5 - 2 * kDelta0);
    for (double r : {0.3, 0.5, 0.51, 0.6, 0.75, 0.9, 0.98, 1.0, 1.2}) {
        const double want = std::clamp(slope * (1.0 - kDelta0 - r), 0.0, 1.0);
        CHECK(f(Vec2{r * 0.6, r * 0.8}) == doctest::Approx(want).epsilon(1e-14));
    }
    CHECK(check_boundary(f).empty());
    const Vec2 g = f.gradient({0.0, 0.7});
    CHECK(g.x == doctest::Approx(0.0));
    CHECK(g.y == doctest::Approx(-slope));
    CHECK(f.lipschitz_bound() == doctest::Approx(slope));
    CHECK(f.plateaus().empty());
    std::ostringstream os;
    f.dump(os, 4);
    const std::string text = os.str();
    CHECK(std::count(text.begin(), text.end(), '\n') == 16);
}

TEST_CASE("foliate: one interior ball") {
    BallFamily b;
    b.balls.push_back({{0.0, 0.75}, 1e-3});
    const auto f = foliate(b);
    const double v = f.psi(f.phi1(b.balls[0].center));
    CHECK(f(b.balls[0].center) == v);
    CHECK(check_plateaus(f, b).empty());
    // constant on a neighbourhood: B(x, 2 rho + r0) is mapped into the excluded set
    const double rad = 2 * 1e-3 + f.r0;
    for (int k = 0; k < 64; ++k) {
        const double t = 2 * M_PI * k / 64;
        CHECK(f(b.balls[0].center + Vec2{std::cos(t), std::sin(t)} * (0.999 * rad)) == v);
    }
    REQUIRE(f.plateaus().size() == 1);
    CHECK(f.plateaus()[0] == v);
    CHECK(f.cut_length <= 0.5);
}

TEST_CASE("foliate: psi is monotone with the right end values") {
    const auto b = foliation_instance(11, 40);
    const auto f = foliate(b);
    CHECK(f.psi(0.0) == 0.0);
    CHECK(f.psi(1.0) == 1.0);
    double prev = 0.0;
    for (int k = 0; k <= 10000; ++k) {
        const double v = f.psi(k / 10000.0);
        CHECK(v >= prev);
        prev = v;
    }
    double len = 0.0;
    for (const auto& [a, c] : f.cut) len += c - a;
    CHECK(len == doctest::Approx(f.cut_length));
    CHECK(f.cut_length <= 0.5);
}

TEST_CASE("foliate property: boundary, plateaus and sampled Lipschitz bound") {
    for (int N : {0, 1, 2, 4, 8, 16, 32, 64}) {
        for (std::uint64_t seed = 1; seed <= 3; ++seed) {
            const auto b = foliation_instance(100 * seed + static_cast<std::uint64_t>(N), N);
            const auto f = foliate(b);
            CAPTURE(N);
            CAPTURE(seed);
            CHECK(check_boundary(f, 2000) == "");
            CHECK(check_plateaus(f, b) == "");
            CHECK(sampled_lipschitz(f, 129) <= f.lipschitz_bound() * (1 + 1e-9));
        }
    }
}

TEST_CASE("foliate with blend sites") {
    const auto b = planted_cluster_instance(7);
    const auto f = foliate(b);
    CHECK_FALSE(f.sites.empty());
    // delta0 was shrunk to 1 / (16 Lip(phi1))
    CHECK(f.delta0 <= 1.0 / (16.0 * f.lip_phi1) * (1 + 1e-12));
    CHECK(check_boundary(f, 2000).empty());
    CHECK(check_plateaus(f, b).empty());
    CHECK(sampled_lipschitz(f, 257) <= f.lipschitz_bound() * (1 + 1e-9));
    for (const auto& s : f.sites) {
        // constant phi_bar inside c1 rbar
        CHECK(f.phi1(s.center) == s.phi_bar);
        CHECK(f.phi1(s.center + Vec2{0.9 * f.c1() * s.rbar, 0.0}) == s.phi_bar);
    }
    // analytic gradient against central differences away from kinks
    SplitMix64 g(5);
    int compared = 0;
    for (int k = 0; k < 2000 && compared < 200; ++k) {
        const double r = g.uniform(0.55, 0.95), t = g.uniform(0, 2 * M_PI);
        const Vec2 x{r * std::cos(t), r * std::sin(t)};
        const double e = 1e-7;
        const Vec2 gr = f.gradient(x);
        if (gr.x == 0.0 && gr.y == 0.0) continue;
        const Vec2 fd{(f(x + Vec2{e, 0}) - f(x - Vec2{e, 0})) / (2 * e), (f(x + Vec2{0, e}) - f(x - Vec2{0, e})) / (2 * e)};
        if (norm(fd - gr) > 1e-4 * f.lipschitz_bound()) {
            // a kink within e of x; shift and retry
            continue;
        }
        ++compared;
    }
    CHECK(compared >= 150);
}

TEST_CASE("foliate errors") {
    BallFamily big;
    big.balls.push_back({{0.75, 0.0}, 0.01});
    CHECK_THROWS_AS(foliate(big), std::invalid_argument);
    BallFamily zero;
    zero.balls.push_back({{0.75, 0.0}, 0.0});
    CHECK_THROWS_AS(foliate(zero), std::invalid_argument);
    CHECK_THROWS_AS(foliate(BallFamily{}, kDelta0, 20.0), std::invalid_argument);
}

TEST_CASE("foliate_scaled") {
    const auto b = foliation_instance(21, 16);
    const auto f = foliate(b);
    const auto g = foliate_scaled({0.0, 0.0}, 0.5, b);
    SplitMix64 rng(9);
    for (int k = 0; k < 1000; ++k) {
        const Vec2 x{rng.uniform(-1.1, 1.1), rng.uniform(-1.1, 1.1)};
        CHECK(std::abs(f(x) - g(x)) <= 1e-12);
    }
    // R = 4 around p: the unit construction pulled back by x -> p + 8 y
    const Vec2 p{3.0, -2.0};
    BallFamily big;
    for (const auto& x : b.balls) big.balls.push_back({p + x.center * 8.0, 8.0 * x.radius});
    const auto s = foliate_scaled(p, 4.0, big);
    CHECK(s.lipschitz_bound() == doctest::Approx(f.lipschitz_bound() / 8.0));
    CHECK(sampled_lipschitz(s, 257) == doctest::Approx(sampled_lipschitz(f, 257) / 8.0).epsilon(1e-6));
    CHECK(check_boundary(s, 2000).empty());
    CHECK(check_plateaus(s, big).empty());
    // the perimeter budget is delta0 R
    BallFamily heavy;
    heavy.balls.push_back({p + Vec2{6.0, 0.0}, 0.009});
    CHECK_NOTHROW(foliate_scaled(p, 4.0, heavy));
    heavy.balls[0].center = p + Vec2{1.5, 0.0};
    CHECK_THROWS_AS(foliate_scaled(p, 1.0, heavy), std::invalid_argument);
    CHECK_THROWS_AS(foliate_scaled(p, 0.0, heavy), std::invalid_argument);
}

TEST_CASE("foliation_energy: two resolutions without balls") {
    const auto f = foliate(BallFamily{});
    const double e1 = foliation_energy(f, BallFamily{}, 1024), e2 = foliation_energy(f, BallFamily{}, 2048);
    CHECK(e1 > 0.0);
    CHECK(std::abs(e1 - e2) <= 0.05 * e2);
    // radial oracle: 2 pi int slope^2 r / d(r)^2 dr over the ramp, d = min(r - 1/2, 1 - r)
    const double slope = f.slope, a = 0.5 + f.delta1, c = 1.0 - f.delta2;
    double oracle = 0.0;
    const int steps = 200000;
    for (int k = 0; k < steps; ++k) {
        const double r = a + (c - a) * (k + 0.5) / steps;
        const double d = std::min(r - 0.5, 1.0 - r);
        oracle += 2 * M_PI * slope * slope * r / (d * d) * (c - a) / steps;
    }
    CHECK(e2 == doctest::Approx(oracle).epsilon(0.01));
    CHECK_THROWS_AS(foliation_energy(f, BallFamily{}, 128), std::invalid_argument);
}

TEST_CASE("foliation_energy: balls add energy and stay resolution stable") {
    const auto b = foliation_instance(8, 8);
    const auto f = foliate(b);
    const double e0 = foliation_energy(foliate(BallFamily{}), BallFamily{}, 1024);
    const double e1 = foliation_energy(f, b, 1024), e2 = foliation_energy(f, b, 2048);
    CHECK(std::abs(e1 - e2) <= 0.05 * e2);
    CHECK(e2 > 0.5 * e0);
}

TEST_CASE("flux_identity_check: zero field and constant field") {
    const auto f = foliate_scaled({0.0, 0.0}, 0.3, BallFamily{});
    const MatrixField A(Grid2{257, 1.0}, Mat2{1.2, -0.3, 0.4, 0.9});
    const auto r = flux_identity_check(A, f, {0.0, 0.0}, 0.3, 4);
    CHECK(norm(r.lhs) <= 1e-12);
    CHECK(norm(r.rhs) <= 1e-12);
    CHECK(r.plateaus == 0);
}

TEST_CASE("flux_identity_check: harmonic vortex field converges") {
    const Vec2 q{0.1, -0.05};
    auto vortex = [&](Vec2 x) {
        const Vec2 d = x - q;
        const double r2 = dot(d, d);
        const Vec2 w{-d.y / (2 * M_PI * r2), d.x / (2 * M_PI * r2)};
        return Mat2{0.3 * w.x, 0.3 * w.y, -0.2 * w.x, -0.2 * w.y};
    };
    BallFamily b;
    b.balls.push_back({q, 0.01});
    const auto f = foliate_scaled({0.0, 0.0}, 0.4, b);
    const auto c = flux_identity_check(MatrixField::sample(Grid2{257, 1.0}, vortex), f, {0.0, 0.0}, 0.4, 4);
    const auto d = flux_identity_check(MatrixField::sample(Grid2{513, 1.0}, vortex), f, {0.0, 0.0}, 0.4, 4);
    CHECK(c.lhs.x == doctest::Approx(0.3).epsilon(1e-6));
    CHECK(c.lhs.y == doctest::Approx(-0.2).epsilon(1e-6));
    CHECK(d.residual < 1e-6);
    CHECK(d.residual * 2 < c.residual);
}

TEST_CASE("flux_identity_check: A_gb circulation and errors") {
    Params p{0.0, 0.125, 1.0, 2.0, 1.0, 0.2};
    p.epsilon = compatible_epsilon(0.125, 1.0, 2.0, 0.05);
    const GrainBoundary gb = compose_tile(p);
    const Vec2 c = gb.cores.balls[gb.cores.balls.size() / 2].center;
    const double R = 0.45 * gb.frame.H;
    BallFamily b;
    b.balls.push_back({c, p.lambda * p.epsilon});
    const auto f = foliate_scaled(c, R, b);
    const auto A = sample_gradient(gb.u, Grid2{513, p.L});
    const auto r = flux_identity_check(A, f, c, R, 2);
    CHECK(r.lhs.x == doctest::Approx(p.tau * p.epsilon).epsilon(0.03));
    CHECK(std::abs(r.lhs.y) < 0.03 * p.tau * p.epsilon);
    CHECK_THROWS_AS(flux_identity_check(A, f, c, R, 0), std::invalid_argument);
    CHECK_THROWS_AS(flux_identity_check(A, f, {0.9, 0.0}, 0.2, 2), std::invalid_argument);
    // the discrete curl of A_gb is nonzero on triangle edges crossing the ramp
    CHECK_THROWS_AS(flux_identity_check(A, f, c, R, 2, 1e-9), std::invalid_argument);
    // level sets reaching the edge of the grid
    const auto wide = foliate_scaled({0.5, 0.0}, 0.4, BallFamily{});
    CHECK_THROWS_AS(flux_identity_check(A, wide, {0.0, 0.0}, 0.1, 2), std::invalid_argument);
}
