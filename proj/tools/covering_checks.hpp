#pragma once

// Seeded instance generators and brute-force verifiers for the covering algorithms.
// Verifiers return an empty string on success, otherwise a description of the first failure.

#include <cmath>
#include <string>
#include <vector>

#include "rsd/coverings.hpp"
#include "rsd/rng.hpp"

namespace rsd::testing {

struct NiceInstance {
    BallFamily family;
    WeightedPointMeasure mu;
    double R = 1.0;
};

// Balls with |x| + 30 rho < R, atoms inside the balls.
inline NiceInstance nice_instance(std::uint64_t seed, int max_balls = 60) {
    SplitMix64 g(seed);
    NiceInstance in;
    const int n = 1 + static_cast<int>(g() % static_cast<std::uint64_t>(max_balls));
    for (int i = 0; i < n; ++i) {
        // bias toward the rim so that several shells are populated
        const double s = 1.0 - std::pow(g.uniform(), 3.0);
        const double t = g.uniform(0.0, 2.0 * M_PI);
        const Vec2 x{0.98 * s * std::cos(t), 0.98 * s * std::sin(t)};
        const double rho = g.uniform(0.05, 0.999) * (in.R - norm(x)) / 30.0;
        in.family.balls.push_back({x, rho});
        const int atoms = 1 + static_cast<int>(g() % 4);
        for (int a = 0; a < atoms; ++a) {
            const double ra = rho * std::sqrt(g.uniform()), ta = g.uniform(0.0, 2.0 * M_PI);
            in.mu.atoms.push_back({x + Vec2{ra * std::cos(ta), ra * std::sin(ta)}, g.uniform(0.0, 1.0)});
        }
    }
    return in;
}

inline int shell_of(Vec2 x, double R) {
    int k = 0;
    while (!(norm(x) < R * (1.0 - std::ldexp(1.0, -(k + 1))))) ++k;
    return k;
}

inline std::string check_nice(const NiceInstance& in, const SelectionResult& s) {
    const auto& B = in.family.balls;
    const double R = in.R;
    if (s.chosen.size() != s.radius.size()) return "radius list length";
    for (std::size_t a = 0; a < s.chosen.size(); ++a) {
        const Ball& b = B[static_cast<std::size_t>(s.chosen[a])];
        if (!(s.radius[a] > 3.0 * b.radius)) return "R_i <= 3 rho_i at " + std::to_string(s.chosen[a]);
        if (norm(b.center) + 2.0 * s.radius[a] > R) return "doubled ball leaves B(0, R)";
        for (std::size_t c = a + 1; c < s.chosen.size(); ++c) {
            const Ball& o = B[static_cast<std::size_t>(s.chosen[c])];
            if (norm(b.center - o.center) < 2.0 * (s.radius[a] + s.radius[c]) - 1e-12 * R)
                return "doubled balls " + std::to_string(s.chosen[a]) + ", " + std::to_string(s.chosen[c]) + " meet";
        }
    }
    // shell geometry for every pair of family balls
    for (std::size_t i = 0; i < B.size(); ++i)
        for (std::size_t j = i + 1; j < B.size(); ++j) {
            const int ki = shell_of(B[i].center, R), kj = shell_of(B[j].center, R);
            if (std::abs(ki - kj) < 2) continue;
            const double ri = std::ldexp(R, -ki) / 10.0, rj = std::ldexp(R, -kj) / 10.0;
            if (norm(B[i].center - B[j].center) < ri + rj) return "shell balls meet";
        }
    double got = 0.0;
    for (std::size_t a = 0; a < s.chosen.size(); ++a)
        got += in.mu.mass_in_ball(B[static_cast<std::size_t>(s.chosen[a])].center, s.radius[a]);
    const double total = in.mu.mass_in_ball({0.0, 0.0}, R);
    const double frac = total > 0.0 ? got / total : 1.0;
    if (std::abs(frac - s.fraction) > 1e-12) return "reported fraction differs from direct summation";
    if (frac < 1.0 / 338.0) return "fraction " + std::to_string(frac) + " < 1/338";
    return {};
}

struct Deg2Instance {
    std::vector<Vec2> points;
    std::vector<int> J;
    double R = 1.0;
    double delta = 0.25;
};

// Clustered points at several scales so that the empty annuli sit at different levels.
inline Deg2Instance deg2_instance(std::uint64_t seed, int n = 200) {
    SplitMix64 g(seed);
    Deg2Instance in;
    in.delta = g.uniform(0.05, 0.5);
    while (static_cast<int>(in.points.size()) < n) {
        Vec2 c{g.uniform(-1.0, 1.0), g.uniform(-1.0, 1.0)};
        double scale = 0.1;
        const int depth = static_cast<int>(g() % 4);
        for (int d = 0; d < depth; ++d) {
            c = c + Vec2{g.uniform(-scale, scale), g.uniform(-scale, scale)};
            scale *= 0.01;
        }
        const int m = 1 + static_cast<int>(g() % 8);
        for (int i = 0; i < m && static_cast<int>(in.points.size()) < n; ++i)
            in.points.push_back(c + Vec2{g.uniform(-scale, scale), g.uniform(-scale, scale)});
    }
    for (int i = 0; i < n; ++i)
        if (g() % 3 != 0) in.J.push_back(i);
    return in;
}

inline std::string check_deg2(const Deg2Instance& in, const Deg2Selection& s, double M = kM) {
    const double beta = 0.5 * M - 2.0;
    auto annulus_empty = [&](Vec2 x, double rho) {
        for (const auto& q : in.points) {
            const double d = norm(q - x);
            if (d >= rho && d < beta * rho) return false;
        }
        return true;
    };
    for (int j : in.J) {
        const Vec2 x = in.points[static_cast<std::size_t>(j)];
        const double r = s.r[static_cast<std::size_t>(j)];
        if (!annulus_empty(x, r)) return "annulus of r_j not empty at " + std::to_string(j);
        for (double rho = in.R; rho > r * (1.0 + 1e-9); rho *= in.delta)
            if (annulus_empty(x, rho)) return "r_j not maximal at " + std::to_string(j);
    }
    for (std::size_t a = 0; a < s.chosen.size(); ++a)
        for (std::size_t b = a + 1; b < s.chosen.size(); ++b) {
            const int i = s.chosen[a], j = s.chosen[b];
            const double ri = s.r[static_cast<std::size_t>(i)], rj = s.r[static_cast<std::size_t>(j)];
            const double d = norm(in.points[static_cast<std::size_t>(i)] - in.points[static_cast<std::size_t>(j)]);
            if (d < (0.25 * M - 1.0) * (ri + rj)) return "(M/4 - 1) r balls meet";
            if (d < 0.5 * beta * (ri + rj)) return "separation invariant";
        }
    for (int j : in.J) {
        const Vec2 x = in.points[static_cast<std::size_t>(j)];
        const double rj = s.r[static_cast<std::size_t>(j)];
        bool covered = false;
        for (int i : s.chosen) {
            const double ri = s.r[static_cast<std::size_t>(i)];
            if (norm(in.points[static_cast<std::size_t>(i)] - x) + (M / 8 - 1.25) * rj <= (M / 8 - 0.25) * ri * (1 + 1e-12)) {
                covered = true;
                break;
            }
        }
        if (!covered) return "coverage fails at " + std::to_string(j);
    }
    return {};
}

// Disjoint balls with log-uniform radii in the unit square, by rejection.
inline BallFamily disjoint_family(std::uint64_t seed, int n) {
    SplitMix64 g(seed);
    BallFamily f;
    while (static_cast<int>(f.balls.size()) < n) {
        const Ball b{{g.uniform(-1.0, 1.0), g.uniform(-1.0, 1.0)}, std::exp(g.uniform(std::log(1e-4), std::log(2e-2)))};
        bool ok = true;
        for (const auto& o : f.balls)
            if (norm(o.center - b.center) < 1.01 * (o.radius + b.radius)) {
                ok = false;
                break;
            }
        if (ok) f.balls.push_back(b);
    }
    return f;
}

inline std::string check_step(const BallFamily& in, const BallStep& st, double delta0) {
    if (!st.next.pairwise_disjoint()) return "output not disjoint";
    if (st.next.sum_radii() > 180.0 / delta0 * in.sum_radii() * (1 + 1e-12))
        return "growth " + std::to_string(st.next.sum_radii() / in.sum_radii()) + " > 180/delta0";
    for (std::size_t v = 0; v < st.vitali.size(); ++v) {
        const int i = st.vitali[v];
        const Ball d{in.balls[static_cast<std::size_t>(i)].center, 180.0 * st.rho_bar[static_cast<std::size_t>(i)]};
        int count = 0;
        for (const auto& o : st.next.balls)
            if (norm(d.center - o.center) + d.radius <= o.radius * (1 + 1e-12)) ++count;
        if (count != 1) return "dilated ball " + std::to_string(i) + " in " + std::to_string(count) + " output balls";
    }
    // Vitali: every expanded ball inside 6 rho_bar of a kept one
    for (std::size_t i = 0; i < in.balls.size(); ++i) {
        const double rb = st.rho_bar[i];
        if (rb == 0.0) continue;
        bool ok = false;
        for (int c : st.vitali)
            if (norm(in.balls[i].center - in.balls[static_cast<std::size_t>(c)].center) + 2.0 * rb <=
                6.0 * st.rho_bar[static_cast<std::size_t>(c)] * (1 + 1e-12)) {
                ok = true;
                break;
            }
        if (!ok) return "Vitali cover fails at " + std::to_string(i);
    }
    return {};
}

}  // namespace rsd::testing
