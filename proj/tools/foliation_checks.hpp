#pragma once

// Seeded ball families in the unit annulus and pointwise checks of a foliation.
// Checks return an empty string on success, otherwise the first failure.

#include <cmath>
#include <string>
#include <vector>

#include "rsd/foliation.hpp"
#include "rsd/rng.hpp"

namespace rsd::testing {

// N disjoint balls of equal radius with centres in 0.52 <= |x| <= 0.98; total perimeter delta0 / 2.
inline BallFamily foliation_instance(std::uint64_t seed, int N, double delta0 = kDelta0) {
    SplitMix64 g(seed);
    BallFamily f;
    const double rho = delta0 / (4.0 * M_PI * std::max(N, 1));
    while (static_cast<int>(f.balls.size()) < N) {
        const double r = std::sqrt(g.uniform(0.25, 1.0)), t = g.uniform(0.0, 2.0 * M_PI);
        const Vec2 c{0.98 * r * std::cos(t), 0.98 * r * std::sin(t)};
        if (norm(c) < 0.52) continue;
        bool ok = true;
        for (const auto& o : f.balls)
            if (norm(o.center - c) < 3.0 * rho) ok = false;
        if (ok) f.balls.push_back({c, rho});
    }
    return f;
}

// 500 points: one isolated cluster of 20 around (0.75, 0) inside radius 5e-4, the rest spread
// over the annulus at distance >= 0.25 from it.
inline BallFamily planted_cluster_instance(std::uint64_t seed) {
    SplitMix64 g(seed);
    BallFamily f;
    const Vec2 c0{0.75, 0.0};
    const double rho = 1e-6;
    for (int i = 0; i < 20; ++i) {
        const double r = 5e-4 * std::sqrt(g.uniform()), t = g.uniform(0.0, 2.0 * M_PI);
        f.balls.push_back({c0 + Vec2{r * std::cos(t), r * std::sin(t)}, rho});
    }
    while (f.balls.size() < 500) {
        const double r = std::sqrt(g.uniform(0.3, 0.9)), t = g.uniform(0.0, 2.0 * M_PI);
        const Vec2 c{r * std::cos(t), r * std::sin(t)};
        if (norm(c) > 0.52 && norm(c - c0) >= 0.25) f.balls.push_back({c, rho});
    }
    return f;
}

inline std::string check_boundary(const FoliationFn& f, int samples = 10000) {
    for (int k = 0; k < samples; ++k) {
        const double t = 2.0 * M_PI * k / samples;
        const Vec2 u{std::cos(t), std::sin(t)};
        if (f(f.p + u * f.scale) != 0.0) return "phi != 0 on the outer circle at sample " + std::to_string(k);
        if (f(f.p + u * (0.5 * f.scale)) != 1.0) return "phi != 1 on the inner circle at sample " + std::to_string(k);
    }
    return {};
}

// 100 samples inside each ball (centre, rings and rim) must give one value
inline std::string check_plateaus(const FoliationFn& f, const BallFamily& balls) {
    for (std::size_t i = 0; i < balls.balls.size(); ++i) {
        const Ball& b = balls.balls[i];
        const double v = f(b.center);
        for (int s = 1; s < 100; ++s) {
            const double r = b.radius * ((s % 10) + 1) / 10.0, t = 2.0 * M_PI * (s / 10) / 10.0 + 0.1 * s;
            if (f(b.center + Vec2{r * std::cos(t), r * std::sin(t)}) != v)
                return "phi not constant on ball " + std::to_string(i);
        }
    }
    return {};
}

// max over an n x n node grid of the central-difference gradient norm
inline double sampled_lipschitz(const FoliationFn& f, int n) {
    const double h = 2.0 * f.scale / (n - 1), e = 0.25 * h;
    double best = 0.0;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const Vec2 x = f.p + Vec2{-f.scale + i * h, -f.scale + j * h};
            const double gx = (f(x + Vec2{e, 0}) - f(x - Vec2{e, 0})) / (2 * e);
            const double gy = (f(x + Vec2{0, e}) - f(x - Vec2{0, e})) / (2 * e);
            best = std::max(best, std::hypot(gx, gy));
        }
    return best;
}

}  // namespace rsd::testing
