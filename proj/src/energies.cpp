#include "rsd/energies.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "rsd/rng.hpp"

namespace rsd {

void WeightedPointMeasure::validate() const {
    for (const auto& a : atoms)
        if (!(a.weight >= 0.0) || !std::isfinite(a.weight))
            throw std::invalid_argument("measure: weights must be finite and nonnegative");
}

double WeightedPointMeasure::mass() const {
    std::vector<double> w;
    w.reserve(atoms.size());
    for (const auto& a : atoms) w.push_back(a.weight);
    return pairwise_sum(w);
}

double WeightedPointMeasure::mass_in_ball(Vec2 c, double r) const {
    std::vector<double> w;
    for (const auto& a : atoms)
        if (norm(a.point - c) < r) w.push_back(a.weight);
    return pairwise_sum(w);
}

WeightedPointMeasure WeightedPointMeasure::scaled(double s) const {
    WeightedPointMeasure out = *this;
    for (auto& a : out.atoms) a.weight *= s;
    return out;
}

namespace {

double rect_distance(Vec2 c, double x0, double x1, double y0, double y1) {
    const double dx = std::max({x0 - c.x, 0.0, c.x - x1});
    const double dy = std::max({y0 - c.y, 0.0, c.y - y1});
    return std::hypot(dx, dy);
}

Mat2 cell_centre_value(const MatrixField& A, int i, int j) {
    return (A.at(i, j) + A.at(i + 1, j) + A.at(i, j + 1) + A.at(i + 1, j + 1)) * 0.25;
}

}  // namespace

bool cell_outside_cores(const Grid2& g, int i, int j, const CoreSet& S, double lambda_eps) {
    const Vec2 lo = g.node(i, j);
    const double h = g.h();
    for (const auto& b : S.balls)
        if (rect_distance(b.center, lo.x, lo.x + h, lo.y, lo.y + h) <= b.radius + lambda_eps) return false;
    return true;
}

double elastic_energy(const MatrixField& A, const CoreSet& S, const Params& p) {
    const Grid2& g = A.grid;
    const double cell = g.h() * g.h();
    const double le = p.lambda * p.epsilon;
    std::vector<double> terms;
    terms.reserve(static_cast<std::size_t>(g.n - 1) * (g.n - 1));
    for (int j = 0; j + 1 < g.n; ++j)
        for (int i = 0; i + 1 < g.n; ++i) {
            if (!cell_outside_cores(g, i, j, S, le)) continue;
            const double d = dist_SO2(cell_centre_value(A, i, j));
            terms.push_back(cell * d * d);
        }
    return pairwise_sum(terms) / p.tau;
}

double core_energy(const CoreSet& S, const Params& p, std::uint64_t seed) {
    if (S.balls.empty()) return 0.0;
    const double le = p.lambda * p.epsilon;
    std::vector<CoreBall> d;
    for (const auto& b : S.balls) d.push_back({b.center, b.radius + le});

    bool disjoint = true;
    for (std::size_t a = 0; a < d.size() && disjoint; ++a)
        for (std::size_t b = a + 1; b < d.size(); ++b)
            if (norm(d[a].center - d[b].center) < d[a].radius + d[b].radius) {
                disjoint = false;
                break;
            }

    double area = 0.0;
    if (disjoint) {
        std::vector<double> areas;
        for (const auto& b : d) areas.push_back(M_PI * b.radius * b.radius);
        area = pairwise_sum(areas);
    } else {
        double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
        for (const auto& b : d) {
            x0 = std::min(x0, b.center.x - b.radius);
            x1 = std::max(x1, b.center.x + b.radius);
            y0 = std::min(y0, b.center.y - b.radius);
            y1 = std::max(y1, b.center.y + b.radius);
        }
        SplitMix64 rng(seed);
        long hits = 0;
        for (int s = 0; s < kCoreEnergySamples; ++s) {
            const Vec2 q{rng.uniform(x0, x1), rng.uniform(y0, y1)};
            for (const auto& b : d)
                if (norm(q - b.center) < b.radius) {
                    ++hits;
                    break;
                }
        }
        area = (x1 - x0) * (y1 - y0) * static_cast<double>(hits) / kCoreEnergySamples;
    }
    return area / (p.lambda * p.lambda);
}

EnergyBreakdown total_energy(const MatrixField& A, const CoreSet& S, const Params& p, double curl_tol) {
    if (!(curl_tol > 0.0)) throw std::invalid_argument("total_energy: curl_tol must be positive");
    EnergyBreakdown e;
    e.elastic = elastic_energy(A, S, p);
    e.core = core_energy(S, p);
    const auto curl = curl_fd(A);
    const double le = p.lambda * p.epsilon;
    const Grid2& g = A.grid;
    for (int j = 0; j < g.n && !e.support_violation; ++j)
        for (int i = 0; i < g.n; ++i) {
            const double c = std::max(std::abs(curl[0].at(i, j)), std::abs(curl[1].at(i, j)));
            if (c <= curl_tol) continue;
            if (S.in_dilated(g.node(i, j), le)) continue;
            e.support_violation = true;
            break;
        }
    e.total = e.support_violation ? std::numeric_limits<double>::infinity() : e.elastic + e.core;
    return e;
}

Measures build_measures(const MatrixField& A, const CoreSet& S, const Params& p, Mu2Normalization norm) {
    const Grid2& g = A.grid;
    const double h = g.h();
    const double cell = h * h;
    const double le = p.lambda * p.epsilon;
    const double w2 = norm == Mu2Normalization::PerLambdaEps ? 1.0 / le : 1.0 / (p.lambda * le);
    Measures m;
    for (int j = 0; j + 1 < g.n; ++j)
        for (int i = 0; i + 1 < g.n; ++i) {
            const Vec2 c = g.node(i, j) + Vec2{0.5 * h, 0.5 * h};
            double a1 = 0.0, a2 = 0.0;
            if (cell_outside_cores(g, i, j, S, le)) {
                const double d = dist_SO2(cell_centre_value(A, i, j));
                a1 = cell * d * d / (p.tau * p.epsilon);
            }
            if (S.in_dilated(c, le)) a2 = cell * w2;
            if (a1 > 0.0) m.mu1.atoms.push_back({c, a1});
            if (a2 > 0.0) m.mu2.atoms.push_back({c, a2});
            if (a1 + a2 > 0.0) m.mu.atoms.push_back({c, a1 + a2});
        }
    return m;
}

}  // namespace rsd
