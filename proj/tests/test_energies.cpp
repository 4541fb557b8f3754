#include <cmath>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "rsd/energies.hpp"
#include "rsd/grain_boundary.hpp"

using namespace rsd;

namespace {

const Params kP{0.02, 0.1, 1.0, 2.0, 1.0, 0.2};

// area of the union of two radius-r disks at distance d < 2r
double two_disk_union(double r, double d) {
    const double lens = 2 * r * r * std::acos(d / (2 * r)) - 0.5 * d * std::sqrt(4 * r * r - d * d);
    return 2 * M_PI * r * r - lens;
}

Params gb_params(double eps_max) {
    Params p{0.0, 0.125, 1.0, 2.0, 1.0, 0.2};
    p.epsilon = compatible_epsilon(p.alpha, p.L, p.tau, eps_max);
    return p;
}

}  // namespace

TEST_CASE("elastic energy: examples") {
    const Grid2 g{65, 1.0};
    const MatrixField rot(g, rotation(0.3));
    CoreSet S{{{{0.1, 0.2}, kP.lambda * kP.epsilon}}};
    CHECK(elastic_energy(rot, S, kP) <= 1e-28);
    // dist^2(2I, SO(2)) = 2 everywhere, no cores: every cell counts
    const MatrixField twice(g, Mat2{2, 0, 0, 2});
    CHECK(elastic_energy(twice, CoreSet{}, kP) == doctest::Approx(4.0 * 2.0 / kP.tau).epsilon(1e-12));
    // cells touching the dilated core are left out
    CHECK(elastic_energy(twice, S, kP) < elastic_energy(twice, CoreSet{}, kP));
}

TEST_CASE("property: elastic energy is nonnegative and vanishes only on rotations") {
    std::mt19937_64 gen(21);
    std::normal_distribution<double> nd;
    std::uniform_real_distribution<double> th(-M_PI, M_PI);
    const Grid2 g{17, 1.0};
    for (int s = 0; s < 50; ++s) {
        MatrixField A(g);
        const bool rotations = s % 2 == 0;
        for (auto& m : A.v) m = rotations ? rotation(th(gen)) : Mat2{nd(gen), nd(gen), nd(gen), nd(gen)};
        const double e = elastic_energy(A, CoreSet{}, kP);
        CHECK(e >= 0.0);
        if (rotations) {
            // cell averages of different rotations are not rotations, so compare node-wise fields only
            MatrixField same(g, A.v[0]);
            CHECK(elastic_energy(same, CoreSet{}, kP) <= 1e-18);
        } else {
            CHECK(e > 0.0);
        }
    }
}

TEST_CASE("core energy") {
    CHECK(core_energy(CoreSet{}, kP) == 0.0);
    const double le = kP.lambda * kP.epsilon;
    CoreSet one{{{{0.0, 0.0}, le}}};
    CHECK(core_energy(one, kP) == doctest::Approx(4 * M_PI * kP.epsilon * kP.epsilon).epsilon(1e-14));
    CoreSet two{{{{-0.5, 0.0}, le}, {{0.5, 0.0}, le}}};
    CHECK(core_energy(two, kP) == doctest::Approx(8 * M_PI * kP.epsilon * kP.epsilon).epsilon(1e-12));
    // overlapping: Monte Carlo against the lens formula
    const double d = 1.5 * le;
    CoreSet lens{{{{0.0, 0.0}, le}, {{d, 0.0}, le}}};
    const double expect = two_disk_union(2 * le, d) / (kP.lambda * kP.lambda);
    CHECK(core_energy(lens, kP) == doctest::Approx(expect).epsilon(0.01));
    // fixed seed
    CHECK(core_energy(lens, kP) == core_energy(lens, kP));
}

TEST_CASE("property: core energy grows when cores are added") {
    std::mt19937_64 gen(4);
    std::uniform_real_distribution<double> u(-0.7, 0.7);
    const double le = kP.lambda * kP.epsilon;
    CoreSet S;
    double last = 0.0;
    for (int s = 0; s < 12; ++s) {
        S.balls.push_back({{u(gen), u(gen)}, le});
        const double e = core_energy(S, kP);
        // Monte Carlo noise is far below one core's area
        CHECK(e >= last - 0.01 * 4 * M_PI * kP.epsilon * kP.epsilon);
        last = e;
    }
}

TEST_CASE("total energy") {
    const Grid2 g{65, 1.0};
    const auto id = total_energy(MatrixField(g, Mat2::identity()), CoreSet{}, kP);
    CHECK(id.elastic == 0.0);
    CHECK(id.core == 0.0);
    CHECK(id.total == 0.0);
    CHECK_FALSE(id.support_violation);
    CHECK_THROWS_AS(total_energy(MatrixField(g), CoreSet{}, kP, 0.0), std::invalid_argument);

    // N = 6 tiles: the default curl tolerance separates the cores from edge noise here
    const Params p = gb_params(0.05);
    const GrainBoundary gb = compose_tile(p);
    const MatrixField A = sample_gradient(gb.u, Grid2{257, p.L});
    const auto with = total_energy(A, gb.cores, p);
    CHECK_FALSE(with.support_violation);
    CHECK(std::isfinite(with.total));
    CHECK(with.total == doctest::Approx(with.elastic + with.core));
    const auto without = total_energy(A, CoreSet{}, p);
    CHECK(without.support_violation);
    CHECK(std::isinf(without.total));
}

TEST_CASE("elastic energy: sampled A_gb against the triangulated value") {
    const Params p = gb_params(0.2);
    const GrainBoundary gb = compose_tile(p);
    const double exact = gb_elastic_energy(gb.u, gb.cores, p);
    const MatrixField A = sample_gradient(gb.u, Grid2{2049, p.L});
    CHECK(elastic_energy(A, gb.cores, p) == doctest::Approx(exact).epsilon(0.05));
}

TEST_CASE("measures") {
    const Grid2 g{129, 1.0};
    const auto zero = build_measures(MatrixField(g, Mat2::identity()), CoreSet{}, kP);
    CHECK(zero.mu1.mass() == 0.0);
    CHECK(zero.mu2.mass() == 0.0);
    CHECK(zero.mu.mass() == 0.0);

    const double le = kP.lambda * kP.epsilon;
    CoreSet one{{{{0.013, -0.021}, le}}};
    const Grid2 fine{1025, 1.0};
    const auto m = build_measures(MatrixField(fine, Mat2::identity()), one, kP);
    CHECK(m.mu2.mass() == doctest::Approx(4 * M_PI * kP.epsilon / kP.lambda).epsilon(0.02));
    const auto alt = build_measures(MatrixField(fine, Mat2::identity()), one, kP, Mu2Normalization::PerLambdaSqEps);
    CHECK(alt.mu2.mass() * kP.lambda == doctest::Approx(m.mu2.mass()).epsilon(1e-12));

    std::mt19937_64 gen(8);
    std::uniform_real_distribution<double> u(0.8, 1.2);
    MatrixField A(g);
    for (auto& x : A.v) x = Mat2{u(gen), 0.1 * u(gen), 0.0, u(gen)};
    const auto mm = build_measures(A, one, kP);
    CHECK_NOTHROW(mm.mu.validate());
    CHECK(mm.mu1.mass() * kP.epsilon == doctest::Approx(elastic_energy(A, one, kP)).epsilon(1e-12));
    CHECK(mm.mu.mass() == doctest::Approx(mm.mu1.mass() + mm.mu2.mass()).epsilon(1e-12));
}

TEST_CASE("property: measure masses add over a domain split") {
    std::mt19937_64 gen(12);
    std::uniform_real_distribution<double> u(0.5, 1.5), c(-0.5, 0.5);
    const Grid2 g{65, 1.0};
    for (int s = 0; s < 10; ++s) {
        MatrixField A(g);
        for (auto& x : A.v) x = Mat2{u(gen), 0.0, 0.0, u(gen)};
        CoreSet S{{{{c(gen), c(gen)}, kP.lambda * kP.epsilon}}};
        const auto m = build_measures(A, S, kP);
        const double cut = c(gen);
        WeightedPointMeasure left, right;
        for (const auto& a : m.mu.atoms) (a.point.x < cut ? left : right).atoms.push_back(a);
        CHECK(left.mass() + right.mass() == doctest::Approx(m.mu.mass()).epsilon(1e-13));
    }
}

TEST_CASE("measure: validation and balls") {
    WeightedPointMeasure m{{{{0, 0}, 1.0}, {{1, 0}, 2.0}}};
    CHECK(m.mass() == 3.0);
    CHECK(m.mass_in_ball({0, 0}, 1.0) == 1.0);  // open ball
    CHECK(m.mass_in_ball({0, 0}, 1.0 + 1e-12) == 3.0);
    CHECK(m.scaled(2.0).mass() == 6.0);
    m.atoms.push_back({{0, 1}, -1.0});
    CHECK_THROWS_AS(m.validate(), std::invalid_argument);
}
