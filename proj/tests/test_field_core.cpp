#include <cmath>
#include <random>

#include "doctest.h"
#include "rsd/field_core.hpp"
#include "support.hpp"

using namespace rsd;

namespace {

// brute-force oracle: min over a uniform theta grid of |m - R_theta|_F
double dist_bruteforce(const Mat2& m, int samples) {
    double best = INFINITY;
    for (int k = 0; k < samples; ++k) {
        const double th = 2.0 * M_PI * k / samples;
        best = std::min(best, (m - rotation(th)).frob());
    }
    return best;
}

Params unit_params() { return {0.01, 0.1, 1.0, 1.0, 1.0, 0.2}; }

}  // namespace

TEST_CASE("params validation") {
    Params p = unit_params();
    CHECK_NOTHROW(p.validate());
    p.alpha = 0.2;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = unit_params();
    p.ell = 0.3;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = unit_params();
    p.lambda = 30.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("rotation examples") {
    CHECK(rotation(0.0) == Mat2::identity());
    const Mat2 j = rotation(M_PI / 2);
    CHECK(std::abs(j.a00) < 1e-16);
    CHECK(j.a01 == doctest::Approx(-1.0));
    CHECK(j.a10 == doctest::Approx(1.0));
    CHECK(std::abs(j.a11) < 1e-16);
    const Mat2 back = rotation(0.3) * rotation(-0.3);
    CHECK((back - Mat2::identity()).frob() < 1e-14);
}

TEST_CASE("dist_SO2 against brute force") {
    CHECK(dist_SO2(Mat2::identity()) == 0.0);
    // frozen from the theta-grid oracle below
    const double two_i = 1.4142135623730951;
    const double refl = 2.0;
    CHECK(dist_bruteforce(Mat2::diag(2, 2), 1000000) == doctest::Approx(two_i).epsilon(1e-9));
    CHECK(dist_bruteforce(Mat2::diag(1, -1), 1000000) == doctest::Approx(refl).epsilon(1e-9));
    CHECK(dist_SO2(Mat2::diag(2, 2)) == doctest::Approx(two_i).epsilon(1e-14));
    CHECK(dist_SO2(Mat2::diag(1, -1)) == doctest::Approx(refl).epsilon(1e-14));
    CHECK(dist_SO2(rotation(0.7)) < 1e-15);
}

TEST_CASE("property: rotations are orthogonal with unit determinant") {
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> u(-100.0, 100.0);
    for (int k = 0; k < 1000; ++k) {
        const Mat2 r = rotation(u(gen));
        CHECK((r.transpose() * r - Mat2::identity()).frob() < 1e-12);
        CHECK(std::abs(r.det() - 1.0) < 1e-12);
    }
}

TEST_CASE("property: dist_SO2 is frame indifferent") {
    std::mt19937_64 gen(12);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int k = 0; k < 1000; ++k) {
        const Mat2 m{u(gen), u(gen), u(gen), u(gen)};
        const Mat2 r = rotation(u(gen));
        CHECK(std::abs(dist_SO2(r * m) - dist_SO2(m)) < 1e-10);
        CHECK(dist_SO2(m) <= dist_bruteforce(m, 2000) + 1e-12);
    }
}

TEST_CASE("curl_fd examples") {
    const Grid2 g{33, 1.0};
    const auto c0 = curl_fd(MatrixField(g, Mat2{1, 2, 3, 4}));
    for (double v : c0[0].v) CHECK(v == 0.0);
    for (double v : c0[1].v) CHECK(v == 0.0);

    const auto lin = MatrixField::sample(g, [](Vec2 p) { return Mat2{0, p.x, 0, p.x}; });
    const auto clin = curl_fd(lin);
    for (double v : clin[0].v) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));

    for (int n : {17, 33}) {
        const auto sym = MatrixField::sample(Grid2{n, 1.0}, [](Vec2 p) {
            return Mat2{-p.y / 2, p.x / 2, -p.y / 2, p.x / 2};
        });
        const auto c = curl_fd(sym);
        for (int r = 0; r < 2; ++r)
            for (double v : c[r].v) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK_THROWS_AS(curl_fd(MatrixField(Grid2{2, 1.0})), std::invalid_argument);
}

TEST_CASE("polycurve validation") {
    CHECK_NOTHROW(PolyCurve::circle({0, 0}, 0.5, 16).validate());
    PolyCurve bow{{{0, 0}, {1, 1}, {1, 0}, {0, 1}}, true};
    CHECK_THROWS_AS(bow.validate(), std::invalid_argument);
    PolyCurve line{{{0, 0}, {1, 0}, {2, 0}}, true};
    CHECK_THROWS_AS(line.validate(), std::invalid_argument);
    PolyCurve open{{{0, 0}, {1, 0}, {1, 1}}, false};
    CHECK_THROWS_AS(open.validate(), std::invalid_argument);
}

TEST_CASE("line_integral examples") {
    const Grid2 g{129, 1.0};
    const auto id = MatrixField(g, Mat2::identity());
    const auto gamma = PolyCurve::circle({0.1, -0.05}, 0.6, 64);
    const Vec2 z = line_integral(id, gamma);
    CHECK(std::abs(z.x) < 1e-13);
    CHECK(std::abs(z.y) < 1e-13);

    // Green oracle: curl c per row, integral of curl over the polygon = c * area
    const double c = 1.7;
    const auto f = MatrixField::sample(g, [c](Vec2 p) {
        return Mat2{-c * p.y / 2, c * p.x / 2, -c * p.y / 2, c * p.x / 2};
    });
    for (int nv : {32, 256, 2048}) {
        const auto circ = PolyCurve::circle({0, 0}, 0.9, nv);
        const double area = 0.5 * nv * 0.81 * std::sin(2 * M_PI / nv);  // regular n-gon
        const Vec2 b = line_integral(f, circ);
        CHECK(b.x == doctest::Approx(c * area).epsilon(1e-12));
        CHECK(b.y == doctest::Approx(c * area).epsilon(1e-12));
    }
    const Vec2 fine = line_integral(f, PolyCurve::circle({0, 0}, 1.0, 4096));
    CHECK(fine.x == doctest::Approx(c * M_PI).epsilon(1e-5));

    PolyCurve outside = PolyCurve::circle({0.9, 0}, 0.5, 16);
    CHECK_THROWS_AS(line_integral(f, outside), std::out_of_range);
}

TEST_CASE("property: line_integral is exactly antisymmetric under reversal") {
    std::mt19937_64 gen(5);
    const Grid2 g{65, 1.0};
    const auto f = MatrixField::sample(g, [](Vec2 p) {
        return Mat2{std::sin(3 * p.x) * p.y, std::cos(p.y), p.x * p.x, std::exp(p.x * p.y)};
    });
    for (int k = 0; k < 50; ++k) {
        const auto gamma = test::random_star_polygon(gen, {0.0, 0.0}, 0.2, 0.8, 24);
        const Vec2 a = line_integral(f, gamma);
        const Vec2 b = line_integral(f, gamma.reversed());
        CHECK(a.x == -b.x);
        CHECK(a.y == -b.y);
    }
}

TEST_CASE("property: exact gradients circulate to zero at O(h^2)") {
    // potential phi = sin(2x) cos(3y) + x^3 y, row fields grad phi and grad(phi^2 / 4)
    auto sample = [](int n) {
        return MatrixField::sample(Grid2{n, 1.0}, [](Vec2 p) {
            const double ph = std::sin(2 * p.x) * std::cos(3 * p.y) + p.x * p.x * p.x * p.y;
            const double px = 2 * std::cos(2 * p.x) * std::cos(3 * p.y) + 3 * p.x * p.x * p.y;
            const double py = -3 * std::sin(2 * p.x) * std::sin(3 * p.y) + p.x * p.x * p.x;
            return Mat2{px, py, ph * px / 2, ph * py / 2};
        });
    };
    const auto gamma = PolyCurve::circle({0.05, 0.02}, 0.7, 400);
    std::vector<double> errs;
    for (int n : {65, 129, 257}) {
        const Vec2 b = line_integral(sample(n), gamma);
        errs.push_back(std::max(std::abs(b.x), std::abs(b.y)));
    }
    CHECK(errs[0] / errs[1] > 3.0);
    CHECK(errs[1] / errs[2] > 3.0);
}

TEST_CASE("classify_burgers examples") {
    const Params p = unit_params();
    const double q = p.tau * p.epsilon;
    CHECK(classify_burgers({0, 0}, p).cls == BurgersClass::Zero);
    CHECK(classify_burgers({q, 0}, p).cls == BurgersClass::Quantized);
    CHECK(classify_burgers({q / 2, 0}, p, 1e-6 * q).cls == BurgersClass::Violation);
    CHECK(classify_burgers({0, 3 * q}, p).cls == BurgersClass::Quantized);
    CHECK(default_burgers_tol(p) == doctest::Approx(0.05 * q));
}

TEST_CASE("repr_burgers_residual examples") {
    const auto gamma = PolyCurve::circle({0, 0}, 0.5, 64);
    const auto cst = MatrixField(Grid2{65, 1.0}, Mat2{0.3, -1.2, 2.0, 0.5});
    CHECK(repr_burgers_residual(cst, gamma) < 1e-13);

    // the quadratic field: interpolation error is cell periodic and cancels along the
    // curve, leaving only a small erratic residual
    auto quad = [](int n) {
        return MatrixField::sample(Grid2{n, 1.5}, [](Vec2 p) {
            return Mat2{p.x * p.x - p.y * p.y, 2 * p.x * p.y, p.x * p.x - p.y * p.y, 2 * p.x * p.y};
        });
    };
    const auto unit = PolyCurve::circle({0.0, 0.0}, 1.0, 512);
    const auto shifted = PolyCurve::circle({0.13, 0.07}, 1.0, 512);
    for (int n : {128, 256, 512}) {
        CHECK(repr_burgers_residual(quad(n), unit) < 1e-12);
        CHECK(repr_burgers_residual(quad(n), shifted) < 1e-5);
    }
}

TEST_CASE("property: representation residual converges at O(h^2)") {
    const auto gamma = PolyCurve::circle({0.13, 0.07}, 1.0, 512);
    std::vector<double> r;
    for (int n : {128, 256, 512}) r.push_back(repr_burgers_residual(test::trig_field(n), gamma));
    CHECK(r[0] / r[1] > 3.0);
    CHECK(r[1] / r[2] > 3.0);
}

TEST_CASE("property: harmonic matrix form matches the direct circulation") {
    // curl and divergence free away from the off-grid singularity at the origin
    const double c = 0.8;
    const auto f = MatrixField::sample(Grid2{512, 1.0}, [c](Vec2 p) {
        const double r2 = p.x * p.x + p.y * p.y;
        return Mat2{-c * p.y / r2, c * p.x / r2, -c * p.y / r2, c * p.x / r2};
    });
    std::mt19937_64 gen(9);
    for (int k = 0; k < 10; ++k) {
        const auto gamma = test::random_star_polygon(gen, {0.0, 0.0}, 0.45, 0.8, 40);
        const Vec2 direct = line_integral(f, gamma);
        const Vec2 harm = repr_burgers_harmonic(f, gamma, {0.0, 0.0});
        CHECK(direct.x == doctest::Approx(2 * M_PI * c).epsilon(2e-3));
        CHECK(harm.x == doctest::Approx(direct.x).epsilon(2e-3));
        CHECK(harm.y == doctest::Approx(direct.y).epsilon(2e-3));
    }
}
