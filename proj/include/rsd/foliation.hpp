#pragma once

#include <iosfwd>
#include <limits>
#include <utility>
#include <vector>

#include "rsd/coverings.hpp"
#include "rsd/field_core.hpp"

namespace rsd {

// H^1 of the part of the boundary of the union of balls lying in {1/2 <= |x| < 1}.
double perimeter_in_annulus(const BallFamily& balls);

// delta1 = inf{r >= delta0 : the circle |x| = 1/2 + r misses every ball}, delta2 likewise for
// |x| = 1 - r.  Throws std::invalid_argument when perimeter_in_annulus exceeds delta0.
std::pair<double, double> compute_deltas(const BallFamily& balls, double delta0);

// Levels k = 0..K, K = floor(ln(N) / 2), radii r_k = M^k r0 with r0 = c0 / N.
struct CoverHierarchy {
    double r0 = 0.0;
    double M = 0.0;
    int K = 0;
    std::vector<Vec2> points;
    std::vector<double> r;
    std::vector<std::vector<int>> I;       // point indices of level k, greedy in lexicographic order
    std::vector<std::vector<int>> edge;    // edge[k][a]: position in I[k+1] of E_k(I[k][a]), k < K
    std::vector<std::vector<int>> degree;
    std::vector<std::vector<char>> pruned; // strict descendant of a non-root degree-2 vertex

    int vertex_count() const;
    // (k, point index of the unique child x_{i0}) for every degree-2 vertex with 2 <= k <= K - 1
    std::vector<std::pair<int, int>> degree2_children() const;
    // #V <= 2 #{deg 1} + #{deg 2} on every tree with more than one vertex
    bool leaf_bound_holds() const;
};

// Throws std::invalid_argument for an empty point list or M <= 34.
CoverHierarchy build_hierarchy(const std::vector<Vec2>& points, double c0, double M = kM);

struct BlendSite {
    Vec2 center;
    double rbar = 0.0;
    double phi_bar = 0.0;  // average of phi0 over B(center, c2 rbar)
};

// phi = psi o phi1.  In unit coordinates y = (x - p) / scale the annulus is 1/2 <= |y| <= 1.
struct FoliationFn {
    double delta0 = kDelta0;  // value used for the construction (after the Lipschitz check)
    double delta1 = 0.0, delta2 = 0.0;
    double slope = 0.0;       // C(delta1, delta2) = 1 / (1/2 - delta1 - delta2)
    double M = kM;
    double r0 = 0.0;
    std::vector<BlendSite> sites;
    std::vector<std::pair<double, double>> cut;  // the excluded set, disjoint sorted intervals
    double cut_length = 0.0;
    double lip_phi1 = 0.0;    // a priori Lipschitz bound of phi1
    Vec2 p{0.0, 0.0};
    double scale = 1.0;

    double c1() const { return M / 8 + 0.75; }
    double c2() const { return M / 4 - 2.0; }
    double phi0(Vec2 y) const;
    double phi1(Vec2 y) const;
    double psi(double t) const;
    double operator()(Vec2 x) const;
    // one-sided at kinks; psi' is taken as 0 on the closed excluded intervals
    Vec2 gradient(Vec2 x) const;
    double lipschitz_bound() const { return lip_phi1 / (1.0 - cut_length) / scale; }
    // values taken on the excluded intervals, strictly between 0 and 1, sorted
    std::vector<double> plateaus() const;
    // "x y phi" lines on an n x n grid covering the image of [-1, 1]^2
    void dump(std::ostream& os, int n) const;
};

// Throws std::invalid_argument when the perimeter condition fails, a radius is not positive,
// or the excluded set is longer than 1/2.
FoliationFn foliate(const BallFamily& balls, double delta0 = kDelta0, double M = kM);

// Pullback of foliate under x -> p + 2R y; the perimeter condition is H^1 <= delta0 R.
FoliationFn foliate_scaled(Vec2 p, double R, const BallFamily& balls, double delta0 = kDelta0, double M = kM);

// Midpoint rule on grid_n^2 cells over p + scale [-1, 1]^2 of |grad phi|^2 / dist^2(x, dU),
// U the annulus minus the balls.  Throws std::invalid_argument for grid_n < 256.
double foliation_energy(const FoliationFn& phi, const BallFamily& balls, int grid_n);

struct FluxCheck {
    Vec2 lhs;        // sum_{i=1}^L b_i
    Vec2 rhs;        // sum_{i<L} (1 - phi_i) b_i - int_0^1 dh oint [[x, x_perp], [-x_perp, x]] (grad A11, grad A22) t
    double residual = 0.0;  // |lhs - rhs|
    int plateaus = 0;
};

// Level sets of phi sampled on the grid of A (marching squares), `levels` midpoint levels in each
// gap between consecutive plateau values, x measured from p.  Throws std::invalid_argument when
// B(p, 2R) leaves the grid, levels < 1, a level set is empty or touches the grid boundary, or the
// discrete curl exceeds curl_tol where grad phi != 0.
FluxCheck flux_identity_check(const MatrixField& A, const FoliationFn& phi, Vec2 p, double R, int levels,
                              double curl_tol = std::numeric_limits<double>::infinity());

}  // namespace rsd
