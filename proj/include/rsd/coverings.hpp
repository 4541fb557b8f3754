#pragma once

#include <string>
#include <vector>

#include "rsd/energies.hpp"
#include "rsd/field_core.hpp"

namespace rsd {

inline constexpr double kDelta0 = 1.0 / 64;
inline constexpr double kM = 40.0;

struct Ball {
    Vec2 center;
    double radius = 0.0;
};

struct BallFamily {
    std::vector<Ball> balls;
    bool disjoint = false;  // set by certify_disjoint()

    double sum_radii() const;
    // open balls: |x_i - x_j| >= r_i + r_j - slack
    bool pairwise_disjoint(double slack = 1e-12) const;
    // Throws std::invalid_argument naming the first overlapping pair.
    void certify_disjoint();
};

// Greedy by decreasing radius (ties: lexicographic centre, then index).  Chosen balls are
// pairwise disjoint and every input ball lies in `dilation` times a chosen one.
// Throws std::invalid_argument for dilation < 3.
std::vector<int> vitali_select(const BallFamily& family, double dilation);

// sup{rho > 0 : mu({rho <= |y - x| < 2 rho}) > delta0 rho}, 0 if the set is empty.
// mu is constant between the breakpoints |y - x| and |y - x| / 2, so the sup is attained
// at a breakpoint or at mass / delta0.
double rho_bar(const WeightedPointMeasure& mu, Vec2 x, double delta0);

struct Deg2Selection {
    std::vector<int> chosen;   // indices into the point list, the subfamily J~
    std::vector<double> r;     // r_j for every point of J, 0 elsewhere
};

// Level-by-level maximal selection with |x_i - x_j| >= (beta/2)(r_i + r_j), beta = M/2 - 2,
// where r_j = max{delta^k R : no point of the list in B(x_j, beta delta^k R) \ B(x_j, delta^k R)}.
// Throws std::invalid_argument for M <= 34, delta outside (0, 1), R <= 0, or a point of J
// without an empty annulus among the levels 0..max_level.
Deg2Selection make_deg2_disjoint(const std::vector<Vec2>& points, const std::vector<int>& J, double R,
                                 double delta, double M = kM, int max_level = 64);

struct SelectionResult {
    std::vector<int> chosen;
    std::vector<double> radius;  // R_i, parallel to chosen
    double fraction = 1.0;       // sum mu(B(x_i, R_i)) / mu(B(centre, R)); 1 for a zero measure
    int colors = 0;              // largest colour count used on one shell
};

// Dyadic shells U_k around `centre`, maximal r_k/3-separated families with r_k = 2^-k R / 10,
// greedy colouring so that the balls B(x_i, 2 r_k) of one colour are disjoint, parity split and
// the heaviest colour per shell.  Throws std::invalid_argument (naming the index) when
// |x_i - centre| + 30 rho_i >= R or an atom of mu lies outside every closed ball B(x_i, rho_i).
SelectionResult find_nice_balls(const BallFamily& family, const WeightedPointMeasure& mu, double R,
                                Vec2 centre = {0.0, 0.0});

// Atoms spread evenly along every circle of the family: the perimeter measure of the union
// when the balls are disjoint.
WeightedPointMeasure perimeter_measure(const BallFamily& family, int atoms_per_circle = 64);

// Replace any two intersecting closed balls by their smallest enclosing ball until the
// family is disjoint.
BallFamily merge_balls(BallFamily family);

struct BallStep {
    std::vector<double> rho_bar;  // per input ball
    std::vector<int> vitali;      // input balls kept by the Vitali selection
    std::vector<int> parent;      // for each kept ball, the output ball containing B(x, 180 rho_bar)
    BallFamily next;
};

// Expand to rho_bar, Vitali on B(x, 2 rho_bar) (cover by 6 rho_bar), dilate to 180 rho_bar and
// merge.  Throws std::invalid_argument if the input is not pairwise disjoint.
BallStep ball_construction_step(const BallFamily& family, const WeightedPointMeasure& mu, double delta0 = kDelta0);

struct DensityRecord {
    int k = 0;
    double tau_k = 0.0;      // tau_k(B(p, 2R))
    int n_k = 0;             // balls of B_k inside the annuli of the selected nice balls
    double sum_radii = 0.0;
    double C_hat = 0.0;      // k tau_k / (mu(B(p, 2R)) + tau eps sum_{l < k} n_l), 0 for k = 0
};

// Starts from the merged dilated cores meeting B(p, 2R); records k = 0..K.
// Throws std::invalid_argument for K < 1 or B(p, 3R) not inside the grid.
std::vector<DensityRecord> density_trace(const MatrixField& A, const CoreSet& S, const Params& params, Vec2 p,
                                         double R, double delta0, int K);

}  // namespace rsd
