#pragma once

#include <cstdint>
#include <vector>

#include "rsd/field_core.hpp"

namespace rsd {

struct EnergyBreakdown {
    double elastic = 0.0;
    double core = 0.0;
    double total = 0.0;  // +inf when support_violation
    bool support_violation = false;
};

struct Atom {
    Vec2 point;
    double weight = 0.0;
};

struct WeightedPointMeasure {
    std::vector<Atom> atoms;

    // Throws std::invalid_argument on a negative or non-finite weight.
    void validate() const;
    double mass() const;
    // mass of atoms with |point - c| < r
    double mass_in_ball(Vec2 c, double r) const;
    WeightedPointMeasure scaled(double s) const;
};

// Seed of the Monte Carlo union-area estimate used for overlapping cores.
inline constexpr std::uint64_t kCoreEnergySeed = 0x5eedc0feULL;
inline constexpr int kCoreEnergySamples = 1000000;

// Cell (i, j) is [x_i, x_{i+1}] x [y_j, y_{j+1}]; true if it does not meet B_{lambda eps}(S).
bool cell_outside_cores(const Grid2& g, int i, int j, const CoreSet& S, double lambda_eps);

// (1/tau) sum over cells outside B_{lambda eps}(S) of area * dist^2(A at cell centre).
double elastic_energy(const MatrixField& A, const CoreSet& S, const Params& p);

// |B_{lambda eps}(S)| / lambda^2.  Exact for disjoint dilated disks, Monte Carlo otherwise.
double core_energy(const CoreSet& S, const Params& p, std::uint64_t seed = kCoreEnergySeed);

inline double default_curl_tol(const Params& p, const Grid2& g) { return 10.0 * p.tau * p.epsilon / g.h(); }

EnergyBreakdown total_energy(const MatrixField& A, const CoreSet& S, const Params& p, double curl_tol);
inline EnergyBreakdown total_energy(const MatrixField& A, const CoreSet& S, const Params& p) {
    return total_energy(A, S, p, default_curl_tol(p, A.grid));
}

enum class Mu2Normalization {
    PerLambdaEps,     // 1/(lambda eps), the sequence definition
    PerLambdaSqEps,   // 1/(lambda^2 eps), for the bounded-curl estimate
};

struct Measures {
    WeightedPointMeasure mu1, mu2, mu;
};

// Cell-centred atoms.  mu1 uses the cells of elastic_energy, so mu1 mass * eps = elastic_energy;
// mu2 uses the cells whose centre lies in B_{lambda eps}(S).
Measures build_measures(const MatrixField& A, const CoreSet& S, const Params& p,
                        Mu2Normalization norm = Mu2Normalization::PerLambdaEps);

}  // namespace rsd
