#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "rsd/field_core.hpp"
#include "rsd/grain_boundary.hpp"
#include "rsd/rng.hpp"

namespace rsd::cli {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

const std::vector<std::string>& experiment_names();

// Keys: experiment, params {epsilon, alpha, L, tau, lambda, ell}, alphas, resolutions, counts,
// seed, instances, levels, out, tolerances.  Which of them an experiment reads, and which
// tolerance names it accepts, is listed in usage().
struct ExperimentConfig {
    std::string experiment;
    Params params{0.0, 0.125, 1.0, 2.0, 1.0, 0.2};  // epsilon <= 0: derived, see gb_setup
    std::vector<double> alphas;
    std::vector<int> resolutions;
    std::vector<int> counts;
    std::uint64_t seed = 7;
    int instances = 1000;
    int levels = 3;
    std::string out = ".";
    std::map<std::string, double> tolerances;

    double tolerance(const std::string& name) const;
};

std::string usage();

// Throws ConfigError for an empty object, unknown keys, wrongly typed values, a tolerance the
// experiment does not know, or an "experiment" entry naming a different experiment.
ExperimentConfig parse_config(const nlohmann::json& j, const std::string& experiment);

struct RunResult {
    int status = 0;                        // 0 pass, 1 assertion failure
    std::vector<std::string> failures;     // named failed assertions
    std::vector<std::filesystem::path> files;
    std::string summary;
};

// Writes the experiment's CSV and .dat files into `out` (created if missing).  Library
// std::invalid_argument propagates, the caller reports it as a configuration error.
RunResult run(const ExperimentConfig& cfg, const std::filesystem::path& out);

// Star-shaped polygon around c with nv sorted angles and radii in [rmin, rmax].
PolyCurve star_polygon(SplitMix64& g, Vec2 c, double rmin, double rmax, int nv);

// A_gb, epsilon = compatible_epsilon(alpha, L, tau, L / 20) when p.epsilon <= 0; the core of the
// middle tile.
struct GbSetup {
    Params p;
    GrainBoundary gb;
    Vec2 core;
};
GbSetup gb_setup(const Params& p);

// Harmonic competitor on {0.54 H < |x - core| < 1.2 H}, Burgers changes over 20 curves with
// radii in [0.6 H, 1.14 H], and the mollified competitor when h <= lambda eps / 8.
struct CompetitorRow {
    int n = 0;
    double h = 0.0;
    double C_hat = 0.0;
    double null_lagrangian = 0.0;
    bool max_principle = false;
    double burgers_change = 0.0;          // max |b(A~) - b(A)| / (tau eps)
    double sup_curl_lambda_eps = 0.0;     // NaN when the grid is too coarse to mollify
    long support_violations = -1;         // nodes outside B_{3 lambda eps}(S) above default_curl_tol
};
CompetitorRow competitor_row(const GbSetup& s, int n, std::uint64_t seed);

struct MollifiedStats {
    double sup_curl_lambda_eps = 0.0;  // max |curl_fd A~| lambda eps over nodes in B_{3 lambda eps}(S)
    long support_violations = 0;       // nodes outside it with |curl_fd A~| > default_curl_tol
};
// A sampled from s.gb.u; throws std::invalid_argument when h > lambda eps / 8.
MollifiedStats mollified_stats(const GbSetup& s, const MatrixField& A);

struct FoliateRow {
    int N = 0;
    double delta0 = 0.0, delta1 = 0.0, delta2 = 0.0;
    int sites = 0;
    double cut_length = 0.0;
    double lipschitz_bound = 0.0;
    double energy = 0.0;
    std::string boundary_failure, plateau_failure;
};
// Instance foliation_instance(seed, N), energy on grid_n^2 cells.
FoliateRow foliate_row(std::uint64_t seed, int N, int grid_n);

// Seed of instance i: the i-th output of splitmix64 started at `seed`.
std::vector<std::uint64_t> instance_seeds(std::uint64_t seed, int count);

}  // namespace rsd::cli
