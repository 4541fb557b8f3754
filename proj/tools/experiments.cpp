#include "experiments.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "covering_checks.hpp"
#include "foliation_checks.hpp"
#include "rsd/competitors.hpp"
#include "rsd/coverings.hpp"
#include "rsd/energies.hpp"
#include "rsd/foliation.hpp"
#include "rsd/piecewise_affine.hpp"

namespace rsd::cli {

namespace fs = std::filesystem;
using nlohmann::json;

const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names{"gb-scan", "coverings-suite", "foliate-demo", "competitor",
                                                "density-trace"};
    return names;
}

namespace {

const std::map<std::string, std::map<std::string, double>> kTolerances{
    {"gb-scan", {{"ratio_spread", 4.0}}},
    {"coverings-suite", {}},
    {"foliate-demo", {{"energy_spread", 3.0}}},
    {"competitor", {}},
    {"density-trace", {{"tau_noise", 0.0}}},
};

std::string num(double x) { return fmt::format("{:.17g}", x); }

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

std::string seed_line(const ExperimentConfig& cfg) {
    return fmt::format("# experiment={} seed={}\n", cfg.experiment, cfg.seed);
}

// base.csv with the fixed header and base.dat with whitespace columns for gnuplot
void write_table(const fs::path& base, const ExperimentConfig& cfg, const Table& t, RunResult& res) {
    auto join = [](const std::vector<std::string>& v, const char* sep) {
        std::string s;
        for (std::size_t k = 0; k < v.size(); ++k) s += (k ? sep : "") + v[k];
        return s;
    };
    fs::path csv = base, dat = base;
    csv += ".csv";
    dat += ".dat";
    std::ofstream c(csv, std::ios::binary), d(dat, std::ios::binary);
    if (!c || !d) throw std::runtime_error("cannot write " + base.string());
    c << seed_line(cfg) << join(t.header, ",") << '\n';
    d << seed_line(cfg) << "# " << join(t.header, " ") << '\n';
    for (const auto& r : t.rows) {
        c << join(r, ",") << '\n';
        d << join(r, " ") << '\n';
    }
    res.files.push_back(csv);
    res.files.push_back(dat);
}

void fail(RunResult& res, std::string what) {
    res.status = 1;
    res.failures.push_back(std::move(what));
}

double spread(const std::vector<double>& v) {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return *hi / *lo;
}

template <class T>
T get_as(const json& v, const std::string& key) {
    try {
        return v.get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config: wrong type for \"" + key + "\"");
    }
}

RunResult run_gb_scan(const ExperimentConfig& cfg, const fs::path& out) {
    RunResult res;
    std::vector<double> alphas = cfg.alphas;
    if (alphas.empty())
        for (int k = 3; k <= 8; ++k) alphas.push_back(std::ldexp(1.0, -k));
    const auto rows = gb_scan(alphas, cfg.params);
    Table t{{"alpha", "E_el", "E_core", "F", "ratio"}, {}};
    std::vector<double> ratios;
    for (const auto& r : rows) {
        t.rows.push_back({num(r.alpha), num(r.E_el), num(r.E_core), num(r.F), num(r.ratio)});
        ratios.push_back(r.ratio);
        if (!(r.ratio > 0.0)) fail(res, fmt::format("ratio > 0 at alpha {}", r.alpha));
    }
    write_table(out / "gb_scan", cfg, t, res);
    const double s = spread(ratios), tol = cfg.tolerance("ratio_spread");
    if (!(s <= tol)) fail(res, fmt::format("ratio max/min {:.4g} <= {}", s, tol));
    res.summary = fmt::format("{} rows, ratio max/min {:.4g}", rows.size(), s);
    return res;
}

RunResult run_coverings_suite(const ExperimentConfig& cfg, const fs::path& out) {
    RunResult res;
    Table t{{"instance", "seed", "nice_fraction", "deg2_chosen", "step_growth", "status"}, {}};
    int passed = 0;
    const auto seeds = instance_seeds(cfg.seed, cfg.instances);
    for (int i = 0; i < cfg.instances; ++i) {
        SplitMix64 g(seeds[static_cast<std::size_t>(i)]);
        const auto nice = testing::nice_instance(g());
        const auto sel = find_nice_balls(nice.family, nice.mu, nice.R);
        const auto deg2 = testing::deg2_instance(g());
        const auto ds = make_deg2_disjoint(deg2.points, deg2.J, deg2.R, deg2.delta);
        const auto fam = testing::disjoint_family(g(), 100);
        const auto st = ball_construction_step(fam, perimeter_measure(fam));
        std::string why = testing::check_nice(nice, sel);
        if (why.empty()) why = testing::check_deg2(deg2, ds);
        if (why.empty()) why = testing::check_step(fam, st, kDelta0);
        if (why.empty())
            ++passed;
        else
            fail(res, fmt::format("instance {}: {}", i, why));
        t.rows.push_back({std::to_string(i), std::to_string(seeds[static_cast<std::size_t>(i)]), num(sel.fraction),
                          std::to_string(ds.chosen.size()), num(st.next.sum_radii() / fam.sum_radii()),
                          why.empty() ? "pass" : "fail"});
    }
    write_table(out / "coverings_suite", cfg, t, res);
    res.summary = fmt::format("{} passed", passed);
    if (passed < cfg.instances) res.summary += fmt::format(", {} failed", cfg.instances - passed);
    return res;
}

RunResult run_foliate_demo(const ExperimentConfig& cfg, const fs::path& out) {
    RunResult res;
    std::vector<int> counts = cfg.counts;
    if (counts.empty()) counts = {0, 1, 2, 4, 8, 16, 32, 64};
    if (cfg.resolutions.size() > 1) throw ConfigError("foliate-demo: one energy resolution");
    const int grid_n = cfg.resolutions.empty() ? 2048 : cfg.resolutions[0];
    const auto seeds = instance_seeds(cfg.seed, static_cast<int>(counts.size()));
    Table t{{"N", "delta0", "delta1", "delta2", "sites", "cut_length", "lipschitz_bound", "energy", "energy_per_ball"},
            {}};
    std::vector<double> per;
    for (std::size_t k = 0; k < counts.size(); ++k) {
        const auto r = foliate_row(seeds[k], counts[k], grid_n);
        if (!r.boundary_failure.empty()) fail(res, fmt::format("N = {}: {}", r.N, r.boundary_failure));
        if (!r.plateau_failure.empty()) fail(res, fmt::format("N = {}: {}", r.N, r.plateau_failure));
        per.push_back(r.energy / (1 + r.N));
        t.rows.push_back({std::to_string(r.N), num(r.delta0), num(r.delta1), num(r.delta2), std::to_string(r.sites),
                          num(r.cut_length), num(r.lipschitz_bound), num(r.energy), num(per.back())});
    }
    write_table(out / "foliate_demo", cfg, t, res);

    // phi of the largest instance on a 129 x 129 grid
    const std::size_t last = static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
    const auto balls = testing::foliation_instance(seeds[last], counts[last]);
    const fs::path phi = out / "foliate_demo_phi.dat";
    std::ofstream os(phi, std::ios::binary);
    os << seed_line(cfg) << "# N=" << counts[last] << "\n# x y phi\n";
    foliate(balls).dump(os, 129);
    res.files.push_back(phi);

    const double s = spread(per), tol = cfg.tolerance("energy_spread");
    if (!(s <= tol)) fail(res, fmt::format("energy/(1+N) max/min {:.4g} <= {}", s, tol));
    res.summary = fmt::format("{} instances, energy/(1+N) max/min {:.4g}", counts.size(), s);
    return res;
}

RunResult run_competitor(const ExperimentConfig& cfg, const fs::path& out) {
    RunResult res;
    const auto s = gb_setup(cfg.params);
    std::vector<int> ns = cfg.resolutions;
    if (ns.empty()) ns = {513, 1025};
    const auto seeds = instance_seeds(cfg.seed, static_cast<int>(ns.size()));
    Table t{{"n", "h", "C_hat", "null_lagrangian", "max_principle", "burgers_change", "sup_curl_lambda_eps",
             "support_violations"},
            {}};
    for (std::size_t k = 0; k < ns.size(); ++k) {
        const auto r = competitor_row(s, ns[k], seeds[k]);
        if (!r.max_principle) fail(res, fmt::format("maximum principle at n = {}", r.n));
        if (!std::isfinite(r.C_hat)) fail(res, fmt::format("C_hat finite at n = {}", r.n));
        t.rows.push_back({std::to_string(r.n), num(r.h), num(r.C_hat), num(r.null_lagrangian),
                          r.max_principle ? "1" : "0", num(r.burgers_change), num(r.sup_curl_lambda_eps),
                          std::to_string(r.support_violations)});
    }
    write_table(out / "competitor", cfg, t, res);
    res.summary = fmt::format("{} resolutions, eps {:.6g}", ns.size(), s.p.epsilon);
    return res;
}

RunResult run_density_trace(const ExperimentConfig& cfg, const fs::path& out) {
    RunResult res;
    const auto s = gb_setup(cfg.params);
    std::vector<int> ns = cfg.resolutions;
    if (ns.empty()) ns = {257};
    const double noise = cfg.tolerance("tau_noise");
    for (int n : ns) {
        const auto A = sample_gradient(s.gb.u, Grid2{n, s.p.L});
        const auto rec = density_trace(A, s.gb.cores, s.p, {0.0, 0.0}, s.p.L / 4, kDelta0, cfg.levels);
        Table t{{"k", "tau_k", "n_k", "sum_radii", "C_hat"}, {}};
        for (std::size_t k = 0; k < rec.size(); ++k) {
            const auto& r = rec[k];
            if (k > 0 && !(r.tau_k <= rec[k - 1].tau_k * (1 + noise)))
                fail(res, fmt::format("tau_k non-increasing at k = {}, n = {}", r.k, n));
            if (!std::isfinite(r.C_hat)) fail(res, fmt::format("C_hat finite at k = {}, n = {}", r.k, n));
            t.rows.push_back({std::to_string(r.k), num(r.tau_k), std::to_string(r.n_k), num(r.sum_radii), num(r.C_hat)});
        }
        write_table(out / fmt::format("density_trace_{}", n), cfg, t, res);
    }
    res.summary = fmt::format("{} traces, K = {}", ns.size(), cfg.levels);
    return res;
}

}  // namespace

double ExperimentConfig::tolerance(const std::string& name) const {
    if (const auto it = tolerances.find(name); it != tolerances.end()) return it->second;
    return kTolerances.at(experiment).at(name);
}

std::string usage() {
    std::ostringstream os;
    os << "usage: rsd <experiment> --config <path> [--out <dir>] [--seed <u64>]\n\n"
          "experiments:\n"
          "  gb-scan          alphas, params            tolerances: ratio_spread (4)\n"
          "  coverings-suite  seed, instances\n"
          "  foliate-demo     seed, counts, resolutions tolerances: energy_spread (3)\n"
          "  competitor       seed, params, resolutions\n"
          "  density-trace    params, resolutions, levels  tolerances: tau_noise (0)\n\n"
          "config: a non-empty JSON object with keys experiment, params {epsilon, alpha, L, tau,\n"
          "lambda, ell}, alphas, resolutions, counts, seed, instances, levels, out, tolerances.\n"
          "epsilon 0 selects compatible_epsilon(alpha, L, tau, L/20).\n"
          "exit status: 0 pass, 1 assertion failure, 2 usage error\n";
    return os.str();
}

ExperimentConfig parse_config(const json& j, const std::string& experiment) {
    if (std::find(experiment_names().begin(), experiment_names().end(), experiment) == experiment_names().end())
        throw ConfigError("unknown experiment \"" + experiment + "\"");
    if (!j.is_object()) throw ConfigError("config: expected a JSON object");
    if (j.empty()) throw ConfigError("config: empty");
    ExperimentConfig c;
    c.experiment = experiment;
    for (const auto& [key, v] : j.items()) {
        if (key == "experiment") {
            if (get_as<std::string>(v, key) != experiment)
                throw ConfigError("config: experiment \"" + v.get<std::string>() + "\" given for " + experiment);
        } else if (key == "params") {
            if (!v.is_object()) throw ConfigError("config: params must be an object");
            const std::map<std::string, double Params::*> fields{{"epsilon", &Params::epsilon}, {"alpha", &Params::alpha},
                                                                 {"L", &Params::L},             {"tau", &Params::tau},
                                                                 {"lambda", &Params::lambda},   {"ell", &Params::ell}};
            for (const auto& [pk, pv] : v.items()) {
                const auto it = fields.find(pk);
                if (it == fields.end()) throw ConfigError("config: unknown key params." + pk);
                if (!pv.is_number()) throw ConfigError("config: params." + pk + " must be a number");
                c.params.*(it->second) = pv.get<double>();
            }
        } else if (key == "alphas") {
            c.alphas = get_as<std::vector<double>>(v, key);
        } else if (key == "resolutions") {
            c.resolutions = get_as<std::vector<int>>(v, key);
            for (int n : c.resolutions)
                if (n < 3) throw ConfigError("config: resolutions must be >= 3");
        } else if (key == "counts") {
            c.counts = get_as<std::vector<int>>(v, key);
            for (int n : c.counts)
                if (n < 0) throw ConfigError("config: counts must be >= 0");
        } else if (key == "seed") {
            if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<long long>() < 0))
                throw ConfigError("config: seed must be an unsigned integer");
            c.seed = v.get<std::uint64_t>();
        } else if (key == "instances" || key == "levels") {
            if (!v.is_number_integer() || v.get<long long>() < 1) throw ConfigError("config: " + key + " must be >= 1");
            (key == "instances" ? c.instances : c.levels) = v.get<int>();
        } else if (key == "out") {
            c.out = get_as<std::string>(v, key);
        } else if (key == "tolerances") {
            if (!v.is_object()) throw ConfigError("config: tolerances must be an object");
            const auto& known = kTolerances.at(experiment);
            for (const auto& [tk, tv] : v.items()) {
                if (!known.count(tk)) throw ConfigError("config: unknown tolerance \"" + tk + "\" for " + experiment);
                if (!tv.is_number()) throw ConfigError("config: tolerance " + tk + " must be a number");
                c.tolerances[tk] = tv.get<double>();
            }
        } else {
            throw ConfigError("config: unknown key \"" + key + "\"");
        }
    }
    return c;
}

RunResult run(const ExperimentConfig& cfg, const fs::path& out) {
    fs::create_directories(out);
    if (cfg.experiment == "gb-scan") return run_gb_scan(cfg, out);
    if (cfg.experiment == "coverings-suite") return run_coverings_suite(cfg, out);
    if (cfg.experiment == "foliate-demo") return run_foliate_demo(cfg, out);
    if (cfg.experiment == "competitor") return run_competitor(cfg, out);
    if (cfg.experiment == "density-trace") return run_density_trace(cfg, out);
    throw ConfigError("unknown experiment \"" + cfg.experiment + "\"");
}

PolyCurve star_polygon(SplitMix64& g, Vec2 c, double rmin, double rmax, int nv) {
    std::vector<double> th(static_cast<std::size_t>(nv));
    for (auto& t : th) t = g.uniform(0.0, 2.0 * M_PI);
    std::sort(th.begin(), th.end());
    PolyCurve p;
    for (double t : th) {
        const double r = g.uniform(rmin, rmax);
        p.vertices.push_back(c + Vec2{r * std::cos(t), r * std::sin(t)});
    }
    return p;
}

GbSetup gb_setup(const Params& p) {
    GbSetup s;
    s.p = p;
    if (!(s.p.epsilon > 0.0)) s.p.epsilon = compatible_epsilon(p.alpha, p.L, p.tau, p.L / 20);
    s.gb = compose_tile(s.p);
    s.core = s.gb.cores.balls[s.gb.cores.balls.size() / 2].center;
    return s;
}

CompetitorRow competitor_row(const GbSetup& s, int n, std::uint64_t seed) {
    const Params& p = s.p;
    const double H = s.gb.frame.H, le = p.lambda * p.epsilon;
    const Grid2 g{n, p.L};
    CompetitorRow r;
    r.n = n;
    r.h = g.h();
    const auto A = sample_gradient(s.gb.u, g);
    const auto O = RegionMask::from(g, [&](Vec2 x) {
        const double d = norm(x - s.core);
        return d > 0.54 * H && d < 1.2 * H;
    });
    const auto hs = hodge_split(A);
    const auto hc = harmonic_competitor(A, O);
    r.C_hat = hc.C_hat;
    r.null_lagrangian = null_lagrangian_check(A, hc.field, O);

    r.max_principle = true;
    for (std::size_t c = 0; c < 2; ++c) {
        double lo = INFINITY, hi = -INFINITY;
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i)
                if (O.at(i, j) && !O.interior(i, j)) {
                    lo = std::min(lo, hs.u[c].at(i, j));
                    hi = std::max(hi, hs.u[c].at(i, j));
                }
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i)
                if (O.interior(i, j) && !(hc.u_h[c].at(i, j) >= lo && hc.u_h[c].at(i, j) <= hi)) r.max_principle = false;
    }

    SplitMix64 gen(seed);
    for (int t = 0; t < 20; ++t) {
        const auto gam = star_polygon(gen, s.core, 0.6 * H, 1.14 * H, 12);
        r.burgers_change =
            std::max(r.burgers_change, norm(line_integral(A, gam) - line_integral(hc.field, gam)) / (p.tau * p.epsilon));
    }

    r.sup_curl_lambda_eps = std::nan("");
    if (g.h() <= le / 8) {
        const auto m = mollified_stats(s, A);
        r.sup_curl_lambda_eps = m.sup_curl_lambda_eps;
        r.support_violations = m.support_violations;
    }
    return r;
}

MollifiedStats mollified_stats(const GbSetup& s, const MatrixField& A) {
    const Grid2& g = A.grid;
    const double le = s.p.lambda * s.p.epsilon, tol = default_curl_tol(s.p, g);
    const auto curl = curl_fd(mollified_competitor(A, s.gb.cores, s.p));
    MollifiedStats m;
    double sup = 0.0;
    for (int j = 0; j < g.n; ++j)
        for (int i = 0; i < g.n; ++i) {
            const double v = std::max(std::abs(curl[0].at(i, j)), std::abs(curl[1].at(i, j)));
            if (s.gb.cores.in_dilated(g.node(i, j), 3 * le))
                sup = std::max(sup, v);
            else if (v > tol)
                ++m.support_violations;
        }
    m.sup_curl_lambda_eps = sup * le;
    return m;
}

FoliateRow foliate_row(std::uint64_t seed, int N, int grid_n) {
    const auto balls = testing::foliation_instance(seed, N);
    const auto f = foliate(balls);
    FoliateRow r;
    r.N = N;
    r.delta0 = f.delta0;
    r.delta1 = f.delta1;
    r.delta2 = f.delta2;
    r.sites = static_cast<int>(f.sites.size());
    r.cut_length = f.cut_length;
    r.lipschitz_bound = f.lipschitz_bound();
    r.energy = foliation_energy(f, balls, grid_n);
    r.boundary_failure = testing::check_boundary(f);
    r.plateau_failure = testing::check_plateaus(f, balls);
    return r;
}

std::vector<std::uint64_t> instance_seeds(std::uint64_t seed, int count) {
    SplitMix64 g(seed);
    std::vector<std::uint64_t> s(static_cast<std::size_t>(count));
    for (auto& x : s) x = g();
    return s;
}

}  // namespace rsd::cli
