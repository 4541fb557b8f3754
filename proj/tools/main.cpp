#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "experiments.hpp"

namespace {

constexpr int kUsage = 2;

int usage_error(const std::string& msg) {
    if (!msg.empty()) std::cerr << "rsd: " << msg << "\n";
    std::cerr << rsd::cli::usage();
    return kUsage;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"grain-boundary experiments"};
    std::string experiment, config;
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
    app.add_option("experiment", experiment)->required()->check(CLI::IsMember(rsd::cli::experiment_names()));
    app.add_option("--config", config)->required();
    app.add_option("--out", out);
    app.add_option("--seed", seed);
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        std::cout << rsd::cli::usage();
        return 0;
    } catch (const CLI::ParseError& e) {
        return usage_error(e.what());
    }

    std::ifstream in(config);
    if (!in) return usage_error("cannot read " + config);
    std::stringstream text;
    text << in.rdbuf();
    if (text.str().find_first_not_of(" \t\r\n") == std::string::npos) return usage_error("empty config");

    rsd::cli::ExperimentConfig cfg;
    try {
        cfg = rsd::cli::parse_config(nlohmann::json::parse(text.str()), experiment);
    } catch (const nlohmann::json::parse_error& e) {
        return usage_error(std::string("config is not JSON: ") + e.what());
    } catch (const rsd::cli::ConfigError& e) {
        return usage_error(e.what());
    }
    if (seed) cfg.seed = *seed;
    if (out) cfg.out = *out;

    rsd::cli::RunResult res;
    try {
        res = rsd::cli::run(cfg, cfg.out);
    } catch (const rsd::cli::ConfigError& e) {
        return usage_error(e.what());
    } catch (const std::invalid_argument& e) {
        std::cerr << "rsd: invalid configuration: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "rsd: " << experiment << " failed: " << e.what() << "\n";
        return 1;
    }
    std::cout << res.summary << "\n";
    for (const auto& f : res.failures) std::cerr << "assertion failed: " << f << "\n";
    return res.status;
}
