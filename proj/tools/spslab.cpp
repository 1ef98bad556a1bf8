#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include <spslab/spslab.hpp>

namespace {

std::size_t workers_from_env(std::size_t fallback)
{
    char const* env = std::getenv("SPSLAB_WORKERS");
    if (!env || !*env) return fallback;
    char* end = nullptr;
    long const v = std::strtol(env, &end, 10);
    spslab::require(*end == '\0' && v >= 1, std::string("SPSLAB_WORKERS must be a positive integer, got '") + env + "'");
    return static_cast<std::size_t>(v);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Numerical lab for the Schroedinger-Poisson-Slater energy functional"};
    std::string scenario, config_path, out_dir;
    std::uint64_t seed = 0;
    std::size_t workers = 1;
    bool seed_set = false, out_set = false;

    app.add_option("scenario", scenario, "Scenario to run")
        ->required()
        ->check(CLI::IsMember(spslab::scenario_names()));
    app.add_option("--config", config_path, "JSON config file")->required()->check(CLI::ExistingFile);
    auto* out_opt = app.add_option("--out", out_dir, "Output directory (report.json, rows.csv, fields/)");
    auto* seed_opt = app.add_option("--seed", seed, "Base RNG seed; run k uses seed + k");
    app.add_option("--workers", workers, "Worker threads (SPSLAB_WORKERS overrides)")->check(CLI::PositiveNumber);
    CLI11_PARSE(app, argc, argv);
    seed_set = seed_opt->count() > 0;
    out_set = out_opt->count() > 0;

    try {
        std::ifstream is(config_path);
        spslab::require(bool(is), "cannot open config '" + config_path + "'");
        spslab::Json doc;
        try {
            doc = spslab::Json::parse(is);
        } catch (spslab::Json::exception const& e) {
            throw spslab::Error("invalid JSON in '" + config_path + "': " + e.what());
        }
        auto cfg = spslab::ScenarioConfig::from_json(scenario, doc);
        if (seed_set) cfg.seed = seed;
        if (out_set) cfg.out_dir = out_dir;
        if (cfg.out_dir.empty()) cfg.out_dir = "spslab-out/" + scenario;
        cfg.workers = workers_from_env(app.count("--workers") ? workers : cfg.workers);

        auto const rep = spslab::run(cfg);
        for (auto const& v : rep.verdicts) std::cout << '[' << v.status << "] " << v.name << ": " << v.detail << '\n';
        std::cout << "rows: " << rep.rows.size() << ", report: " << cfg.out_dir << "/report.json\n";
        return rep.exit_code();
    } catch (std::exception const& e) {
        std::cerr << "spslab: error: " << e.what() << '\n';
        return 1;
    }
}
