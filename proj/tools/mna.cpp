// mna — batch front end for the mixed norm toolkit.
//
//   mna <subcommand> --config experiment.json [--out DIR] [--threads N]
//                    [--seed N]
//
// Subcommands: weight, lattice, norm, synth, analyze, decompose, carleson,
// hardy, verify. Each writes a JSON report (plus CSVs where applicable)
// under the output directory. Exit codes: 0 success, 2 config validation
// failure, 3 numerical abort. Set MNA_LOG=info|debug for progress output.
#include <fstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mna/cli.hpp"
#include "mna/parallel.hpp"

int main(int argc, char** argv) {
    CLI::App app{"mixed norm spaces: atomic decomposition and Carleson "
                 "measure toolkit"};
    app.require_subcommand(1);

    const std::vector<std::string> subs = {"weight",    "lattice", "norm",
                                           "synth",     "analyze", "decompose",
                                           "carleson",  "hardy",   "verify"};
    std::string config_path;
    std::string out_dir = "out";
    unsigned threads = mna::default_threads();
    std::uint64_t seed = 1;

    for (const auto& name : subs) {
        auto* sc = app.add_subcommand(name);
        sc->add_option("--config", config_path, "experiment config (JSON)");
        sc->add_option("--out", out_dir, "output directory");
        sc->add_option("--threads", threads, "worker thread budget");
        sc->add_option("--seed", seed, "seed for randomized estimators");
    }

    CLI11_PARSE(app, argc, argv);
    const std::string sub = app.get_subcommands().front()->get_name();

    nlohmann::json config = nlohmann::json::object();
    if (!config_path.empty()) {
        std::ifstream is(config_path);
        if (!is) {
            std::fprintf(stderr, "cannot open config %s\n", config_path.c_str());
            return mna::cli::exit_config;
        }
        try {
            is >> config;
        } catch (const std::exception& e) {
            std::fprintf(stderr, "config parse error: %s\n", e.what());
            return mna::cli::exit_config;
        }
    } else if (sub != "verify") {
        std::fprintf(stderr, "subcommand '%s' requires --config\n", sub.c_str());
        return mna::cli::exit_config;
    }

    mna::cli::RunOptions opt;
    opt.out_dir = out_dir;
    opt.threads = threads;
    opt.seed = seed;
    return mna::cli::run(sub, config, opt);
}
