// singlab: scenario runner for singular elliptic problems with measure data.
//
//   singlab run <config.json> [--out DIR] [--levels n1,n2,...] [--quiet]
//   singlab capacity <config.json> [--out DIR] [--quiet]
//   singlab validate [--quiet]
//
// Exit codes: 0 success, 2 configuration error, 3 solver failure (partial
// artifacts written), 4 check failure (artifacts complete, failures listed).

#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "singlab/errors.hpp"
#include "singlab/scenario.hpp"

namespace {

std::vector<double> parse_levels(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        try {
            out.push_back(std::stod(tok));
        } catch (const std::exception&) {
            throw singlab::ConfigError("--levels", "not a number: '" + tok + "'");
        }
    }
    if (out.empty()) throw singlab::ConfigError("--levels", "empty list");
    return out;
}

struct NullBuffer : std::streambuf {
    int overflow(int c) override { return c; }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical laboratory for -div(A grad u) = mu/u^gamma with "
                 "measure data"};
    app.require_subcommand(1);

    std::string config_path, out_dir, levels_csv;
    bool quiet = false;

    CLI::App* run = app.add_subcommand("run", "run a scenario config");
    run->add_option("config", config_path, "scenario JSON file")->required();
    run->add_option("--out", out_dir, "output directory");
    run->add_option("--levels", levels_csv, "override the ladder schedule (comma list)");
    run->add_flag("--quiet", quiet, "suppress progress output");

    CLI::App* cap = app.add_subcommand("capacity", "run only the capacity block");
    cap->add_option("config", config_path, "scenario JSON file")->required();
    cap->add_option("--out", out_dir, "output directory");
    cap->add_flag("--quiet", quiet, "suppress progress output");

    CLI::App* val = app.add_subcommand("validate", "run the oracle self-test suite");
    val->add_flag("--quiet", quiet, "suppress per-check output");

    CLI11_PARSE(app, argc, argv);

    NullBuffer null_buffer;
    std::ostream null_stream(&null_buffer);
    std::ostream& log = quiet ? null_stream : std::cout;

    try {
        if (val->parsed()) {
            return singlab::run_validation_suite(log);
        }
        singlab::ScenarioConfig cfg = singlab::parse_scenario_file(config_path);
        if (cap->parsed()) {
            singlab::ScenarioOutcome out =
                singlab::run_capacity_study(cfg, out_dir, quiet ? nullptr : &log);
            log << "wrote " << out.summary_path << "\n";
            return out.status;
        }
        if (!levels_csv.empty()) {
            cfg.schedule = parse_levels(levels_csv);
            if (cfg.schedule.size() < 2)
                throw singlab::ConfigError("--levels", "needs at least two levels");
        }
        singlab::ScenarioOutcome out =
            singlab::run_scenario(cfg, out_dir, quiet ? nullptr : &log);
        log << "wrote " << out.summary_path << "\n";
        return out.status;
    } catch (const singlab::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const singlab::SolveError& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
