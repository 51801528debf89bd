// Command-line experiment runner.
//
//   sheetlab <experiment> [key=value...] [--config FILE] [--out-dir DIR]
//
// Exit codes: 0 all checks passed, 1 configuration error, 2 a check failed.

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include "sheetlab/experiments.hpp"

namespace {

void print_catalog(std::ostream& out) {
    for (const auto& e : sheetlab::experiment_catalog()) {
        out << e.name << "\n    " << e.summary << "\n   ";
        for (const auto& [k, v] : e.defaults) out << ' ' << k << '=' << v;
        out << '\n';
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-parameter SDE experiment runner"};
    std::string experiment;
    std::vector<std::string> overrides;
    std::string config_file;
    std::string out_dir;
    bool list = false;
    app.add_option("experiment", experiment, "experiment name (see --list)");
    app.add_option("overrides", overrides, "key=value settings");
    app.add_option("--config", config_file, "file of key = value lines; command-line settings win");
    app.add_option("--out-dir", out_dir, "directory for the CSV table (default $SHEETLAB_OUTPUT_DIR)");
    app.add_flag("--list", list, "list experiments and their defaults");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }
    if (list) {
        print_catalog(std::cout);
        return 0;
    }
    if (experiment.empty()) {
        std::cerr << "error: no experiment given\n";
        print_catalog(std::cerr);
        return 1;
    }

    try {
        const auto& catalog = sheetlab::experiment_catalog();
        const auto it = std::find_if(catalog.begin(), catalog.end(), [&](const auto& e) { return e.name == experiment; });
        if (it == catalog.end()) throw sheetlab::ConfigError("unknown experiment '" + experiment + "'");

        std::map<std::string, std::string> given;
        if (!config_file.empty()) given = sheetlab::read_config_file(config_file);
        for (const auto& [k, v] : sheetlab::parse_overrides(overrides)) given[k] = v;
        const sheetlab::Params params(it->defaults, given);

        std::filesystem::path target = params.str("out");
        if (target.empty()) {
            if (out_dir.empty())
                if (const char* env = std::getenv("SHEETLAB_OUTPUT_DIR")) out_dir = env;
            if (!out_dir.empty()) target = std::filesystem::path(out_dir) / (experiment + ".csv");
        }

        std::clog << "[sheetlab] running " << experiment << '\n';
        const auto start = std::chrono::steady_clock::now();
        const sheetlab::Table table = sheetlab::run_experiment(experiment, params);
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

        sheetlab::write_table(std::cout, experiment, params, table, wall);
        if (!target.empty()) {
            if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
            std::ofstream file(target);
            if (!file) throw sheetlab::ConfigError("cannot write " + target.string());
            sheetlab::write_table(file, experiment, params, table, wall);
            std::clog << "[sheetlab] wrote " << target.string() << '\n';
        }
        std::clog << "[sheetlab] " << experiment << (table.passed ? " passed" : " FAILED") << " in " << wall << " s\n";
        return table.passed ? 0 : 2;
    } catch (const sheetlab::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 2;
    }
}
