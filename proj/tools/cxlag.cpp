// cxlag: scenario-driven front end.
//
//   cxlag simulate <scenario.json> [-o trajectory.csv]
//   cxlag derive <scenario.json>
//   cxlag check <variation|noether|equivalence|geometry|hamiltonian|all> <scenario.json>... [-o dir]
//   cxlag corpus <dir>
//
// Exit status: 0 ok, 1 schema violation, 2 runtime failure, 3 check failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "cxlag/checks.hpp"
#include "cxlag/errors.hpp"
#include "cxlag/scenario.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int exit_schema = 1;
constexpr int exit_runtime = 2;
constexpr int exit_check = 3;

void write_atomically(const fs::path &target, const std::string &content)
{
    if (target.has_parent_path()) {
        fs::create_directories(target.parent_path());
    }
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw cxlag::Error(fmt::format("cannot write {}", tmp.string()));
        }
        out << content;
        if (!out.flush()) {
            throw cxlag::Error(fmt::format("write to {} failed", tmp.string()));
        }
    }
    fs::rename(tmp, target);
}

int run_simulate(const std::string &file, const std::string &output)
{
    const auto prepared = cxlag::prepare(cxlag::load_scenario(file));
    const auto traj = cxlag::simulate(prepared);
    std::ostringstream csv;
    cxlag::write_csv(traj, csv);
    if (output.empty()) {
        std::cout << csv.str();
    } else {
        write_atomically(output, csv.str());
    }
    return 0;
}

int run_derive(const std::string &file)
{
    std::cout << cxlag::derive_report(cxlag::prepare(cxlag::load_scenario(file)));
    return 0;
}

int run_check(const std::string &suite, const std::vector<std::string> &files, const std::string &output)
{
    std::optional<cxlag::Suite> only;
    if (suite != "all") {
        only = cxlag::parse_suite(suite);
        if (!only) {
            throw cxlag::SchemaError("<suite>", fmt::format("unknown suite '{}'", suite));
        }
    }
    // load every file first so schema problems surface before any work
    std::vector<cxlag::Scenario> scenarios;
    for (const auto &f : files) {
        scenarios.push_back(cxlag::load_scenario(f));
    }
    bool all_passed = true;
    for (const auto &sc : scenarios) {
        const auto prepared = cxlag::prepare(sc);
        const auto results =
            only ? std::vector<cxlag::SuiteResult>{cxlag::run_suite(prepared, *only)} : cxlag::run_all(prepared);
        const auto report = cxlag::render_report(sc, suite, results);
        all_passed = all_passed && cxlag::passed(results);
        if (output.empty()) {
            std::cout << report;
        } else {
            write_atomically(fs::path(output) / fmt::format("{}.{}.txt", sc.name, suite), report);
        }
    }
    return all_passed ? 0 : exit_check;
}

int run_corpus(const std::string &dir)
{
    for (const auto &sc : cxlag::bundled_corpus()) {
        const auto path = fs::path(dir) / (sc.name + ".json");
        write_atomically(path, cxlag::scenario_to_json(sc).dump(2) + "\n");
        std::cout << path.string() << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Complex Lagrangian mechanics toolkit"};
    app.require_subcommand(1);

    std::string file;
    std::string output;
    std::string suite;
    std::vector<std::string> files;
    std::string dir;

    auto *simulate = app.add_subcommand("simulate", "integrate a scenario and write its trajectory as CSV");
    simulate->add_option("scenario", file, "scenario JSON file")->required();
    simulate->add_option("-o,--output", output, "CSV path (stdout when omitted)");

    auto *derive = app.add_subcommand("derive", "print momentum, force, mass and classification");
    derive->add_option("scenario", file, "scenario JSON file")->required();

    auto *check = app.add_subcommand("check", "run a verification suite");
    check->add_option("suite", suite, "variation, noether, equivalence, geometry, hamiltonian or all")->required();
    check->add_option("scenarios", files, "scenario JSON files")->required();
    check->add_option("-o,--output", output, "directory for per-scenario reports (stdout when omitted)");

    auto *corpus = app.add_subcommand("corpus", "write the bundled scenarios as JSON files");
    corpus->add_option("dir", dir, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        return app.exit(e);
    }

    try {
        if (*simulate) {
            return run_simulate(file, output);
        }
        if (*derive) {
            return run_derive(file);
        }
        if (*check) {
            return run_check(suite, files, output);
        }
        return run_corpus(dir);
    } catch (const cxlag::SchemaError &e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_schema;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_runtime;
    }
}
