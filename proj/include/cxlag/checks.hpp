#pragma once

// Verification suites run against a scenario, and the plain-text reports they produce.
// Every report starts with a header naming the scenario and seed and ends with
//   RESULT pass|fail max_residual=<value>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cxlag/dynamics.hpp"
#include "cxlag/scenario.hpp"

namespace cxlag {

enum class Suite { variation, noether, equivalence, geometry, hamiltonian };

inline constexpr Suite all_suites[] = {Suite::variation, Suite::noether, Suite::equivalence, Suite::geometry,
                                       Suite::hamiltonian};

std::string_view to_string(Suite s);
std::optional<Suite> parse_suite(std::string_view name);

/// A scenario with its Lagrangian and equations of motion built.
struct Prepared {
    Scenario scenario;
    ComplexLagrangian lagrangian;
    EomSystem eom;
    MechState initial; ///< qd resolved from p (Hamiltonian inverse) or from the closure when needed
};

/// Throws the runtime errors of the lagrangian module.
Prepared prepare(const Scenario &sc);

/// Lagrangian-side trajectory over the scenario horizon.
Trajectory simulate(const Prepared &p);

/// Same flow over [t_start, t_end] instead of the scenario horizon.
Trajectory simulate(const Prepared &p, double t_start, double t_end);

enum class Status { pass, fail, skipped };

struct SuiteResult {
    Suite suite = Suite::variation;
    Status status = Status::skipped;
    double max_residual = 0.0;
    std::vector<std::string> lines;
};

SuiteResult run_suite(const Prepared &p, Suite suite);

/// Suites listed in the scenario's `checks` field.
std::vector<SuiteResult> run_all(const Prepared &p);

bool passed(const std::vector<SuiteResult> &results);

std::string render_report(const Scenario &sc, std::string_view label, const std::vector<SuiteResult> &results);

/// Momentum, force and mass in symbolic and numeric form plus the classification.
std::string derive_report(const Prepared &p);

} // namespace cxlag
