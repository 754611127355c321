#pragma once

// Scenario files: JSON with "schema_version": 1.  Unknown fields are rejected; every failure names
// the offending field through SchemaError.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cxlag/dynamics.hpp"
#include "cxlag/equivalence.hpp"

namespace cxlag {

inline constexpr int schema_version = 1;

struct InitialState {
    double t = 0.0;
    std::vector<double> q;
    std::optional<std::vector<double>> qd;
    std::optional<std::vector<double>> p;
};

struct EquivalenceSpec {
    std::optional<std::string> partner; ///< second Lagrangian text
    std::optional<std::string> gauge;   ///< Lambda(q, t); the partner is Lc + dLambda/dt
    Verdict expect = Verdict::equivalent;
};

struct NoetherSpec {
    std::vector<std::string> dq; ///< one expression per coordinate, in t and q
};

struct VariationSpec {
    std::vector<double> epsilons{1e-2, 1e-3, 1e-4};
    std::vector<int> modes{1, 2, 3, 4, 5};
    double window = 1.0; ///< length of the variation interval starting at t_start
};

struct IntegrabilitySpec {
    std::string F;
    std::string Phi;
    bool expect_pass = true;
};

struct Scenario {
    std::string name;
    std::string note;
    std::string lagrangian;
    double omega0 = 1.0;
    std::size_t dim = 1;
    Bindings params;
    InitialState initial;
    IntegratorConfig integrator;
    std::optional<std::vector<double>> closure_mass;
    double kappa0 = 1.0;
    std::uint64_t seed = default_seed;
    std::size_t samples = 256;
    SampleBox box;
    std::vector<std::string> checks{"variation", "noether", "equivalence", "geometry", "hamiltonian"};
    std::optional<EquivalenceSpec> equivalence;
    std::optional<NoetherSpec> noether;
    VariationSpec variation;
    std::vector<IntegrabilitySpec> integrability;
};

/// Throws SchemaError.
Scenario scenario_from_json(const nlohmann::json &doc);
nlohmann::json scenario_to_json(const Scenario &sc);

/// Throws SchemaError (including unreadable files and malformed JSON).
Scenario load_scenario(const std::filesystem::path &path);

/// The bundled scenarios: the three oscillators of the complex theory (with both readings of the
/// damped one), the classical oscillator, the free particle and two gauge pairs.
std::vector<Scenario> bundled_corpus();

} // namespace cxlag
