#include "cxlag/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>

#include <fmt/format.h>

#include "cxlag/errors.hpp"

namespace cxlag {

namespace {

using nlohmann::json;

const std::set<std::string, std::less<>> suite_names{"variation", "noether", "equivalence", "geometry", "hamiltonian"};

std::string join_path(const std::string &base, const std::string &key)
{
    return base.empty() ? key : base + "." + key;
}

void reject_unknown(const json &obj, const std::string &where, std::initializer_list<std::string_view> allowed)
{
    if (!obj.is_object()) {
        throw SchemaError(where.empty() ? "<root>" : where, "expected an object");
    }
    for (const auto &[key, value] : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw SchemaError(join_path(where, key), "unknown field");
        }
    }
}

double number(const json &v, const std::string &field)
{
    if (!v.is_number()) {
        throw SchemaError(field, "expected a number");
    }
    const double x = v.get<double>();
    if (!std::isfinite(x)) {
        throw SchemaError(field, "must be finite");
    }
    return x;
}

std::size_t count(const json &v, const std::string &field)
{
    if (!v.is_number_integer() || v.get<long long>() < 0) {
        throw SchemaError(field, "expected a non-negative integer");
    }
    return v.get<std::size_t>();
}

std::string text(const json &v, const std::string &field)
{
    if (!v.is_string()) {
        throw SchemaError(field, "expected a string");
    }
    return v.get<std::string>();
}

std::vector<double> vector_of(const json &v, const std::string &field)
{
    if (!v.is_array()) {
        throw SchemaError(field, "expected an array of numbers");
    }
    std::vector<double> out;
    for (std::size_t k = 0; k < v.size(); ++k) {
        out.push_back(number(v[k], fmt::format("{}[{}]", field, k)));
    }
    return out;
}

Interval interval(const json &v, const std::string &field)
{
    const auto xs = vector_of(v, field);
    if (xs.size() != 2 || !(xs[1] > xs[0])) {
        throw SchemaError(field, "expected [lo, hi] with lo < hi");
    }
    return {xs[0], xs[1]};
}

std::uint64_t seed_of(const json &v)
{
    if (v.is_number_unsigned()) {
        return v.get<std::uint64_t>();
    }
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) {
        return static_cast<std::uint64_t>(v.get<std::int64_t>());
    }
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        try {
            std::size_t used = 0;
            const auto value = std::stoull(s, &used, 0);
            if (used == s.size()) {
                return value;
            }
        } catch (const std::exception &) {
        }
    }
    throw SchemaError("seed", "expected a non-negative integer or an integer string such as \"0xC0FFEE\"");
}

void check_expression(const std::string &source, const std::string &field)
{
    try {
        (void)parse(source);
    } catch (const Error &e) {
        throw SchemaError(field, e.what());
    }
}

Verdict verdict_of(const json &v, const std::string &field)
{
    const auto s = text(v, field);
    if (s == "equivalent") {
        return Verdict::equivalent;
    }
    if (s == "not_equivalent") {
        return Verdict::not_equivalent;
    }
    throw SchemaError(field, "expected \"equivalent\" or \"not_equivalent\"");
}

} // namespace

Scenario scenario_from_json(const json &doc)
{
    reject_unknown(doc, "",
                   {"schema_version", "name", "note", "lagrangian", "omega0", "dim", "params", "initial", "integrator",
                    "closure_mass", "kappa0", "seed", "samples", "box", "checks", "equivalence", "noether",
                    "variation", "integrability"});
    for (const char *required : {"schema_version", "name", "lagrangian", "omega0", "initial", "integrator"}) {
        if (!doc.contains(required)) {
            throw SchemaError(required, "missing required field");
        }
    }
    if (!doc["schema_version"].is_number_integer() || doc["schema_version"].get<int>() != schema_version) {
        throw SchemaError("schema_version", fmt::format("must be {}", schema_version));
    }

    Scenario sc;
    sc.name = text(doc["name"], "name");
    if (sc.name.empty()) {
        throw SchemaError("name", "must not be empty");
    }
    if (doc.contains("note")) {
        sc.note = text(doc["note"], "note");
    }
    sc.lagrangian = text(doc["lagrangian"], "lagrangian");
    check_expression(sc.lagrangian, "lagrangian");
    sc.omega0 = number(doc["omega0"], "omega0");
    if (sc.omega0 == 0.0) {
        throw SchemaError("omega0", "must be nonzero");
    }
    if (doc.contains("dim")) {
        sc.dim = count(doc["dim"], "dim");
        if (sc.dim == 0) {
            throw SchemaError("dim", "must be at least 1");
        }
    }
    if (doc.contains("params")) {
        if (!doc["params"].is_object()) {
            throw SchemaError("params", "expected an object of name -> number");
        }
        for (const auto &[key, value] : doc["params"].items()) {
            sc.params[key] = number(value, "params." + key);
        }
    }

    const auto &init = doc["initial"];
    reject_unknown(init, "initial", {"t", "q", "qd", "p"});
    if (init.contains("t")) {
        sc.initial.t = number(init["t"], "initial.t");
    }
    if (!init.contains("q")) {
        throw SchemaError("initial.q", "missing required field");
    }
    sc.initial.q = vector_of(init["q"], "initial.q");
    if (init.contains("qd") == init.contains("p")) {
        throw SchemaError("initial", "give exactly one of qd or p");
    }
    const std::string second = init.contains("qd") ? "qd" : "p";
    auto values = vector_of(init[second], "initial." + second);
    (second == "qd" ? sc.initial.qd : sc.initial.p) = values;
    for (const auto &[field, size] :
         {std::pair{std::string("initial.q"), sc.initial.q.size()}, std::pair{"initial." + second, values.size()}}) {
        if (size != sc.dim) {
            throw SchemaError(field, fmt::format("expected {} value(s)", sc.dim));
        }
    }

    const auto &integ = doc["integrator"];
    reject_unknown(integ, "integrator", {"h", "t_start", "t_end", "max_steps"});
    if (integ.contains("h")) {
        sc.integrator.h = number(integ["h"], "integrator.h");
    }
    if (integ.contains("t_start")) {
        sc.integrator.t_start = number(integ["t_start"], "integrator.t_start");
    } else {
        sc.integrator.t_start = sc.initial.t;
    }
    if (!integ.contains("t_end")) {
        throw SchemaError("integrator.t_end", "missing required field");
    }
    sc.integrator.t_end = number(integ["t_end"], "integrator.t_end");
    if (integ.contains("max_steps")) {
        sc.integrator.max_steps = count(integ["max_steps"], "integrator.max_steps");
    }
    if (!(sc.integrator.h > 0.0)) {
        throw SchemaError("integrator.h", "must be positive");
    }
    if (!(sc.integrator.t_end > sc.integrator.t_start)) {
        throw SchemaError("integrator.t_end", "must exceed t_start");
    }
    if (sc.initial.t != sc.integrator.t_start) {
        throw SchemaError("initial.t", "must equal integrator.t_start");
    }

    if (doc.contains("closure_mass")) {
        sc.closure_mass = vector_of(doc["closure_mass"], "closure_mass");
        if (sc.closure_mass->size() != sc.dim ||
            !std::all_of(sc.closure_mass->begin(), sc.closure_mass->end(), [](double m) { return m > 0.0; })) {
            throw SchemaError("closure_mass", fmt::format("expected {} positive value(s)", sc.dim));
        }
    }
    if (doc.contains("kappa0")) {
        sc.kappa0 = number(doc["kappa0"], "kappa0");
        if (sc.kappa0 == 0.0) {
            throw SchemaError("kappa0", "must be nonzero");
        }
    }
    if (doc.contains("seed")) {
        sc.seed = seed_of(doc["seed"]);
    }
    if (doc.contains("samples")) {
        sc.samples = count(doc["samples"], "samples");
        if (sc.samples < 100) {
            throw SchemaError("samples", "must be at least 100");
        }
    }
    if (doc.contains("box")) {
        const auto &box = doc["box"];
        reject_unknown(box, "box", {"t", "q", "qd"});
        if (box.contains("t")) {
            sc.box.t = interval(box["t"], "box.t");
        }
        if (box.contains("q")) {
            sc.box.q = interval(box["q"], "box.q");
        }
        if (box.contains("qd")) {
            sc.box.qd = interval(box["qd"], "box.qd");
        }
    }
    if (doc.contains("checks")) {
        if (!doc["checks"].is_array()) {
            throw SchemaError("checks", "expected an array of suite names");
        }
        sc.checks.clear();
        for (std::size_t k = 0; k < doc["checks"].size(); ++k) {
            const auto field = fmt::format("checks[{}]", k);
            auto name = text(doc["checks"][k], field);
            if (!suite_names.contains(name)) {
                throw SchemaError(field, fmt::format("unknown suite '{}'", name));
            }
            sc.checks.push_back(std::move(name));
        }
    }
    if (doc.contains("equivalence")) {
        const auto &eq = doc["equivalence"];
        reject_unknown(eq, "equivalence", {"partner", "gauge", "expect"});
        EquivalenceSpec spec;
        if (eq.contains("partner") == eq.contains("gauge")) {
            throw SchemaError("equivalence", "give exactly one of partner or gauge");
        }
        if (eq.contains("partner")) {
            spec.partner = text(eq["partner"], "equivalence.partner");
            check_expression(*spec.partner, "equivalence.partner");
        } else {
            spec.gauge = text(eq["gauge"], "equivalence.gauge");
            check_expression(*spec.gauge, "equivalence.gauge");
        }
        if (eq.contains("expect")) {
            spec.expect = verdict_of(eq["expect"], "equivalence.expect");
        }
        sc.equivalence = spec;
    }
    if (doc.contains("noether")) {
        const auto &no = doc["noether"];
        reject_unknown(no, "noether", {"dq"});
        if (!no.contains("dq") || !no["dq"].is_array() || no["dq"].size() != sc.dim) {
            throw SchemaError("noether.dq", fmt::format("expected {} entries", sc.dim));
        }
        NoetherSpec spec;
        for (std::size_t k = 0; k < sc.dim; ++k) {
            const auto field = fmt::format("noether.dq[{}]", k);
            const auto &v = no["dq"][k];
            if (v.is_number()) {
                spec.dq.push_back(fmt::format("{:.17g}", number(v, field)));
            } else {
                spec.dq.push_back(text(v, field));
                check_expression(spec.dq.back(), field);
            }
        }
        sc.noether = spec;
    }
    if (doc.contains("variation")) {
        const auto &va = doc["variation"];
        reject_unknown(va, "variation", {"epsilons", "modes", "window"});
        if (va.contains("epsilons")) {
            sc.variation.epsilons = vector_of(va["epsilons"], "variation.epsilons");
            if (sc.variation.epsilons.size() < 2 ||
                !std::all_of(sc.variation.epsilons.begin(), sc.variation.epsilons.end(), [](double e) { return e > 0.0; })) {
                throw SchemaError("variation.epsilons", "expected at least two positive amplitudes");
            }
        }
        if (va.contains("modes")) {
            if (!va["modes"].is_array() || va["modes"].empty()) {
                throw SchemaError("variation.modes", "expected a non-empty array of positive integers");
            }
            sc.variation.modes.clear();
            for (std::size_t k = 0; k < va["modes"].size(); ++k) {
                const auto m = count(va["modes"][k], fmt::format("variation.modes[{}]", k));
                if (m == 0) {
                    throw SchemaError(fmt::format("variation.modes[{}]", k), "must be positive");
                }
                sc.variation.modes.push_back(static_cast<int>(m));
            }
        }
        if (va.contains("window")) {
            sc.variation.window = number(va["window"], "variation.window");
            if (!(sc.variation.window > 0.0)) {
                throw SchemaError("variation.window", "must be positive");
            }
        }
    }
    if (doc.contains("integrability")) {
        const auto &list = doc["integrability"];
        if (!list.is_array()) {
            throw SchemaError("integrability", "expected an array of {F, Phi, expect}");
        }
        for (std::size_t k = 0; k < list.size(); ++k) {
            const auto where = fmt::format("integrability[{}]", k);
            reject_unknown(list[k], where, {"F", "Phi", "expect"});
            IntegrabilitySpec spec;
            if (!list[k].contains("F")) {
                throw SchemaError(where + ".F", "missing required field");
            }
            spec.F = text(list[k]["F"], where + ".F");
            check_expression(spec.F, where + ".F");
            spec.Phi = list[k].contains("Phi") ? text(list[k]["Phi"], where + ".Phi") : "0";
            check_expression(spec.Phi, where + ".Phi");
            if (list[k].contains("expect")) {
                const auto e = text(list[k]["expect"], where + ".expect");
                if (e != "pass" && e != "fail") {
                    throw SchemaError(where + ".expect", "expected \"pass\" or \"fail\"");
                }
                spec.expect_pass = e == "pass";
            }
            sc.integrability.push_back(std::move(spec));
        }
    }

    try {
        (void)ComplexLagrangian::from_text(sc.lagrangian, sc.omega0, sc.dim, sc.params);
    } catch (const Error &e) {
        throw SchemaError("lagrangian", e.what());
    }
    return sc;
}

json scenario_to_json(const Scenario &sc)
{
    json doc;
    doc["schema_version"] = schema_version;
    doc["name"] = sc.name;
    if (!sc.note.empty()) {
        doc["note"] = sc.note;
    }
    doc["lagrangian"] = sc.lagrangian;
    doc["omega0"] = sc.omega0;
    doc["dim"] = sc.dim;
    doc["params"] = json::object();
    for (const auto &[k, v] : sc.params) {
        doc["params"][k] = v;
    }
    json init{{"t", sc.initial.t}, {"q", sc.initial.q}};
    if (sc.initial.qd) {
        init["qd"] = *sc.initial.qd;
    }
    if (sc.initial.p) {
        init["p"] = *sc.initial.p;
    }
    doc["initial"] = init;
    doc["integrator"] = {{"h", sc.integrator.h},
                         {"t_start", sc.integrator.t_start},
                         {"t_end", sc.integrator.t_end},
                         {"max_steps", sc.integrator.max_steps}};
    if (sc.closure_mass) {
        doc["closure_mass"] = *sc.closure_mass;
    }
    doc["kappa0"] = sc.kappa0;
    doc["seed"] = fmt::format("{:#x}", sc.seed);
    doc["samples"] = sc.samples;
    doc["box"] = {{"t", {sc.box.t.first, sc.box.t.second}},
                  {"q", {sc.box.q.first, sc.box.q.second}},
                  {"qd", {sc.box.qd.first, sc.box.qd.second}}};
    doc["checks"] = sc.checks;
    if (sc.equivalence) {
        json eq;
        if (sc.equivalence->partner) {
            eq["partner"] = *sc.equivalence->partner;
        }
        if (sc.equivalence->gauge) {
            eq["gauge"] = *sc.equivalence->gauge;
        }
        eq["expect"] = std::string(to_string(sc.equivalence->expect));
        doc["equivalence"] = eq;
    }
    if (sc.noether) {
        doc["noether"] = {{"dq", sc.noether->dq}};
    }
    doc["variation"] = {{"epsilons", sc.variation.epsilons},
                        {"modes", sc.variation.modes},
                        {"window", sc.variation.window}};
    if (!sc.integrability.empty()) {
        json list = json::array();
        for (const auto &spec : sc.integrability) {
            list.push_back({{"F", spec.F}, {"Phi", spec.Phi}, {"expect", spec.expect_pass ? "pass" : "fail"}});
        }
        doc["integrability"] = list;
    }
    return doc;
}

Scenario load_scenario(const std::filesystem::path &path)
{
    std::ifstream in(path);
    if (!in) {
        throw SchemaError("<file>", fmt::format("cannot read {}", path.string()));
    }
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error &e) {
        throw SchemaError("<file>", fmt::format("{}: {}", path.string(), e.what()));
    }
    return scenario_from_json(doc);
}

std::vector<Scenario> bundled_corpus()
{
    const double two_pi = 2.0 * std::numbers::pi;
    std::vector<Scenario> corpus;

    auto base = [](std::string name, std::string lagrangian, Bindings params, double t_end) {
        Scenario sc;
        sc.name = std::move(name);
        sc.lagrangian = std::move(lagrangian);
        sc.params = std::move(params);
        sc.initial.q = {1.0};
        sc.initial.qd = std::vector<double>{0.0};
        sc.integrator = IntegratorConfig{1e-3, 0.0, t_end};
        return sc;
    };

    {
        auto sc = base("inverted_oscillator", "i*0.5*(m*qd^2 - k*q^2)", {{"m", 1.0}, {"k", 1.0}}, 1.0);
        sc.note = "pure-imaginary oscillator; degenerate, closed by the point-particle relation p = m qd";
        sc.closure_mass = std::vector<double>{1.0};
        sc.checks = {"variation", "geometry"};
        corpus.push_back(sc);
    }
    {
        auto sc = base("imaginary_ho", "i*a0*q*qd", {{"a0", 1.0}, {"m", 1.0}, {"k", 1.0}}, two_pi);
        sc.note = "Lc = i a0 q qd with a0 = m w0; regular with mass a0/w0 and qdd = -w0^2 q";
        sc.equivalence = EquivalenceSpec{"0.5*m*qd^2 - 0.5*k*q^2", std::nullopt, Verdict::equivalent};
        corpus.push_back(sc);
    }
    {
        auto sc = base("damped", "0.5*(m*qd^2 - k*q^2) + i*0.5*lam*qd^2", {{"m", 1.0}, {"k", 1.0}, {"lam", 0.1}}, 10.0);
        sc.note = "non-stationary oscillator with a real kinetic term: qdd + w1 qd + w0^2 q = 0, w1 = lam w0 / m";
        sc.equivalence = EquivalenceSpec{std::nullopt, "q^2", Verdict::equivalent};
        corpus.push_back(sc);
    }
    {
        auto sc = base("damped_literal", "i*0.5*(m*qd^2 - k*q^2) + i*0.5*lam*qd^2",
                       {{"m", 1.0}, {"k", 1.0}, {"lam", 0.1}}, 1.0);
        sc.note = "damped oscillator as printed, with the kinetic term imaginary: degenerate (A = 0) and the "
                  "closure p = m qd contradicts its own equation of motion unless lam = 0; kept for reference";
        sc.closure_mass = std::vector<double>{1.0};
        sc.checks = {"variation", "geometry"};
        corpus.push_back(sc);
    }
    {
        auto sc = base("classical_oscillator", "0.5*m*qd^2 - 0.5*k*q^2", {{"m", 1.0}, {"k", 1.0}}, two_pi);
        sc.noether = NoetherSpec{{"1"}};
        corpus.push_back(sc);
    }
    {
        auto sc = base("free_particle", "0.5*m*qd^2", {{"m", 1.0}}, 2.0);
        sc.initial.q = {0.0};
        sc.initial.qd = std::vector<double>{1.0};
        sc.noether = NoetherSpec{{"1"}};
        corpus.push_back(sc);
    }
    {
        auto sc = base("gauge_real", "0.5*m*qd^2 - 0.5*k*q^2", {{"m", 1.0}, {"k", 1.0}}, two_pi);
        sc.note = "adding the real total derivative of Lambda = q^2 + t q leaves the motion unchanged";
        sc.equivalence = EquivalenceSpec{std::nullopt, "q^2 + t*q", Verdict::equivalent};
        sc.integrability = {{"sin(t)", "0", true}, {"t^2", "0", false}, {"q^2", "q^4/12", true}};
        sc.checks = {"equivalence", "geometry"};
        corpus.push_back(sc);
    }
    {
        auto sc = base("gauge_complex", "0.5*m*qd^2 - 0.5*k*q^2", {{"m", 1.0}, {"k", 1.0}}, two_pi);
        sc.note = "an imaginary gauge Lambda = i q shifts the force map by -w0, so the motion changes";
        sc.equivalence = EquivalenceSpec{std::nullopt, "i*q", Verdict::not_equivalent};
        sc.checks = {"equivalence", "geometry"};
        corpus.push_back(sc);
    }
    return corpus;
}

} // namespace cxlag
