// Serial reference vs OpenMP path for the sampled kernels.

#include <benchmark/benchmark.h>

#include "cxlag/equivalence.hpp"
#include "cxlag/geometry.hpp"
#include "cxlag/parallel.hpp"
#include "cxlag/sampling.hpp"

using namespace cxlag;

namespace {

Execution mode(const benchmark::State &state) { return state.range(0) == 0 ? Execution::serial : Execution::parallel; }

void label(benchmark::State &state)
{
    state.SetLabel(state.range(0) == 0 ? "serial" : "parallel");
}

void BM_EvaluateBatch(benchmark::State &state)
{
    const auto e = parse("0.5*(qd^2 - q^2) + i*0.05*qd^2*cos(t) + sin(q*qd)*exp(-0.1*t)");
    const Program prog(e, SymbolLayout({"t", "q", "qd"}));
    const auto n = static_cast<std::size_t>(state.range(1));
    const auto rows = stratified_points({{-2, 2}, {-2, 2}, {-2, 2}}, n, 1);
    std::vector<double> flat;
    for (const auto &r : rows) {
        flat.insert(flat.end(), r.begin(), r.end());
    }
    std::vector<complex> out(n);
    for (auto _ : state) {
        evaluate_batch(prog, flat, 3, out, mode(state));
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n));
    label(state);
}

void BM_Equivalence(benchmark::State &state)
{
    const auto a = ComplexLagrangian::from_text("0.5*qd^2*(1 + 0.2*q^2) - q^4 + i*0.05*q*qd^2", 1.0);
    const LagrangianPair pair(a, gauge_add(a, parse("sin(q)*t^2")));
    const auto samples = sample_states(1, {}, static_cast<std::size_t>(state.range(1)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(eom_equivalent(pair, samples, mode(state)));
    }
    label(state);
}

void BM_GeometryIdentity(benchmark::State &state)
{
    const auto lag = ComplexLagrangian::from_text("0.5*qd^2*(1 + 0.2*q^2) - q^4 + i*0.05*q*qd^2", 1.0);
    const auto eom = derive_eom(lag, {0.0, {0.1}, {1.0}});
    const auto samples = sample_states(1, {}, static_cast<std::size_t>(state.range(1)));
    for (auto _ : state) {
        const double worst = sweep_max(
            samples.size(),
            [&](std::size_t k) { return max_deviation(lie_theta(eom, samples[k]), rhs_pairing_form(lag, samples[k])); },
            mode(state));
        benchmark::DoNotOptimize(worst);
    }
    label(state);
}

} // namespace

BENCHMARK(BM_EvaluateBatch)->ArgsProduct({{0, 1}, {1 << 12, 1 << 16}});
BENCHMARK(BM_Equivalence)->ArgsProduct({{0, 1}, {256, 4096}});
BENCHMARK(BM_GeometryIdentity)->ArgsProduct({{0, 1}, {256, 4096}});

BENCHMARK_MAIN();
