#include <benchmark/benchmark.h>
#include <omp.h>

#include <random>

#include "jetstab/dno.hpp"
#include "jetstab/paradiff.hpp"

using namespace jetstab;

namespace {

RealField random_field(const FourierGrid& g, unsigned seed, double amp, int kmax) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    Spectrum s(g);
    for (int xi = 1; xi <= kmax; ++xi) {
        cplx c(nd(rng), nd(rng));
        c *= amp / (xi * xi);
        s.set(xi, c);
        s.set(-xi, std::conj(c));
    }
    return from_spectrum(s);
}

GriddedSymbol field_symbol(const FourierGrid& g) {
    RealField a = random_field(g, 7, 1.0, 8);
    return GriddedSymbol::from_values(g, [&](int xi, cvec& out) {
        for (int j = 0; j < g.size(); ++j) out[j] = a.v[j] * std::pow(1.0 + xi * xi, 0.25);
    });
}

// range(0): grid size, range(1): 1 = OpenMP, 0 = serial
void BM_paradiff_apply(benchmark::State& state) {
    FourierGrid g(int(state.range(0)));
    auto a = field_symbol(g);
    auto u = to_spectrum(random_field(g, 11, 1.0, g.size() / 3));
    const bool parallel = state.range(1) != 0;
    for (auto _ : state) benchmark::DoNotOptimize(paradiff_apply(a, u, Quantization::raw, parallel));
}
BENCHMARK(BM_paradiff_apply)->ArgsProduct({{128, 256, 512}, {0, 1}})->Unit(benchmark::kMillisecond);

void BM_solve_dno(benchmark::State& state) {
    FourierGrid g(64);
    DispersionParams p(0.51);
    DnoOptions o;
    o.n_y = int(state.range(0));
    o.parallel = state.range(1) != 0;
    FlattenedEllipticProblem prob(random_field(g, 3, 0.05, 10), random_field(g, 5, 1.0, 10), p, o);
    for (auto _ : state) benchmark::DoNotOptimize(solve_dno(prob));
}
BENCHMARK(BM_solve_dno)->ArgsProduct({{64, 256}, {0, 1}})->Unit(benchmark::kMillisecond);

}  // namespace

int main(int argc, char** argv) {
    benchmark::Initialize(&argc, argv);
    benchmark::AddCustomContext("omp_max_threads", std::to_string(omp_get_max_threads()));
    benchmark::RunSpecifiedBenchmarks();
    benchmark::Shutdown();
    return 0;
}
