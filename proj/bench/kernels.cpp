// Serial reference vs OpenMP kernels of the FD solver on the default box.

#include <map>

#include <benchmark/benchmark.h>

#include "ousc/hjb_fd.hpp"

using namespace ousc;

namespace {

struct Setup {
    FdOperator op;
    std::vector<double> v;
    explicit Setup(int n) {
        const ModelParams p;
        const CostSpec c = QuadraticCost{};
        const Grid2D g = auto_box(p, c, -3, 3, n, n);
        op = build_operator(p, c, g);
        v.resize(static_cast<std::size_t>(n) * n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                v[op.idx(i, j)] = v_hat(p, c, g.x(i), g.r(j), VhatWhich::value);
    }
};

const Setup& setup(int n) {
    static std::map<int, Setup> cache;
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, Setup(n)).first;
    return it->second;
}

template <double (*F)(const FdOperator&, const std::vector<double>&)>
void residual(benchmark::State& st) {
    const Setup& s = setup(static_cast<int>(st.range(0)));
    for (auto _ : st) benchmark::DoNotOptimize(F(s.op, s.v));
}

template <double (*F)(const FdOperator&, std::vector<double>&, double)>
void sweep(benchmark::State& st) {
    const Setup& s = setup(static_cast<int>(st.range(0)));
    std::vector<double> v = s.v;
    for (auto _ : st) benchmark::DoNotOptimize(F(s.op, v, 1.2));
}

}  // namespace

BENCHMARK(residual<vi_residual_serial>)->Name("vi_residual/serial")->Arg(201)->Arg(801);
BENCHMARK(residual<vi_residual_parallel>)->Name("vi_residual/parallel")->Arg(201)->Arg(801);
BENCHMARK(sweep<psor_sweep_serial>)->Name("psor_sweep/serial")->Arg(201)->Arg(801);
BENCHMARK(sweep<psor_sweep_parallel>)->Name("psor_sweep/parallel")->Arg(201)->Arg(801);

BENCHMARK_MAIN();
