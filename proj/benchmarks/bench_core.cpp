#include <benchmark/benchmark.h>

#include "ncerg/cz.hpp"
#include "ncerg/ergodic.hpp"
#include "ncerg/rc.hpp"

using namespace ncerg;

namespace {

OperatorSequence make_sequence(int window, std::uint64_t seed) {
    AlgebraShape shape{{2}, {1.0}};
    Rng rng(seed);
    OperatorSequence f(shape, window);
    for (long pos = 0; pos < (1L << window); ++pos)
        if (rng.uniform() < 0.6)
            f.set(pos, random_element(shape, RandomKind::positive, rng));
    if (f.empty()) f.set(0, random_element(shape, RandomKind::positive, rng));
    return f;
}

} // namespace

static void BM_EigHermitian(benchmark::State& state) {
    const int d = static_cast<int>(state.range(0));
    AlgebraShape shape{{d}, {1.0}};
    Element h = random_element(shape, RandomKind::hermitian, 7);
    for (auto _ : state) {
        EigenSystem es = eig_hermitian(h);
        benchmark::DoNotOptimize(es.eigenvalues);
    }
}
BENCHMARK(BM_EigHermitian)->Arg(2)->Arg(4)->Arg(8)->Arg(16);

static void BM_CzDecompose(benchmark::State& state) {
    const int window = static_cast<int>(state.range(0));
    OperatorSequence f = make_sequence(window, 11);
    for (auto _ : state) {
        CZResult cz = cz_decompose(f, 1.0);
        benchmark::DoNotOptimize(cz.good);
    }
}
BENCHMARK(BM_CzDecompose)->Arg(3)->Arg(4)->Arg(5)->Arg(6);

static void BM_SumNormOptimizer(benchmark::State& state) {
    AlgebraShape shape{{2}, {1.0}};
    Rng rng(13);
    ElementSequence seq{shape, {}};
    for (int i = 0; i < static_cast<int>(state.range(0)); ++i)
        seq.items.push_back(random_element(shape, RandomKind::generic, rng));
    RcNormOptions opt;
    opt.restarts = 2;
    opt.iterations = 300;
    opt.dual_samples = 50;
    for (auto _ : state) {
        RcNormResult r = rc_norm(seq, PExp::finite(1.5), opt);
        benchmark::DoNotOptimize(r.report.value);
    }
}
BENCHMARK(BM_SumNormOptimizer)->Arg(2)->Arg(4)->Arg(8);

static void BM_KhintchineExact(benchmark::State& state) {
    AlgebraShape shape{{2}, {1.0}};
    Rng rng(17);
    ElementSequence seq{shape, {}};
    for (int i = 0; i < static_cast<int>(state.range(0)); ++i)
        seq.items.push_back(random_element(shape, RandomKind::generic, rng));
    for (auto _ : state) {
        NormReport r = khintchine_norm(seq, PExp::finite(3.0), KhintchineMode::exact_mode());
        benchmark::DoNotOptimize(r.value);
    }
}
BENCHMARK(BM_KhintchineExact)->Arg(6)->Arg(10)->Arg(12);

static void BM_ErgodicSweep(benchmark::State& state) {
    AlgebraShape shape{{3}, {1.0}};
    SuperOperator t = make_unitary_conjugation(random_element(shape, RandomKind::unitary, 23));
    Element x = random_element(shape, RandomKind::generic, 29);
    NestedSequence seq;
    seq.indices = {1, 2, 4, 8, 16, 32, 64, static_cast<long>(state.range(0))};
    for (auto _ : state) {
        std::vector<Element> d = ergodic_differences(t, x, seq);
        benchmark::DoNotOptimize(d);
    }
}
BENCHMARK(BM_ErgodicSweep)->Arg(128)->Arg(512)->Arg(1024);

BENCHMARK_MAIN();
