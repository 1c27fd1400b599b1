// Serial reference against OpenMP version for each parallel kernel.

#include "esa/diffeo.hpp"
#include "esa/kernels.hpp"
#include "esa/registration.hpp"
#include "esa/rng.hpp"
#include "esa/synthetic.hpp"

#include <benchmark/benchmark.h>

using namespace esa;

namespace {

Eigen::Matrix3Xd random_unit(int n, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::Matrix3Xd p(3, n);
    for (int k = 0; k < n; ++k) p.col(k) = Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal()).normalized();
    return p;
}

void BM_SampleField(benchmark::State& state, bool parallel) {
    const int n = static_cast<int>(state.range(0));
    const SphericalGrid g(n, n);
    const Eigen::Matrix3Xd field = gen_surface(ShapeFamily::bumpy_sphere(0.1, 3), g).points();
    const Eigen::Matrix3Xd at = random_unit(g.size(), 1);
    Eigen::Matrix3Xd out;
    for (auto _ : state) {
        if (parallel) kernels::sample_field(g, field, at, out);
        else kernels::sample_field_serial(g, field, at, out);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * g.size());
}

void BM_FlatDot(benchmark::State& state, bool parallel) {
    const int n = static_cast<int>(state.range(0));
    const SphericalGrid g(n, n);
    const Eigen::Matrix3Xd a = random_unit(g.size(), 2), b = random_unit(g.size(), 3);
    for (auto _ : state) {
        benchmark::DoNotOptimize(parallel ? kernels::flat_dot(g, a, b) : kernels::flat_dot_serial(g, a, b));
    }
    state.SetItemsProcessed(state.iterations() * g.size());
}

void BM_PairwiseDistances(benchmark::State& state, bool parallel) {
    const int n = static_cast<int>(state.range(0));
    Rng rng(4);
    Eigen::MatrixXd s(3 * 32 * 32, n);
    for (Eigen::Index i = 0; i < s.size(); ++i) s.data()[i] = rng.normal();
    for (auto _ : state) {
        Eigen::MatrixXd d = parallel ? kernels::pairwise_distances(s) : kernels::pairwise_distances_serial(s);
        benchmark::DoNotOptimize(d.data());
    }
}

void BM_RegisterBatch(benchmark::State& state, bool parallel) {
    const SphericalGrid g(16, 16);
    const Surface ref = gen_surface(ShapeFamily::bumpy_sphere(0.1, 3), g);
    std::vector<Surface> moving;
    for (int i = 0; i < static_cast<int>(state.range(0)); ++i) moving.push_back(pullback(ref, random_diffeo(g, 10 + i, 0.2, 3)));
    RegistrationOptions o;
    o.reparam.max_iters = 20;
    for (auto _ : state) {
        auto r = parallel ? register_batch(ref, moving, o) : register_batch_serial(ref, moving, o);
        benchmark::DoNotOptimize(r.data());
    }
}

} // namespace

BENCHMARK_CAPTURE(BM_SampleField, serial, false)->Arg(64)->Arg(128);
BENCHMARK_CAPTURE(BM_SampleField, openmp, true)->Arg(64)->Arg(128);
BENCHMARK_CAPTURE(BM_FlatDot, serial, false)->Arg(64)->Arg(128);
BENCHMARK_CAPTURE(BM_FlatDot, openmp, true)->Arg(64)->Arg(128);
BENCHMARK_CAPTURE(BM_PairwiseDistances, serial, false)->Arg(40);
BENCHMARK_CAPTURE(BM_PairwiseDistances, openmp, true)->Arg(40);
BENCHMARK_CAPTURE(BM_RegisterBatch, serial, false)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_RegisterBatch, openmp, true)->Arg(4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
