// Throughput comparison: serial reference loops vs the chunked OpenMP
// reductions, plus a consistency check between the two.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "effdim/autodiff.hpp"
#include "effdim/data.hpp"
#include "effdim/model_zoo.hpp"
#include "effdim/rng.hpp"

using namespace effdim;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

template <class F>
double time_reps(int reps, F&& f) {
    f();  // warm-up
    auto t0 = Clock::now();
    for (int r = 0; r < reps; ++r) f();
    return seconds_since(t0) / reps;
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::fabs(a[i] - b[i]));
    return m;
}

}  // namespace

int main() {
#ifdef _OPENMP
    std::printf("threads: %d\n", omp_get_max_threads());
#else
    std::printf("threads: 1 (no OpenMP)\n");
#endif

    ModelSpec spec;
    spec.family = Family::mlp;
    spec.width_multiplier = 4.0;
    spec.input_shape = {2};
    spec.class_count = 2;
    spec.init_seed = 1;
    Network net = build_model(spec);
    Dataset ds = generate_two_moons(2000, 0.12, 2);
    auto ptrs = ds.pointers();
    const std::size_t P = net.param_count();
    std::printf("model: mlp w4 (%zu params), batch %zu\n", P, ptrs.size());

    std::vector<double> g_par(P), g_ser(P), hv_par(P), hv_ser(P), v(P);
    Rng rng(3);
    for (auto& x : v) x = rng.normal();

    const int reps = 20;
    double t_gp = time_reps(reps, [&] { batch_grad(net, ptrs, g_par); });
    double t_gs = time_reps(reps, [&] { batch_grad_serial(net, ptrs, g_ser); });
    std::printf("batch_grad   parallel %8.3f ms   serial %8.3f ms   speedup "
                "%.2fx   max |diff| %.3g\n",
                1e3 * t_gp, 1e3 * t_gs, t_gs / t_gp,
                max_abs_diff(g_par, g_ser));

    double t_hp = time_reps(reps, [&] { batch_hvp(net, ptrs, v, hv_par); });
    double t_hs =
        time_reps(reps, [&] { batch_hvp_serial(net, ptrs, v, hv_ser); });
    std::printf("batch_hvp    parallel %8.3f ms   serial %8.3f ms   speedup "
                "%.2fx   max |diff| %.3g\n",
                1e3 * t_hp, 1e3 * t_hs, t_hs / t_hp,
                max_abs_diff(hv_par, hv_ser));
    return 0;
}
