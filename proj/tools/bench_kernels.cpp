// Times the OpenMP kernels against their serial reference on field-sized
// grids and checks that both produce bit-identical results.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include <omp.h>

#include <CLI11.hpp>

#include "sff/grid.hpp"
#include "sff/kernels.hpp"
#include "sff/rng.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double time_ms(const std::function<void()>& fn, int iters) {
    fn(); // warm up
    const auto start = Clock::now();
    for (int i = 0; i < iters; ++i) fn();
    const std::chrono::duration<double, std::milli> elapsed = Clock::now() - start;
    return elapsed.count() / iters;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"serial vs OpenMP kernel benchmark"};
    int size = 512;
    int iters = 20;
    app.add_option("--size", size, "Grid side length in cells");
    app.add_option("--iters", iters, "Timed repetitions per kernel");
    CLI11_PARSE(app, argc, argv);

    const sff::MollifierKernel kernel = sff::mollifier_kernel(1.5, 0.5);
    sff::Rng rng(7);
    std::vector<std::uint8_t> occ(static_cast<std::size_t>(size) * size);
    for (auto& c : occ) c = rng.uniform01() < 0.15 ? 1 : 0;
    std::vector<double> a(occ.size()), b(occ.size());
    for (std::size_t i = 0; i < occ.size(); ++i) {
        a[i] = rng.uniform01();
        b[i] = rng.uniform01();
    }
    std::vector<double> out_serial(occ.size()), out_par(occ.size());
    const sff::kernels::Region full{0, 0, size - 1, size - 1};

    std::printf("grid %dx%d, kernel %dx%d, %d threads available\n", size, size, kernel.side(),
                kernel.side(), omp_get_max_threads());

    const double conv_serial = time_ms(
        [&] {
            sff::kernels::serial::convolve(size, size, occ.data(), kernel.taps.data(),
                                           kernel.half, full, out_serial.data());
        },
        iters);
    const double conv_par = time_ms(
        [&] {
            sff::kernels::par::convolve(size, size, occ.data(), kernel.taps.data(), kernel.half,
                                        full, out_par.data());
        },
        iters);
    bool same = out_serial == out_par;
    std::printf("convolve  : serial %8.3f ms   openmp %8.3f ms   speedup %5.2fx   %s\n",
                conv_serial, conv_par, conv_serial / conv_par,
                same ? "bit-identical" : "MISMATCH");

    double dot_serial_value = 0.0, dot_par_value = 0.0;
    const double dot_serial = time_ms(
        [&] {
            dot_serial_value =
                sff::kernels::serial::masked_dot(size, a.data(), b.data(), full, 0.25);
        },
        iters);
    const double dot_par = time_ms(
        [&] { dot_par_value = sff::kernels::par::masked_dot(size, a.data(), b.data(), full, 0.25); },
        iters);
    same = dot_serial_value == dot_par_value;
    std::printf("masked_dot: serial %8.3f ms   openmp %8.3f ms   speedup %5.2fx   %s\n",
                dot_serial, dot_par, dot_serial / dot_par, same ? "bit-identical" : "MISMATCH");
    return 0;
}
