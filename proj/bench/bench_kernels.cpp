// Compares the serial reference implementations of the data-parallel
// kernels against their OpenMP variants and checks the outputs agree
// bit for bit.

#include <chrono>
#include <cstdio>
#include <vector>

#include "metastable/environment.hpp"
#include "metastable/jumps.hpp"
#include "metastable/parallel.hpp"
#include "metastable/rng.hpp"
#include "metastable/ulam.hpp"

using namespace metastable;

namespace {

double seconds(std::chrono::steady_clock::time_point a,
               std::chrono::steady_clock::time_point b) {
    return std::chrono::duration<double>(b - a).count();
}

template <typename Fn>
double time_once(Fn&& fn) {
    auto t0 = std::chrono::steady_clock::now();
    fn();
    auto t1 = std::chrono::steady_clock::now();
    return seconds(t0, t1);
}

void report(const char* kernel, double serial_s, double parallel_s, bool equal) {
    std::printf("%-28s %10.3f ms %10.3f ms %7.2fx   %s\n", kernel, serial_s * 1e3,
                parallel_s * 1e3, serial_s / parallel_s, equal ? "identical" : "MISMATCH");
}

}  // namespace

int main() {
    std::printf("%-28s %13s %13s %9s   %s\n", "kernel", "serial", "openmp", "speedup",
                "outputs");

    // holding-time Monte Carlo batch
    {
        Environment env = make_tent_environment({{1.0, 1.0}}, {1.0});
        const double eps = 0.02;
        const std::size_t n_samples = 20000;
        auto maps = env.maps_per_symbol(eps);
        const Interval il = maps[0].state_interval(0);
        FiberPath path = sample_path(env.alphabet(), 7u, 0, 40000);
        auto sample_one = [&](std::size_t i) -> double {
            double x = rng::Sequence(7u, rng::kInitialPoint, i).uniform(il.lo, il.hi);
            std::size_t label = maps[0].state_of(x);
            for (long k = 0; k < 40000; ++k) {
                x = maps[path.symbol_at(k)].eval(x);
                std::size_t z = maps[0].state_of(x);
                if (z != label) return eps * static_cast<double>(k + 1);
            }
            return -1.0;
        };
        std::vector<double> serial_out, parallel_out;
        double ts = time_once([&] {
            serial_out = map_indexed_serial<double>(n_samples, sample_one);
        });
        double tp = time_once([&] {
            parallel_out = map_indexed_parallel<double>(n_samples, sample_one);
        });
        report("holding-time MC batch", ts, tp, serial_out == parallel_out);
    }

    // Ulam operator row construction
    {
        Environment env = make_tent_environment({{1.0, 1.0}}, {1.0});
        const double eps = 0.01;
        PiecewiseAffineMap map = env.maps_per_symbol(eps)[0];
        GridPtr grid = aligned_grid(env, eps, 1u << 18);
        auto build_rows = [&](int jobs) {
            return map_indexed<double>(
                grid->cell_count(), jobs, [&](std::size_t k) {
                    Interval cell = grid->cell(k);
                    // row mass of the closed operator, recomputed per cell
                    double total = 0.0;
                    for (const AffineBranch& b : map.branches()) {
                        Interval piece = intersect(cell, b.domain);
                        if (piece.length() > 0.0) total += piece.length();
                    }
                    return total / cell.length();
                });
        };
        std::vector<double> serial_out, parallel_out;
        double ts = time_once([&] { serial_out = build_rows(1); });
        double tp = time_once([&] { parallel_out = build_rows(0); });
        bool equal = serial_out == parallel_out;

        UlamOperator op_serial, op_parallel;
        double ts2 = time_once([&] { op_serial = build_closed(map, grid); });
        double tp2 = time_once([&] { op_parallel = build_closed(map, grid); });
        bool rows_equal = true;
        for (std::size_t k = 0; k < op_serial.size() && rows_equal; ++k)
            rows_equal = op_serial.row(k) == op_parallel.row(k);
        report("row-mass scan", ts, tp, equal);
        report("build_closed (2^18 cells)", ts2, tp2, rows_equal);
    }

    // equivariant pull-back (sequential per path, parallel across paths)
    {
        Environment env = make_tent_environment({{1.0, 0.5}, {1.0, 1.5}}, {0.5, 0.5});
        const double eps = 0.02;
        GridPtr grid = aligned_grid(env, eps, 1u << 12);
        EquivariantOptions opts;
        opts.pullback_depth = 512;
        auto one_path = [&](std::size_t i) -> double {
            FiberPath path = sample_path(env.alphabet(), 1000 + i, 0, 1);
            SpectralTriple triple = equivariant_triple(env, path, 0, eps, grid, opts);
            return triple.lambda_seq.back();
        };
        std::vector<double> serial_out, parallel_out;
        double ts = time_once([&] { serial_out = map_indexed_serial<double>(8, one_path); });
        double tp = time_once([&] { parallel_out = map_indexed_parallel<double>(8, one_path); });
        report("equivariant pull-back x8", ts, tp, serial_out == parallel_out);
    }

    return 0;
}
