// Compares the serial reference paths against the OpenMP-parallel ones and
// checks that the results agree bit for bit.
#include <chrono>
#include <cmath>
#include <cstdio>

#include "bellopt/bell_expression.hpp"
#include "bellopt/chain.hpp"
#include "bellopt/seesaw.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

double now_s() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

int hardware_jobs() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

} // namespace

int main() {
    const int jobs = hardware_jobs();
    std::printf("threads available: %d\n\n", jobs);

    {
        bellopt::SeesawConfig cfg;
        cfg.dim = 6;
        cfg.restarts = 64;
        cfg.seed = 7;
        cfg.jobs = 1;
        const double t0 = now_s();
        const auto serial = bellopt::run_seesaw<double>(bellopt::builtin_i3322(), cfg);
        const double t_serial = now_s() - t0;
        cfg.jobs = jobs;
        const double t1 = now_s();
        const auto parallel = bellopt::run_seesaw<double>(bellopt::builtin_i3322(), cfg);
        const double t_parallel = now_s() - t1;
        std::printf("see-saw restarts (i3322, n=6, 64 restarts)\n");
        std::printf("  serial   %.3fs  value %.12f restart %d\n", t_serial, serial.value,
                    serial.restart_index);
        std::printf("  parallel %.3fs  value %.12f restart %d  speedup %.2fx\n",
                    t_parallel, parallel.value, parallel.restart_index,
                    t_serial / t_parallel);
        const bool same = serial.value == parallel.value &&
                          serial.restart_index == parallel.restart_index;
        std::printf("  results identical: %s\n\n", same ? "yes" : "NO");
        if (!same) return 1;
    }

    {
        std::vector<int> ns;
        for (int n = 21; n <= 141; n += 2) ns.push_back(n);
        const std::vector<bellopt::chain::Branch> branches = {
            bellopt::chain::Branch::zero, bellopt::chain::Branch::minus_one};
        const double t0 = now_s();
        const auto serial = bellopt::chain::sweep(ns, branches, {}, 1);
        const double t_serial = now_s() - t0;
        const double t1 = now_s();
        const auto parallel = bellopt::chain::sweep(ns, branches, {}, jobs);
        const double t_parallel = now_s() - t1;
        bool same = serial.size() == parallel.size();
        for (std::size_t i = 0; same && i < serial.size(); ++i)
            same = serial[i].value == parallel[i].value;
        std::printf("chain sweep (n = 21..141 odd, both branches)\n");
        std::printf("  serial   %.3fs\n", t_serial);
        std::printf("  parallel %.3fs  speedup %.2fx\n", t_parallel,
                    t_serial / t_parallel);
        std::printf("  results identical: %s\n", same ? "yes" : "NO");
        if (!same) return 1;
    }
    return 0;
}
