// Compares the serial fitness-evaluation reference against the OpenMP kernel
// on freshly sampled populations and checks that both produce identical
// results.

#include <chrono>
#include <cstdio>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "gramevo/encoding.hpp"
#include "gramevo/engine.hpp"
#include "gramevo/problems.hpp"
#include "gramevo/rng.hpp"

using namespace gramevo;
using clock_type = std::chrono::steady_clock;

namespace {

double ms_since(clock_type::time_point t0) {
    return std::chrono::duration<double, std::milli>(clock_type::now() - t0).count();
}

void bench_problem(const Problem& problem, int population, int max_depth, uint64_t seed) {
    Rng rng(seed);
    std::vector<Derivation> trees;
    trees.reserve(population);
    for (int i = 0; i < population; ++i) {
        ListGenotype<int> geno;
        geno.lists.resize(problem.grammar.nt_count());
        trees.push_back(sge_map(geno, problem.grammar, max_depth, rng));
    }
    std::vector<const Derivation*> ptrs;
    ptrs.reserve(trees.size());
    for (const auto& t : trees) ptrs.push_back(&t);

    auto t0 = clock_type::now();
    std::vector<double> serial = evaluate_serial(ptrs, problem);
    double serial_ms = ms_since(t0);

    t0 = clock_type::now();
    std::vector<double> parallel = evaluate_parallel(ptrs, problem);
    double parallel_ms = ms_since(t0);

    bool identical = serial == parallel;
    double checksum = 0.0;
    for (double f : serial) checksum += f;

    std::printf("%-8s pop=%-5d cases=%-5d serial=%9.2f ms  parallel=%9.2f ms  speedup=%.2fx  %s (checksum %.6g)\n",
                problem.name.c_str(), population, problem.fitness_cases, serial_ms, parallel_ms,
                parallel_ms > 0.0 ? serial_ms / parallel_ms : 0.0,
                identical ? "identical" : "MISMATCH", checksum);
}

}  // namespace

int main() {
#ifdef _OPENMP
    std::printf("OpenMP enabled, max threads %d\n", omp_get_max_threads());
#else
    std::printf("built without OpenMP; both paths run serially\n");
#endif
    bench_problem(make_pagie_problem(), 2000, 10, 42);
    bench_problem(make_parity_problem(), 4000, 10, 43);
    bench_problem(make_multiplexer_problem(), 2000, 10, 44);
    return 0;
}
