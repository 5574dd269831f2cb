#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "gramevo/problems.hpp"
#include "gramevo/rng.hpp"

namespace gramevo {

inline constexpr double kWorstFitness = std::numeric_limits<double>::infinity();

enum class Algorithm { ge, pge, sge, copsge };

Algorithm algorithm_from_name(std::string_view name);
std::string_view algorithm_name(Algorithm a);

struct Parameters {
    int population_size = 1000;
    int generations = 50;
    int elitism_count = 100;
    double mutation_rate = 0.05;
    double crossover_rate = 0.90;
    int tournament_size = 3;
    int genotype_size = 128;             // GE / PGE
    int max_depth = 10;                  // SGE / Co-PSGE
    double grammar_mutation_prob = 0.05; // Co-PSGE, per non-terminal
    double grammar_mutation_sd = 0.50;   // Co-PSGE
    double learning_factor = 0.01;       // PGE
    uint64_t seed = 0;
    bool parallel_eval = true;           // OpenMP fitness evaluation; results are identical either way

    void validate() const;  // throws std::invalid_argument on out-of-range values
};

struct GenerationRecord {
    int generation = 0;
    double best_fitness = kWorstFitness;
    double mean_fitness = kWorstFitness;  // over valid individuals only
    int invalid_count = 0;
    std::string best_phenotype;
};

struct RunRecord {
    std::string algorithm;
    std::string problem;
    uint64_t seed = 0;
    Parameters params;
    std::vector<GenerationRecord> generations;  // length = params.generations + 1
};

// Read-only per-generation snapshot for observers (invariant checks, grammar
// drift analysis). grammars is non-null only for Co-PSGE.
struct GenerationView {
    int generation = 0;
    std::span<const double> fitness;
    std::span<const std::string> phenotypes;
    const std::vector<Pcfg>* grammars = nullptr;
};

struct EvolveHooks {
    std::function<void(const GenerationView&)> on_generation;
};

// Fitness evaluation kernels over derivation trees (a null entry marks an
// invalid individual and scores kWorstFitness). Evaluation is pure, so the
// OpenMP path returns exactly the serial reference's results; the benchmark
// target compares their throughput.
std::vector<double> evaluate_serial(std::span<const Derivation* const> trees, const Problem& problem);
std::vector<double> evaluate_parallel(std::span<const Derivation* const> trees, const Problem& problem);

// Samples k individuals uniformly with replacement and returns the index of
// the lowest fitness; ties go to the earliest sampled.
template <RandomSource R>
int tournament_select(std::span<const double> fitness, int k, R& rng) {
    int best = rng.uniform_int(static_cast<int>(fitness.size()));
    for (int i = 1; i < k; ++i) {
        int c = rng.uniform_int(static_cast<int>(fitness.size()));
        if (fitness[c] < fitness[best]) best = c;
    }
    return best;
}

// Runs the full generational loop for one seeded configuration. Generation 0
// is the random initial population; each later generation copies the
// elitism_count best verbatim and refills the rest through tournament
// selection, crossover, mutation and re-mapping. Deterministic for a fixed
// seed regardless of evaluation parallelism.
RunRecord evolve(Algorithm algorithm, const Problem& problem, const Parameters& params,
                 const EvolveHooks& hooks = {});

}  // namespace gramevo
