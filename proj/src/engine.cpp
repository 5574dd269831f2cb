#include "gramevo/engine.hpp"

#include <algorithm>
#include <numeric>
#include <optional>

#include "gramevo/variation.hpp"

namespace gramevo {

Algorithm algorithm_from_name(std::string_view name) {
    if (name == "ge") return Algorithm::ge;
    if (name == "pge") return Algorithm::pge;
    if (name == "sge") return Algorithm::sge;
    if (name == "copsge") return Algorithm::copsge;
    throw std::invalid_argument("unknown algorithm name: " + std::string(name));
}

std::string_view algorithm_name(Algorithm a) {
    switch (a) {
        case Algorithm::ge: return "ge";
        case Algorithm::pge: return "pge";
        case Algorithm::sge: return "sge";
        case Algorithm::copsge: return "copsge";
    }
    return "?";
}

void Parameters::validate() const {
    auto require = [](bool ok, const char* msg) {
        if (!ok) throw std::invalid_argument(msg);
    };
    require(population_size >= 1, "population_size must be >= 1");
    require(generations >= 0, "generations must be >= 0");
    require(elitism_count >= 0 && elitism_count < population_size,
            "elitism_count must be in [0, population_size)");
    require(mutation_rate >= 0.0 && mutation_rate <= 1.0, "mutation_rate must be in [0, 1]");
    require(crossover_rate >= 0.0 && crossover_rate <= 1.0, "crossover_rate must be in [0, 1]");
    require(tournament_size >= 1, "tournament_size must be >= 1");
    require(genotype_size >= 1, "genotype_size must be >= 1");
    require(max_depth >= 1, "max_depth must be >= 1");
    require(grammar_mutation_prob >= 0.0 && grammar_mutation_prob <= 1.0,
            "grammar_mutation_prob must be in [0, 1]");
    require(grammar_mutation_sd > 0.0, "grammar_mutation_sd must be > 0");
    require(learning_factor >= 0.0 && learning_factor < 1.0, "learning_factor must be in [0, 1)");
}

std::vector<double> evaluate_serial(std::span<const Derivation* const> trees, const Problem& problem) {
    std::vector<double> fitness(trees.size(), kWorstFitness);
    for (size_t i = 0; i < trees.size(); ++i)
        if (trees[i]) fitness[i] = problem.fitness(*trees[i]);
    return fitness;
}

std::vector<double> evaluate_parallel(std::span<const Derivation* const> trees,
                                      const Problem& problem) {
    std::vector<double> fitness(trees.size(), kWorstFitness);
    const int n = static_cast<int>(trees.size());
#pragma omp parallel for schedule(dynamic, 4)
    for (int i = 0; i < n; ++i)
        if (trees[i]) fitness[i] = problem.fitness(*trees[i]);
    return fitness;
}

namespace {

// Gaussian codon mutation uses the published N(0, 0.5).
constexpr double kGaussianCodonSd = 0.5;

template <class Ind>
void evaluate_population(std::vector<Ind>& pop, int from, const Problem& problem, bool parallel) {
    std::vector<const Derivation*> trees;
    trees.reserve(pop.size() - from);
    for (size_t i = from; i < pop.size(); ++i)
        trees.push_back(pop[i].tree ? &*pop[i].tree : nullptr);
    std::vector<double> fitness =
        parallel ? evaluate_parallel(trees, problem) : evaluate_serial(trees, problem);
    for (size_t i = from; i < pop.size(); ++i) pop[i].fitness = fitness[i - from];
}

template <class Ind>
int best_index(const std::vector<Ind>& pop) {
    int best = 0;
    for (int i = 1; i < static_cast<int>(pop.size()); ++i)
        if (pop[i].fitness < pop[best].fitness) best = i;
    return best;
}

// ---------------------------------------------------------------------------
// Algorithm policies: create / crossover / mutate / map plus the per-
// generation grammar hook. The shared loop below is the single place the
// generational structure lives.

struct GePolicy {
    struct Ind {
        IntGenotype geno;
        std::optional<Derivation> tree;
        std::string pheno;
        double fitness = kWorstFitness;
    };
    static constexpr bool kPersonalGrammar = false;

    const Parameters& P;
    Pcfg grammar;

    Ind create(Rng& rng) {
        Ind ind;
        ind.geno = ge_create(P.genotype_size, rng);
        map(ind, rng);
        return ind;
    }
    Ind crossover(const Ind& a, const Ind& b, Rng& rng) {
        Ind child;
        child.geno = one_point_crossover(a.geno, b.geno, rng).first;
        return child;
    }
    void mutate(Ind& ind, Rng& rng) {
        ind.geno = replace_int_codons(std::move(ind.geno), P.mutation_rate, rng);
    }
    void map(Ind& ind, Rng&) {
        ind.tree = ge_map(ind.geno, grammar);
        ind.pheno = ind.tree ? phenotype_string(*ind.tree, grammar) : std::string();
    }
    void end_of_generation(const std::vector<Ind>&, const Ind&, int) {}
};

struct PgePolicy {
    struct Ind {
        RealGenotype geno;
        std::optional<Derivation> tree;
        std::string pheno;
        double fitness = kWorstFitness;
    };
    static constexpr bool kPersonalGrammar = false;

    const Parameters& P;
    Pcfg grammar;  // shared, updated every generation

    Ind create(Rng& rng) {
        Ind ind;
        ind.geno = pge_create(P.genotype_size, rng);
        map(ind, rng);
        return ind;
    }
    Ind crossover(const Ind& a, const Ind& b, Rng& rng) {
        Ind child;
        child.geno = one_point_crossover(a.geno, b.geno, rng).first;
        return child;
    }
    void mutate(Ind& ind, Rng& rng) {
        ind.geno = replace_real_codons(std::move(ind.geno), P.mutation_rate, rng);
    }
    void map(Ind& ind, Rng&) {
        ind.tree = pge_map(ind.geno, grammar);
        ind.pheno = ind.tree ? phenotype_string(*ind.tree, grammar) : std::string();
    }
    // Probabilities move toward the expansions of the best individual of the
    // generation on the first update and the best overall on the next,
    // alternating.
    void end_of_generation(const std::vector<Ind>& pop, const Ind& best_overall, int generation) {
        const Ind& source = (generation - 1) % 2 == 0 ? pop[best_index(pop)] : best_overall;
        if (!source.tree) return;
        grammar = update_grammar_probabilities(std::move(grammar),
                                               count_rule_usage(*source.tree, grammar),
                                               P.learning_factor);
    }
};

struct SgePolicy {
    struct Ind {
        ListGenotype<int> geno;
        std::optional<Derivation> tree;
        std::string pheno;
        double fitness = kWorstFitness;
    };
    static constexpr bool kPersonalGrammar = false;

    const Parameters& P;
    Pcfg grammar;

    Ind create(Rng& rng) {
        Ind ind;
        ind.geno.lists.resize(grammar.nt_count());
        map(ind, rng);
        return ind;
    }
    Ind crossover(const Ind& a, const Ind& b, Rng& rng) {
        Ind child;
        child.geno = mask_crossover(a.geno, b.geno, rng);
        return child;
    }
    void mutate(Ind& ind, Rng& rng) {
        ind.geno = production_index_mutation(std::move(ind.geno), P.mutation_rate, grammar, rng);
    }
    void map(Ind& ind, Rng& rng) {
        ind.tree = sge_map(ind.geno, grammar, P.max_depth, rng);
        ind.pheno = phenotype_string(*ind.tree, grammar);
    }
    void end_of_generation(const std::vector<Ind>&, const Ind&, int) {}
};

struct CopsgePolicy {
    struct Ind {
        ListGenotype<double> geno;
        Pcfg grammar;  // personal, co-evolves with the genotype
        std::optional<Derivation> tree;
        std::string pheno;
        double fitness = kWorstFitness;
    };
    static constexpr bool kPersonalGrammar = true;

    const Parameters& P;
    Pcfg uniform_grammar;  // every individual starts from this copy

    Ind create(Rng& rng) {
        Ind ind;
        ind.grammar = uniform_grammar;
        ind.geno.lists.resize(uniform_grammar.nt_count());
        map(ind, rng);
        return ind;
    }
    Ind crossover(const Ind& a, const Ind& b, Rng& rng) {
        Ind child;
        child.geno = mask_crossover(a.geno, b.geno, rng);
        child.grammar = fitter_parent_grammar(a.grammar, a.fitness, b.grammar, b.fitness);
        return child;
    }
    // Codon mutation first, then the grammar's own probability mutation; the
    // re-map afterwards sees both changes.
    void mutate(Ind& ind, Rng& rng) {
        ind.geno = gaussian_codon_mutation(std::move(ind.geno), P.mutation_rate, kGaussianCodonSd, rng);
        ind.grammar = mutate_grammar(std::move(ind.grammar), P.grammar_mutation_prob,
                                     P.grammar_mutation_sd, rng);
    }
    void map(Ind& ind, Rng& rng) {
        ind.tree = copsge_map(ind.geno, ind.grammar, P.max_depth, rng);
        ind.pheno = phenotype_string(*ind.tree, ind.grammar);
    }
    void end_of_generation(const std::vector<Ind>&, const Ind&, int) {}
};

// ---------------------------------------------------------------------------

template <class Policy>
RunRecord run_loop(Policy& pol, Algorithm algo, const Problem& problem, const Parameters& P,
                   const EvolveHooks& hooks) {
    using Ind = typename Policy::Ind;
    Rng master(P.seed);
    const int n = P.population_size;
    const int elites = P.elitism_count;

    RunRecord rec;
    rec.algorithm = std::string(algorithm_name(algo));
    rec.problem = problem.name;
    rec.seed = P.seed;
    rec.params = P;

    std::vector<Ind> pop;
    pop.reserve(n);
    for (int i = 0; i < n; ++i) {
        Rng r = master.substream(0, i);
        pop.push_back(pol.create(r));
    }
    evaluate_population(pop, 0, problem, P.parallel_eval);

    auto record = [&](int generation) {
        GenerationRecord gr;
        gr.generation = generation;
        int best = best_index(pop);
        gr.best_fitness = pop[best].fitness;
        gr.best_phenotype = pop[best].tree ? pop[best].pheno : "INVALID";
        double sum = 0.0;
        int valid = 0;
        for (const auto& ind : pop) {
            if (!ind.tree) continue;
            sum += ind.fitness;
            ++valid;
        }
        gr.invalid_count = n - valid;
        gr.mean_fitness = valid > 0 ? sum / valid : kWorstFitness;
        rec.generations.push_back(std::move(gr));

        if (hooks.on_generation) {
            std::vector<double> fitness(n);
            std::vector<std::string> phenotypes(n);
            for (int i = 0; i < n; ++i) {
                fitness[i] = pop[i].fitness;
                phenotypes[i] = pop[i].pheno;
            }
            GenerationView view;
            view.generation = generation;
            view.fitness = fitness;
            view.phenotypes = phenotypes;
            std::vector<Pcfg> grammars;
            if constexpr (Policy::kPersonalGrammar) {
                grammars.reserve(n);
                for (const auto& ind : pop) grammars.push_back(ind.grammar);
                view.grammars = &grammars;
            }
            hooks.on_generation(view);
        }
    };

    record(0);
    Ind best_overall = pop[best_index(pop)];

    for (int g = 1; g <= P.generations; ++g) {
        std::vector<double> fitness(n);
        for (int i = 0; i < n; ++i) fitness[i] = pop[i].fitness;

        std::vector<int> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int x, int y) {
            return fitness[x] != fitness[y] ? fitness[x] < fitness[y] : x < y;
        });

        std::vector<Ind> next;
        next.reserve(n);
        for (int e = 0; e < elites; ++e) next.push_back(pop[order[e]]);

        for (int slot = elites; slot < n; ++slot) {
            Rng r = master.substream(g, slot);
            int first = tournament_select<Rng>(fitness, P.tournament_size, r);
            Ind child;
            if (r.uniform01() < P.crossover_rate) {
                int second = tournament_select<Rng>(fitness, P.tournament_size, r);
                child = pol.crossover(pop[first], pop[second], r);
            } else {
                child = pop[first];  // cloned winner
            }
            pol.mutate(child, r);
            pol.map(child, r);
            next.push_back(std::move(child));
        }
        pop = std::move(next);
        evaluate_population(pop, elites, problem, P.parallel_eval);

        int best = best_index(pop);
        if (pop[best].fitness < best_overall.fitness) best_overall = pop[best];
        pol.end_of_generation(pop, best_overall, g);
        record(g);
    }
    return rec;
}

}  // namespace

RunRecord evolve(Algorithm algorithm, const Problem& problem, const Parameters& params,
                 const EvolveHooks& hooks) {
    params.validate();
    switch (algorithm) {
        case Algorithm::ge: {
            GePolicy pol{params, problem.grammar};
            return run_loop(pol, algorithm, problem, params, hooks);
        }
        case Algorithm::pge: {
            PgePolicy pol{params, problem.grammar};
            set_uniform_probabilities(pol.grammar);
            return run_loop(pol, algorithm, problem, params, hooks);
        }
        case Algorithm::sge: {
            SgePolicy pol{params, problem.grammar};
            return run_loop(pol, algorithm, problem, params, hooks);
        }
        case Algorithm::copsge: {
            CopsgePolicy pol{params, problem.grammar};
            set_uniform_probabilities(pol.uniform_grammar);
            return run_loop(pol, algorithm, problem, params, hooks);
        }
    }
    throw std::invalid_argument("unknown algorithm");
}

}  // namespace gramevo
