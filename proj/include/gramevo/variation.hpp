#pragma once

#include <algorithm>
#include <utility>

#include "gramevo/encoding.hpp"
#include "gramevo/grammar.hpp"
#include "gramevo/rng.hpp"

namespace gramevo {

// ---------------------------------------------------------------------------
// Fixed-length genotype operators (GE / PGE)

// Cut point uniform in [1, len-1]; genotypes shorter than 2 pass through
// unchanged. Both children keep the parents' length.
template <typename T, RandomSource R>
std::pair<std::vector<T>, std::vector<T>> one_point_crossover(const std::vector<T>& a,
                                                              const std::vector<T>& b, R& rng) {
    if (a.size() < 2) return {a, b};
    int cut = 1 + rng.uniform_int(static_cast<int>(a.size()) - 1);
    std::vector<T> c1(a.begin(), a.begin() + cut);
    c1.insert(c1.end(), b.begin() + cut, b.end());
    std::vector<T> c2(b.begin(), b.begin() + cut);
    c2.insert(c2.end(), a.begin() + cut, a.end());
    return {std::move(c1), std::move(c2)};
}

// Each codon is independently replaced with a fresh uniform [0, 255] value
// with probability rate. Replacement may repeat the old value.
template <RandomSource R>
IntGenotype replace_int_codons(IntGenotype g, double rate, R& rng) {
    for (auto& codon : g)
        if (rng.uniform01() < rate) codon = rng.uniform_int(kCodonRange);
    return g;
}

// PGE float mutation: uniform [0, 1] replacements.
template <RandomSource R>
RealGenotype replace_real_codons(RealGenotype g, double rate, R& rng) {
    for (auto& codon : g)
        if (rng.uniform01() < rate) codon = rng.uniform01();
    return g;
}

// ---------------------------------------------------------------------------
// Structured genotype operators (SGE / Co-PSGE)

// Per non-terminal, one uniform mask bit decides which parent contributes its
// whole list; bit 0 copies from a, bit 1 from b. Produces one offspring.
template <typename T, RandomSource R>
ListGenotype<T> mask_crossover(const ListGenotype<T>& a, const ListGenotype<T>& b, R& rng) {
    ListGenotype<T> child;
    child.lists.resize(a.lists.size());
    for (size_t nt = 0; nt < a.lists.size(); ++nt)
        child.lists[nt] = rng.uniform_int(2) == 0 ? a.lists[nt] : b.lists[nt];
    return child;
}

// Each real codon independently receives a N(0, sd) increment with
// probability rate, clamped back into [0, 1]. List lengths are unchanged.
template <RandomSource R>
ListGenotype<double> gaussian_codon_mutation(ListGenotype<double> g, double rate, double sd, R& rng) {
    for (auto& list : g.lists)
        for (auto& codon : list)
            if (rng.uniform01() < rate) codon = std::clamp(codon + rng.gauss(sd), 0.0, 1.0);
    return g;
}

// Each integer codon is independently replaced, with probability rate, by a
// uniform draw over the other production indices of its non-terminal.
// Non-terminals with a single production are left alone.
template <RandomSource R>
ListGenotype<int> production_index_mutation(ListGenotype<int> g, double rate, const Pcfg& grammar,
                                            R& rng) {
    for (size_t nt = 0; nt < g.lists.size(); ++nt) {
        int k = static_cast<int>(grammar.at(static_cast<int>(nt)).productions.size());
        for (auto& codon : g.lists[nt]) {
            if (k < 2 || rng.uniform01() >= rate) continue;
            int pick = rng.uniform_int(k - 1);
            codon = pick >= codon ? pick + 1 : pick;
        }
    }
    return g;
}

// Crossover passes the grammar of the fitter parent to the offspring; ties
// keep the first parent's.
inline const Pcfg& fitter_parent_grammar(const Pcfg& a_grammar, double a_fitness,
                                         const Pcfg& b_grammar, double b_fitness) {
    return a_fitness <= b_fitness ? a_grammar : b_grammar;
}

// ---------------------------------------------------------------------------
// PGE grammar update

// Nudges each production's probability by learning_factor times its share of
// the expansions that built the reference individual, then renormalizes the
// non-terminal. Non-terminals absent from the usage trace stay untouched.
Pcfg update_grammar_probabilities(Pcfg g, const RuleCounts& usage, double learning_factor);

}  // namespace gramevo
