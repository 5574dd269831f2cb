#pragma once

#include <cassert>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gramevo/grammar.hpp"
#include "gramevo/rng.hpp"

namespace gramevo {

// One node per non-terminal expansion: which production was chosen and the
// sub-derivations of the non-terminals in its body, in body order. The tree
// is the authoritative phenotype; the flat string is derived from it.
struct Derivation {
    int nt = 0;
    int rule = 0;
    std::vector<Derivation> children;
};

// Terminal yield joined with single spaces, e.g. "1.0 - x".
std::string phenotype_string(const Derivation& d, const Pcfg& g);

// Longest chain of expansions below the root (root at depth 0).
int derivation_depth(const Derivation& d);

int count_expansions(const Derivation& d);

// counts[nt][rule] = number of times the production was used
using RuleCounts = std::vector<std::vector<int>>;
RuleCounts count_rule_usage(const Derivation& d, const Pcfg& g);

// ---------------------------------------------------------------------------
// Genotypes

using IntGenotype = std::vector<int>;      // codons in [0, 255]
using RealGenotype = std::vector<double>;  // codons in [0, 1]

// One dynamic codon list per non-terminal, in grammar order.
template <typename T>
struct ListGenotype {
    std::vector<std::vector<T>> lists;

    bool operator==(const ListGenotype&) const = default;
    size_t total_codons() const {
        size_t n = 0;
        for (const auto& l : lists) n += l.size();
        return n;
    }
};

inline constexpr int kCodonRange = 256;  // integer codons are drawn from [0, 255]

// ---------------------------------------------------------------------------
// Rule selection

// First production whose cumulative probability reaches the codon; falls back
// to the last production when rounding leaves the total marginally short.
int cumulative_select(const std::vector<Production>& productions, double codon);

// Depth-aware probabilistic rule choice: below max_depth the whole production
// set competes; at or beyond it only non-recursive productions do, with their
// probabilities renormalized by their summed mass. Requires recursion flags.
int generate_expansion(int nt, double codon, const Pcfg& g, int depth, int max_depth);

// ---------------------------------------------------------------------------
// Mapping engines

// Leftmost derivation, rule index = codon mod alternative-count, no wrapping.
// Returns nullopt when the codons run out with non-terminals pending.
std::optional<Derivation> ge_map(std::span<const int> codons, const Pcfg& g);

// Leftmost derivation with cumulative-probability selection over real codons;
// no wrapping, nullopt on exhaustion.
std::optional<Derivation> pge_map(std::span<const double> codons, const Pcfg& g);

struct MapAccounting {
    std::vector<int> consumed;  // per non-terminal, codons read
    int expansions = 0;
    int appended = 0;  // codons generated because a list ran short
};

namespace detail {

template <RandomSource R>
Derivation copsge_expand(ListGenotype<double>& geno, const Pcfg& g, int nt, int depth, int max_depth,
                         std::vector<int>& next_pos, R& rng, MapAccounting* acct) {
    auto& list = geno.lists[nt];
    if (next_pos[nt] >= static_cast<int>(list.size())) {
        list.push_back(rng.uniform01());
        if (acct) ++acct->appended;
    }
    double codon = list[next_pos[nt]];
    int rule = generate_expansion(nt, codon, g, depth, max_depth);
    ++next_pos[nt];
    if (acct) ++acct->expansions;
    Derivation d{nt, rule, {}};
    for (const auto& s : g.at(nt).productions[rule].symbols)
        if (s.is_nonterminal())
            d.children.push_back(copsge_expand(geno, g, s.nt, depth + 1, max_depth, next_pos, rng, acct));
    return d;
}

template <RandomSource R>
Derivation sge_expand(ListGenotype<int>& geno, const Pcfg& g, int nt, int depth, int max_depth,
                      std::vector<int>& next_pos, R& rng, MapAccounting* acct) {
    const auto& rules = g.at(nt);
    const bool limited = depth >= max_depth;
    auto& list = geno.lists[nt];
    if (next_pos[nt] >= static_cast<int>(list.size())) {
        int span = limited ? static_cast<int>(rules.nonrecursive.size())
                           : static_cast<int>(rules.productions.size());
        list.push_back(rng.uniform_int(span));
        if (acct) ++acct->appended;
    }
    int codon = list[next_pos[nt]];
    ++next_pos[nt];
    if (acct) ++acct->expansions;
    int rule;
    if (limited) {
        // stale in-range codons are folded into the non-recursive subset
        rule = rules.nonrecursive[codon % static_cast<int>(rules.nonrecursive.size())];
    } else {
        assert(codon >= 0 && codon < static_cast<int>(rules.productions.size()));
        rule = codon;
    }
    Derivation d{nt, rule, {}};
    for (const auto& s : rules.productions[rule].symbols)
        if (s.is_nonterminal())
            d.children.push_back(sge_expand(geno, g, s.nt, depth + 1, max_depth, next_pos, rng, acct));
    return d;
}

}  // namespace detail

// Recursive leftmost mapping of a structured real-codon genotype. Lists that
// run short are extended in place with fresh uniform codons, so the result is
// always a complete derivation. A genotype produced against the same grammar
// maps without consuming the rng.
template <RandomSource R>
Derivation copsge_map(ListGenotype<double>& geno, const Pcfg& g, int max_depth, R& rng,
                      MapAccounting* acct = nullptr) {
    assert(static_cast<int>(geno.lists.size()) == g.nt_count());
    std::vector<int> next_pos(g.nt_count(), 0);
    Derivation d = detail::copsge_expand(geno, g, 0, 0, max_depth, next_pos, rng, acct);
    if (acct) acct->consumed = std::move(next_pos);
    return d;
}

// Integer-codon variant: a codon is the production index of its non-terminal;
// at or beyond max_depth it indexes the non-recursive subset modulo its size.
template <RandomSource R>
Derivation sge_map(ListGenotype<int>& geno, const Pcfg& g, int max_depth, R& rng,
                   MapAccounting* acct = nullptr) {
    assert(static_cast<int>(geno.lists.size()) == g.nt_count());
    std::vector<int> next_pos(g.nt_count(), 0);
    Derivation d = detail::sge_expand(geno, g, 0, 0, max_depth, next_pos, rng, acct);
    if (acct) acct->consumed = std::move(next_pos);
    return d;
}

// Fixed-length random genotypes for the linear encodings.
template <RandomSource R>
IntGenotype ge_create(int genotype_size, R& rng) {
    IntGenotype g(genotype_size);
    for (auto& c : g) c = rng.uniform_int(kCodonRange);
    return g;
}

template <RandomSource R>
RealGenotype pge_create(int genotype_size, R& rng) {
    RealGenotype g(genotype_size);
    for (auto& c : g) c = rng.uniform01();
    return g;
}

// Random genotypes are grown by mapping an empty genotype: every expansion
// draws a fresh codon, exactly the recursive creation procedure.
template <RandomSource R>
ListGenotype<double> copsge_create(const Pcfg& g, int max_depth, R& rng) {
    ListGenotype<double> geno;
    geno.lists.resize(g.nt_count());
    copsge_map(geno, g, max_depth, rng);
    return geno;
}

template <RandomSource R>
ListGenotype<int> sge_create(const Pcfg& g, int max_depth, R& rng) {
    ListGenotype<int> geno;
    geno.lists.resize(g.nt_count());
    sge_map(geno, g, max_depth, rng);
    return geno;
}

}  // namespace gramevo
