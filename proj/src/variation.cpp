#include "gramevo/variation.hpp"

namespace gramevo {

Pcfg update_grammar_probabilities(Pcfg g, const RuleCounts& usage, double learning_factor) {
    if (learning_factor == 0.0) return g;
    for (int nt = 0; nt < g.nt_count(); ++nt) {
        long total = 0;
        for (int c : usage[nt]) total += c;
        if (total == 0) continue;
        auto& prods = g.nonterminals[nt].productions;
        double sum = 0.0;
        for (size_t j = 0; j < prods.size(); ++j) {
            prods[j].probability += learning_factor * static_cast<double>(usage[nt][j]) /
                                    static_cast<double>(total);
            sum += prods[j].probability;
        }
        for (auto& p : prods) p.probability /= sum;
    }
    return g;
}

}  // namespace gramevo
