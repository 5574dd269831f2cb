#pragma once

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "gramevo/rng.hpp"

namespace gramevo {

enum class SymbolKind { terminal, nonterminal };

struct Symbol {
    SymbolKind kind = SymbolKind::terminal;
    std::string text;  // non-terminals store the bare name, no angle brackets
    int nt = -1;       // index into Pcfg::nonterminals when kind == nonterminal

    bool is_nonterminal() const { return kind == SymbolKind::nonterminal; }
};

struct Production {
    std::vector<Symbol> symbols;
    double probability = 0.0;
    bool recursive = false;
};

// One non-terminal together with its ordered alternatives. Production order
// is the order in the source text; rule indices are meaningful.
struct RuleSet {
    std::string name;
    std::vector<Production> productions;
    std::vector<int> nonrecursive;  // indices, filled by detect_recursion
};

// Probabilistic context-free grammar. The axiom is the first rule of the
// source text. Per non-terminal the probabilities sum to 1 within 1e-9.
struct Pcfg {
    std::vector<RuleSet> nonterminals;
    std::unordered_map<std::string, int> index;

    int nt_count() const { return static_cast<int>(nonterminals.size()); }
    const std::string& axiom() const { return nonterminals.front().name; }
    const RuleSet& at(int nt) const { return nonterminals[nt]; }

    int nt_index(std::string_view name) const {
        auto it = index.find(std::string(name));
        return it == index.end() ? -1 : it->second;
    }
};

class GrammarError : public std::runtime_error {
public:
    GrammarError(const std::string& msg, int line = 0, int column = 0)
        : std::runtime_error(msg), line_(line), column_(column) {}
    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_;
    int column_;
};

// Parses the line-oriented BNF format:
//   <name> ::= alt1 | alt2       tokens are whitespace-separated
//   | alt3                       continuation lines start with '|'
// Tokens wrapped in < > are non-terminals, everything else is a terminal.
// An alternative may end with a (p) probability annotation; a non-terminal
// must annotate either all of its alternatives or none (none = uniform).
// Lines whose first non-blank character is '#' are comments. The feature
// macro x[..] expands to x[0]..x[n-1] when feature_count is supplied.
Pcfg parse_grammar(std::string_view text, std::optional<int> feature_count = std::nullopt);

// Inverse of parse_grammar; probabilities are printed so they round-trip
// exactly.
std::string serialize_grammar(const Pcfg& g);

// Marks each production recursive iff some non-terminal in its body derives
// the production's own left-hand side (transitive reachability), and caches
// the non-recursive subset per non-terminal. Throws GrammarError when a
// non-terminal has no non-recursive production, since such a grammar cannot
// terminate under a depth limit.
Pcfg detect_recursion(Pcfg g);

// Resets every non-terminal to 1/k per alternative.
void set_uniform_probabilities(Pcfg& g);

// After productions[mutated_index].probability changed (already clamped to
// [0,1]), rescales the remaining productions proportionally so the total is
// 1 again; when their mass is zero the remainder is split equally.
void adjust_probabilities(std::vector<Production>& productions, int mutated_index);

// True when every non-terminal's probabilities sum to 1 within tol and each
// lies in [0,1].
bool probabilities_normalized(const Pcfg& g, double tol = 1e-9);

// Per non-terminal, scans productions in order; the first one whose uniform
// gate draw falls below prob_mutation receives a N(0, sd) increment (clamped
// to [0,1]), the rest of that non-terminal is rescaled, and scanning moves on
// to the next non-terminal. At most one production changes per non-terminal
// per call.
template <RandomSource R>
Pcfg mutate_grammar(Pcfg g, double prob_mutation, double sd, R& rng) {
    for (auto& nt : g.nonterminals) {
        for (size_t i = 0; i < nt.productions.size(); ++i) {
            if (rng.uniform01() < prob_mutation) {
                double p = nt.productions[i].probability + rng.gauss(sd);
                nt.productions[i].probability = std::clamp(p, 0.0, 1.0);
                adjust_probabilities(nt.productions, static_cast<int>(i));
                break;
            }
        }
    }
    return g;
}

}  // namespace gramevo
