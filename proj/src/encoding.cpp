#include "gramevo/encoding.hpp"

namespace gramevo {

namespace {

void collect_terminals(const Derivation& d, const Pcfg& g, std::string& out) {
    const auto& prod = g.at(d.nt).productions[d.rule];
    size_t child = 0;
    for (const auto& s : prod.symbols) {
        if (s.is_nonterminal()) {
            collect_terminals(d.children[child++], g, out);
        } else {
            if (!out.empty()) out += ' ';
            out += s.text;
        }
    }
}

struct GeMapper {
    std::span<const int> codons;
    const Pcfg& g;
    size_t cursor = 0;
    bool exhausted = false;

    Derivation expand(int nt) {
        if (cursor >= codons.size()) {
            exhausted = true;
            return {};
        }
        int codon = codons[cursor++];
        int k = static_cast<int>(g.at(nt).productions.size());
        Derivation d{nt, codon % k, {}};
        for (const auto& s : g.at(nt).productions[d.rule].symbols) {
            if (!s.is_nonterminal()) continue;
            d.children.push_back(expand(s.nt));
            if (exhausted) return d;
        }
        return d;
    }
};

struct PgeMapper {
    std::span<const double> codons;
    const Pcfg& g;
    size_t cursor = 0;
    bool exhausted = false;

    Derivation expand(int nt) {
        if (cursor >= codons.size()) {
            exhausted = true;
            return {};
        }
        double codon = codons[cursor++];
        Derivation d{nt, cumulative_select(g.at(nt).productions, codon), {}};
        for (const auto& s : g.at(nt).productions[d.rule].symbols) {
            if (!s.is_nonterminal()) continue;
            d.children.push_back(expand(s.nt));
            if (exhausted) return d;
        }
        return d;
    }
};

}  // namespace

std::string phenotype_string(const Derivation& d, const Pcfg& g) {
    std::string out;
    collect_terminals(d, g, out);
    return out;
}

int derivation_depth(const Derivation& d) {
    int deepest = 0;
    for (const auto& c : d.children) deepest = std::max(deepest, 1 + derivation_depth(c));
    return deepest;
}

int count_expansions(const Derivation& d) {
    int n = 1;
    for (const auto& c : d.children) n += count_expansions(c);
    return n;
}

RuleCounts count_rule_usage(const Derivation& d, const Pcfg& g) {
    RuleCounts counts(g.nt_count());
    for (int nt = 0; nt < g.nt_count(); ++nt)
        counts[nt].assign(g.at(nt).productions.size(), 0);
    auto walk = [&](auto&& self, const Derivation& node) -> void {
        ++counts[node.nt][node.rule];
        for (const auto& c : node.children) self(self, c);
    };
    walk(walk, d);
    return counts;
}

int cumulative_select(const std::vector<Production>& productions, double codon) {
    double cum = 0.0;
    for (size_t i = 0; i < productions.size(); ++i) {
        cum += productions[i].probability;
        if (codon <= cum) return static_cast<int>(i);
    }
    return static_cast<int>(productions.size()) - 1;
}

int generate_expansion(int nt, double codon, const Pcfg& g, int depth, int max_depth) {
    const auto& rules = g.at(nt);
    if (depth < max_depth) return cumulative_select(rules.productions, codon);

    assert(!rules.nonrecursive.empty());
    double total = 0.0;
    for (int i : rules.nonrecursive) total += rules.productions[i].probability;
    double cum = 0.0;
    for (int i : rules.nonrecursive) {
        // zero total mass degenerates to a uniform choice over the subset
        cum += total > 0.0 ? rules.productions[i].probability / total
                           : 1.0 / static_cast<double>(rules.nonrecursive.size());
        if (codon <= cum) return i;
    }
    return rules.nonrecursive.back();
}

std::optional<Derivation> ge_map(std::span<const int> codons, const Pcfg& g) {
    GeMapper m{codons, g};
    Derivation d = m.expand(0);
    if (m.exhausted) return std::nullopt;
    return d;
}

std::optional<Derivation> pge_map(std::span<const double> codons, const Pcfg& g) {
    PgeMapper m{codons, g};
    Derivation d = m.expand(0);
    if (m.exhausted) return std::nullopt;
    return d;
}

}  // namespace gramevo
