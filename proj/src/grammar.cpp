#include "gramevo/grammar.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace gramevo {

namespace {

struct Token {
    std::string text;
    int column;  // 1-based
};

std::vector<Token> tokenize(std::string_view line) {
    std::vector<Token> out;
    size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        size_t start = i;
        while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        if (i > start) out.push_back({std::string(line.substr(start, i - start)), static_cast<int>(start) + 1});
    }
    return out;
}

bool is_nonterminal_token(const std::string& t) {
    return t.size() > 2 && t.front() == '<' && t.back() == '>';
}

// Trailing "(p)" probability annotation; the inside must parse fully as a
// number so that a lone ")" terminal is never mistaken for one.
std::optional<double> parse_probability_token(const std::string& t) {
    if (t.size() < 3 || t.front() != '(' || t.back() != ')') return std::nullopt;
    std::string_view body(t.data() + 1, t.size() - 2);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), value);
    if (ec != std::errc() || ptr != body.data() + body.size()) return std::nullopt;
    return value;
}

struct RawAlternative {
    std::vector<std::string> tokens;
    std::optional<double> probability;
    int line;
    int column;
};

}  // namespace

Pcfg parse_grammar(std::string_view text, std::optional<int> feature_count) {
    if (text.empty()) throw GrammarError("empty grammar source");

    Pcfg g;
    std::vector<std::vector<RawAlternative>> raw;  // parallel to g.nonterminals

    auto split_alternatives = [&](const std::vector<Token>& tokens, size_t from, int line) {
        std::vector<RawAlternative> alts;
        RawAlternative current{{}, std::nullopt, line, tokens.empty() ? 1 : tokens[0].column};
        auto flush = [&](int col) {
            if (current.tokens.empty())
                throw GrammarError("empty alternative", line, col);
            if (!current.tokens.empty()) {
                if (auto p = parse_probability_token(current.tokens.back())) {
                    current.probability = *p;
                    current.tokens.pop_back();
                    if (current.tokens.empty())
                        throw GrammarError("alternative holds only a probability", line, col);
                }
            }
            alts.push_back(std::move(current));
            current = RawAlternative{{}, std::nullopt, line, col};
        };
        for (size_t i = from; i < tokens.size(); ++i) {
            if (tokens[i].text == "|")
                flush(tokens[i].column);
            else
                current.tokens.push_back(tokens[i].text);
        }
        flush(tokens.empty() ? 1 : tokens.back().column);
        return alts;
    };

    int line_no = 0;
    size_t pos = 0;
    int current_nt = -1;
    while (pos <= text.size()) {
        size_t eol = text.find('\n', pos);
        std::string_view line = text.substr(pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++line_no;

        auto tokens = tokenize(line);
        if (tokens.empty()) continue;
        if (tokens[0].text[0] == '#') continue;

        if (tokens[0].text == "|") {
            // continuation of the previous rule
            if (current_nt < 0)
                throw GrammarError("continuation line before any rule", line_no, tokens[0].column);
            auto alts = split_alternatives(tokens, 1, line_no);
            for (auto& a : alts) raw[current_nt].push_back(std::move(a));
            continue;
        }

        if (!is_nonterminal_token(tokens[0].text))
            throw GrammarError("expected <name> at start of rule", line_no, tokens[0].column);
        if (tokens.size() < 2 || tokens[1].text != "::=")
            throw GrammarError("expected '::=' after rule name", line_no,
                               tokens.size() < 2 ? tokens[0].column : tokens[1].column);
        if (tokens.size() < 3)
            throw GrammarError("rule has no alternatives", line_no, tokens[1].column);

        std::string name = tokens[0].text.substr(1, tokens[0].text.size() - 2);
        if (g.index.contains(name))
            throw GrammarError("duplicate rule for <" + name + ">", line_no, tokens[0].column);
        current_nt = g.nt_count();
        g.index.emplace(name, current_nt);
        g.nonterminals.push_back(RuleSet{name, {}, {}});
        raw.push_back(split_alternatives(tokens, 2, line_no));
    }

    // expand the feature macro and build productions
    for (int nt = 0; nt < g.nt_count(); ++nt) {
        std::vector<RawAlternative> expanded;
        for (auto& alt : raw[nt]) {
            bool has_macro = std::find(alt.tokens.begin(), alt.tokens.end(), "x[..]") != alt.tokens.end();
            if (!has_macro) {
                expanded.push_back(std::move(alt));
                continue;
            }
            if (alt.tokens.size() != 1)
                throw GrammarError("feature macro x[..] must be the sole symbol of its alternative",
                                   alt.line, alt.column);
            if (!feature_count)
                throw GrammarError("grammar uses x[..] but no feature count was supplied",
                                   alt.line, alt.column);
            for (int f = 0; f < *feature_count; ++f) {
                RawAlternative e{{"x[" + std::to_string(f) + "]"},
                                 alt.probability ? std::optional<double>(*alt.probability / *feature_count)
                                                 : std::nullopt,
                                 alt.line, alt.column};
                expanded.push_back(std::move(e));
            }
        }
        raw[nt] = std::move(expanded);

        auto& rules = g.nonterminals[nt];
        for (auto& alt : raw[nt]) {
            Production p;
            for (auto& tok : alt.tokens) {
                Symbol s;
                if (is_nonterminal_token(tok)) {
                    s.kind = SymbolKind::nonterminal;
                    s.text = tok.substr(1, tok.size() - 2);
                } else {
                    s.kind = SymbolKind::terminal;
                    s.text = tok;
                }
                p.symbols.push_back(std::move(s));
            }
            p.probability = alt.probability.value_or(-1.0);
            rules.productions.push_back(std::move(p));
        }
    }

    // resolve non-terminal references
    for (auto& nt : g.nonterminals) {
        for (auto& p : nt.productions) {
            for (auto& s : p.symbols) {
                if (!s.is_nonterminal()) continue;
                s.nt = g.nt_index(s.text);
                if (s.nt < 0)
                    throw GrammarError("undefined non-terminal <" + s.text + "> referenced from <" +
                                       nt.name + ">");
            }
        }
    }

    // probabilities: all annotated (validated sum) or none (uniform)
    for (int i = 0; i < g.nt_count(); ++i) {
        auto& prods = g.nonterminals[i].productions;
        int annotated = 0;
        for (auto& p : prods) annotated += p.probability >= 0.0;
        if (annotated == 0) {
            for (auto& p : prods) p.probability = 1.0 / static_cast<double>(prods.size());
        } else if (annotated == static_cast<int>(prods.size())) {
            double sum = 0.0;
            for (auto& p : prods) {
                if (p.probability < 0.0 || p.probability > 1.0)
                    throw GrammarError("probability out of [0,1] for <" + g.nonterminals[i].name + ">");
                sum += p.probability;
            }
            if (std::abs(sum - 1.0) > 1e-6)
                throw GrammarError("probabilities of <" + g.nonterminals[i].name +
                                   "> sum to " + std::to_string(sum) + ", expected 1");
            if (std::abs(sum - 1.0) > 1e-9)
                for (auto& p : prods) p.probability /= sum;
        } else {
            throw GrammarError("non-terminal <" + g.nonterminals[i].name +
                               "> annotates only some alternatives; annotate all or none");
        }
    }
    return g;
}

std::string serialize_grammar(const Pcfg& g) {
    std::ostringstream out;
    char buf[64];
    for (const auto& nt : g.nonterminals) {
        out << '<' << nt.name << "> ::= ";
        for (size_t i = 0; i < nt.productions.size(); ++i) {
            if (i) out << " | ";
            for (const auto& s : nt.productions[i].symbols) {
                if (s.is_nonterminal())
                    out << '<' << s.text << "> ";
                else
                    out << s.text << ' ';
            }
            std::snprintf(buf, sizeof buf, "(%.17g)", nt.productions[i].probability);
            out << buf;
        }
        out << '\n';
    }
    return out.str();
}

Pcfg detect_recursion(Pcfg g) {
    const int n = g.nt_count();

    // reach[a][b]: a derives a sentential form containing b, in >= 1 steps
    std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
    for (int a = 0; a < n; ++a)
        for (const auto& p : g.nonterminals[a].productions)
            for (const auto& s : p.symbols)
                if (s.is_nonterminal()) reach[a][s.nt] = true;
    for (int k = 0; k < n; ++k)
        for (int a = 0; a < n; ++a)
            if (reach[a][k])
                for (int b = 0; b < n; ++b)
                    if (reach[k][b]) reach[a][b] = true;

    for (int a = 0; a < n; ++a) {
        auto& nt = g.nonterminals[a];
        nt.nonrecursive.clear();
        for (size_t i = 0; i < nt.productions.size(); ++i) {
            auto& p = nt.productions[i];
            p.recursive = false;
            for (const auto& s : p.symbols)
                if (s.is_nonterminal() && (s.nt == a || reach[s.nt][a])) {
                    p.recursive = true;
                    break;
                }
            if (!p.recursive) nt.nonrecursive.push_back(static_cast<int>(i));
        }
        if (nt.nonrecursive.empty())
            throw GrammarError("non-terminal <" + nt.name +
                               "> has no non-recursive production; derivations cannot terminate");
    }
    return g;
}

void set_uniform_probabilities(Pcfg& g) {
    for (auto& nt : g.nonterminals)
        for (auto& p : nt.productions)
            p.probability = 1.0 / static_cast<double>(nt.productions.size());
}

void adjust_probabilities(std::vector<Production>& productions, int mutated_index) {
    if (productions.size() == 1) {
        productions[0].probability = 1.0;
        return;
    }
    double remaining = 1.0 - productions[mutated_index].probability;
    double others = 0.0;
    for (int i = 0; i < static_cast<int>(productions.size()); ++i)
        if (i != mutated_index) others += productions[i].probability;
    if (others > 0.0) {
        double scale = remaining / others;
        for (int i = 0; i < static_cast<int>(productions.size()); ++i)
            if (i != mutated_index) productions[i].probability *= scale;
    } else {
        double share = remaining / static_cast<double>(productions.size() - 1);
        for (int i = 0; i < static_cast<int>(productions.size()); ++i)
            if (i != mutated_index) productions[i].probability = share;
    }
}

bool probabilities_normalized(const Pcfg& g, double tol) {
    for (const auto& nt : g.nonterminals) {
        double sum = 0.0;
        for (const auto& p : nt.productions) {
            if (p.probability < 0.0 || p.probability > 1.0) return false;
            sum += p.probability;
        }
        if (std::abs(sum - 1.0) > tol) return false;
    }
    return true;
}

}  // namespace gramevo
