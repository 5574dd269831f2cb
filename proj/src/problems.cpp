#include "gramevo/problems.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "gramevo/rng.hpp"

namespace gramevo {

namespace {

double saturate(double v) {
    if (std::isnan(v)) return v;
    return std::clamp(v, -kValueSaturation, kValueSaturation);
}

std::optional<double> parse_number(std::string_view s) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

// "x[12]" -> 12
std::optional<int> parse_feature_ref(std::string_view s) {
    if (s.size() < 4 || s.substr(0, 2) != "x[" || s.back() != ']') return std::nullopt;
    int idx = 0;
    std::string_view body = s.substr(2, s.size() - 3);
    auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), idx);
    if (ec != std::errc() || ptr != body.data() + body.size() || idx < 0) return std::nullopt;
    return idx;
}

ExprNode expr_leaf(std::string_view token) {
    ExprNode n;
    if (auto f = parse_feature_ref(token)) {
        n.op = ExprNode::Op::variable;
        n.var = *f;
        return n;
    }
    if (auto v = parse_number(token)) {
        n.op = ExprNode::Op::constant;
        n.value = *v;
        return n;
    }
    if (token == "x" || token == "y") {  // bare names used by two-variable grammars
        n.op = ExprNode::Op::variable;
        n.var = token == "x" ? 0 : 1;
        return n;
    }
    throw std::runtime_error("not an arithmetic leaf token: '" + std::string(token) + "'");
}

std::optional<ExprNode::Op> binary_op(std::string_view tok) {
    if (tok == "+") return ExprNode::Op::add;
    if (tok == "-") return ExprNode::Op::sub;
    if (tok == "*") return ExprNode::Op::mul;
    if (tok == "/") return ExprNode::Op::div;
    return std::nullopt;
}

std::optional<ExprNode::Op> unary_op(std::string_view tok) {
    if (tok == "sin") return ExprNode::Op::sin;
    if (tok == "cos") return ExprNode::Op::cos;
    if (tok == "exp") return ExprNode::Op::exp;
    if (tok == "log") return ExprNode::Op::log;
    if (tok == "inv") return ExprNode::Op::inv;
    return std::nullopt;
}

// A production body as a flat item list: terminals keep their token, each
// non-terminal slot points at its sub-derivation.
struct Item {
    const std::string* token = nullptr;  // terminal text, null for non-terminals
    const Derivation* child = nullptr;
};

std::vector<Item> production_items(const Derivation& d, const Pcfg& g) {
    const auto& prod = g.at(d.nt).productions[d.rule];
    std::vector<Item> items;
    size_t child = 0;
    for (const auto& s : prod.symbols) {
        if (s.is_nonterminal())
            items.push_back({nullptr, &d.children[child++]});
        else
            items.push_back({&s.text, nullptr});
    }
    return items;
}

// Token an item resolves to: the terminal itself, or the full yield of the
// sub-derivation (operator- and function-selector non-terminals yield exactly
// one token).
std::string item_token(const Item& it, const Pcfg& g) {
    return it.token ? *it.token : phenotype_string(*it.child, g);
}

bool is_token(const Item& it, std::string_view text) { return it.token && *it.token == text; }

}  // namespace

ExprNode expr_from_derivation(const Derivation& d, const Pcfg& g) {
    std::vector<Item> items = production_items(d, g);

    if (items.size() >= 3 && is_token(items.front(), "(") && is_token(items.back(), ")"))
        items = std::vector<Item>(items.begin() + 1, items.end() - 1);

    if (items.size() == 1) {
        if (items[0].child) return expr_from_derivation(*items[0].child, g);
        return expr_leaf(*items[0].token);
    }
    if (items.size() == 3) {
        auto op = binary_op(item_token(items[1], g));
        if (op && items[0].child && items[2].child) {
            ExprNode n;
            n.op = *op;
            n.kids.push_back(expr_from_derivation(*items[0].child, g));
            n.kids.push_back(expr_from_derivation(*items[2].child, g));
            return n;
        }
    }
    if (items.size() == 4 && is_token(items[1], "(") && is_token(items[3], ")") && items[2].child) {
        auto op = unary_op(item_token(items[0], g));
        if (op) {
            ExprNode n;
            n.op = *op;
            n.kids.push_back(expr_from_derivation(*items[2].child, g));
            return n;
        }
    }
    throw std::runtime_error("production of <" + g.at(d.nt).name +
                             "> has no arithmetic interpretation");
}

namespace {

struct ExprParser {
    std::vector<std::string> tokens;
    size_t pos = 0;

    bool at_end() const { return pos >= tokens.size(); }
    const std::string& peek() const { return tokens[pos]; }

    ExprNode parse_expression() {
        ExprNode left = parse_operand();
        while (!at_end()) {
            auto op = binary_op(peek());
            if (!op) break;
            ++pos;
            ExprNode right = parse_operand();
            ExprNode n;
            n.op = *op;
            n.kids.push_back(std::move(left));
            n.kids.push_back(std::move(right));
            left = std::move(n);
        }
        return left;
    }

    ExprNode parse_operand() {
        if (at_end()) throw std::runtime_error("unexpected end of expression");
        if (peek() == "(") {
            ++pos;
            ExprNode inner = parse_expression();
            expect(")");
            return inner;
        }
        if (auto op = unary_op(peek())) {
            ++pos;
            expect("(");
            ExprNode n;
            n.op = *op;
            n.kids.push_back(parse_expression());
            expect(")");
            return n;
        }
        return expr_leaf(tokens[pos++]);
    }

    void expect(std::string_view tok) {
        if (at_end() || peek() != tok)
            throw std::runtime_error("expected '" + std::string(tok) + "' in expression");
        ++pos;
    }
};

std::vector<std::string> split_tokens(std::string_view s) {
    std::vector<std::string> out;
    std::istringstream in{std::string(s)};
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

}  // namespace

ExprNode parse_expr(std::string_view phenotype) {
    ExprParser p{split_tokens(phenotype)};
    ExprNode n = p.parse_expression();
    if (!p.at_end()) throw std::runtime_error("trailing tokens after expression");
    return n;
}

double eval_expr(const ExprNode& e, std::span<const double> features) {
    using Op = ExprNode::Op;
    switch (e.op) {
        case Op::constant: return e.value;
        case Op::variable: return features[e.var];
        default: break;
    }
    double a = eval_expr(e.kids[0], features);
    switch (e.op) {
        case Op::add: return saturate(a + eval_expr(e.kids[1], features));
        case Op::sub: return saturate(a - eval_expr(e.kids[1], features));
        case Op::mul: return saturate(a * eval_expr(e.kids[1], features));
        case Op::div: {
            double b = eval_expr(e.kids[1], features);
            return b == 0.0 ? 1.0 : saturate(a / b);
        }
        case Op::sin: return std::sin(a);
        case Op::cos: return std::cos(a);
        case Op::exp: return saturate(std::exp(a));
        case Op::log: return a <= 0.0 ? 0.0 : std::log(a);
        case Op::inv: return a == 0.0 ? 1.0 : saturate(1.0 / a);
        default: return 0.0;  // unreachable
    }
}

double eval_arith(std::string_view phenotype, std::span<const double> features) {
    return eval_expr(parse_expr(phenotype), features);
}

namespace {

// Non-terminals are either expression-valued or token-valued (operator /
// function selectors). The classification starts at the axiom and must be
// consistent for the fold to be total.
void classify_expression_nts(const Pcfg& g, std::vector<int>& role, int nt, int wanted);

constexpr int kRoleExpr = 1;
constexpr int kRoleBinaryOp = 2;
constexpr int kRoleUnaryOp = 3;

void check_expression_production(const Pcfg& g, std::vector<int>& role, int nt, const Production& p) {
    // mirror of expr_from_derivation's patterns, on symbols alone
    std::span<const Symbol> syms(p.symbols);
    if (syms.size() >= 3 && !syms.front().is_nonterminal() && syms.front().text == "(" &&
        !syms.back().is_nonterminal() && syms.back().text == ")")
        syms = syms.subspan(1, syms.size() - 2);

    auto fail = [&]() {
        throw GrammarError("production of <" + g.at(nt).name + "> has no arithmetic interpretation");
    };

    if (syms.size() == 1) {
        if (syms[0].is_nonterminal())
            classify_expression_nts(g, role, syms[0].nt, kRoleExpr);
        else
            expr_leaf(syms[0].text);  // throws when not a leaf
        return;
    }
    if (syms.size() == 3) {
        if (!syms[0].is_nonterminal() || !syms[2].is_nonterminal()) fail();
        if (syms[1].is_nonterminal())
            classify_expression_nts(g, role, syms[1].nt, kRoleBinaryOp);
        else if (!binary_op(syms[1].text))
            fail();
        classify_expression_nts(g, role, syms[0].nt, kRoleExpr);
        classify_expression_nts(g, role, syms[2].nt, kRoleExpr);
        return;
    }
    if (syms.size() == 4 && !syms[1].is_nonterminal() && syms[1].text == "(" &&
        !syms[3].is_nonterminal() && syms[3].text == ")" && syms[2].is_nonterminal()) {
        if (syms[0].is_nonterminal())
            classify_expression_nts(g, role, syms[0].nt, kRoleUnaryOp);
        else if (!unary_op(syms[0].text))
            fail();
        classify_expression_nts(g, role, syms[2].nt, kRoleExpr);
        return;
    }
    fail();
}

void classify_expression_nts(const Pcfg& g, std::vector<int>& role, int nt, int wanted) {
    if (role[nt] == wanted) return;
    if (role[nt] != 0)
        throw GrammarError("non-terminal <" + g.at(nt).name + "> is used in conflicting positions");
    role[nt] = wanted;
    for (const auto& p : g.at(nt).productions) {
        if (wanted == kRoleExpr) {
            check_expression_production(g, role, nt, p);
        } else {
            if (p.symbols.size() != 1 || p.symbols[0].is_nonterminal())
                throw GrammarError("operator non-terminal <" + g.at(nt).name +
                                   "> must expand to single terminals");
            bool ok = wanted == kRoleBinaryOp ? binary_op(p.symbols[0].text).has_value()
                                              : unary_op(p.symbols[0].text).has_value();
            if (!ok)
                throw GrammarError("'" + p.symbols[0].text + "' is not a valid operator for <" +
                                   g.at(nt).name + ">");
        }
    }
}

}  // namespace

void validate_expression_grammar(const Pcfg& g, int feature_count) {
    std::vector<int> role(g.nt_count(), 0);
    classify_expression_nts(g, role, 0, kRoleExpr);
    for (const auto& nt : g.nonterminals)
        for (const auto& p : nt.productions)
            for (const auto& s : p.symbols) {
                if (s.is_nonterminal()) continue;
                if (auto f = parse_feature_ref(s.text); f && *f >= feature_count)
                    throw GrammarError("feature " + s.text + " out of range, grammar expects " +
                                       std::to_string(feature_count) + " features");
            }
}

// ---------------------------------------------------------------------------
// Boolean expressions

const VarIndex& parity_variables() {
    static const VarIndex vars = {{"b0", 0}, {"b1", 1}, {"b2", 2}, {"b3", 3}, {"b4", 4}};
    return vars;
}

const VarIndex& multiplexer_variables() {
    static const VarIndex vars = {{"s0", 0}, {"s1", 1}, {"s2", 2}, {"i0", 3}, {"i1", 4}, {"i2", 5},
                                  {"i3", 6}, {"i4", 7}, {"i5", 8}, {"i6", 9}, {"i7", 10}};
    return vars;
}

namespace {

BoolNode bool_leaf(std::string_view token, const VarIndex& vars) {
    auto it = vars.find(std::string(token));
    if (it == vars.end())
        throw std::runtime_error("unknown boolean variable '" + std::string(token) + "'");
    BoolNode n;
    n.op = BoolNode::Op::variable;
    n.var = it->second;
    return n;
}

BoolNode make_binary(BoolNode::Op op, BoolNode l, BoolNode r) {
    BoolNode n;
    n.op = op;
    n.kids.push_back(std::move(l));
    n.kids.push_back(std::move(r));
    return n;
}

BoolNode make_not(BoolNode inner) {
    BoolNode n;
    n.op = BoolNode::Op::bnot;
    n.kids.push_back(std::move(inner));
    return n;
}

std::optional<BoolNode::Op> bool_binary_op(std::string_view tok) {
    if (tok == "and") return BoolNode::Op::band;
    if (tok == "or") return BoolNode::Op::bor;
    return std::nullopt;
}

}  // namespace

BoolNode bool_from_derivation(const Derivation& d, const Pcfg& g, const VarIndex& vars) {
    std::vector<Item> items = production_items(d, g);

    auto fold = [&](const Item& it) { return bool_from_derivation(*it.child, g, vars); };

    if (!items.empty() && is_token(items[0], "not")) {
        // not <B>  |  not ( <B> and <B> )  |  not ( <B> or <B> )
        if (items.size() == 2 && items[1].child) return make_not(fold(items[1]));
        if (items.size() == 6 && is_token(items[1], "(") && is_token(items[5], ")") &&
            items[2].child && items[4].child) {
            if (auto op = bool_binary_op(item_token(items[3], g)))
                return make_not(make_binary(*op, fold(items[2]), fold(items[4])));
        }
    }
    if (items.size() >= 3 && is_token(items.front(), "(") && is_token(items.back(), ")"))
        items = std::vector<Item>(items.begin() + 1, items.end() - 1);

    if (items.size() == 1) {
        if (items[0].child) return fold(items[0]);
        return bool_leaf(*items[0].token, vars);
    }
    if (items.size() == 3 && items[0].child && items[2].child) {
        if (auto op = bool_binary_op(item_token(items[1], g)))
            return make_binary(*op, fold(items[0]), fold(items[2]));
    }
    if (items.size() == 5 && items[0].child && is_token(items[1], "if") && items[2].child &&
        is_token(items[3], "else") && items[4].child) {
        BoolNode n;
        n.op = BoolNode::Op::ifelse;
        n.kids.push_back(fold(items[0]));
        n.kids.push_back(fold(items[2]));
        n.kids.push_back(fold(items[4]));
        return n;
    }
    throw std::runtime_error("production of <" + g.at(d.nt).name + "> has no boolean interpretation");
}

namespace {

struct BoolParser {
    std::vector<std::string> tokens;
    const VarIndex& vars;
    size_t pos = 0;

    bool at_end() const { return pos >= tokens.size(); }
    const std::string& peek() const { return tokens[pos]; }

    BoolNode parse_ternary() {
        BoolNode value = parse_or();
        if (!at_end() && peek() == "if") {
            ++pos;
            BoolNode cond = parse_or();
            expect("else");
            BoolNode other = parse_ternary();
            BoolNode n;
            n.op = BoolNode::Op::ifelse;
            n.kids.push_back(std::move(value));
            n.kids.push_back(std::move(cond));
            n.kids.push_back(std::move(other));
            return n;
        }
        return value;
    }

    BoolNode parse_or() {
        BoolNode left = parse_and();
        while (!at_end() && peek() == "or") {
            ++pos;
            left = make_binary(BoolNode::Op::bor, std::move(left), parse_and());
        }
        return left;
    }

    BoolNode parse_and() {
        BoolNode left = parse_unary();
        while (!at_end() && peek() == "and") {
            ++pos;
            left = make_binary(BoolNode::Op::band, std::move(left), parse_unary());
        }
        return left;
    }

    BoolNode parse_unary() {
        if (at_end()) throw std::runtime_error("unexpected end of boolean expression");
        if (peek() == "not") {
            ++pos;
            return make_not(parse_unary());
        }
        if (peek() == "(") {
            ++pos;
            BoolNode inner = parse_ternary();
            expect(")");
            return inner;
        }
        return bool_leaf(tokens[pos++], vars);
    }

    void expect(std::string_view tok) {
        if (at_end() || peek() != tok)
            throw std::runtime_error("expected '" + std::string(tok) + "' in boolean expression");
        ++pos;
    }
};

}  // namespace

BoolNode parse_bool(std::string_view phenotype, const VarIndex& vars) {
    BoolParser p{split_tokens(phenotype), vars};
    BoolNode n = p.parse_ternary();
    if (!p.at_end()) throw std::runtime_error("trailing tokens after boolean expression");
    return n;
}

bool eval_bool_tree(const BoolNode& b, uint32_t inputs) {
    using Op = BoolNode::Op;
    switch (b.op) {
        case Op::variable: return (inputs >> b.var) & 1u;
        case Op::band: return eval_bool_tree(b.kids[0], inputs) && eval_bool_tree(b.kids[1], inputs);
        case Op::bor: return eval_bool_tree(b.kids[0], inputs) || eval_bool_tree(b.kids[1], inputs);
        case Op::bnot: return !eval_bool_tree(b.kids[0], inputs);
        case Op::ifelse:
            return eval_bool_tree(b.kids[1], inputs) ? eval_bool_tree(b.kids[0], inputs)
                                                     : eval_bool_tree(b.kids[2], inputs);
    }
    return false;  // unreachable
}

int eval_bool(std::string_view phenotype, uint32_t inputs, const VarIndex& vars) {
    return eval_bool_tree(parse_bool(phenotype, vars), inputs) ? 1 : 0;
}

void validate_boolean_grammar(const Pcfg& g, const VarIndex& vars) {
    for (const auto& nt : g.nonterminals) {
        for (const auto& p : nt.productions) {
            for (const auto& s : p.symbols) {
                if (s.is_nonterminal()) continue;
                static const std::vector<std::string> structural = {"and", "or",  "not",
                                                                    "if",  "else", "(", ")"};
                if (std::find(structural.begin(), structural.end(), s.text) != structural.end())
                    continue;
                if (!vars.contains(s.text))
                    throw GrammarError("unknown boolean variable '" + s.text + "' in grammar");
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Fitness

double rrse(std::span<const double> predictions, std::span<const double> targets) {
    if (predictions.size() != targets.size() || targets.empty())
        throw std::invalid_argument("rrse: predictions and targets must be equal-length, non-empty");
    double mean = 0.0;
    for (double t : targets) mean += t;
    mean /= static_cast<double>(targets.size());
    double num = 0.0, den = 0.0;
    for (size_t i = 0; i < targets.size(); ++i) {
        num += (predictions[i] - targets[i]) * (predictions[i] - targets[i]);
        den += (mean - targets[i]) * (mean - targets[i]);
    }
    if (den == 0.0) throw std::invalid_argument("rrse: targets are all identical");
    double r = std::sqrt(num / den);
    return std::isnan(r) ? std::numeric_limits<double>::infinity() : r;
}

int parity_error_count(const BoolNode& b) {
    int errors = 0;
    for (uint32_t m = 0; m < 32; ++m) {
        int target = std::popcount(m) & 1;
        errors += eval_bool_tree(b, m) != (target != 0);
    }
    return errors;
}

int parity_fitness(std::string_view phenotype) {
    return parity_error_count(parse_bool(phenotype, parity_variables()));
}

int multiplexer_error_count(const BoolNode& b, bool s0_most_significant) {
    int errors = 0;
    for (uint32_t m = 0; m < 2048; ++m) {
        uint32_t s0 = m & 1u, s1 = (m >> 1) & 1u, s2 = (m >> 2) & 1u;
        uint32_t addr = s0_most_significant ? (s0 << 2) | (s1 << 1) | s2 : (s2 << 2) | (s1 << 1) | s0;
        bool target = (m >> (3 + addr)) & 1u;
        errors += eval_bool_tree(b, m) != target;
    }
    return errors;
}

int multiplexer_fitness(std::string_view phenotype, bool s0_most_significant) {
    return multiplexer_error_count(parse_bool(phenotype, multiplexer_variables()),
                                   s0_most_significant);
}

// ---------------------------------------------------------------------------
// Datasets

Dataset pagie_dataset() {
    Dataset d;
    d.feature_count = 2;
    for (int i = 0; i < 26; ++i) {
        double x0 = -5.0 + 0.4 * i;
        for (int j = 0; j < 26; ++j) {
            double x1 = -5.0 + 0.4 * j;
            d.features.push_back({x0, x1});
            d.targets.push_back(1.0 / (1.0 + std::pow(x0, -4.0)) + 1.0 / (1.0 + std::pow(x1, -4.0)));
        }
    }
    return d;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    size_t start = 0;
    while (true) {
        size_t comma = line.find(',', start);
        std::string cell = line.substr(start, comma == std::string::npos ? std::string::npos
                                                                         : comma - start);
        // trim surrounding blanks
        size_t b = cell.find_first_not_of(" \t\r");
        size_t e = cell.find_last_not_of(" \t\r");
        cells.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return cells;
}

}  // namespace

std::pair<Dataset, Dataset> load_boston(const std::string& path, uint64_t split_seed) {
    std::ifstream in(path);
    if (!in) throw DatasetError("cannot open dataset file: " + path);

    constexpr int kColumns = 14;  // 13 features + target
    Dataset all;
    all.feature_count = kColumns - 1;

    std::string line;
    int line_no = 0;
    bool first_content_line = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto cells = split_csv_line(line);

        if (first_content_line) {
            first_content_line = false;
            bool numeric = true;
            for (const auto& c : cells) numeric = numeric && parse_number(c).has_value();
            if (!numeric) continue;  // header row
        }
        if (static_cast<int>(cells.size()) != kColumns)
            throw DatasetError("row " + std::to_string(line_no) + ": expected " +
                               std::to_string(kColumns) + " columns, got " +
                               std::to_string(cells.size()));
        std::vector<double> row;
        row.reserve(kColumns - 1);
        for (int c = 0; c < kColumns; ++c) {
            auto v = parse_number(cells[c]);
            if (!v)
                throw DatasetError("row " + std::to_string(line_no) + ", column " +
                                   std::to_string(c + 1) + ": not numeric: '" + cells[c] + "'");
            if (c < kColumns - 1)
                row.push_back(*v);
            else
                all.targets.push_back(*v);
        }
        all.features.push_back(std::move(row));
    }
    size_t n = all.size();
    if (n < 10) throw DatasetError("dataset too small to split: " + std::to_string(n) + " rows");

    // deterministic Fisher-Yates shuffle keyed by split_seed
    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng(split_seed);
    for (size_t i = n - 1; i > 0; --i)
        std::swap(order[i], order[rng.uniform_int(static_cast<int>(i) + 1)]);

    size_t train_n = n * 9 / 10;
    Dataset train, test;
    train.feature_count = test.feature_count = all.feature_count;
    for (size_t i = 0; i < n; ++i) {
        Dataset& dst = i < train_n ? train : test;
        dst.features.push_back(all.features[order[i]]);
        dst.targets.push_back(all.targets[order[i]]);
    }
    return {std::move(train), std::move(test)};
}

// ---------------------------------------------------------------------------
// Problem registry

namespace {

constexpr std::string_view kPagieGrammar =
    "<start> ::= <expr>\n"
    "<expr> ::= <expr> <op> <expr> | ( <expr> <op> <expr> ) | <pre_op> ( <expr> ) | <var>\n"
    "<op> ::= + | - | * | /\n"
    "<pre_op> ::= sin | cos | exp | log | inv\n"
    "<var> ::= x[0] | x[1] | 1.0\n";

constexpr std::string_view kRegressionGrammar =
    "<start> ::= <expr>\n"
    "<expr> ::= <expr> <op> <expr> | ( <expr> <op> <expr> ) | <pre_op> ( <expr> ) | <var>\n"
    "<op> ::= + | - | * | /\n"
    "<pre_op> ::= sin | cos | exp | log | inv\n"
    "<var> ::= x[..] | 1.0\n";

constexpr std::string_view kParityGrammar =
    "<start> ::= <B>\n"
    "<B> ::= <B> and <B> | <B> or <B> | not ( <B> and <B> ) | not ( <B> or <B> ) | <var>\n"
    "<var> ::= b0 | b1 | b2 | b3 | b4\n";

// Published form: register i2 is absent from <var>.
constexpr std::string_view kMultiplexerGrammar =
    "<start> ::= <B>\n"
    "<B> ::= <B> and <B> | <B> or <B> | not <B> | <B> if <B> else <B> | <var>\n"
    "<var> ::= s0 | s1 | s2 | i0 | i1 | i3 | i4 | i5 | i6 | i7\n";

constexpr std::string_view kMultiplexerGrammarAllRegisters =
    "<start> ::= <B>\n"
    "<B> ::= <B> and <B> | <B> or <B> | not <B> | <B> if <B> else <B> | <var>\n"
    "<var> ::= s0 | s1 | s2 | i0 | i1 | i2 | i3 | i4 | i5 | i6 | i7\n";

Problem make_regression_problem(std::string name, std::string_view grammar_text,
                                std::shared_ptr<const Dataset> train,
                                std::shared_ptr<const Dataset> test) {
    Problem p;
    p.name = std::move(name);
    p.grammar = detect_recursion(parse_grammar(grammar_text, train->feature_count));
    validate_expression_grammar(p.grammar, train->feature_count);
    p.fitness_cases = static_cast<int>(train->size());
    p.train = train;
    p.test = std::move(test);
    auto grammar = std::make_shared<const Pcfg>(p.grammar);
    p.fitness = [grammar, train](const Derivation& d) {
        ExprNode e = expr_from_derivation(d, *grammar);
        std::vector<double> preds(train->size());
        for (size_t i = 0; i < train->size(); ++i) preds[i] = eval_expr(e, train->features[i]);
        return rrse(preds, train->targets);
    };
    return p;
}

}  // namespace

Problem make_pagie_problem(std::string_view grammar_text) {
    auto data = std::make_shared<const Dataset>(pagie_dataset());
    return make_regression_problem("pagie", grammar_text.empty() ? kPagieGrammar : grammar_text,
                                   data, nullptr);
}

Problem make_boston_problem(const std::string& csv_path, uint64_t split_seed,
                            std::string_view grammar_text) {
    auto [train, test] = load_boston(csv_path, split_seed);
    return make_regression_problem("boston",
                                   grammar_text.empty() ? kRegressionGrammar : grammar_text,
                                   std::make_shared<const Dataset>(std::move(train)),
                                   std::make_shared<const Dataset>(std::move(test)));
}

Problem make_parity_problem(std::string_view grammar_text) {
    Problem p;
    p.name = "parity5";
    p.grammar = detect_recursion(parse_grammar(grammar_text.empty() ? kParityGrammar : grammar_text));
    validate_boolean_grammar(p.grammar, parity_variables());
    p.fitness_cases = 32;
    auto grammar = std::make_shared<const Pcfg>(p.grammar);
    p.fitness = [grammar](const Derivation& d) {
        return static_cast<double>(
            parity_error_count(bool_from_derivation(d, *grammar, parity_variables())));
    };
    return p;
}

Problem make_multiplexer_problem(bool s0_most_significant, bool all_registers,
                                 std::string_view grammar_text) {
    Problem p;
    p.name = "mux11";
    if (grammar_text.empty())
        grammar_text = all_registers ? kMultiplexerGrammarAllRegisters : kMultiplexerGrammar;
    p.grammar = detect_recursion(parse_grammar(grammar_text));
    validate_boolean_grammar(p.grammar, multiplexer_variables());
    p.fitness_cases = 2048;
    auto grammar = std::make_shared<const Pcfg>(p.grammar);
    p.fitness = [grammar, s0_most_significant](const Derivation& d) {
        return static_cast<double>(multiplexer_error_count(
            bool_from_derivation(d, *grammar, multiplexer_variables()), s0_most_significant));
    };
    return p;
}

std::string_view builtin_grammar(std::string_view problem_name) {
    if (problem_name == "pagie") return kPagieGrammar;
    if (problem_name == "boston") return kRegressionGrammar;
    if (problem_name == "parity5") return kParityGrammar;
    if (problem_name == "mux11") return kMultiplexerGrammar;
    if (problem_name == "mux11_full") return kMultiplexerGrammarAllRegisters;
    throw std::invalid_argument("unknown problem name: " + std::string(problem_name));
}

}  // namespace gramevo
