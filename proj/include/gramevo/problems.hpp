#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "gramevo/encoding.hpp"
#include "gramevo/grammar.hpp"

namespace gramevo {

// ---------------------------------------------------------------------------
// Datasets

struct Dataset {
    std::vector<std::vector<double>> features;  // row-major
    std::vector<double> targets;
    int feature_count = 0;

    size_t size() const { return targets.size(); }
};

// 26x26 grid over [-5, 5] with step 0.4 in both variables (676 rows); the
// target is 1/(1 + x0^-4) + 1/(1 + x1^-4).
Dataset pagie_dataset();

// Reads a comma-separated file with 13 feature columns plus a trailing
// target column, auto-detecting an optional header row, shuffles rows
// deterministically by split_seed and returns (train, test) as a 90/10 split.
std::pair<Dataset, Dataset> load_boston(const std::string& path, uint64_t split_seed);

class DatasetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Arithmetic expressions
//
// Division, logarithm and inv are protected (a/0 = 1, log of a non-positive
// value = 0, inv 0 = 1); every node's value saturates at +-1e150 so
// evaluation is total and finite on any derivable expression.

inline constexpr double kValueSaturation = 1e150;

struct ExprNode {
    enum class Op { add, sub, mul, div, sin, cos, exp, log, inv, variable, constant };
    Op op = Op::constant;
    int var = -1;
    double value = 0.0;
    std::vector<ExprNode> kids;
};

// Structural fold of a derivation; the derivation tree decides the grouping
// of flat operator chains, which the yield string cannot express.
ExprNode expr_from_derivation(const Derivation& d, const Pcfg& g);

// Token-string route for standalone evaluation. Flat operator chains with no
// parentheses are grouped left to right.
ExprNode parse_expr(std::string_view phenotype);

double eval_expr(const ExprNode& e, std::span<const double> features);

// parse_expr + eval_expr in one call.
double eval_arith(std::string_view phenotype, std::span<const double> features);

// Throws when some production of the grammar cannot be interpreted as an
// arithmetic expression or references a feature index out of range.
void validate_expression_grammar(const Pcfg& g, int feature_count);

// ---------------------------------------------------------------------------
// Boolean expressions

struct BoolNode {
    enum class Op { band, bor, bnot, ifelse, variable };
    Op op = Op::variable;
    int var = -1;
    std::vector<BoolNode> kids;  // ifelse: {value-if-true, condition, value-if-false}
};

// variable name -> bit index in the packed input word
using VarIndex = std::unordered_map<std::string, int>;

const VarIndex& parity_variables();       // b0..b4 -> bits 0..4
const VarIndex& multiplexer_variables();  // s0 s1 s2 i0..i7 -> bits 0..10

BoolNode bool_from_derivation(const Derivation& d, const Pcfg& g, const VarIndex& vars);

// Precedence for the string route: if/else binds loosest, then or, then and,
// then not.
BoolNode parse_bool(std::string_view phenotype, const VarIndex& vars);

bool eval_bool_tree(const BoolNode& b, uint32_t inputs);

// parse_bool + eval_bool_tree; inputs is a packed bit word, bit i = variable i.
int eval_bool(std::string_view phenotype, uint32_t inputs, const VarIndex& vars);

void validate_boolean_grammar(const Pcfg& g, const VarIndex& vars);

// ---------------------------------------------------------------------------
// Fitness

// Root relative squared error: sqrt(sum (pred-y)^2 / sum (mean(y)-y)^2).
// Throws std::invalid_argument when targets are all identical. A NaN in the
// predictions yields +infinity (worst fitness).
double rrse(std::span<const double> predictions, std::span<const double> targets);

// Mismatch count against even parity over all 32 five-bit inputs (target 0
// for an even number of ones).
int parity_error_count(const BoolNode& b);
int parity_fitness(std::string_view phenotype);

// Mismatch count against the 11-bit multiplexer over all 2048 inputs; the
// target is the data register addressed by s0..s2 (s0 the most significant
// bit unless s0_most_significant is false).
int multiplexer_error_count(const BoolNode& b, bool s0_most_significant = true);
int multiplexer_fitness(std::string_view phenotype, bool s0_most_significant = true);

// ---------------------------------------------------------------------------
// Problem registry

struct Problem {
    std::string name;
    Pcfg grammar;  // parsed, recursion flags computed
    std::function<double(const Derivation&)> fitness;
    int fitness_cases = 0;
    std::shared_ptr<const Dataset> train;  // regression problems only
    std::shared_ptr<const Dataset> test;
};

// An empty grammar_text selects the built-in grammar for the problem.
Problem make_pagie_problem(std::string_view grammar_text = {});
Problem make_boston_problem(const std::string& csv_path, uint64_t split_seed,
                            std::string_view grammar_text = {});
Problem make_parity_problem(std::string_view grammar_text = {});
// The published multiplexer grammar omits register i2 from <var>; pass
// all_registers = true for the corrected grammar that can express an exact
// multiplexer.
Problem make_multiplexer_problem(bool s0_most_significant = true, bool all_registers = false,
                                 std::string_view grammar_text = {});

// Built-in grammar sources, also shipped under grammars/.
std::string_view builtin_grammar(std::string_view problem_name);

}  // namespace gramevo
