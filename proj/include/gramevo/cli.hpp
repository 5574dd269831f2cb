#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "gramevo/engine.hpp"

namespace gramevo {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Exit codes used by the CLI; each failure class gets its own value.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitUnknownName = 2;   // unknown algorithm or problem
inline constexpr int kExitBadParameter = 3;  // value outside its legal range
inline constexpr int kExitIoError = 4;       // unreadable or unwritable file
inline constexpr int kExitConfigError = 5;   // malformed config, unknown key

struct ExperimentConfig {
    std::string algorithm;
    std::string problem;
    int runs = 30;
    uint64_t seed = 0;
    std::string out_dir = "runs";
    std::string grammar_path;  // optional override of the built-in grammar
    std::string dataset_path;  // boston only, required there
    uint64_t split_seed = 1;
    bool mux_s0_msb = true;         // s0 is the most significant address bit
    bool mux_all_registers = false; // use the corrected multiplexer grammar
    int threads = 0;                // OpenMP thread cap, 0 = library default
    Parameters params;
};

// Applies one `key = value` setting; throws ConfigError for unknown keys and
// type mismatches. Shared by the config file parser and flag overrides so
// both accept exactly the same keys.
void apply_setting(ExperimentConfig& cfg, std::string_view key, std::string_view value);

// Line-oriented `key = value` file; '#' lines are comments. Defaults match
// the benchmark protocol (population 1000, 50 generations, elitism 100, ...).
ExperimentConfig parse_config(std::string_view text);

// Builds the configured problem, loading grammar/dataset files as needed.
Problem build_problem(const ExperimentConfig& cfg);

// Shortest round-trip formatting, used everywhere a double lands in a CSV so
// outputs are byte-stable.
std::string format_double(double v);

// Schema: run,generation,best_fitness,mean_fitness,invalid_count,best_phenotype
// preceded by '#' metadata lines; the phenotype is double-quoted with
// embedded quotes doubled.
std::string run_record_csv(const RunRecord& record, int run_index);

// Mean and sample standard deviation of best fitness per generation.
std::string aggregate_csv(const std::vector<RunRecord>& records);

void write_file_atomic(const std::string& path, std::string_view content);

struct RunOutcome {
    int exit_code = kExitOk;
    std::string message;
    std::vector<std::string> files;
};

// Executes cfg.runs seeded runs (seed, seed+1, ...) and writes one CSV per
// run plus the aggregate. Runs execute in parallel when threads allow;
// outputs are byte-identical either way.
RunOutcome run_experiment(const ExperimentConfig& cfg);

struct CompareOptions {
    std::vector<std::string> dirs;  // one directory of run CSVs per algorithm
    double alpha = 0.05;
    std::string stat = "final-best";  // or "final-mean"
    std::string csv_out;              // optional machine-readable table
};

struct CompareOutcome {
    int exit_code = kExitOk;
    std::string message;
    std::string table_text;
    std::string table_csv;
};

// Kruskal-Wallis gate over all groups; on significance, pairwise
// Mann-Whitney of the first group against each other with Bonferroni
// correction and effect sizes.
CompareOutcome run_compare(const CompareOptions& opts);

int cli_main(int argc, char** argv);

}  // namespace gramevo
