#include "gramevo/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <CLI11.hpp>

#include "gramevo/stats.hpp"

namespace fs = std::filesystem;

namespace gramevo {

namespace {

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view kind) {
    throw ConfigError("key '" + std::string(key) + "': expected " + std::string(kind) + ", got '" +
                      std::string(value) + "'");
}

int to_int(std::string_view key, std::string_view value) {
    int v = 0;
    auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc() || p != value.data() + value.size()) bad_value(key, value, "integer");
    return v;
}

uint64_t to_u64(std::string_view key, std::string_view value) {
    uint64_t v = 0;
    auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc() || p != value.data() + value.size())
        bad_value(key, value, "non-negative integer");
    return v;
}

double to_double(std::string_view key, std::string_view value) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc() || p != value.data() + value.size()) bad_value(key, value, "number");
    return v;
}

bool to_bool(std::string_view key, std::string_view value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    bad_value(key, value, "boolean (true/false)");
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DatasetError("cannot read file: " + path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

std::string_view trim(std::string_view s) {
    size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

void apply_setting(ExperimentConfig& cfg, std::string_view key, std::string_view value) {
    auto& p = cfg.params;
    if (key == "algorithm") cfg.algorithm = value;
    else if (key == "problem") cfg.problem = value;
    else if (key == "runs") cfg.runs = to_int(key, value);
    else if (key == "seed") cfg.seed = to_u64(key, value);
    else if (key == "out") cfg.out_dir = value;
    else if (key == "grammar") cfg.grammar_path = value;
    else if (key == "dataset") cfg.dataset_path = value;
    else if (key == "split_seed") cfg.split_seed = to_u64(key, value);
    else if (key == "threads") cfg.threads = to_int(key, value);
    else if (key == "mux_s0_msb") cfg.mux_s0_msb = to_bool(key, value);
    else if (key == "mux_all_registers") cfg.mux_all_registers = to_bool(key, value);
    else if (key == "parallel") p.parallel_eval = to_bool(key, value);
    else if (key == "population_size") p.population_size = to_int(key, value);
    else if (key == "generations") p.generations = to_int(key, value);
    else if (key == "elitism_count") p.elitism_count = to_int(key, value);
    else if (key == "mutation_rate") p.mutation_rate = to_double(key, value);
    else if (key == "crossover_rate") p.crossover_rate = to_double(key, value);
    else if (key == "tournament_size") p.tournament_size = to_int(key, value);
    else if (key == "genotype_size") p.genotype_size = to_int(key, value);
    else if (key == "max_depth") p.max_depth = to_int(key, value);
    else if (key == "grammar_mutation_prob") p.grammar_mutation_prob = to_double(key, value);
    else if (key == "grammar_mutation_sd") p.grammar_mutation_sd = to_double(key, value);
    else if (key == "learning_factor") p.learning_factor = to_double(key, value);
    else throw ConfigError("unknown key '" + std::string(key) + "'");
}

ExperimentConfig parse_config(std::string_view text) {
    ExperimentConfig cfg;
    int line_no = 0;
    size_t pos = 0;
    while (pos <= text.size()) {
        size_t eol = text.find('\n', pos);
        std::string_view line =
            text.substr(pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++line_no;

        std::string_view t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        size_t eq = t.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
        apply_setting(cfg, trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
    }
    return cfg;
}

Problem build_problem(const ExperimentConfig& cfg) {
    std::string grammar_text;
    if (!cfg.grammar_path.empty()) grammar_text = read_file(cfg.grammar_path);
    if (cfg.problem == "pagie") return make_pagie_problem(grammar_text);
    if (cfg.problem == "boston") {
        if (cfg.dataset_path.empty())
            throw ConfigError("missing required key 'dataset' (CSV path) for problem boston");
        return make_boston_problem(cfg.dataset_path, cfg.split_seed, grammar_text);
    }
    if (cfg.problem == "parity5") return make_parity_problem(grammar_text);
    if (cfg.problem == "mux11")
        return make_multiplexer_problem(cfg.mux_s0_msb, cfg.mux_all_registers, grammar_text);
    throw std::invalid_argument("unknown problem name: " + cfg.problem + " (--problem)");
}

std::string format_double(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

namespace {

std::string quote_csv(std::string_view s) {
    std::string out = "\"";
    for (char c : s) {
        out += c;
        if (c == '"') out += '"';
    }
    out += '"';
    return out;
}

std::string parameter_comment(const Parameters& p) {
    std::ostringstream out;
    out << "# population_size=" << p.population_size << " generations=" << p.generations
        << " elitism_count=" << p.elitism_count << " mutation_rate=" << format_double(p.mutation_rate)
        << " crossover_rate=" << format_double(p.crossover_rate)
        << " tournament_size=" << p.tournament_size << " genotype_size=" << p.genotype_size
        << " max_depth=" << p.max_depth
        << " grammar_mutation_prob=" << format_double(p.grammar_mutation_prob)
        << " grammar_mutation_sd=" << format_double(p.grammar_mutation_sd)
        << " learning_factor=" << format_double(p.learning_factor) << "\n";
    return out.str();
}

}  // namespace

std::string run_record_csv(const RunRecord& record, int run_index) {
    std::ostringstream out;
    out << "# algorithm=" << record.algorithm << "\n# problem=" << record.problem
        << "\n# seed=" << record.seed << "\n"
        << parameter_comment(record.params)
        << "run,generation,best_fitness,mean_fitness,invalid_count,best_phenotype\n";
    for (const auto& g : record.generations) {
        out << run_index << ',' << g.generation << ',' << format_double(g.best_fitness) << ','
            << format_double(g.mean_fitness) << ',' << g.invalid_count << ','
            << quote_csv(g.best_phenotype) << "\n";
    }
    return out.str();
}

std::string aggregate_csv(const std::vector<RunRecord>& records) {
    std::ostringstream out;
    out << "# algorithm=" << records.front().algorithm << " problem=" << records.front().problem
        << " runs=" << records.size() << " base_seed=" << records.front().seed << "\n"
        << "generation,mean_best_fitness,std_best_fitness\n";
    size_t generations = records.front().generations.size();
    for (size_t g = 0; g < generations; ++g) {
        double mean = 0.0;
        for (const auto& r : records) mean += r.generations[g].best_fitness;
        mean /= static_cast<double>(records.size());
        double var = 0.0;
        for (const auto& r : records) {
            double d = r.generations[g].best_fitness - mean;
            var += d * d;
        }
        double sd = records.size() > 1 ? std::sqrt(var / static_cast<double>(records.size() - 1)) : 0.0;
        out << g << ',' << format_double(mean) << ',' << format_double(sd) << "\n";
    }
    return out.str();
}

void write_file_atomic(const std::string& path, std::string_view content) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DatasetError("cannot write file: " + tmp);
        out << content;
        if (!out) throw DatasetError("write failed: " + tmp);
    }
    fs::rename(tmp, path);
}

RunOutcome run_experiment(const ExperimentConfig& cfg) {
    Algorithm algo;
    try {
        algo = algorithm_from_name(cfg.algorithm);
    } catch (const std::invalid_argument& e) {
        return {kExitUnknownName, std::string(e.what()) + " (--algorithm)", {}};
    }
    try {
        cfg.params.validate();
        if (cfg.runs < 1) throw std::invalid_argument("runs must be >= 1");
    } catch (const std::invalid_argument& e) {
        return {kExitBadParameter, e.what(), {}};
    }

    Problem problem;
    try {
        problem = build_problem(cfg);
    } catch (const std::invalid_argument& e) {
        return {kExitUnknownName, e.what(), {}};
    } catch (const DatasetError& e) {
        return {kExitIoError, e.what(), {}};
    } catch (const GrammarError& e) {
        return {kExitConfigError, std::string("grammar: ") + e.what(), {}};
    } catch (const ConfigError& e) {
        return {kExitConfigError, e.what(), {}};
    }

#ifdef _OPENMP
    if (cfg.threads > 0) omp_set_num_threads(cfg.threads);
#endif

    std::vector<RunRecord> records(cfg.runs);
    const int runs = cfg.runs;
#pragma omp parallel for schedule(dynamic, 1) if (runs > 1)
    for (int r = 0; r < runs; ++r) {
        Parameters p = cfg.params;
        p.seed = cfg.seed + static_cast<uint64_t>(r);
        records[r] = evolve(algo, problem, p);
    }

    RunOutcome outcome;
    try {
        fs::create_directories(cfg.out_dir);
        std::string stem = cfg.algorithm + "_" + cfg.problem;
        for (int r = 0; r < runs; ++r) {
            std::string path = (fs::path(cfg.out_dir) /
                                (stem + "_run" + std::to_string(r) + "_seed" +
                                 std::to_string(records[r].seed) + ".csv"))
                                   .string();
            write_file_atomic(path, run_record_csv(records[r], r));
            outcome.files.push_back(path);
        }
        std::string agg = (fs::path(cfg.out_dir) / (stem + "_aggregate.csv")).string();
        write_file_atomic(agg, aggregate_csv(records));
        outcome.files.push_back(agg);
    } catch (const std::exception& e) {
        return {kExitIoError, e.what(), outcome.files};
    }
    outcome.message = std::to_string(runs) + " runs written to " + cfg.out_dir;
    return outcome;
}

// ---------------------------------------------------------------------------
// compare

namespace {

struct GroupSamples {
    std::string algorithm;
    std::string problem;
    std::vector<double> values;
};

GroupSamples read_group(const std::string& dir, const std::string& stat) {
    GroupSamples g;
    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        std::string name = entry.path().filename().string();
        if (entry.is_regular_file() && name.find("_run") != std::string::npos &&
            name.ends_with(".csv"))
            files.push_back(entry.path().string());
    }
    if (files.empty()) throw DatasetError("no run CSVs found in " + dir);
    std::sort(files.begin(), files.end());

    for (const auto& path : files) {
        std::ifstream in(path);
        if (!in) throw DatasetError("cannot read " + path);
        std::string line, last_data;
        std::string algorithm, problem;
        while (std::getline(in, line)) {
            if (line.starts_with("# algorithm=")) algorithm = trim(line.substr(12));
            else if (line.starts_with("# problem=")) problem = trim(line.substr(10));
            else if (!line.empty() && line[0] != '#' && std::isdigit((unsigned char)line[0]))
                last_data = line;
        }
        if (last_data.empty()) throw DatasetError("no data rows in " + path);
        // run,generation,best_fitness,mean_fitness,...
        std::vector<std::string_view> cols;
        std::string_view view = last_data;
        size_t start = 0;
        for (int c = 0; c < 5 && start <= view.size(); ++c) {
            size_t comma = view.find(',', start);
            cols.push_back(view.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                              : comma - start));
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
        if (cols.size() < 4) throw DatasetError("malformed data row in " + path);
        std::string_view cell = stat == "final-mean" ? cols[3] : cols[2];
        double v = 0.0;
        auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
        if (ec != std::errc()) throw DatasetError("bad fitness value in " + path);
        g.values.push_back(v);
        if (g.algorithm.empty()) g.algorithm = algorithm;
        if (g.problem.empty()) g.problem = problem;
    }
    if (g.algorithm.empty()) g.algorithm = fs::path(dir).filename().string();
    return g;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    size_t n = v.size();
    return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

}  // namespace

CompareOutcome run_compare(const CompareOptions& opts) {
    CompareOutcome out;
    if (opts.dirs.size() < 2)
        return {kExitUsage, "compare needs at least two run directories", "", ""};
    if (opts.stat != "final-best" && opts.stat != "final-mean")
        return {kExitBadParameter, "unknown stat '" + opts.stat + "' (final-best|final-mean)", "", ""};
    if (opts.alpha <= 0.0 || opts.alpha > 1.0)
        return {kExitBadParameter, "alpha must be in (0, 1]", "", ""};

    std::vector<GroupSamples> groups;
    try {
        for (const auto& d : opts.dirs) groups.push_back(read_group(d, opts.stat));
    } catch (const std::exception& e) {
        return {kExitIoError, e.what(), "", ""};
    }
    for (const auto& g : groups)
        if (g.problem != groups.front().problem)
            return {kExitUnknownName,
                    "mismatched problems across directories: '" + groups.front().problem +
                        "' vs '" + g.problem + "'",
                    "", ""};

    std::vector<std::vector<double>> samples;
    for (const auto& g : groups) samples.push_back(g.values);
    KruskalWallisResult kw = kruskal_wallis(samples);

    std::ostringstream text, csv;
    text << "problem: " << groups.front().problem << "  statistic: " << opts.stat << "\n";
    for (const auto& g : groups)
        text << "  " << g.algorithm << ": n=" << g.values.size()
             << " median=" << format_double(median(g.values)) << "\n";
    text << "Kruskal-Wallis: H=" << format_double(kw.h) << " p=" << format_double(kw.p) << "\n";

    csv << "baseline,u,z,p,p_bonferroni,significant,better,r,effect\n";

    if (kw.p >= opts.alpha) {
        text << "no significant differences at alpha=" << format_double(opts.alpha) << "\n";
    } else {
        const auto& ref = groups.front();
        std::vector<MannWhitneyResult> mw;
        std::vector<double> raw_p;
        for (size_t i = 1; i < groups.size(); ++i) {
            mw.push_back(mann_whitney_u(ref.values, groups[i].values));
            raw_p.push_back(mw.back().p);
        }
        std::vector<double> corrected = bonferroni(raw_p);

        text << "pairwise Mann-Whitney, " << ref.algorithm << " vs each (Bonferroni x"
             << raw_p.size() << "):\n";
        char buf[160];
        std::snprintf(buf, sizeof buf, "  %-10s %10s %8s %10s %10s %6s %8s %7s\n", "baseline", "U",
                      "z", "p", "p_bonf", "sig", "r", "effect");
        text << buf;
        for (size_t i = 0; i < mw.size(); ++i) {
            const auto& g = groups[i + 1];
            bool significant = corrected[i] < opts.alpha;
            bool better = significant && median(ref.values) < median(g.values);
            EffectSize es = effect_size_r(mw[i].z,
                                          static_cast<int>(ref.values.size() + g.values.size()),
                                          corrected[i], opts.alpha);
            std::snprintf(buf, sizeof buf, "  %-10s %10.1f %8.3f %10.4g %10.4g %6s %8.3f %7s\n",
                          g.algorithm.c_str(), mw[i].u, mw[i].z, mw[i].p, corrected[i],
                          better ? "yes" : (significant ? "worse" : "-"), es.r,
                          effect_symbol(es.category).c_str());
            text << buf;
            csv << g.algorithm << ',' << format_double(mw[i].u) << ',' << format_double(mw[i].z)
                << ',' << format_double(mw[i].p) << ',' << format_double(corrected[i]) << ','
                << (significant ? "yes" : "no") << ',' << (better ? "yes" : "no") << ','
                << format_double(es.r) << ',' << effect_symbol(es.category) << "\n";
        }
    }

    out.table_text = text.str();
    out.table_csv = csv.str();
    if (!opts.csv_out.empty()) {
        try {
            write_file_atomic(opts.csv_out, out.table_csv);
        } catch (const std::exception& e) {
            return {kExitIoError, e.what(), out.table_text, out.table_csv};
        }
    }
    return out;
}

// ---------------------------------------------------------------------------

int cli_main(int argc, char** argv) {
    CLI::App app{"grammar-based evolutionary computation benchmark"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "execute seeded runs and write CSVs");
    std::string config_path;
    std::vector<std::pair<std::string, std::string>> flag_settings;
    run->add_option("--config", config_path, "key = value configuration file");
    for (const char* key : {"algorithm", "problem", "runs", "seed", "out", "grammar", "dataset",
                            "threads"}) {
        run->add_option(std::string("--") + key)
            ->description(std::string("same as config key ") + key)
            ->each([&flag_settings, key](const std::string& v) { flag_settings.emplace_back(key, v); });
    }
    run->allow_extras();

    auto* compare = app.add_subcommand("compare", "statistical comparison of run directories");
    CompareOptions copts;
    compare->add_option("--alpha", copts.alpha, "significance level")->capture_default_str();
    compare->add_option("--stat", copts.stat, "per-run sample statistic (final-best|final-mean)")
        ->capture_default_str();
    compare->add_option("--csv", copts.csv_out, "write the machine-readable table here");
    compare->add_option("dirs", copts.dirs, "run directories, reference first")->expected(-1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    if (run->parsed()) {
        ExperimentConfig cfg;
        try {
            if (!config_path.empty()) cfg = parse_config(read_file(config_path));
        } catch (const ConfigError& e) {
            std::cerr << "config error: " << e.what() << "\n";
            return kExitConfigError;
        } catch (const DatasetError& e) {
            std::cerr << e.what() << "\n";
            return kExitIoError;
        }
        try {
            for (const auto& [k, v] : flag_settings) apply_setting(cfg, k, v);
            // trailing --key value pairs override everything else
            std::vector<std::string> extras = run->remaining();
            for (size_t i = 0; i < extras.size(); ++i) {
                std::string key = extras[i];
                if (!key.starts_with("--") || i + 1 >= extras.size())
                    throw ConfigError("expected --key value pairs, got '" + key + "'");
                apply_setting(cfg, key.substr(2), extras[++i]);
            }
        } catch (const ConfigError& e) {
            std::cerr << "config error: " << e.what() << "\n";
            return kExitConfigError;
        }
        RunOutcome outcome = run_experiment(cfg);
        if (outcome.exit_code != kExitOk)
            std::cerr << "error: " << outcome.message << "\n";
        else
            std::cout << outcome.message << "\n";
        return outcome.exit_code;
    }

    CompareOutcome outcome = run_compare(copts);
    if (outcome.exit_code != kExitOk) {
        std::cerr << "error: " << outcome.message << "\n";
        return outcome.exit_code;
    }
    std::cout << outcome.table_text;
    return kExitOk;
}

}  // namespace gramevo
