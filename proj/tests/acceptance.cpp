// Acceptance suite: runs every gate criterion end to end and prints one
// PASS/FAIL line per criterion. The exit code is the number of failed
// gating criteria (criterion 5 is reported but does not gate).

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "gramevo/cli.hpp"
#include "gramevo/encoding.hpp"
#include "gramevo/engine.hpp"
#include "gramevo/problems.hpp"
#include "gramevo/stats.hpp"
#include "gramevo/variation.hpp"
#include "test_support.hpp"

using namespace gramevo;
namespace fs = std::filesystem;
using clock_type = std::chrono::steady_clock;

namespace {

struct Checker {
    std::vector<std::string> failures;

    void expect(bool ok, const std::string& what) {
        if (!ok) failures.push_back(what);
    }
    void expect_near(double got, double want, double tol, const std::string& what) {
        if (!(std::abs(got - want) <= tol))
            failures.push_back(what + ": got " + std::to_string(got) + ", want " +
                               std::to_string(want));
    }
};

int g_failed_criteria = 0;

void report(int id, const std::string& title, const Checker& c, double seconds, bool gating = true) {
    bool pass = c.failures.empty();
    if (!pass && gating) ++g_failed_criteria;
    std::printf("CRITERION %d %s%s — %s (%.1fs)\n", id, pass ? "PASS" : "FAIL",
                gating ? "" : " (soft)", title.c_str(), seconds);
    for (const auto& f : c.failures) std::printf("    %s\n", f.c_str());
}

struct Timer {
    clock_type::time_point t0 = clock_type::now();
    double seconds() const { return std::chrono::duration<double>(clock_type::now() - t0).count(); }
};

// Independent truth-table interpreter over derivations, keyed on the
// production's terminal skeleton; deliberately distinct from the library's
// AST fold.
bool oracle_eval(const Derivation& d, const Pcfg& g, const VarIndex& vars, uint32_t bits) {
    const Production& p = g.at(d.nt).productions[d.rule];
    std::vector<std::string> toks;
    std::vector<const Derivation*> kids;
    size_t ci = 0;
    for (const auto& s : p.symbols) {
        if (s.is_nonterminal())
            kids.push_back(&d.children[ci++]);
        else
            toks.push_back(s.text);
    }
    auto e = [&](size_t i) { return oracle_eval(*kids[i], g, vars, bits); };
    if (toks.empty() && kids.size() == 1) return e(0);
    if (toks == std::vector<std::string>{"and"}) return e(0) && e(1);
    if (toks == std::vector<std::string>{"or"}) return e(0) || e(1);
    if (toks == std::vector<std::string>{"not"} && kids.size() == 1) return !e(0);
    if (toks == std::vector<std::string>{"not", "(", "and", ")"}) return !(e(0) && e(1));
    if (toks == std::vector<std::string>{"not", "(", "or", ")"}) return !(e(0) || e(1));
    if (toks == std::vector<std::string>{"if", "else"}) return e(1) ? e(0) : e(2);
    if (toks.size() == 1 && kids.empty()) return (bits >> vars.at(toks[0])) & 1u;
    throw std::runtime_error("oracle: unrecognized production");
}

// ---------------------------------------------------------------------------

void criterion_1() {
    Timer timer;
    Checker c;

    Pcfg g = detect_recursion(parse_grammar(kTwoVarGrammar));

    // worked GE trace: integer codons through the two-variable grammar
    auto ge_tree = ge_map(IntGenotype{54, 7, 83, 237, 71, 123, 67, 142, 25, 195, 202, 153}, g);
    c.expect(ge_tree.has_value(), "GE trace mapped to INVALID");
    if (ge_tree) c.expect(phenotype_string(*ge_tree, g) == "1.0 - x", "GE trace phenotype != '1.0 - x'");

    // worked structured trace: real codons, per-non-terminal lists
    {
        ListGenotype<double> geno{{{0.29, 0.73, 0.52}, {0.86}, {0.41, 0.15}}};
        ListGenotype<double> original = geno;
        ScriptedRng none;
        Derivation tree = copsge_map(geno, g, 10, none);
        c.expect(phenotype_string(tree, g) == "y / x", "structured trace phenotype != 'y / x'");
        c.expect(geno == original, "structured trace extended a complete genotype");
    }

    // grammar mutation: second <expr> production mutated by -0.23
    {
        ScriptedRng rng;
        rng.uniforms = {0.9, 0.01, 0.9, 0.9, 0.9, 0.9, 0.9, 0.9, 0.9};
        rng.gaussians = {-0.23};
        Pcfg m = mutate_grammar(g, 0.05, 0.5, rng);
        c.expect_near(m.at(0).productions[0].probability, 0.73, 1e-9, "grammar mutation p0");
        c.expect_near(m.at(0).productions[1].probability, 0.27, 1e-9, "grammar mutation p1");
    }

    // probability adjustment: (0.45, 0.33, 0.33) with index 0 mutated
    {
        std::vector<Production> ps(3);
        ps[0].probability = 0.45;
        ps[1].probability = 0.33;
        ps[2].probability = 0.33;
        adjust_probabilities(ps, 0);
        c.expect_near(ps[0].probability, 0.45, 1e-9, "adjustment kept value");
        c.expect_near(ps[1].probability, 0.275, 1e-9, "adjustment p1");
        c.expect_near(ps[2].probability, 0.275, 1e-9, "adjustment p2");
    }

    // codon mutation: first <var> codon 0.41 + 0.23 -> 0.64
    {
        ListGenotype<double> geno{{{0.29, 0.73, 0.52}, {0.86}, {0.41, 0.15}}};
        ScriptedRng rng;
        rng.uniforms = {0.9, 0.9, 0.9, 0.9, 0.01, 0.9};
        rng.gaussians = {0.23};
        ListGenotype<double> m = gaussian_codon_mutation(geno, 0.05, 0.5, rng);
        c.expect_near(m.lists[2][0], 0.64, 1e-9, "codon mutation value");
        c.expect(m.lists[0] == geno.lists[0] && m.lists[1] == geno.lists[1] &&
                     m.lists[2][1] == 0.15,
                 "codon mutation touched other codons");
    }

    // mask crossover: mask (0, 1, 0) mixes the published parents
    {
        ListGenotype<double> p1{{{0.29, 0.73, 0.52}, {0.86}, {0.41, 0.15}}};
        ListGenotype<double> p2{{{0.16, 0.71, 0.48}, {0.23}, {0.19, 0.86, 0.56}}};
        ScriptedRng rng;
        rng.ints = {0, 1, 0};
        ListGenotype<double> child = mask_crossover(p1, p2, rng);
        c.expect(child.lists[0] == p1.lists[0] && child.lists[1] == p2.lists[1] &&
                     child.lists[2] == p1.lists[2],
                 "mask crossover offspring lists wrong");
    }

    report(1, "worked-example fidelity", c, timer.seconds());
}

void criterion_2() {
    Timer timer;
    Checker c;

    {
        Problem parity = make_parity_problem();
        Rng rng(2001);
        for (int i = 0; i < 1000; ++i) {
            ListGenotype<int> geno;
            geno.lists.resize(parity.grammar.nt_count());
            Derivation tree = sge_map(geno, parity.grammar, 8, rng);
            int oracle = 0;
            for (uint32_t m = 0; m < 32; ++m) {
                bool target = (std::popcount(m) % 2) == 1;
                oracle += oracle_eval(tree, parity.grammar, parity_variables(), m) != target;
            }
            if (parity.fitness(tree) != oracle) {
                c.expect(false, "parity fitness disagrees with the truth-table oracle");
                break;
            }
        }
    }
    {
        Problem mux = make_multiplexer_problem();
        Rng rng(2002);
        for (int i = 0; i < 1000; ++i) {
            ListGenotype<int> geno;
            geno.lists.resize(mux.grammar.nt_count());
            Derivation tree = sge_map(geno, mux.grammar, 7, rng);
            int oracle = 0;
            for (uint32_t m = 0; m < 2048; ++m) {
                uint32_t addr = ((m & 1u) << 2) | (m & 2u) | ((m >> 2) & 1u);
                bool target = (m >> (3 + addr)) & 1u;
                oracle += oracle_eval(tree, mux.grammar, multiplexer_variables(), m) != target;
            }
            if (mux.fitness(tree) != oracle) {
                c.expect(false, "multiplexer fitness disagrees with the truth-table oracle");
                break;
            }
        }
    }
    {
        Dataset d = pagie_dataset();
        c.expect(d.size() == 676, "pagie grid is not 676 rows");
        for (size_t i = 0; i < d.size(); ++i) {
            double x = d.features[i][0], y = d.features[i][1];
            double x4 = x * x * x * x, y4 = y * y * y * y;
            double direct = x4 / (1.0 + x4) + y4 / (1.0 + y4);
            if (std::abs(d.targets[i] - direct) >= 1e-12) {
                c.expect(false, "pagie target off by more than 1e-12 at row " + std::to_string(i));
                break;
            }
        }
    }

    report(2, "oracle equivalence (parity, multiplexer, pagie)", c, timer.seconds());
}

void criterion_3() {
    Timer timer;
    Checker c;

    // every personal grammar normalized across a full 30-generation run
    {
        Problem parity = make_parity_problem();
        Parameters params;
        params.population_size = 200;
        params.generations = 30;
        params.seed = 31337;
        long grammars_checked = 0;
        EvolveHooks hooks;
        hooks.on_generation = [&](const GenerationView& view) {
            if (!view.grammars) return;
            for (const Pcfg& g : *view.grammars) {
                ++grammars_checked;
                if (!probabilities_normalized(g))
                    c.expect(false, "grammar out of normalization at generation " +
                                        std::to_string(view.generation));
            }
        };
        evolve(Algorithm::copsge, parity, params, hooks);
        c.expect(grammars_checked == 200L * 31L, "hook did not see every individual");
    }

    // 10,000 structured mappings with zero non-terminals in the phenotype
    {
        Problem parity = make_parity_problem();
        Problem pagie = make_pagie_problem();
        Rng rng(3003);
        for (int i = 0; i < 5000; ++i) {
            ListGenotype<int> sgeno;
            sgeno.lists.resize(parity.grammar.nt_count());
            std::string p1 = phenotype_string(sge_map(sgeno, parity.grammar, 10, rng), parity.grammar);
            ListGenotype<double> cgeno;
            cgeno.lists.resize(pagie.grammar.nt_count());
            std::string p2 = phenotype_string(copsge_map(cgeno, pagie.grammar, 10, rng), pagie.grammar);
            if (p1.find('<') != std::string::npos || p2.find('<') != std::string::npos) {
                c.expect(false, "phenotype contains a non-terminal token");
                break;
            }
        }
    }

    // elitism: best fitness non-increasing on 20 seeded runs
    {
        Problem parity = make_parity_problem();
        for (uint64_t seed = 40; seed < 60; ++seed) {
            Parameters params;
            params.population_size = 100;
            params.generations = 15;
            params.elitism_count = 10;
            params.seed = seed;
            RunRecord rec = evolve(Algorithm::copsge, parity, params);
            for (size_t g = 1; g < rec.generations.size(); ++g)
                if (rec.generations[g].best_fitness > rec.generations[g - 1].best_fitness)
                    c.expect(false, "best fitness increased at seed " + std::to_string(seed));
        }
    }

    report(3, "invariant suite (normalization, completeness, elitism)", c, timer.seconds());
}

// Shared by criteria 4 and 5.
struct DeskScaleResult {
    std::vector<double> copsge_final;
    std::vector<double> ge_final;
    std::vector<double> nor_probability;  // of the final best individual, per run
};

DeskScaleResult desk_scale_runs() {
    DeskScaleResult out;
    Problem parity = make_parity_problem();
    const int runs = 30;
    const int b_index = parity.grammar.nt_index("B");

    for (int r = 0; r < runs; ++r) {
        Parameters params;
        params.population_size = 200;
        params.generations = 30;
        params.seed = 9000 + r;

        double nor_prob = 0.0;
        EvolveHooks hooks;
        hooks.on_generation = [&](const GenerationView& view) {
            if (view.generation != params.generations || !view.grammars) return;
            size_t best = 0;
            for (size_t i = 1; i < view.fitness.size(); ++i)
                if (view.fitness[i] < view.fitness[best]) best = i;
            nor_prob = (*view.grammars)[best].at(b_index).productions[3].probability;
        };
        RunRecord cop = evolve(Algorithm::copsge, parity, params, hooks);
        out.copsge_final.push_back(cop.generations.back().best_fitness);
        out.nor_probability.push_back(nor_prob);

        RunRecord ge = evolve(Algorithm::ge, parity, params);
        out.ge_final.push_back(ge.generations.back().best_fitness);
    }
    return out;
}

void criteria_4_and_5() {
    Timer timer;
    Checker c4;
    DeskScaleResult r = desk_scale_runs();

    double cop_mean = std::accumulate(r.copsge_final.begin(), r.copsge_final.end(), 0.0) / 30.0;
    double ge_mean = std::accumulate(r.ge_final.begin(), r.ge_final.end(), 0.0) / 30.0;
    c4.expect(cop_mean < ge_mean, "co-psge mean final best is not lower than ge's");

    MannWhitneyResult mw = mann_whitney_u(r.copsge_final, r.ge_final);
    double corrected = std::min(1.0, mw.p * 3.0);  // three baselines per problem in the protocol
    c4.expect(corrected < 0.05, "Bonferroni-corrected Mann-Whitney p = " +
                                    std::to_string(corrected) + " is not < 0.05");
    std::printf("    [desk scale] co-psge mean %.3f vs ge mean %.3f, corrected p = %.3g\n",
                cop_mean, ge_mean, corrected);
    report(4, "desk-scale statistical reproduction on 5-bit parity", c4, timer.seconds());

    Timer t5;
    Checker c5;
    double nor_mean =
        std::accumulate(r.nor_probability.begin(), r.nor_probability.end(), 0.0) / 30.0;
    std::printf("    [grammar drift] mean NOR probability in final best grammars: %.3f (uniform 0.2)\n",
                nor_mean);
    c5.expect(nor_mean > 0.2, "mean NOR probability did not rise above its uniform value");
    report(5, "qualitative grammar drift toward the NOR production", c5, t5.seconds(),
           /*gating=*/false);
}

void criterion_6() {
    Timer timer;
    Checker c;

    // exact-enumeration agreement for every size pair up to 8 per side
    {
        Rng rng(6006);
        for (size_t na = 1; na <= 8 && c.failures.empty(); ++na) {
            for (size_t nb = 1; nb <= 8 && c.failures.empty(); ++nb) {
                for (int rep = 0; rep < 2; ++rep) {
                    std::vector<double> a(na), b(nb);
                    for (auto& v : a) v = rng.uniform_int(6);
                    for (auto& v : b) v = rng.uniform_int(6);

                    // oracle: enumerate every split of the pooled midranks
                    std::vector<double> pooled = a;
                    pooled.insert(pooled.end(), b.begin(), b.end());
                    size_t n = pooled.size();
                    std::vector<size_t> order(n);
                    std::iota(order.begin(), order.end(), size_t{0});
                    std::sort(order.begin(), order.end(),
                              [&](size_t x, size_t y) { return pooled[x] < pooled[y]; });
                    std::vector<double> rank(n);
                    for (size_t i = 0; i < n;) {
                        size_t j = i;
                        while (j + 1 < n && pooled[order[j + 1]] == pooled[order[i]]) ++j;
                        for (size_t k = i; k <= j; ++k) rank[order[k]] = (i + j) / 2.0 + 1.0;
                        i = j + 1;
                    }
                    double rank_sum = 0.0;
                    for (size_t i = 0; i < na; ++i) rank_sum += rank[i];
                    double u_obs = rank_sum - static_cast<double>(na) * (na + 1) / 2.0;
                    long total = 0, le = 0, ge = 0;
                    std::vector<size_t> comb(na);
                    std::iota(comb.begin(), comb.end(), size_t{0});
                    while (true) {
                        double u = 0.0;
                        for (size_t i : comb) u += rank[i];
                        u -= static_cast<double>(na) * (na + 1) / 2.0;
                        ++total;
                        if (u <= u_obs + 1e-9) ++le;
                        if (u >= u_obs - 1e-9) ++ge;
                        size_t i = na;
                        while (i > 0 && comb[i - 1] == n - na + i - 1) --i;
                        if (i == 0) break;
                        ++comb[i - 1];
                        for (size_t k = i; k < na; ++k) comb[k] = comb[k - 1] + 1;
                    }
                    double p_oracle =
                        std::min(1.0, 2.0 * std::min(le, ge) / static_cast<double>(total));

                    MannWhitneyResult mw = mann_whitney_u(a, b);
                    if (std::abs(mw.p - p_oracle) > 0.02) {
                        c.expect(false, "p deviates from exact enumeration at sizes " +
                                            std::to_string(na) + "x" + std::to_string(nb));
                        break;
                    }
                }
            }
        }
    }

    KruskalWallisResult kw = kruskal_wallis({{1, 2, 3}, {4, 5, 6}, {7, 8, 9}});
    c.expect_near(kw.h, 7.2, 1e-9, "Kruskal-Wallis H on the fixture");

    report(6, "statistics correctness (Mann-Whitney exactness, Kruskal-Wallis fixture)", c,
           timer.seconds());
}

void criterion_7() {
    Timer timer;
    Checker c;

    auto slurp = [](const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        std::ostringstream out;
        out << in.rdbuf();
        return out.str();
    };

    ExperimentConfig cfg;
    cfg.algorithm = "copsge";
    cfg.problem = "parity5";
    cfg.runs = 3;
    cfg.seed = 77;
    cfg.params.population_size = 60;
    cfg.params.generations = 6;
    cfg.params.elitism_count = 6;
    cfg.params.parallel_eval = true;

    fs::path base = fs::temp_directory_path() / "gramevo_acceptance_det";
    fs::remove_all(base);

    cfg.out_dir = (base / "a").string();
    RunOutcome a = run_experiment(cfg);
    cfg.out_dir = (base / "b").string();
    RunOutcome b = run_experiment(cfg);
    cfg.out_dir = (base / "serial").string();
    cfg.params.parallel_eval = false;
    RunOutcome s = run_experiment(cfg);

    c.expect(a.exit_code == 0 && b.exit_code == 0 && s.exit_code == 0, "a run failed");
    c.expect(a.files.size() == 4, "expected 3 run CSVs plus the aggregate");
    for (size_t i = 0; i < a.files.size(); ++i) {
        if (slurp(a.files[i]) != slurp(b.files[i]))
            c.expect(false, "repeat invocation differs: " + a.files[i]);
        if (slurp(a.files[i]) != slurp(s.files[i]))
            c.expect(false, "parallel and serial evaluation differ: " + a.files[i]);
    }

    report(7, "byte-identical runs, parallel evaluation included", c, timer.seconds());
}

}  // namespace

int main() {
    Timer total;
    criterion_1();
    criterion_2();
    criterion_3();
    criteria_4_and_5();
    criterion_6();
    criterion_7();
    std::printf("acceptance finished in %.1fs, %d gating criterion(s) failed\n", total.seconds(),
                g_failed_criteria);
    return g_failed_criteria;
}
