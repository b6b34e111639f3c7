// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Usage: axomap_acceptance [criterion numbers...]   (default: all)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "../oracles.hpp"
#include "axomap/apps.hpp"
#include "axomap/charac.hpp"
#include "axomap/dataset.hpp"
#include "axomap/dse.hpp"
#include "axomap/estimate.hpp"
#include "axomap/map.hpp"
#include "axomap/netlist.hpp"
#include "axomap/rng.hpp"
#include "axomap/stats.hpp"

using namespace axomap;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

// Collects the first few failure reasons.
struct Check {
    Outcome out;
    int failures = 0;

    void expect(bool ok, const std::string& what)
    {
        if (ok) {
            return;
        }
        out.pass = false;
        if (++failures <= 3) {
            out.detail += (out.detail.empty() ? "" : "; ") + what;
        }
    }
};

const Netlist& mul4()
{
    static const Netlist n = build_multiplier(4, true);
    return n;
}

const Netlist& mul8()
{
    static const Netlist n = build_multiplier(8, true);
    return n;
}

const Dataset& full_4x4()
{
    static const Dataset d = [] {
        Dataset x;
        x.records = characterize(mul4(), all_configs(10));
        x.netlist_name = mul4().name();
        x.removable = 10;
        return x;
    }();
    return d;
}

std::string num(double v)
{
    std::ostringstream s;
    s << v;
    return s.str();
}

// 1 -------------------------------------------------------------------------

Outcome operator_correctness()
{
    Check c;
    for (const Netlist* n : {&mul4(), &mul8()}) {
        const auto full = Config::all_ones(n->removable_count());
        const auto table = n->product_table(full);
        std::size_t pairs = 0;
        for (std::int64_t a = n->min_a(); a <= n->max_a(); ++a) {
            for (std::int64_t b = n->min_b(); b <= n->max_b(); ++b) {
                c.expect(n->evaluate(full, a, b) == a * b, n->name() + " evaluate(" + num(a) + "," + num(b) + ")");
                c.expect(table.at(a, b) == a * b, n->name() + " table(" + num(a) + "," + num(b) + ")");
                ++pairs;
            }
        }
        c.expect(pairs == n->operand_space(), n->name() + " operand count");
    }
    const auto add = build_adder(3);
    const auto full = Config::all_ones(add.removable_count());
    for (std::int64_t a = 0; a < 8; ++a) {
        for (std::int64_t b = 0; b < 8; ++b) {
            c.expect(add.evaluate(full, a, b) == a + b, "adder " + num(a) + "+" + num(b));
        }
    }
    c.out.detail += (c.out.detail.empty() ? "" : "; ") + std::string("65536 8x8 pairs checked");
    return c.out;
}

// 2 -------------------------------------------------------------------------

Outcome cardinalities()
{
    Check c;
    c.expect(mul4().removable_count() == 10, "4x4 L != 10");
    c.expect(mul8().removable_count() == 36, "8x8 L != 36");
    c.expect(all_configs(10).size() == 1024, "L=10 config count != 1024");
    const auto r10 = rank_quadratic_features(make_samples(full_4x4(), Metric::pdplut));
    c.expect(r10.size() == 45, "L=10 ranked pairs = " + num(static_cast<double>(r10.size())));
    const auto d8 = build_dataset(mul8(), SamplingPlan::sized(36, 120, 1));
    const auto r36 = rank_quadratic_features(make_samples(d8, Metric::pdplut));
    c.expect(r36.size() == 630, "L=36 ranked pairs = " + num(static_cast<double>(r36.size())));
    c.expect(std::set<LutPair>(r36.begin(), r36.end()).size() == 630, "L=36 pairs not distinct");
    c.expect(default_quad_schedule(36).back() == 630, "L=36 schedule cap");
    c.out.detail = c.out.pass ? "1024 / 45 / 630" : c.out.detail;
    return c.out;
}

// 3 -------------------------------------------------------------------------

Outcome statistics_identities()
{
    Check c;
    Rng rng(303);
    double worst = 0;
    for (int k = 0; k < 1000; ++k) {
        const std::size_t n = 3 + rng.below(200);
        std::vector<double> x(n), y(n);
        const double slope = (rng.uniform() - 0.5) * 10;
        const double noise = rng.uniform() * 5;
        const bool binary = k % 2 == 0;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = binary ? static_cast<double>(rng.below(2)) : rng.uniform() * 100;
            y[i] = slope * x[i] + noise * (rng.uniform() - 0.5);
        }
        if (std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; })) {
            x[0] = 1 - x[0];
        }
        const double diff = std::fabs(single_regressor_r(x, y) - std::fabs(pearson(x, y)));
        worst = std::max(worst, diff);
        c.expect(diff <= 1e-9, "dataset " + num(k) + " differs by " + num(diff));
    }
    for (int k = 0; k < 20; ++k) {
        const int L = 4 + static_cast<int>(rng.below(9));
        Samples s;
        s.removable = L;
        s.configs = sample_random(L, std::min<std::size_t>(40 + rng.below(80), std::size_t{1} << L), rng.next());
        for (const auto& cf : s.configs) {
            s.target.push_back(rng.uniform() + cf.count() + (cf.used(0) && cf.used(1) ? 2.0 : 0.0));
        }
        const auto rep = correlation_report(s);
        for (int i = 0; i < L; ++i) {
            for (int j = 0; j < L; ++j) {
                c.expect(rep.at(i, j) == rep.at(j, i), "matrix asymmetric at " + num(i) + "," + num(j));
                c.expect(multivariate_r(s, i == j ? 0 : i, i == j ? 1 : j) ==
                             multivariate_r(s, i == j ? 1 : j, i == j ? 0 : i),
                         "multivariate_r asymmetric");
            }
        }
    }
    if (c.out.pass) {
        c.out.detail = "max |sqrt(R^2) - |r|| = " + num(worst);
    }
    return c.out;
}

// 4 -------------------------------------------------------------------------

Outcome nested_r2()
{
    Check c;
    std::string detail;
    for (const auto m : {Metric::pdplut, Metric::avg_abs_rel_err}) {
        const auto s = make_samples(full_4x4(), m);
        const auto ranked = rank_quadratic_features(s);
        const auto prog = poly_progression(s, ranked, 45, 0);
        c.expect(prog.size() == 46, std::string(metric_name(m)) + " progression length");
        for (std::size_t k = 1; k < prog.size(); ++k) {
            c.expect(prog[k].r2_train >= prog[k - 1].r2_train - 1e-9,
                     std::string(metric_name(m)) + " drops at " + num(static_cast<double>(k)));
        }
        detail += std::string(metric_name(m)) + " " + num(prog.front().r2_train) + "->" + num(prog.back().r2_train) + " ";
    }
    if (c.out.pass) {
        c.out.detail = detail;
    }
    return c.out;
}

// 5, 6 ----------------------------------------------------------------------

struct GridInstance {
    MapProblem problem;
    bool feasible = false;
    double objective = 0;
};

// Every (n_quad, wt_b, const_sf) problem at L = 10 with its exhaustive-scan optimum.
const std::vector<GridInstance>& map_grid()
{
    static const std::vector<GridInstance> grid = [] {
        ModelLadder ladder(make_samples(full_4x4(), Metric::pdplut), make_samples(full_4x4(), Metric::avg_abs_rel_err), 0);
        const auto maxima = ladder.maxima();
        const auto configs = all_configs(10);
        std::vector<GridInstance> out;
        for (const auto nq : default_quad_schedule(10)) {
            const auto [ppa, behav] = ladder.models(nq);
            for (const double sf : kConstSfSweep) {
                for (const double w : weight_grid(0.05)) {
                    GridInstance g{formulate(ppa, behav, w, sf, nq, maxima)};
                    const auto& p = g.problem;
                    for (const auto& cf : configs) {
                        const double vp = p.ppa_model.predict(cf);
                        const double vb = p.behav_model.predict(cf);
                        if (vp > sf * maxima.p_max || vb > sf * maxima.b_max) {
                            continue;
                        }
                        const double obj = w * vb / maxima.b_max + (1 - w) * vp / maxima.p_max;
                        if (!g.feasible || obj < g.objective) {
                            g.feasible = true;
                            g.objective = obj;
                        }
                    }
                    out.push_back(std::move(g));
                }
            }
        }
        return out;
    }();
    return grid;
}

bool same_objective(double a, double b) { return std::fabs(a - b) <= 1e-9 * (1 + std::fabs(b)); }

Outcome exact_solver()
{
    Check c;
    std::size_t match = 0, feasible = 0;
    for (const auto& g : map_grid()) {
        const auto s = solve_exact(g.problem);
        const bool ok = s.feasible == g.feasible && (!g.feasible || s.objective == g.objective);
        match += ok;
        feasible += g.feasible;
        c.expect(ok, "wt " + num(g.problem.wt_b) + " sf " + num(g.problem.const_sf) + " nq " +
                         num(static_cast<double>(g.problem.n_quad)));
    }
    c.out.detail += (c.out.detail.empty() ? "" : "; ") + std::to_string(match) + "/" +
                    std::to_string(map_grid().size()) + " instances match (" + std::to_string(feasible) + " feasible)";
    return c.out;
}

Outcome heuristic_solver()
{
    std::size_t match = 0;
    for (std::size_t k = 0; k < map_grid().size(); ++k) {
        const auto& g = map_grid()[k];
        const auto s = solve_heuristic(g.problem, k);
        match += s.feasible == g.feasible && (!g.feasible || same_objective(s.objective, g.objective));
    }
    const double rate = static_cast<double>(match) / static_cast<double>(map_grid().size());
    return {rate >= 0.95, std::to_string(match) + "/" + std::to_string(map_grid().size()) + " = " + num(100 * rate) + "%"};
}

// 7 -------------------------------------------------------------------------

Outcome hypervolume()
{
    Check c;
    const std::vector<std::pair<double, double>> one{{0, 0}};
    const std::vector<std::pair<double, double>> two{{0, 0.5}, {0.5, 0}};
    c.expect(std::fabs(hypervolume2d(one, {1, 1}) - 1.0) <= 1e-12, "{(0,0)}");
    c.expect(std::fabs(hypervolume2d(two, {1, 1}) - 0.75) <= 1e-12, "{(0,0.5),(0.5,0)}");
    Rng rng(707);
    int tested = 0;
    while (tested < 10000) {
        std::vector<oracle::Point> raw;
        for (std::size_t i = 0, n = 1 + rng.below(30); i < n; ++i) {
            raw.push_back({rng.uniform() * 1.1, rng.uniform() * 1.1});
        }
        std::vector<std::pair<double, double>> front;
        for (const auto i : oracle::nondominated(raw)) {
            front.emplace_back(raw[i].x, raw[i].y);
        }
        const std::pair<double, double> extra{rng.uniform(), rng.uniform()};
        const bool dominated = std::any_of(front.begin(), front.end(), [&](const auto& p) {
            return p.first <= extra.first && p.second <= extra.second;
        });
        if (dominated) {
            continue;
        }
        ++tested;
        const double before = hypervolume2d(front, {1, 1});
        front.push_back(extra);
        const double after = hypervolume2d(front, {1, 1});
        c.expect(after >= before, "front " + num(tested) + " shrank");
    }
    if (c.out.pass) {
        c.out.detail = "analytic exact; 10000 random fronts monotone";
    }
    return c.out;
}

// 8 -------------------------------------------------------------------------

Outcome map_plus_ga()
{
    Check c;
    std::string detail;
    const auto inputs = operator_inputs(mul4(), full_4x4(), Metric::pdplut, Metric::avg_abs_rel_err);
    for (const double sf : {0.5, 0.8, 1.0}) {
        ExperimentSettings s;
        s.methods = {"GA", "MaP+GA"};
        s.n_seeds = 10;
        s.const_sf = sf;
        const auto rep = run_experiment(inputs, s);

        // the true Pareto set of the same (estimator) fitness, by exhaustive enumeration
        const auto est_p = fit_estimator(inputs.ppa, s.estimator, s.seed).first;
        const auto est_b = fit_estimator(inputs.behav, s.estimator, s.seed).first;
        std::vector<ParetoPoint> all;
        for (const auto& cf : all_configs(10)) {
            all.push_back({cf, std::max(0.0, est_p.predict(cf)), std::max(0.0, est_b.predict(cf))});
        }
        const auto truth = pareto_filter(all, rep.constraints);
        std::set<Config> true_set;
        for (const auto& p : truth.points) {
            true_set.insert(p.config);
        }

        int subset_runs = 0;
        for (int seed = 0; seed < 10; ++seed) {
            const auto& ga = rep.run("GA", seed);
            const auto& mg = rep.run("MaP+GA", seed);
            c.expect(!ga.trajectory.empty() && !mg.trajectory.empty() &&
                         ga.trajectory.back().evals == mg.trajectory.back().evals,
                     "unequal evaluation budgets at sf " + num(sf));
            subset_runs += std::all_of(mg.ppf.points.begin(), mg.ppf.points.end(),
                                       [&](const ParetoPoint& p) { return true_set.count(p.config) > 0; });
        }
        const double hv_ga = rep.mean_hv_ppf("GA");
        const double hv_mg = rep.mean_hv_ppf("MaP+GA");
        c.expect(hv_mg >= hv_ga, "sf " + num(sf) + ": MaP+GA " + num(hv_mg) + " < GA " + num(hv_ga));
        c.expect(subset_runs >= 9, "sf " + num(sf) + ": only " + num(subset_runs) + "/10 fronts within the true set");
        detail += "sf " + num(sf) + ": HV " + num(hv_mg) + " vs " + num(hv_ga) + ", subset " + num(subset_runs) + "/10; ";
    }
    if (c.out.pass) {
        c.out.detail = detail;
    }
    return c.out;
}

// 9 -------------------------------------------------------------------------

Outcome ppf_vpf()
{
    Check c;
    const auto inputs = operator_inputs(mul4(), full_4x4(), Metric::pdplut, Metric::avg_abs_rel_err);
    ExperimentSettings s;
    s.n_seeds = 3;
    s.ga.max_generations = 60;
    s.ground_truth_fitness = true;
    const auto truth_rep = run_experiment(inputs, s);
    for (const auto& r : truth_rep.runs) {
        c.expect(r.ppf.points == r.vpf.points, r.method + " seed " + num(r.seed) + ": PPF != VPF under ground truth");
        c.expect(r.hv_ppf == r.hv_vpf, r.method + " hypervolume differs");
    }
    s.ground_truth_fitness = false;
    const auto est_rep = run_experiment(inputs, s);
    std::size_t vpf_points = 0;
    for (const auto& r : est_rep.runs) {
        vpf_points += r.vpf.points.size();
        for (const auto& p : r.vpf.points) {
            const auto [tp, tb] = inputs.truth(p.config);
            c.expect(p.ppa == tp && p.behav == tb, "VPF value is not ground truth");
            c.expect(est_rep.constraints.satisfied(p.ppa, p.behav), "VPF point violates constraints");
            c.expect(std::any_of(r.ppf.points.begin(), r.ppf.points.end(),
                                 [&](const ParetoPoint& q) { return q.config == p.config; }),
                     "VPF config not from the PPF");
            for (const auto& q : r.vpf.points) {
                c.expect(!dominates(q, p), "VPF contains a dominated point");
            }
        }
    }
    c.expect(vpf_points > 0, "no VPF produced");
    if (c.out.pass) {
        c.out.detail = "ground-truth PPF == VPF in " + std::to_string(truth_rep.runs.size()) + " runs; " +
                       std::to_string(vpf_points) + " estimator VPF points sound";
    }
    return c.out;
}

// 10 ------------------------------------------------------------------------

Outcome applications()
{
    Check c;
    const auto exact = mul8().product_table(Config::all_ones(36));
    const std::vector<AppKind> kinds{AppKind::fir_peak, AppKind::gemv_classify, AppKind::conv2d_psnr};
    for (const auto k : kinds) {
        c.expect(app_behav(builtin_kernel(k), exact) == 0.0, std::string(app_name(k)) + " nonzero on exact table");
    }
    Rng rng(1010);
    int nonzero = 0;
    for (int t = 0; t < 100; ++t) {
        const Config cf(rng.next() & ((1ULL << 36) - 1), 36);
        const auto table = mul8().product_table(cf);
        for (const auto k : kinds) {
            const auto kernel = builtin_kernel(k);
            const double via_table = app_behav(kernel, table);
            const double direct = app_behav_direct(kernel, mul8(), cf);
            c.expect(via_table == direct, std::string(app_name(k)) + " paths disagree on " + cf.to_string());
            nonzero += via_table != 0;
        }
    }
    if (c.out.pass) {
        c.out.detail = "exact table -> 0 for all kernels; 300 table/direct pairs identical (" + std::to_string(nonzero) +
                       " with nonzero error)";
    }
    return c.out;
}

// 11 ------------------------------------------------------------------------

std::map<std::string, std::string> csv_tree(const fs::path& root)
{
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (e.is_regular_file() && e.path().extension() == ".csv") {
            std::ifstream in(e.path(), std::ios::binary);
            std::ostringstream s;
            s << in.rdbuf();
            out[fs::relative(e.path(), root).string()] = s.str();
        }
    }
    return out;
}

Outcome determinism()
{
    const auto dir = fs::temp_directory_path() / "axomap_acceptance_determinism";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const nlohmann::json cfg{{"operator", {{"kind", "mul"}, {"width", 4}, {"signed", true}}},
                             {"sampling", {{"n_random", 300}, {"seed", 5}}},
                             {"ga", {{"pop_size", 32}, {"max_generations", 30}}},
                             {"methods", {"GA", "MaP", "MaP+GA"}},
                             {"n_seeds", 3},
                             {"const_sf", {0.5, 1.0}},
                             {"progression_terms", 20},
                             {"seed", 11}};
    std::ofstream(dir / "run.json") << cfg.dump(2);
    auto run = [&](const std::string& out, int threads) {
        const std::string cmd = std::string("\"") + AXOMAP_CLI + "\" --threads " + std::to_string(threads) +
                                " --out-dir \"" + (dir / out).string() + "\" run-all \"" + (dir / "run.json").string() +
                                "\" > \"" + (dir / (out + ".log")).string() + "\" 2>&1";
        return std::system(cmd.c_str());
    };
    if (run("t1", 1) != 0 || run("t4", 4) != 0) {
        return {false, "run-all exited with an error, see " + dir.string()};
    }
    const auto a = csv_tree(dir / "t1");
    const auto b = csv_tree(dir / "t4");
    if (a.empty()) {
        return {false, "no CSV outputs"};
    }
    if (a != b) {
        for (const auto& [name, bytes] : a) {
            if (!b.count(name) || b.at(name) != bytes) {
                return {false, name + " differs between --threads 1 and 4"};
            }
        }
        return {false, "file sets differ"};
    }
    fs::remove_all(dir);
    return {true, std::to_string(a.size()) + " CSV files byte-identical across --threads 1 / 4"};
}

struct Criterion {
    int id;
    const char* name;
    double limit_s; ///< 0: no runtime limit
    std::function<Outcome()> run;
};

} // namespace

int main(int argc, char** argv)
{
    const std::vector<Criterion> criteria{
        {1, "operator correctness", 5, operator_correctness},
        {2, "design-space cardinalities", 0, cardinalities},
        {3, "statistics identities", 0, statistics_identities},
        {4, "nested-model R^2 monotonicity", 60, nested_r2},
        {5, "exact MaP solver", 120, exact_solver},
        {6, "heuristic solver quality", 0, heuristic_solver},
        {7, "hypervolume", 0, hypervolume},
        {8, "MaP+GA >= GA-only", 600, map_plus_ga},
        {9, "PPF/VPF pipeline", 0, ppf_vpf},
        {10, "application kernels", 0, applications},
        {11, "run-all determinism", 0, determinism},
    };
    std::set<int> wanted;
    for (int i = 1; i < argc; ++i) {
        wanted.insert(std::atoi(argv[i]));
    }
    int failed = 0;
    for (const auto& cr : criteria) {
        if (!wanted.empty() && !wanted.count(cr.id)) {
            continue;
        }
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = cr.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (cr.limit_s > 0 && secs >= cr.limit_s) {
            o.pass = false;
            o.detail += "; took " + num(secs) + " s, limit " + num(cr.limit_s) + " s";
        }
        failed += !o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << " [" << cr.id << "] " << cr.name << " (" << num(secs) << " s): "
                  << o.detail << std::endl;
    }
    return failed == 0 ? 0 : 1;
}
