#include <doctest.h>

#include <cmath>
#include <set>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "../oracles.hpp"
#include "axomap/dataset.hpp"
#include "axomap/dse.hpp"
#include "axomap/error.hpp"
#include "axomap/map.hpp"
#include "axomap/rng.hpp"

using namespace axomap;

namespace {

// Random quadratic model with quad terms on distinct pairs.
PolyModel random_model(Rng& rng, int L, std::size_t n_quad, double scale)
{
    PolyModel m;
    m.removable = L;
    m.intercept = rng.uniform() * scale;
    for (int i = 0; i < L; ++i) {
        m.linear.push_back((rng.uniform() - 0.3) * scale);
    }
    std::set<LutPair> used;
    while (m.quad.size() < n_quad) {
        int i = static_cast<int>(rng.below(static_cast<std::uint64_t>(L)));
        int j = static_cast<int>(rng.below(static_cast<std::uint64_t>(L)));
        if (i == j) {
            continue;
        }
        if (i > j) {
            std::swap(i, j);
        }
        if (used.insert({i, j}).second) {
            m.quad.push_back({i, j, (rng.uniform() - 0.5) * scale});
        }
    }
    return m;
}

struct ScanResult {
    bool feasible = false;
    double objective = 0;
    Config config;
};

ScanResult scan(const MapProblem& p)
{
    ScanResult best;
    for (const auto& c : all_configs(p.removable)) {
        const double vp = p.ppa_model.predict(c);
        const double vb = p.behav_model.predict(c);
        if (vp > p.max_ppa || vb > p.max_behav) {
            continue;
        }
        const double obj = p.wt_b * vb / p.maxima.b_max + (1 - p.wt_b) * vp / p.maxima.p_max;
        if (!best.feasible || obj < best.objective) {
            best = {true, obj, c};
        }
    }
    return best;
}

} // namespace

TEST_CASE("exact solver equals an exhaustive scan on random instances")
{
    Rng rng(41);
    int feasible = 0;
    for (int trial = 0; trial < 150; ++trial) {
        const int L = 3 + static_cast<int>(rng.below(10));
        const std::size_t pairs = static_cast<std::size_t>(L * (L - 1) / 2);
        const std::size_t nq = rng.below(pairs + 1);
        const auto ppa = random_model(rng, L, nq, 10);
        const auto behav = random_model(rng, L, nq, 3);
        const double sf = 0.2 + rng.uniform() * 1.3;
        const auto p = formulate(ppa, behav, rng.uniform(), sf, nq, {10.0 * L, 3.0 * L});
        const auto want = scan(p);
        const auto got = solve_exact(p);
        REQUIRE(got.feasible == want.feasible);
        if (want.feasible) {
            ++feasible;
            CHECK(got.objective == doctest::Approx(want.objective).epsilon(1e-12));
            CHECK(p.feasible(got.config));
            CHECK(got.objective == p.objective(got.config));
        }
    }
    CHECK(feasible > 20);
}

TEST_CASE("exact solver breaks ties toward the lexicographically smallest config")
{
    PolyModel flat;
    flat.removable = 4;
    flat.linear.assign(4, 0.0);
    const auto p = formulate(flat, flat, 0.5, 1.0, 0, {1, 1});
    CHECK(solve_exact(p).config == Config::all_zeros(4));
    PolyModel one = flat;
    one.linear = {0.0, -1.0, 0.0, -1.0};
    const auto q = formulate(one, flat, 0.0, 1.0, 0, {1, 1});
    CHECK(solve_exact(q).config.to_string() == "0101");
}

TEST_CASE("binary product identity: a term on (i, i) behaves linearly")
{
    PolyModel m;
    m.removable = 3;
    m.linear = {1, 2, 3};
    PolyModel sq = m;
    sq.quad.push_back({1, 1, 5});
    PolyModel lin = m;
    lin.linear[1] += 5;
    for (const auto& c : all_configs(3)) {
        CHECK(sq.predict(c) == lin.predict(c));
    }
}

TEST_CASE("heuristic returns sound solutions and usually the optimum")
{
    Rng rng(42);
    int hits = 0, trials = 0;
    for (int trial = 0; trial < 60; ++trial) {
        const int L = 6 + static_cast<int>(rng.below(7));
        const auto ppa = random_model(rng, L, static_cast<std::size_t>(L), 10);
        const auto behav = random_model(rng, L, static_cast<std::size_t>(L), 3);
        const auto p = formulate(ppa, behav, rng.uniform(), 1.0, static_cast<std::size_t>(L), {10.0 * L, 3.0 * L});
        const auto h = solve_heuristic(p, static_cast<std::uint64_t>(trial));
        const auto e = solve_exact(p);
        CHECK(h.feasible == p.feasible(h.config));
        CHECK(h.objective == p.objective(h.config));
        if (e.feasible) {
            ++trials;
            CHECK(h.objective >= e.objective - 1e-9);
            hits += h.feasible && std::fabs(h.objective - e.objective) <= 1e-9 * (1 + std::fabs(e.objective));
        }
    }
    CHECK(hits >= trials * 9 / 10);
}

TEST_CASE("weighted sum monotonicity over the weight sweep")
{
    Rng rng(43);
    for (int trial = 0; trial < 20; ++trial) {
        const int L = 8;
        const auto ppa = random_model(rng, L, 6, 10);
        const auto behav = random_model(rng, L, 6, 3);
        double last_b = INFINITY, last_p = -INFINITY;
        bool any = false;
        for (const double w : weight_grid(0.05)) {
            const auto s = solve_exact(formulate(ppa, behav, w, 1.5, 6, {80, 24}));
            if (!s.feasible) {
                continue;
            }
            if (any) {
                CHECK(s.v_behav <= last_b + 1e-9);
                CHECK(s.v_ppa >= last_p - 1e-9);
            }
            any = true;
            last_b = s.v_behav;
            last_p = s.v_ppa;
        }
    }
}

TEST_CASE("formulate validates its inputs")
{
    Rng rng(44);
    const auto m = random_model(rng, 5, 3, 1);
    CHECK_THROWS_AS((void)formulate(m, m, 0.5, 1.0, 11, {1, 1}), ValidationError);
    CHECK_THROWS_AS((void)formulate(m, m, 0.5, 1.0, 4, {1, 1}), ValidationError);
    CHECK_THROWS_AS((void)formulate(m, m, 1.5, 1.0, 3, {1, 1}), ValidationError);
    CHECK_THROWS_AS((void)formulate(m, m, 0.5, 0.0, 3, {1, 1}), ValidationError);
    const auto p = formulate(m, m, 0.5, 1.0, 3, {1, 1});
    CHECK(MapProblem::from_json(nlohmann::json::parse(p.to_json().dump())).to_json() == p.to_json());
}

TEST_CASE("weight grid and quadratic schedule")
{
    const auto g = weight_grid(0.05);
    REQUIRE(g.size() == 21);
    CHECK(g.front() == 0.0);
    CHECK(g.back() == 1.0);
    CHECK(g[7] == 7.0 / 20.0);
    CHECK(default_quad_schedule(10) == std::vector<std::size_t>{0, 5, 10, 20, 45});
    CHECK(default_quad_schedule(3) == std::vector<std::size_t>{0, 1, 3});
}

TEST_CASE("pool: unique configs, feasible only, deterministic across threads")
{
    const auto n = build_multiplier(4, true);
    const auto d = build_dataset(n, SamplingPlan::sized(10, 400, 1));
    ModelLadder a(make_samples(d, Metric::pdplut), make_samples(d, Metric::avg_abs_rel_err), 3, 1);
    ModelLadder b(make_samples(d, Metric::pdplut), make_samples(d, Metric::avg_abs_rel_err), 3, 2);
    PoolSettings s1, s2;
    s1.threads = 1;
    s2.threads = 3;
    const auto p1 = build_pool(a, 0.5, s1);
    const auto p2 = build_pool(b, 0.5, s2);
    CHECK(p1.to_json() == p2.to_json());
    CHECK(p1.problems == 21 * default_quad_schedule(10).size());
    std::unordered_set<Config> seen;
    for (const auto& e : p1.entries) {
        CHECK(seen.insert(e.solution.config).second);
        CHECK(e.solution.feasible);
    }
    // heuristic path gives a valid pool as well
    PoolSettings heur;
    heur.exact_max_l = 0;
    const auto p3 = build_pool(a, 0.5, heur);
    CHECK(p3.problems == p1.problems);
}

// ---------------------------------------------------------------------------
// Pareto machinery

TEST_CASE("hypervolume analytic cases")
{
    const std::vector<std::pair<double, double>> one{{0, 0}};
    CHECK(hypervolume2d(one, {1, 1}) == 1.0);
    const std::vector<std::pair<double, double>> two{{0, 0.5}, {0.5, 0}};
    CHECK(std::fabs(hypervolume2d(two, {1, 1}) - 0.75) <= 1e-12);
    const std::vector<std::pair<double, double>> outside{{2, 0}, {0.5, 1.5}};
    std::size_t dropped = 0;
    CHECK(hypervolume2d(outside, {1, 1}, &dropped) == 0.0);
    CHECK(dropped == 2);
    // a point on the reference boundary encloses no area
    const std::vector<std::pair<double, double>> edge{{0.5, 1}};
    CHECK(hypervolume2d(edge, {1, 1}) == 0.0);
    CHECK(hypervolume2d({}, {1, 1}) == 0.0);
}

TEST_CASE("hypervolume matches a grid oracle on random point sets")
{
    Rng rng(51);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 1 + rng.below(25);
        std::vector<std::pair<double, double>> pts;
        std::vector<oracle::Point> op;
        for (std::size_t i = 0; i < n; ++i) {
            // coarse grid to force ties and duplicates
            const double x = static_cast<double>(rng.below(12)) / 10.0;
            const double y = static_cast<double>(rng.below(12)) / 10.0;
            pts.emplace_back(x, y);
            op.push_back({x, y});
        }
        CHECK(hypervolume2d(pts, {1, 1}) == doctest::Approx(oracle::hypervolume(op, {1, 1})).epsilon(1e-12));
    }
}

TEST_CASE("pareto filter: no dominated points, constraint-sound, sorted, deduplicated")
{
    Rng rng(52);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<ParetoPoint> pts;
        const std::size_t n = 1 + rng.below(40);
        for (std::size_t i = 0; i < n; ++i) {
            pts.push_back({Config(rng.below(64), 6), static_cast<double>(rng.below(20)), static_cast<double>(rng.below(20))});
        }
        const Constraints cons{15, 15};
        const auto f = pareto_filter(pts, cons);
        std::vector<oracle::Point> op;
        std::vector<ParetoPoint> kept;
        std::unordered_set<Config> seen;
        for (const auto& p : pts) {
            if (cons.satisfied(p.ppa, p.behav) && seen.insert(p.config).second) {
                kept.push_back(p);
                op.push_back({p.ppa, p.behav});
            }
        }
        const auto nd = oracle::nondominated(op);
        CHECK(f.points.size() == nd.size());
        for (std::size_t i = 0; i < f.points.size(); ++i) {
            CHECK(cons.satisfied(f.points[i].ppa, f.points[i].behav));
            for (std::size_t j = 0; j < f.points.size(); ++j) {
                CHECK_FALSE(dominates(f.points[j], f.points[i]));
            }
            if (i > 0) {
                const auto& a = f.points[i - 1];
                const auto& b = f.points[i];
                CHECK(std::tie(a.ppa, a.behav, a.config) < std::tie(b.ppa, b.behav, b.config));
            }
        }
    }
}

TEST_CASE("hypervolume is monotone under added non-dominated points")
{
    Rng rng(53);
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<std::pair<double, double>> pts;
        for (std::size_t i = 0, n = 1 + rng.below(15); i < n; ++i) {
            pts.emplace_back(rng.uniform() * 1.2, rng.uniform() * 1.2);
        }
        const double before = hypervolume2d(pts, {1, 1});
        const std::pair<double, double> extra{rng.uniform(), rng.uniform()};
        const bool dominated = std::any_of(pts.begin(), pts.end(), [&](const auto& p) {
            return p.first <= extra.first && p.second <= extra.second;
        });
        if (dominated) {
            continue;
        }
        pts.push_back(extra);
        CHECK(hypervolume2d(pts, {1, 1}) >= before);
    }
}

TEST_CASE("normalized hypervolume divides by const_sf times the maxima")
{
    ParetoFront f;
    f.points = {{Config::parse("10"), 5, 1}};
    const auto r = normalized_hypervolume(f, {10, 4}, 1.0);
    CHECK(r.hypervolume == doctest::Approx(0.5 * 0.75));
    const auto s = normalized_hypervolume(f, {10, 4}, 0.5);
    CHECK(s.hypervolume == doctest::Approx(0.0));
}

TEST_CASE("constraint violation is relative and zero when satisfied")
{
    const Constraints c{10, 2};
    CHECK(c.violation(5, 1) == 0);
    CHECK(c.violation(15, 1) == doctest::Approx(0.5));
    CHECK(c.violation(15, 3) == doctest::Approx(1.0));
}

TEST_CASE("nsga2: deterministic, elitist, seeds kept at generation 0")
{
    const auto n = build_multiplier(4, true);
    const OperatorTruth truth(n, Metric::pdplut, Metric::avg_abs_rel_err);
    const Constraints cons{300, 0.6};
    const EvalFn f = [&](const Config& c) {
        const auto [p, b] = truth(c);
        return Objectives{p, b, cons.violation(p, b)};
    };
    GaSettings s;
    s.max_generations = 15;
    s.pop_size = 20;
    s.seed = 9;
    std::vector<std::vector<GaIndividual>> gens;
    const auto a = nsga2(f, 10, s, {}, -1, [&](int, std::size_t, std::span<const GaIndividual> pop) {
        gens.emplace_back(pop.begin(), pop.end());
    });
    const auto b = nsga2(f, 10, s);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].config == b[i].config);
    }
    REQUIRE(gens.size() == 16);
    // elitism: every rank-0 feasible objective vector stays covered
    for (std::size_t g = 0; g + 1 < gens.size(); ++g) {
        for (const auto& ind : gens[g]) {
            if (ind.rank != 0 || !ind.obj.feasible()) {
                continue;
            }
            const bool covered = std::any_of(gens[g + 1].begin(), gens[g + 1].end(), [&](const GaIndividual& o) {
                return o.obj.feasible() && o.obj.ppa <= ind.obj.ppa && o.obj.behav <= ind.obj.behav;
            });
            CHECK(covered);
        }
    }
    // seeded run: seeds present verbatim at generation 0
    const std::vector<Config> seeds{Config::all_ones(10), Config::parse("1111100000")};
    bool checked = false;
    (void)nsga2(f, 10, s, seeds, 0, [&](int g, std::size_t, std::span<const GaIndividual> pop) {
        if (g == 0) {
            for (const auto& sd : seeds) {
                CHECK(std::any_of(pop.begin(), pop.end(), [&](const GaIndividual& i) { return i.config == sd; }));
            }
            checked = true;
        }
    });
    CHECK(checked);
}

TEST_CASE("GA settings validation")
{
    GaSettings s;
    s.pop_size = 7;
    CHECK_THROWS_AS(s.validate(), ConfigurationError);
    s.pop_size = 8;
    s.crossover_rate = 1.5;
    CHECK_THROWS_AS(s.validate(), ConfigurationError);
    s.crossover_rate = 0.9;
    s.max_generations = 0;
    CHECK_THROWS_AS(s.validate(), ConfigurationError);
    s.max_generations = 3;
    CHECK(GaSettings::from_json(s.to_json()).to_json() == s.to_json());
}

TEST_CASE("vpf re-characterizes and is dominance- and constraint-sound")
{
    const auto n = build_multiplier(4, true);
    const auto d = build_dataset(n, SamplingPlan::sized(10, 300, 2));
    ExperimentSettings s;
    s.methods = {"GA", "MaP+GA"};
    s.n_seeds = 2;
    s.ga.max_generations = 20;
    s.threads = 1;
    const auto rep = run_experiment(operator_inputs(n, d, Metric::pdplut, Metric::avg_abs_rel_err), s);
    const OperatorTruth truth(n, Metric::pdplut, Metric::avg_abs_rel_err);
    for (const auto& r : rep.runs) {
        for (const auto& p : r.vpf.points) {
            const auto [tp, tb] = truth(p.config);
            CHECK(p.ppa == tp);
            CHECK(p.behav == tb);
            CHECK(rep.constraints.satisfied(p.ppa, p.behav));
            for (const auto& q : r.vpf.points) {
                CHECK_FALSE(dominates(q, p));
            }
        }
        CHECK(r.hv_ppf >= 0);
        CHECK(r.hv_vpf >= 0);
        CHECK_FALSE(r.trajectory.empty());
    }
    s.threads = 3;
    const auto again = run_experiment(operator_inputs(n, d, Metric::pdplut, Metric::avg_abs_rel_err), s);
    std::ostringstream x, y;
    rep.write_summary_csv(x);
    again.write_summary_csv(y);
    CHECK(x.str() == y.str());
}
