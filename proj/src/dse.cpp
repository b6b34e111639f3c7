#include "axomap/dse.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "axomap/dataset.hpp"
#include "axomap/error.hpp"
#include "axomap/parallel.hpp"
#include "axomap/rng.hpp"
#include "axomap/svg.hpp"

namespace axomap {

namespace {

constexpr double kPenalty = 1e3;

struct Ranker {
    ConstraintMode mode;

    [[nodiscard]] std::pair<double, double> effective(const Objectives& o) const
    {
        if (mode == ConstraintMode::penalty && o.violation > 0) {
            return {o.ppa + kPenalty * o.violation * (1 + std::fabs(o.ppa)),
                    o.behav + kPenalty * o.violation * (1 + std::fabs(o.behav))};
        }
        return {o.ppa, o.behav};
    }

    [[nodiscard]] bool dominates(const Objectives& a, const Objectives& b) const
    {
        if (mode == ConstraintMode::constraint_domination) {
            if (a.feasible() != b.feasible()) {
                return a.feasible();
            }
            if (!a.feasible()) {
                return a.violation < b.violation;
            }
        }
        const auto [ax, ay] = effective(a);
        const auto [bx, by] = effective(b);
        return ax <= bx && ay <= by && (ax < bx || ay < by);
    }

    // Assigns rank and crowding to pop[idx...]; returns the fronts.
    std::vector<std::vector<std::size_t>> sort(std::vector<GaIndividual>& pop, const std::vector<std::size_t>& idx) const
    {
        const std::size_t n = idx.size();
        std::vector<std::vector<std::size_t>> dominated(n);
        std::vector<int> count(n, 0);
        for (std::size_t a = 0; a < n; ++a) {
            for (std::size_t b = a + 1; b < n; ++b) {
                const auto& oa = pop[idx[a]].obj;
                const auto& ob = pop[idx[b]].obj;
                if (dominates(oa, ob)) {
                    dominated[a].push_back(b);
                    ++count[b];
                } else if (dominates(ob, oa)) {
                    dominated[b].push_back(a);
                    ++count[a];
                }
            }
        }
        std::vector<std::vector<std::size_t>> fronts;
        std::vector<std::size_t> current;
        for (std::size_t a = 0; a < n; ++a) {
            if (count[a] == 0) {
                current.push_back(a);
            }
        }
        int rank = 0;
        while (!current.empty()) {
            std::vector<std::size_t> next;
            for (const auto a : current) {
                pop[idx[a]].rank = rank;
                for (const auto b : dominated[a]) {
                    if (--count[b] == 0) {
                        next.push_back(b);
                    }
                }
            }
            std::sort(next.begin(), next.end());
            std::vector<std::size_t> front;
            for (const auto a : current) {
                front.push_back(idx[a]);
            }
            crowding(pop, front);
            fronts.push_back(std::move(front));
            current = std::move(next);
            ++rank;
        }
        return fronts;
    }

    void crowding(std::vector<GaIndividual>& pop, const std::vector<std::size_t>& front) const
    {
        for (const auto i : front) {
            pop[i].crowding = 0;
        }
        if (front.size() <= 2) {
            for (const auto i : front) {
                pop[i].crowding = std::numeric_limits<double>::infinity();
            }
            return;
        }
        for (int m = 0; m < 2; ++m) {
            auto key = [&](std::size_t i) {
                const auto e = effective(pop[i].obj);
                // infeasible members of a front share a violation level; spread them by objectives anyway
                return m == 0 ? e.first : e.second;
            };
            std::vector<std::size_t> order = front;
            std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return key(a) < key(b); });
            const double lo = key(order.front()), hi = key(order.back());
            pop[order.front()].crowding = std::numeric_limits<double>::infinity();
            pop[order.back()].crowding = std::numeric_limits<double>::infinity();
            if (hi <= lo) {
                continue;
            }
            for (std::size_t k = 1; k + 1 < order.size(); ++k) {
                pop[order[k]].crowding += (key(order[k + 1]) - key(order[k - 1])) / (hi - lo);
            }
        }
    }

    // Environmental selection of n survivors. Repeated configs only fill leftover slots.
    std::vector<GaIndividual> select(std::vector<GaIndividual> pool, std::size_t n) const
    {
        std::unordered_set<Config> seen;
        std::vector<std::size_t> unique, repeats;
        for (std::size_t i = 0; i < pool.size(); ++i) {
            (seen.insert(pool[i].config).second ? unique : repeats).push_back(i);
        }
        const auto fronts = sort(pool, unique);
        std::vector<GaIndividual> out;
        out.reserve(n);
        for (const auto& f : fronts) {
            if (out.size() + f.size() <= n) {
                for (const auto i : f) {
                    out.push_back(pool[i]);
                }
                continue;
            }
            std::vector<std::size_t> order = f;
            std::stable_sort(order.begin(), order.end(),
                             [&](std::size_t a, std::size_t b) { return pool[a].crowding > pool[b].crowding; });
            for (std::size_t k = 0; out.size() < n; ++k) {
                out.push_back(pool[order[k]]);
            }
            break;
        }
        for (std::size_t k = 0; out.size() < n && k < repeats.size(); ++k) {
            auto ind = pool[repeats[k]];
            ind.rank = std::numeric_limits<int>::max();
            ind.crowding = 0;
            out.push_back(std::move(ind));
        }
        // ranks are recomputed on the survivors so tournaments see a consistent population
        std::vector<std::size_t> all(out.size());
        std::iota(all.begin(), all.end(), 0);
        sort(out, all);
        return out;
    }
};

std::size_t tournament(const std::vector<GaIndividual>& pop, int size, Rng& rng)
{
    std::size_t best = rng.below(pop.size());
    for (int k = 1; k < size; ++k) {
        const std::size_t c = rng.below(pop.size());
        const auto& a = pop[c];
        const auto& b = pop[best];
        if (a.rank < b.rank || (a.rank == b.rank && a.crowding > b.crowding) ||
            (a.rank == b.rank && a.crowding == b.crowding && c < best)) {
            best = c;
        }
    }
    return best;
}

Config random_config(int n, Rng& rng)
{
    std::uint64_t m = 0;
    for (int i = 0; i < n; ++i) {
        if (rng.bernoulli(0.5)) {
            m |= 1ULL << i;
        }
    }
    return Config(m, n);
}

std::string_view mode_name(ConstraintMode m)
{
    return m == ConstraintMode::penalty ? "penalty" : "constraint_domination";
}

std::string_view kind_name(FrontKind k)
{
    return k == FrontKind::ppf ? "PPF" : "VPF";
}

} // namespace

double Constraints::violation(double ppa, double behav) const
{
    double v = 0;
    if (ppa > max_ppa) {
        v += (ppa - max_ppa) / std::max(std::fabs(max_ppa), 1e-300);
    }
    if (behav > max_behav) {
        v += (behav - max_behav) / std::max(std::fabs(max_behav), 1e-300);
    }
    return v;
}

void GaSettings::validate() const
{
    if (pop_size < 2 || pop_size % 2 != 0) {
        throw ConfigurationError("GA population size must be even and >= 2");
    }
    if (max_generations < 1) {
        throw ConfigurationError("GA max_generations must be >= 1");
    }
    if (tournament_size < 1) {
        throw ConfigurationError("GA tournament size must be >= 1");
    }
    if (!(crossover_rate >= 0 && crossover_rate <= 1) || mutation_rate > 1) {
        throw ConfigurationError("GA rates must lie in [0,1]");
    }
}

nlohmann::json GaSettings::to_json() const
{
    return {{"pop_size", pop_size},
            {"max_generations", max_generations},
            {"tournament_size", tournament_size},
            {"crossover_rate", crossover_rate},
            {"mutation_rate", mutation_rate},
            {"seed", seed},
            {"constraint_mode", mode_name(constraint_mode)}};
}

GaSettings GaSettings::from_json(const nlohmann::json& doc)
{
    GaSettings s;
    try {
        s.pop_size = doc.value("pop_size", s.pop_size);
        s.max_generations = doc.value("max_generations", s.max_generations);
        s.tournament_size = doc.value("tournament_size", s.tournament_size);
        s.crossover_rate = doc.value("crossover_rate", s.crossover_rate);
        s.mutation_rate = doc.value("mutation_rate", s.mutation_rate);
        s.seed = doc.value("seed", s.seed);
        const auto mode = doc.value("constraint_mode", std::string(mode_name(s.constraint_mode)));
        if (mode == "penalty") {
            s.constraint_mode = ConstraintMode::penalty;
        } else if (mode == "constraint_domination") {
            s.constraint_mode = ConstraintMode::constraint_domination;
        } else {
            throw ConfigurationError("unknown constraint mode \"" + mode + "\"");
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("GA settings JSON: ") + e.what());
    }
    s.validate();
    return s;
}

std::vector<GaIndividual> nsga2(const EvalFn& evalfn, int removable, const GaSettings& settings,
                                std::span<const Config> seed_pop, int budget, const GenerationObserver& observer)
{
    settings.validate();
    if (removable < 1 || removable > kMaxRemovable) {
        throw ValidationError("nsga2: L out of range");
    }
    for (const auto& c : seed_pop) {
        if (c.size() != removable) {
            throw ValidationError("nsga2: seed config length differs from L");
        }
    }
    const auto n = static_cast<std::size_t>(settings.pop_size);
    const double mutation = settings.mutation_rate < 0 ? 1.0 / removable : settings.mutation_rate;
    const int generations = budget < 0 ? settings.max_generations : std::min(settings.max_generations, budget);
    const Ranker ranker{settings.constraint_mode};
    Rng rng(settings.seed);
    std::size_t evals = 0;
    auto evaluate = [&](const Config& c) {
        ++evals;
        return GaIndividual{c, evalfn(c), 0, 0};
    };

    std::vector<GaIndividual> pop;
    std::unordered_set<Config> present;
    for (const auto& c : seed_pop) {
        if (present.insert(c).second) {
            pop.push_back(evaluate(c));
        }
    }
    if (pop.size() > n) {
        std::clog << "nsga2: " << pop.size() << " seeds exceed the population, truncating to " << n << '\n';
        pop = ranker.select(std::move(pop), n);
    }
    while (pop.size() < n) {
        Config c = random_config(removable, rng);
        for (int attempt = 0; attempt < 100 && present.contains(c); ++attempt) {
            c = random_config(removable, rng);
        }
        present.insert(c);
        pop.push_back(evaluate(c));
    }
    {
        std::vector<std::size_t> all(pop.size());
        std::iota(all.begin(), all.end(), 0);
        ranker.sort(pop, all);
    }
    if (observer) {
        observer(0, evals, pop);
    }

    for (int g = 1; g <= generations; ++g) {
        std::vector<GaIndividual> merged = pop;
        merged.reserve(2 * n);
        while (merged.size() < 2 * n) {
            std::uint64_t a = pop[tournament(pop, settings.tournament_size, rng)].config.mask();
            std::uint64_t b = pop[tournament(pop, settings.tournament_size, rng)].config.mask();
            if (removable > 1 && rng.uniform() < settings.crossover_rate) {
                const int cut = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(removable - 1)));
                const std::uint64_t low = (1ULL << cut) - 1;
                const std::uint64_t ca = (a & low) | (b & ~low);
                const std::uint64_t cb = (b & low) | (a & ~low);
                a = ca;
                b = cb;
            }
            for (std::uint64_t* child : {&a, &b}) {
                for (int i = 0; i < removable; ++i) {
                    if (rng.uniform() < mutation) {
                        *child ^= 1ULL << i;
                    }
                }
                merged.push_back(evaluate(Config(*child, removable)));
            }
        }
        pop = ranker.select(std::move(merged), n);
        if (observer) {
            observer(g, evals, pop);
        }
    }
    return pop;
}

bool dominates(const ParetoPoint& a, const ParetoPoint& b)
{
    return a.ppa <= b.ppa && a.behav <= b.behav && (a.ppa < b.ppa || a.behav < b.behav);
}

ParetoFront pareto_filter(std::span<const ParetoPoint> points, const Constraints& constraints, FrontKind kind)
{
    std::vector<ParetoPoint> cand;
    std::unordered_set<Config> seen;
    for (const auto& p : points) {
        if (!std::isfinite(p.ppa) || !std::isfinite(p.behav)) {
            throw ValidationError("pareto_filter: non-finite objective");
        }
        if (constraints.satisfied(p.ppa, p.behav) && seen.insert(p.config).second) {
            cand.push_back(p);
        }
    }
    std::sort(cand.begin(), cand.end(), [](const ParetoPoint& a, const ParetoPoint& b) {
        if (a.ppa != b.ppa) {
            return a.ppa < b.ppa;
        }
        if (a.behav != b.behav) {
            return a.behav < b.behav;
        }
        return a.config < b.config;
    });
    // After sorting, a point is dominated iff some earlier point has smaller behav,
    // or equal behav with smaller ppa.
    ParetoFront front;
    front.kind = kind;
    double best_behav = std::numeric_limits<double>::infinity();
    double best_ppa_at_best = std::numeric_limits<double>::infinity();
    for (const auto& p : cand) {
        const bool dominated = p.behav > best_behav || (p.behav == best_behav && p.ppa > best_ppa_at_best);
        if (!dominated) {
            front.points.push_back(p);
        }
        if (p.behav < best_behav) {
            best_behav = p.behav;
            best_ppa_at_best = p.ppa;
        }
    }
    return front;
}

double hypervolume2d(std::span<const std::pair<double, double>> points, std::pair<double, double> reference,
                     std::size_t* dropped)
{
    std::vector<std::pair<double, double>> pts;
    std::size_t skipped = 0;
    for (const auto& p : points) {
        if (p.first <= reference.first && p.second <= reference.second) {
            pts.push_back(p);
        } else {
            ++skipped;
        }
    }
    if (dropped != nullptr) {
        *dropped = skipped;
    }
    std::sort(pts.begin(), pts.end());
    double area = 0;
    double floor = reference.second;
    for (const auto& [x, y] : pts) {
        if (y < floor) {
            area += (reference.first - x) * (floor - y);
            floor = y;
        }
    }
    return area;
}

HvReport normalized_hypervolume(const ParetoFront& front, const DatasetMaxima& maxima, double const_sf)
{
    HvReport r;
    r.p_max = maxima.p_max;
    r.b_max = maxima.b_max;
    r.const_sf = const_sf;
    const double sp = const_sf * maxima.p_max, sb = const_sf * maxima.b_max;
    if (!(sp > 0) || !(sb > 0)) {
        throw ValidationError("hypervolume normalization must be positive");
    }
    std::vector<std::pair<double, double>> pts;
    for (const auto& p : front.points) {
        pts.emplace_back(p.ppa / sp, p.behav / sb);
    }
    r.hypervolume = hypervolume2d(pts, {r.ref_ppa, r.ref_behav}, &r.dropped);
    if (r.dropped > 0) {
        std::clog << "hypervolume: dropped " << r.dropped << " points outside the reference box\n";
    }
    return r;
}

ParetoFront vpf(const ParetoFront& front, const TruthFn& truth, const Constraints& constraints)
{
    std::vector<ParetoPoint> pts;
    pts.reserve(front.points.size());
    for (const auto& p : front.points) {
        const auto [ppa, behav] = truth(p.config);
        pts.push_back({p.config, ppa, behav});
    }
    return pareto_filter(pts, constraints, FrontKind::vpf);
}

ParetoFront vpf(const ParetoFront& front, const Netlist& netlist, Metric ppa_metric, Metric behav_metric,
                const Constraints& constraints)
{
    return vpf(
        front,
        [&](const Config& c) {
            const auto r = characterize_one(netlist, c);
            return std::pair{r.metric(ppa_metric), r.metric(behav_metric)};
        },
        constraints);
}

OperatorTruth::OperatorTruth(const Netlist& netlist, Metric ppa_metric, Metric behav_metric, unsigned threads)
    : netlist_(&netlist), ppa_(ppa_metric), behav_(behav_metric)
{
    const int L = netlist.removable_count();
    if (L <= 12) {
        std::vector<Config> all;
        for (std::uint64_t m = 0; m < (1ULL << L); ++m) {
            all.emplace_back(m, L);
        }
        const auto recs = characterize(netlist, all, threads);
        for (const auto& r : recs) {
            table_.emplace_back(r.metric(ppa_), r.metric(behav_));
        }
    }
}

std::pair<double, double> OperatorTruth::operator()(const Config& config) const
{
    if (!table_.empty()) {
        netlist_->check_config(config);
        return table_[config.mask()];
    }
    const auto r = characterize_one(*netlist_, config);
    return {r.metric(ppa_), r.metric(behav_)};
}

TruthFn OperatorTruth::fn() const
{
    return [this](const Config& c) { return (*this)(c); };
}

void ExperimentSettings::validate() const
{
    if (methods.empty()) {
        throw ConfigurationError("experiment: no methods");
    }
    for (const auto& m : methods) {
        if (m != "GA" && m != "MaP" && m != "MaP+GA") {
            throw ConfigurationError("experiment: unknown method \"" + m + "\" (GA, MaP, MaP+GA)");
        }
    }
    if (n_seeds < 1) {
        throw ConfigurationError("experiment: n_seeds must be >= 1");
    }
    if (!(const_sf > 0)) {
        throw ConfigurationError("experiment: const_sf must be positive");
    }
    ga.validate();
}

const RunResult& ExperimentReport::run(const std::string& method, int seed) const
{
    for (const auto& r : runs) {
        if (r.method == method && r.seed == seed) {
            return r;
        }
    }
    throw ValidationError("experiment report: no run " + method + "/" + std::to_string(seed));
}

double ExperimentReport::mean_hv_ppf(const std::string& method) const
{
    double sum = 0;
    int count = 0;
    for (const auto& r : runs) {
        if (r.method == method) {
            sum += r.hv_ppf;
            ++count;
        }
    }
    if (count == 0) {
        throw ValidationError("experiment report: no runs for method " + method);
    }
    return sum / count;
}

void ExperimentReport::write_fronts_csv(const RunResult& run, std::ostream& out) const
{
    out << "kind,config,ppa,behav\n";
    for (const auto* f : {&run.ppf, &run.vpf}) {
        for (const auto& p : f->points) {
            out << kind_name(f->kind) << ',' << p.config.to_string() << ',' << format_double(p.ppa) << ','
                << format_double(p.behav) << '\n';
        }
    }
}

void ExperimentReport::write_trajectory_csv(std::ostream& out) const
{
    out << "method,seed,evals,hv\n";
    for (const auto& r : runs) {
        for (const auto& s : r.trajectory) {
            out << r.method << ',' << r.seed << ',' << s.evals << ',' << format_double(s.hv) << '\n';
        }
    }
}

void ExperimentReport::write_summary_csv(std::ostream& out) const
{
    out << "method,seed,hv_ppf,hv_vpf,ppf_points,vpf_points\n";
    for (const auto& r : runs) {
        out << r.method << ',' << r.seed << ',' << format_double(r.hv_ppf) << ',' << format_double(r.hv_vpf) << ','
            << r.ppf.points.size() << ',' << r.vpf.points.size() << '\n';
    }
}

void ExperimentReport::write(const std::string& dir) const
{
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    auto open = [&](const std::string& name) {
        std::ofstream f(fs::path(dir) / name, std::ios::binary);
        if (!f) {
            throw Error("cannot write " + (fs::path(dir) / name).string());
        }
        return f;
    };
    for (const auto& r : runs) {
        const std::string stem = "fronts_" + r.method + "_" + std::to_string(r.seed);
        {
            auto f = open(stem + ".csv");
            write_fronts_csv(r, f);
        }
        std::vector<SvgSeries> series(2);
        series[0] = {"PPF", "#1f77b4", {}, true};
        series[1] = {"VPF", "#d62728", {}, true};
        for (const auto& p : r.ppf.points) {
            series[0].points.emplace_back(p.ppa, p.behav);
        }
        for (const auto& p : r.vpf.points) {
            series[1].points.emplace_back(p.ppa, p.behav);
        }
        auto f = open(stem + ".svg");
        write_scatter_svg(f, name + " " + r.method + " seed " + std::to_string(r.seed), "PPA", "BEHAV", series);
    }
    {
        auto f = open("hv_trajectory.csv");
        write_trajectory_csv(f);
    }
    {
        auto f = open("summary.csv");
        write_summary_csv(f);
    }
}

ExperimentInputs operator_inputs(const Netlist& netlist, const Dataset& training, Metric ppa_metric, Metric behav_metric,
                                 unsigned threads)
{
    if (training.removable != netlist.removable_count()) {
        throw ValidationError("training data L differs from the netlist");
    }
    auto truth = std::make_shared<OperatorTruth>(netlist, ppa_metric, behav_metric, threads);
    ExperimentInputs in;
    in.name = netlist.name();
    in.removable = netlist.removable_count();
    in.ppa = make_samples(training, ppa_metric);
    in.behav = make_samples(training, behav_metric);
    in.truth = [truth](const Config& c) { return (*truth)(c); };
    return in;
}

ExperimentReport run_experiment(const ExperimentInputs& inputs, const ExperimentSettings& settings, const SolutionPool* pool)
{
    settings.validate();
    const int L = inputs.removable;
    ExperimentReport rep;
    rep.name = inputs.name;
    rep.const_sf = settings.const_sf;
    rep.maxima = {*std::max_element(inputs.ppa.target.begin(), inputs.ppa.target.end()),
                  *std::max_element(inputs.behav.target.begin(), inputs.behav.target.end())};
    rep.constraints = {settings.const_sf * rep.maxima.p_max, settings.const_sf * rep.maxima.b_max};
    const Constraints cons = rep.constraints;

    // fitness: estimators trained on the data, or ground truth
    EvalFn fitness;
    std::shared_ptr<Estimator> est_ppa, est_behav;
    if (settings.ground_truth_fitness) {
        fitness = [&inputs, cons](const Config& c) {
            const auto [p, b] = inputs.truth(c);
            return Objectives{p, b, cons.violation(p, b)};
        };
    } else {
        est_ppa = std::make_shared<Estimator>(fit_estimator(inputs.ppa, settings.estimator, settings.seed, settings.threads).first);
        est_behav =
            std::make_shared<Estimator>(fit_estimator(inputs.behav, settings.estimator, settings.seed, settings.threads).first);
        // every metric is non-negative; extrapolated estimates below zero are clipped
        fitness = [est_ppa, est_behav, cons](const Config& c) {
            const double p = std::max(0.0, est_ppa->predict(c)), b = std::max(0.0, est_behav->predict(c));
            return Objectives{p, b, cons.violation(p, b)};
        };
    }

    const bool needs_pool = std::any_of(settings.methods.begin(), settings.methods.end(),
                                        [](const std::string& m) { return m != "GA"; });
    std::vector<Config> pool_configs;
    if (needs_pool && pool != nullptr) {
        pool_configs = pool->configs();
    } else if (needs_pool) {
        ModelLadder ladder(inputs.ppa, inputs.behav, settings.seed, settings.threads);
        PoolSettings ps = settings.pool;
        ps.seed = settings.seed;
        ps.threads = settings.threads;
        pool_configs = build_pool(ladder, settings.const_sf, ps).configs();
    }
    rep.pool_size = pool_configs.size();

    struct Task {
        std::string method;
        int seed;
    };
    std::vector<Task> tasks;
    for (const auto& m : settings.methods) {
        for (int s = 0; s < settings.n_seeds; ++s) {
            tasks.push_back({m, s});
        }
    }
    rep.runs.resize(tasks.size());
    parallel_for(tasks.size(), settings.threads, [&](std::size_t k) {
        const auto& t = tasks[k];
        RunResult r;
        r.method = t.method;
        r.seed = t.seed;
        auto front_of = [&](std::span<const GaIndividual> pop) {
            std::vector<ParetoPoint> pts;
            for (const auto& ind : pop) {
                pts.push_back({ind.config, ind.obj.ppa, ind.obj.behav});
            }
            return pareto_filter(pts, cons);
        };
        if (t.method == "MaP") {
            std::vector<ParetoPoint> pts;
            for (const auto& c : pool_configs) {
                const auto o = fitness(c);
                pts.push_back({c, o.ppa, o.behav});
            }
            r.ppf = pareto_filter(pts, cons);
        } else {
            GaSettings ga = settings.ga;
            ga.seed = settings.seed * 1000003ULL + static_cast<std::uint64_t>(t.seed);
            const std::span<const Config> seeds =
                t.method == "MaP+GA" ? std::span<const Config>(pool_configs) : std::span<const Config>();
            const auto final_pop =
                nsga2(fitness, L, ga, seeds, -1, [&](int, std::size_t evals, std::span<const GaIndividual> pop) {
                    r.trajectory.push_back({evals, normalized_hypervolume(front_of(pop), rep.maxima, settings.const_sf).hypervolume});
                });
            r.ppf = front_of(final_pop);
        }
        r.vpf = vpf(r.ppf, inputs.truth, cons);
        r.hv_ppf = normalized_hypervolume(r.ppf, rep.maxima, settings.const_sf).hypervolume;
        r.hv_vpf = normalized_hypervolume(r.vpf, rep.maxima, settings.const_sf).hypervolume;
        rep.runs[k] = std::move(r);
    });
    return rep;
}

} // namespace axomap
