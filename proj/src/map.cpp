#include "axomap/map.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <optional>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "axomap/error.hpp"
#include "axomap/parallel.hpp"
#include "axomap/rng.hpp"

namespace axomap {

namespace {

// Dense form c0 + a.x + sum_{i<j} q_ij x_i x_j of a poly model.
struct Dense {
    int n = 0;
    double c0 = 0;
    std::vector<double> a;
    std::vector<double> q; // n x n, symmetric, zero diagonal

    explicit Dense(int size) : n(size), a(static_cast<std::size_t>(size), 0.0), q(static_cast<std::size_t>(size * size), 0.0) {}

    double& at(int i, int j) { return q[static_cast<std::size_t>(i * n + j)]; }
    [[nodiscard]] double at(int i, int j) const { return q[static_cast<std::size_t>(i * n + j)]; }

    void add(const PolyModel& m, double w)
    {
        c0 += w * m.intercept;
        for (int i = 0; i < n; ++i) {
            a[static_cast<std::size_t>(i)] += w * m.linear[static_cast<std::size_t>(i)];
        }
        for (const auto& t : m.quad) {
            if (t.i == t.j) {
                a[static_cast<std::size_t>(t.i)] += w * t.coef; // l*l == l
            } else {
                at(t.i, t.j) += w * t.coef;
                at(t.j, t.i) += w * t.coef;
            }
        }
    }

    [[nodiscard]] double magnitude() const
    {
        double s = std::fabs(c0);
        for (const double v : a) {
            s += std::fabs(v);
        }
        for (const double v : q) {
            s += std::fabs(v) / 2;
        }
        return s;
    }
};

Dense dense_of(const PolyModel& m, int n, double w = 1.0)
{
    Dense d(n);
    d.add(m, w);
    return d;
}

void check_problem(const MapProblem& p)
{
    if (p.removable < 1 || p.removable > kMaxRemovable) {
        throw ValidationError("map problem: L out of range");
    }
    if (p.ppa_model.removable != p.removable || p.behav_model.removable != p.removable) {
        throw ValidationError("map problem: model L differs from problem L");
    }
    if (!(p.wt_b >= 0 && p.wt_b <= 1)) {
        throw ValidationError("map problem: wt_b must lie in [0,1]");
    }
    if (!(p.max_ppa > 0) || !(p.max_behav > 0) || !(p.maxima.p_max > 0) || !(p.maxima.b_max > 0)) {
        throw ValidationError("map problem: bounds and maxima must be positive");
    }
}

// Branch-and-bound over variables in index order, 0 before 1, so leaves are
// reached in lexicographic order and only strict improvements replace the incumbent.
class BranchAndBound {
public:
    explicit BranchAndBound(const MapProblem& p)
        : p_(p), n_(p.removable), obj_(p.removable), ppa_(dense_of(p.ppa_model, p.removable)),
          behav_(dense_of(p.behav_model, p.removable))
    {
        obj_.add(p.behav_model, p.wt_b / p.maxima.b_max);
        obj_.add(p.ppa_model, (1.0 - p.wt_b) / p.maxima.p_max);
        tol_obj_ = 1e-9 * (1.0 + obj_.magnitude());
        tol_ppa_ = 1e-9 * (1.0 + ppa_.magnitude());
        tol_behav_ = 1e-9 * (1.0 + behav_.magnitude());
        neg_obj_ = suffix_negative(obj_);
        neg_ppa_ = suffix_negative(ppa_);
        neg_behav_ = suffix_negative(behav_);
    }

    MapSolution run()
    {
        State s{obj_.c0, ppa_.c0, behav_.c0, obj_.a, ppa_.a, behav_.a};
        descend(0, 0, s);
        if (!found_) {
            auto sol = evaluate_solution(p_, Config::all_zeros(n_), Optimality::proven);
            sol.feasible = false;
            return sol;
        }
        return evaluate_solution(p_, Config(best_mask_, n_), Optimality::proven);
    }

private:
    struct State {
        double f_obj, f_ppa, f_behav;
        std::vector<double> a_obj, a_ppa, a_behav; // effective linear terms of free variables
    };

    // neg[k] = sum of negative q_ij over k <= i < j
    std::vector<double> suffix_negative(const Dense& d) const
    {
        std::vector<double> neg(static_cast<std::size_t>(n_) + 1, 0.0);
        for (int k = n_ - 1; k >= 0; --k) {
            double row = 0;
            for (int j = k + 1; j < n_; ++j) {
                row += std::min(0.0, d.at(k, j));
            }
            neg[static_cast<std::size_t>(k)] = neg[static_cast<std::size_t>(k) + 1] + row;
        }
        return neg;
    }

    double lower(double fixed, const std::vector<double>& a, const std::vector<double>& neg, int k) const
    {
        double b = fixed + neg[static_cast<std::size_t>(k)];
        for (int j = k; j < n_; ++j) {
            b += std::min(0.0, a[static_cast<std::size_t>(j)]);
        }
        return b;
    }

    void descend(int k, std::uint64_t mask, State& s)
    {
        if (found_ && lower(s.f_obj, s.a_obj, neg_obj_, k) > best_obj_ + tol_obj_) {
            return;
        }
        if (lower(s.f_ppa, s.a_ppa, neg_ppa_, k) > p_.max_ppa + tol_ppa_ ||
            lower(s.f_behav, s.a_behav, neg_behav_, k) > p_.max_behav + tol_behav_) {
            return;
        }
        if (k == n_) {
            const Config c(mask, n_);
            if (p_.feasible(c)) {
                const double v = p_.objective(c);
                if (!found_ || v < best_obj_) {
                    found_ = true;
                    best_obj_ = v;
                    best_mask_ = mask;
                }
            }
            return;
        }
        descend(k + 1, mask, s);

        State t = s;
        const auto kz = static_cast<std::size_t>(k);
        t.f_obj += s.a_obj[kz];
        t.f_ppa += s.a_ppa[kz];
        t.f_behav += s.a_behav[kz];
        for (int j = k + 1; j < n_; ++j) {
            const auto jz = static_cast<std::size_t>(j);
            t.a_obj[jz] += obj_.at(k, j);
            t.a_ppa[jz] += ppa_.at(k, j);
            t.a_behav[jz] += behav_.at(k, j);
        }
        descend(k + 1, mask | (1ULL << k), t);
    }

    const MapProblem& p_;
    int n_;
    Dense obj_, ppa_, behav_;
    std::vector<double> neg_obj_, neg_ppa_, neg_behav_;
    double tol_obj_ = 0, tol_ppa_ = 0, tol_behav_ = 0;
    bool found_ = false;
    double best_obj_ = 0;
    std::uint64_t best_mask_ = 0;
};

// Local search state with incremental flip deltas.
class Descent {
public:
    explicit Descent(const MapProblem& p)
        : p_(p), n_(p.removable), ppa_(dense_of(p.ppa_model, p.removable)), behav_(dense_of(p.behav_model, p.removable)),
          wb_(p.wt_b / p.maxima.b_max), wp_((1.0 - p.wt_b) / p.maxima.p_max)
    {
    }

    void reset(std::uint64_t mask)
    {
        mask_ = mask;
        vp_ = ppa_.c0;
        vb_ = behav_.c0;
        gp_.assign(static_cast<std::size_t>(n_), 0.0);
        gb_.assign(static_cast<std::size_t>(n_), 0.0);
        for (int j = 0; j < n_; ++j) {
            double gp = ppa_.a[static_cast<std::size_t>(j)];
            double gb = behav_.a[static_cast<std::size_t>(j)];
            for (int i = 0; i < n_; ++i) {
                if (i != j && bit(i)) {
                    gp += ppa_.at(i, j);
                    gb += behav_.at(i, j);
                }
            }
            gp_[static_cast<std::size_t>(j)] = gp;
            gb_[static_cast<std::size_t>(j)] = gb;
        }
        for (int j = 0; j < n_; ++j) {
            if (bit(j)) {
                vp_ += ppa_.a[static_cast<std::size_t>(j)];
                vb_ += behav_.a[static_cast<std::size_t>(j)];
                for (int i = j + 1; i < n_; ++i) {
                    if (bit(i)) {
                        vp_ += ppa_.at(j, i);
                        vb_ += behav_.at(j, i);
                    }
                }
            }
        }
    }

    [[nodiscard]] double penalized(double vp, double vb, double mu) const
    {
        const double viol = std::max(0.0, vp - p_.max_ppa) / p_.maxima.p_max + std::max(0.0, vb - p_.max_behav) / p_.maxima.b_max;
        return wb_ * vb + wp_ * vp + mu * viol;
    }
    [[nodiscard]] double violation() const
    {
        return std::max(0.0, vp_ - p_.max_ppa) / p_.maxima.p_max + std::max(0.0, vb_ - p_.max_behav) / p_.maxima.b_max;
    }
    [[nodiscard]] double current(double mu) const { return penalized(vp_, vb_, mu); }

    /// One steepest-descent step; false at a local minimum.
    bool step(double mu)
    {
        const double here = current(mu);
        const double tol = 1e-12 * (1.0 + std::fabs(here));
        double best = here - tol;
        int bi = -1, bj = -1;
        for (int i = 0; i < n_; ++i) {
            const double si = bit(i) ? -1.0 : 1.0;
            const double dpi = si * gp_[static_cast<std::size_t>(i)];
            const double dbi = si * gb_[static_cast<std::size_t>(i)];
            const double v1 = penalized(vp_ + dpi, vb_ + dbi, mu);
            if (v1 < best) {
                best = v1;
                bi = i;
                bj = -1;
            }
            for (int j = i + 1; j < n_; ++j) {
                const double sj = bit(j) ? -1.0 : 1.0;
                const double dp = dpi + sj * gp_[static_cast<std::size_t>(j)] + si * sj * ppa_.at(i, j);
                const double db = dbi + sj * gb_[static_cast<std::size_t>(j)] + si * sj * behav_.at(i, j);
                const double v2 = penalized(vp_ + dp, vb_ + db, mu);
                if (v2 < best) {
                    best = v2;
                    bi = i;
                    bj = j;
                }
            }
        }
        if (bi < 0) {
            return false;
        }
        flip(bi);
        if (bj >= 0) {
            flip(bj);
        }
        return true;
    }

    [[nodiscard]] std::uint64_t mask() const noexcept { return mask_; }

private:
    [[nodiscard]] bool bit(int i) const { return ((mask_ >> i) & 1U) != 0; }

    void flip(int k)
    {
        const double s = bit(k) ? -1.0 : 1.0;
        vp_ += s * gp_[static_cast<std::size_t>(k)];
        vb_ += s * gb_[static_cast<std::size_t>(k)];
        for (int j = 0; j < n_; ++j) {
            if (j != k) {
                gp_[static_cast<std::size_t>(j)] += s * ppa_.at(k, j);
                gb_[static_cast<std::size_t>(j)] += s * behav_.at(k, j);
            }
        }
        mask_ ^= 1ULL << k;
    }

    const MapProblem& p_;
    int n_;
    Dense ppa_, behav_;
    double wb_, wp_;
    std::uint64_t mask_ = 0;
    double vp_ = 0, vb_ = 0;
    std::vector<double> gp_, gb_;
};

// Feasible beats infeasible; among feasible, lower objective then lexicographically
// smaller config; among infeasible, lower violation.
bool better(const MapSolution& a, double viol_a, const MapSolution& b, double viol_b)
{
    if (a.feasible != b.feasible) {
        return a.feasible;
    }
    if (a.feasible) {
        if (a.objective != b.objective) {
            return a.objective < b.objective;
        }
        return a.config < b.config;
    }
    if (viol_a != viol_b) {
        return viol_a < viol_b;
    }
    return a.objective < b.objective;
}

double violation_of(const MapProblem& p, const MapSolution& s)
{
    return std::max(0.0, s.v_ppa - p.max_ppa) / p.maxima.p_max + std::max(0.0, s.v_behav - p.max_behav) / p.maxima.b_max;
}

std::uint64_t random_mask(Rng& rng, int n, double density)
{
    std::uint64_t m = 0;
    for (int i = 0; i < n; ++i) {
        if (rng.uniform() < density) {
            m |= 1ULL << i;
        }
    }
    return m;
}

std::string_view optimality_name(Optimality o)
{
    return o == Optimality::proven ? "proven" : "heuristic";
}

} // namespace

// ---------------------------------------------------------------------------

double MapProblem::objective(const Config& c) const
{
    return wt_b * v_behav(c) / maxima.b_max + (1.0 - wt_b) * v_ppa(c) / maxima.p_max;
}

bool MapProblem::feasible(const Config& c) const
{
    return v_ppa(c) <= max_ppa && v_behav(c) <= max_behav;
}

nlohmann::json MapProblem::to_json() const
{
    return {{"removable", removable}, {"wt_b", wt_b},         {"const_sf", const_sf},
            {"max_ppa", max_ppa},     {"max_behav", max_behav}, {"p_max", maxima.p_max},
            {"b_max", maxima.b_max},  {"n_quad", n_quad},     {"ppa_model", ppa_model.to_json()},
            {"behav_model", behav_model.to_json()}};
}

MapProblem MapProblem::from_json(const nlohmann::json& doc)
{
    try {
        MapProblem p;
        p.removable = doc.at("removable").get<int>();
        p.wt_b = doc.at("wt_b").get<double>();
        p.const_sf = doc.at("const_sf").get<double>();
        p.max_ppa = doc.at("max_ppa").get<double>();
        p.max_behav = doc.at("max_behav").get<double>();
        p.maxima = {doc.at("p_max").get<double>(), doc.at("b_max").get<double>()};
        p.n_quad = doc.at("n_quad").get<std::size_t>();
        p.ppa_model = PolyModel::from_json(doc.at("ppa_model"));
        p.behav_model = PolyModel::from_json(doc.at("behav_model"));
        check_problem(p);
        return p;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("map problem JSON: ") + e.what());
    }
}

nlohmann::json MapSolution::to_json() const
{
    return {{"config", config.to_string()}, {"v_ppa", v_ppa},       {"v_behav", v_behav},
            {"objective", objective},       {"feasible", feasible}, {"optimality", optimality_name(optimality)}};
}

MapSolution evaluate_solution(const MapProblem& problem, const Config& config, Optimality optimality)
{
    MapSolution s;
    s.config = config;
    s.v_ppa = problem.v_ppa(config);
    s.v_behav = problem.v_behav(config);
    s.objective = problem.objective(config);
    s.feasible = problem.feasible(config);
    s.optimality = optimality;
    return s;
}

MapProblem formulate(const PolyModel& ppa_model, const PolyModel& behav_model, double wt_b, double const_sf,
                     std::size_t n_quad, const DatasetMaxima& maxima)
{
    const int L = ppa_model.removable;
    if (behav_model.removable != L) {
        throw ValidationError("formulate: PPA and BEHAV models disagree on L");
    }
    const auto pairs = static_cast<std::size_t>(L) * static_cast<std::size_t>(L - 1) / 2;
    if (n_quad > pairs) {
        throw ValidationError("formulate: n_quad exceeds C(L,2) = " + std::to_string(pairs));
    }
    if (n_quad > ppa_model.quad.size() || n_quad > behav_model.quad.size()) {
        throw ValidationError("formulate: models carry fewer than n_quad quadratic terms");
    }
    if (!(const_sf > 0)) {
        throw ValidationError("formulate: const_sf must be positive");
    }
    MapProblem p;
    p.removable = L;
    p.ppa_model = ppa_model.truncated(n_quad);
    p.behav_model = behav_model.truncated(n_quad);
    p.wt_b = wt_b;
    p.const_sf = const_sf;
    p.maxima = maxima;
    p.max_ppa = const_sf * maxima.p_max;
    p.max_behav = const_sf * maxima.b_max;
    p.n_quad = n_quad;
    check_problem(p);
    return p;
}

MapSolution solve_exact(const MapProblem& problem)
{
    check_problem(problem);
    if (problem.removable > kExactSolverMaxL) {
        throw CapacityError("solve_exact: L = " + std::to_string(problem.removable) + " exceeds " +
                            std::to_string(kExactSolverMaxL));
    }
    return BranchAndBound(problem).run();
}

MapSolution solve_heuristic(const MapProblem& problem, std::uint64_t seed, const HeuristicSettings& settings)
{
    check_problem(problem);
    if (settings.restarts < 1 || settings.budget < 0) {
        throw ConfigurationError("solve_heuristic: restarts >= 1 and budget >= 0 required");
    }
    const int n = problem.removable;
    Rng rng(seed);
    Descent d(problem);
    std::optional<MapSolution> best;
    double best_viol = 0;
    auto offer = [&](std::uint64_t mask) {
        auto s = evaluate_solution(problem, Config(mask, n), Optimality::heuristic);
        const double v = violation_of(problem, s);
        if (!best || better(s, v, *best, best_viol)) {
            best = s;
            best_viol = v;
        }
    };

    const std::uint64_t ones = Config::all_ones(n).mask();
    for (int r = 0; r < settings.restarts; ++r) {
        std::uint64_t start = 0;
        if (r == 1) {
            start = ones;
        } else if (r > 1) {
            // feasible-biased: the least violating of a few random draws
            const double density = rng.uniform();
            double least = std::numeric_limits<double>::infinity();
            for (int k = 0; k < 8; ++k) {
                const auto m = random_mask(rng, n, density);
                d.reset(m);
                if (d.violation() < least) {
                    least = d.violation();
                    start = m;
                }
            }
        }
        d.reset(start);
        offer(start);
        double mu = 1.0;
        for (int step = 0; step < settings.budget; ++step) {
            if (!d.step(mu)) {
                if (d.violation() > 0 && mu < 1e12) {
                    mu *= 10;
                    d.reset(d.mask()); // refresh the incremental sums
                    continue;
                }
                break;
            }
        }
        offer(d.mask());
    }
    return *best;
}

std::vector<std::size_t> default_quad_schedule(int removable)
{
    const auto L = static_cast<std::size_t>(removable);
    const std::size_t pairs = L * (L - 1) / 2;
    std::vector<std::size_t> s{0, L / 2, L, 2 * L, pairs};
    for (auto& v : s) {
        v = std::min(v, pairs);
    }
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    return s;
}

std::vector<double> weight_grid(double wt_step)
{
    if (!(wt_step > 0) || wt_step > 1) {
        throw ValidationError("weight step must lie in (0,1]");
    }
    const double steps = std::round(1.0 / wt_step);
    if (std::fabs(steps * wt_step - 1.0) > 1e-9) {
        throw ValidationError("weight step must divide 1 evenly");
    }
    const auto n = static_cast<int>(steps);
    std::vector<double> w;
    for (int k = 0; k <= n; ++k) {
        w.push_back(static_cast<double>(k) / static_cast<double>(n));
    }
    return w;
}

// ---------------------------------------------------------------------------

ModelLadder::ModelLadder(Samples ppa, Samples behav, std::uint64_t split_seed, unsigned threads)
    : ppa_(std::move(ppa)), behav_(std::move(behav)), seed_(split_seed)
{
    if (ppa_.removable != behav_.removable) {
        throw ValidationError("model ladder: PPA and BEHAV samples disagree on L");
    }
    ppa_rank_ = rank_quadratic_features(ppa_, threads);
    behav_rank_ = rank_quadratic_features(behav_, threads);
}

ModelLadder::ModelLadder(Samples ppa, Samples behav, std::vector<LutPair> ppa_ranking, std::vector<LutPair> behav_ranking,
                         std::uint64_t split_seed)
    : ppa_(std::move(ppa)), behav_(std::move(behav)), ppa_rank_(std::move(ppa_ranking)),
      behav_rank_(std::move(behav_ranking)), seed_(split_seed)
{
    if (ppa_.removable != behav_.removable) {
        throw ValidationError("model ladder: PPA and BEHAV samples disagree on L");
    }
}

DatasetMaxima ModelLadder::maxima() const
{
    return {*std::max_element(ppa_.target.begin(), ppa_.target.end()),
            *std::max_element(behav_.target.begin(), behav_.target.end())};
}

const ModelLadder::Entry& ModelLadder::fit(std::size_t n_quad)
{
    for (const auto& e : cache_) {
        if (e.n_quad == n_quad) {
            return e;
        }
    }
    if (n_quad > ppa_rank_.size() || n_quad > behav_rank_.size()) {
        throw ValidationError("model ladder: n_quad exceeds the ranked pair count");
    }
    auto [pm, pr] = fit_poly(ppa_, std::span(ppa_rank_).first(n_quad), seed_);
    auto [bm, br] = fit_poly(behav_, std::span(behav_rank_).first(n_quad), seed_);
    cache_.push_back({n_quad, std::move(pm), std::move(bm), pr, br});
    return cache_.back();
}

std::pair<PolyModel, PolyModel> ModelLadder::models(std::size_t n_quad)
{
    const auto& e = fit(n_quad);
    return {e.ppa, e.behav};
}

std::pair<FitReport, FitReport> ModelLadder::reports(std::size_t n_quad)
{
    const auto& e = fit(n_quad);
    return {e.ppa_report, e.behav_report};
}

std::vector<Config> SolutionPool::configs() const
{
    std::vector<Config> out;
    out.reserve(entries.size());
    for (const auto& e : entries) {
        out.push_back(e.solution.config);
    }
    return out;
}

nlohmann::json SolutionPool::to_json() const
{
    auto list = nlohmann::json::array();
    for (const auto& e : entries) {
        auto j = e.solution.to_json();
        j["wt_b"] = e.wt_b;
        j["n_quad"] = e.n_quad;
        j["const_sf"] = e.const_sf;
        list.push_back(std::move(j));
    }
    return {{"problems", problems}, {"infeasible", infeasible}, {"solutions", std::move(list)}};
}

SolutionPool build_pool(ModelLadder& ladder, double const_sf, const PoolSettings& settings)
{
    const int L = ladder.removable();
    const auto weights = weight_grid(settings.wt_step);
    const auto schedule = settings.n_quad_schedule.empty() ? default_quad_schedule(L) : settings.n_quad_schedule;
    const auto maxima = ladder.maxima();

    std::vector<MapProblem> problems;
    std::vector<std::pair<double, std::size_t>> tags;
    for (const auto nq : schedule) {
        const auto [pm, bm] = ladder.models(nq);
        for (const double w : weights) {
            problems.push_back(formulate(pm, bm, w, const_sf, nq, maxima));
            tags.emplace_back(w, nq);
        }
    }
    std::vector<MapSolution> solved(problems.size());
    parallel_for(problems.size(), settings.threads, [&](std::size_t k) {
        solved[k] = L <= settings.exact_max_l ? solve_exact(problems[k])
                                              : solve_heuristic(problems[k], settings.seed + k, settings.heuristic);
    });

    SolutionPool pool;
    pool.problems = problems.size();
    std::unordered_set<Config> seen;
    for (std::size_t k = 0; k < solved.size(); ++k) {
        if (!solved[k].feasible) {
            ++pool.infeasible;
            continue;
        }
        if (seen.insert(solved[k].config).second) {
            pool.entries.push_back({solved[k], tags[k].first, tags[k].second, const_sf});
        }
    }
    if (pool.infeasible > 0) {
        std::clog << "map: " << pool.infeasible << " of " << pool.problems << " problems infeasible at const_sf "
                  << const_sf << '\n';
    }
    return pool;
}

} // namespace axomap
