#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "axomap/config.hpp"
#include "axomap/estimate.hpp"

namespace axomap {

/// Constraint-scaling factors swept in the experiments.
inline constexpr double kConstSfSweep[] = {0.2, 0.5, 0.8, 1.0, 1.2, 1.5};

/// Largest PPA / BEHAV values seen in the training data.
struct DatasetMaxima {
    double p_max = 1;
    double b_max = 1;
};

/**
 * One constrained bi-objective pseudo-boolean problem:
 *   minimize  wt_b * v_behav / b_max + (1 - wt_b) * v_ppa / p_max
 *   s.t.      v_ppa <= max_ppa,  v_behav <= max_behav
 * where v_ppa / v_behav are the polynomial surrogates. Dividing by the dataset
 * maxima puts both objectives on a comparable scale so the weight sweep is
 * meaningful; it does not change the constraints.
 */
struct MapProblem {
    int removable = 0;
    PolyModel ppa_model;   ///< already cut to n_quad terms
    PolyModel behav_model; ///< already cut to n_quad terms
    double wt_b = 0;
    double const_sf = 1;
    double max_ppa = 0;
    double max_behav = 0;
    DatasetMaxima maxima;
    std::size_t n_quad = 0;

    [[nodiscard]] double v_ppa(const Config& c) const { return ppa_model.predict(c); }
    [[nodiscard]] double v_behav(const Config& c) const { return behav_model.predict(c); }
    [[nodiscard]] double objective(const Config& c) const;
    [[nodiscard]] bool feasible(const Config& c) const;

    [[nodiscard]] nlohmann::json to_json() const;
    static MapProblem from_json(const nlohmann::json& doc);
};

enum class Optimality { proven, heuristic };

struct MapSolution {
    Config config;
    double v_ppa = 0;
    double v_behav = 0;
    double objective = 0;
    bool feasible = false;
    Optimality optimality = Optimality::heuristic;

    [[nodiscard]] nlohmann::json to_json() const;
};

/// Canonical evaluation of a config against a problem.
[[nodiscard]] MapSolution evaluate_solution(const MapProblem& problem, const Config& config, Optimality optimality);

/// Bounds = const_sf * maxima; both models cut to their first n_quad quadratic terms.
[[nodiscard]] MapProblem formulate(const PolyModel& ppa_model, const PolyModel& behav_model, double wt_b, double const_sf,
                                   std::size_t n_quad, const DatasetMaxima& maxima);

inline constexpr int kExactSolverMaxL = 24;

/// Branch-and-bound; optimal feasible config with ties to the lexicographically smallest.
/// With no feasible config the result has feasible == false.
[[nodiscard]] MapSolution solve_exact(const MapProblem& problem);

struct HeuristicSettings {
    int restarts = 16;
    int budget = 200; ///< descent steps per restart; 0 evaluates only the start points
};

/// Multi-start steepest descent over 1- and 2-flip moves with an adaptive constraint penalty.
[[nodiscard]] MapSolution solve_heuristic(const MapProblem& problem, std::uint64_t seed, const HeuristicSettings& settings = {});

/// Quadratic-term count schedule {0, L/2, L, 2L, C(L,2)} clipped and deduplicated.
[[nodiscard]] std::vector<std::size_t> default_quad_schedule(int removable);

/// Inclusive weight grid 0, step, ..., 1. The step must divide 1.
[[nodiscard]] std::vector<double> weight_grid(double wt_step);

/**
 * Polynomial models for each quadratic-term count, fitted on the ranked
 * prefix of each metric's own correlation ranking. Fits are cached.
 */
class ModelLadder {
public:
    ModelLadder(Samples ppa, Samples behav, std::uint64_t split_seed, unsigned threads = 0);
    /// Rankings given explicitly (ppa, behav) instead of computed.
    ModelLadder(Samples ppa, Samples behav, std::vector<LutPair> ppa_ranking, std::vector<LutPair> behav_ranking,
                std::uint64_t split_seed);

    [[nodiscard]] int removable() const noexcept { return ppa_.removable; }
    [[nodiscard]] DatasetMaxima maxima() const;
    [[nodiscard]] const std::vector<LutPair>& ppa_ranking() const noexcept { return ppa_rank_; }
    [[nodiscard]] const std::vector<LutPair>& behav_ranking() const noexcept { return behav_rank_; }
    /// (ppa model, behav model) with n_quad ranked terms each.
    [[nodiscard]] std::pair<PolyModel, PolyModel> models(std::size_t n_quad);
    [[nodiscard]] std::pair<FitReport, FitReport> reports(std::size_t n_quad);

private:
    struct Entry {
        std::size_t n_quad;
        PolyModel ppa, behav;
        FitReport ppa_report, behav_report;
    };
    const Entry& fit(std::size_t n_quad);

    Samples ppa_, behav_;
    std::vector<LutPair> ppa_rank_, behav_rank_;
    std::uint64_t seed_;
    std::vector<Entry> cache_;
};

struct PoolEntry {
    MapSolution solution;
    double wt_b = 0;
    std::size_t n_quad = 0;
    double const_sf = 0;
};

struct SolutionPool {
    std::vector<PoolEntry> entries; ///< unique configs, first occurrence kept
    std::size_t problems = 0;
    std::size_t infeasible = 0;

    [[nodiscard]] std::vector<Config> configs() const;
    [[nodiscard]] nlohmann::json to_json() const;
};

struct PoolSettings {
    double wt_step = 0.05;
    std::vector<std::size_t> n_quad_schedule; ///< empty: default schedule
    int exact_max_l = 16;                     ///< larger L uses the heuristic solver
    HeuristicSettings heuristic;
    std::uint64_t seed = 0;
    unsigned threads = 0;
};

/// Solve every (n_quad, wt_b) problem at one const_sf; infeasible problems contribute nothing.
[[nodiscard]] SolutionPool build_pool(ModelLadder& ladder, double const_sf, const PoolSettings& settings = {});

} // namespace axomap
