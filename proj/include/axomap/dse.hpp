#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "axomap/charac.hpp"
#include "axomap/config.hpp"
#include "axomap/estimate.hpp"
#include "axomap/map.hpp"
#include "axomap/netlist.hpp"

namespace axomap {

/// Upper bounds on both objectives; infinite bounds never bind.
struct Constraints {
    double max_ppa = std::numeric_limits<double>::infinity();
    double max_behav = std::numeric_limits<double>::infinity();

    [[nodiscard]] bool satisfied(double ppa, double behav) const { return ppa <= max_ppa && behav <= max_behav; }
    /// Sum of relative excesses over the bounds, 0 when satisfied.
    [[nodiscard]] double violation(double ppa, double behav) const;
};

struct Objectives {
    double ppa = 0;
    double behav = 0;
    double violation = 0;

    [[nodiscard]] bool feasible() const noexcept { return violation == 0; }
    friend bool operator==(const Objectives&, const Objectives&) = default;
};

using EvalFn = std::function<Objectives(const Config&)>;

enum class ConstraintMode { constraint_domination, penalty };

struct GaSettings {
    int pop_size = 64;
    int max_generations = 250;
    int tournament_size = 2;
    double crossover_rate = 0.9;
    double mutation_rate = -1; ///< per-bit flip probability; negative means 1/L
    std::uint64_t seed = 0;
    ConstraintMode constraint_mode = ConstraintMode::constraint_domination;

    void validate() const;
    [[nodiscard]] nlohmann::json to_json() const;
    static GaSettings from_json(const nlohmann::json& doc);
};

struct GaIndividual {
    Config config;
    Objectives obj;
    int rank = 0;
    double crowding = 0;
};

/// Called after the initial population (generation 0) and after every generation.
using GenerationObserver = std::function<void(int generation, std::size_t evaluations, std::span<const GaIndividual>)>;

/**
 * NSGA-II over binary configs: constraint-domination (or penalty) sorting,
 * crowding distance, tournament selection, single-point crossover and per-bit
 * mutation. The initial population is seed_pop (truncated by rank and
 * crowding if too large) filled up with random configs. Runs
 * min(max_generations, budget) generations; budget < 0 means no cap.
 */
[[nodiscard]] std::vector<GaIndividual> nsga2(const EvalFn& evalfn, int removable, const GaSettings& settings,
                                              std::span<const Config> seed_pop = {}, int budget = -1,
                                              const GenerationObserver& observer = {});

struct ParetoPoint {
    Config config;
    double ppa = 0;
    double behav = 0;

    friend bool operator==(const ParetoPoint&, const ParetoPoint&) = default;
};

enum class FrontKind { ppf, vpf };

struct ParetoFront {
    std::vector<ParetoPoint> points;
    FrontKind kind = FrontKind::ppf;
};

/// a dominates b under minimization of both objectives.
[[nodiscard]] bool dominates(const ParetoPoint& a, const ParetoPoint& b);

/// Drops constraint violators, repeated configs and dominated points; sorted by ppa, then behav, then config.
[[nodiscard]] ParetoFront pareto_filter(std::span<const ParetoPoint> points, const Constraints& constraints = {},
                                        FrontKind kind = FrontKind::ppf);

struct HvReport {
    double hypervolume = 0;
    double ref_ppa = 1;
    double ref_behav = 1;
    double p_max = 1;
    double b_max = 1;
    double const_sf = 1;
    std::size_t dropped = 0; ///< points not dominating the reference
};

/// Exact 2-D dominated area of (x, y) points w.r.t. a reference, by sort and sweep.
[[nodiscard]] double hypervolume2d(std::span<const std::pair<double, double>> points, std::pair<double, double> reference,
                                   std::size_t* dropped = nullptr);

/// Hypervolume of a front with objectives divided by const_sf * maxima, reference (1, 1).
[[nodiscard]] HvReport normalized_hypervolume(const ParetoFront& front, const DatasetMaxima& maxima, double const_sf);

/// Ground-truth (ppa, behav) of a config.
using TruthFn = std::function<std::pair<double, double>(const Config&)>;

/// Re-evaluates every front config with ground truth and re-filters.
[[nodiscard]] ParetoFront vpf(const ParetoFront& front, const TruthFn& truth, const Constraints& constraints = {});
[[nodiscard]] ParetoFront vpf(const ParetoFront& front, const Netlist& netlist, Metric ppa_metric, Metric behav_metric,
                              const Constraints& constraints = {});

/// Ground truth of an operator: exhaustive characterization, memoized for small L.
class OperatorTruth {
public:
    OperatorTruth(const Netlist& netlist, Metric ppa_metric, Metric behav_metric, unsigned threads = 0);
    [[nodiscard]] std::pair<double, double> operator()(const Config& config) const;
    [[nodiscard]] TruthFn fn() const;

private:
    const Netlist* netlist_;
    Metric ppa_, behav_;
    std::vector<std::pair<double, double>> table_; ///< all 2^L configs when L is small
};

/// Everything an experiment needs about the design being explored.
struct ExperimentInputs {
    std::string name;
    int removable = 0;
    Samples ppa;   ///< training data, PPA target
    Samples behav; ///< training data, BEHAV target
    TruthFn truth;
};

struct ExperimentSettings {
    std::vector<std::string> methods{"GA", "MaP", "MaP+GA"};
    int n_seeds = 10;
    double const_sf = 0.5;
    GaSettings ga;
    PoolSettings pool;
    EstimatorKind estimator = EstimatorKind::poly;
    bool ground_truth_fitness = false;
    std::uint64_t seed = 0;
    unsigned threads = 0;

    void validate() const;
};

struct HvSample {
    std::size_t evals = 0;
    double hv = 0;
};

struct RunResult {
    std::string method;
    int seed = 0;
    std::vector<HvSample> trajectory; ///< empty for pool-only runs
    ParetoFront ppf;
    ParetoFront vpf;
    double hv_ppf = 0;
    double hv_vpf = 0;
};

struct ExperimentReport {
    std::string name;
    double const_sf = 0;
    DatasetMaxima maxima;
    Constraints constraints;
    std::vector<RunResult> runs; ///< method-major, then seed
    std::size_t pool_size = 0;

    [[nodiscard]] const RunResult& run(const std::string& method, int seed) const;
    [[nodiscard]] double mean_hv_ppf(const std::string& method) const;

    void write_fronts_csv(const RunResult& run, std::ostream& out) const;
    void write_trajectory_csv(std::ostream& out) const;
    void write_summary_csv(std::ostream& out) const;
    /// fronts_{method}_{seed}.csv, hv_trajectory.csv, summary.csv and SVG front plots.
    void write(const std::string& dir) const;
};

[[nodiscard]] ExperimentInputs operator_inputs(const Netlist& netlist, const Dataset& training, Metric ppa_metric,
                                               Metric behav_metric, unsigned threads = 0);

/// Runs every (method, seed). The MaP pool is built from the training data unless one is given.
[[nodiscard]] ExperimentReport run_experiment(const ExperimentInputs& inputs, const ExperimentSettings& settings,
                                              const SolutionPool* pool = nullptr);

} // namespace axomap
