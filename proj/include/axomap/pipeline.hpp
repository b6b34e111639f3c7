#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "axomap/apps.hpp"
#include "axomap/dataset.hpp"
#include "axomap/dse.hpp"
#include "axomap/estimate.hpp"
#include "axomap/map.hpp"
#include "axomap/netlist.hpp"
#include "axomap/stats.hpp"

namespace axomap {

/**
 * One reproducible end-to-end run. JSON keys (all optional):
 *   operator: {kind: "mul"|"add", width, signed} or {netlist: path}
 *   sampling: {exhaustive: true} or a sampling plan
 *   metrics: {ppa, behav}
 *   estimator: "poly" | "tree_ensemble"
 *   map: {wt_step, n_quad_schedule, exact_max_l, restarts, budget}
 *   ga: GA settings
 *   methods, n_seeds, const_sf: [..], ground_truth_fitness, progression_terms
 *   app: kernel name, app_asset: path
 *   out_dir, seed
 * Unknown keys are rejected.
 */
struct RunConfig {
    std::string netlist_path;
    OperatorKind kind = OperatorKind::multiplier;
    int width = 4;
    bool is_signed = true;

    bool exhaustive = false;
    SamplingPlan plan;

    Metric ppa_metric = Metric::pdplut;
    Metric behav_metric = Metric::avg_abs_rel_err;
    EstimatorKind estimator = EstimatorKind::poly;

    PoolSettings pool;
    GaSettings ga;
    std::vector<std::string> methods{"GA", "MaP", "MaP+GA"};
    int n_seeds = 3;
    std::vector<double> const_sf{0.5, 1.0};
    bool ground_truth_fitness = false;
    std::size_t progression_terms = 64;

    std::optional<AppKind> app;
    std::string app_asset;

    std::string out_dir = "axomap_out";
    std::uint64_t seed = 0;

    /// Relative paths resolve against base_dir.
    static RunConfig from_json(const nlohmann::json& doc, const std::string& base_dir = ".");
    static RunConfig load(const std::string& path);
    [[nodiscard]] nlohmann::json to_json() const;
};

[[nodiscard]] Netlist make_netlist(const RunConfig& config);

/// Writes {prefix}correlation.csv, {prefix}bivariate.csv and {prefix}heatmap.svg.
CorrelationReport write_analysis(const Samples& samples, const std::string& dir, const std::string& prefix,
                                 unsigned threads);

/// Writes {prefix}model.json and {prefix}r2_progression.csv (train/test R^2 per ranked term count).
std::pair<Estimator, FitReport> write_fit(const Samples& samples, EstimatorKind kind, std::uint64_t seed,
                                          std::size_t progression_terms, const std::string& dir,
                                          const std::string& prefix, unsigned threads);

/// File-name fragment for a const_sf value, e.g. "sf0.5".
[[nodiscard]] std::string sf_tag(double const_sf);

void write_text(const std::string& path, const std::string& text);
void write_json(const std::string& path, const nlohmann::json& doc);

struct RunSummary {
    std::vector<std::string> files; ///< relative to out_dir, in write order
    [[nodiscard]] nlohmann::json to_json() const;
};

/// Generate, characterize, analyze, fit, build MaP pools and run the searches.
RunSummary run_all(const RunConfig& config, unsigned threads, std::ostream* log = nullptr);

} // namespace axomap
