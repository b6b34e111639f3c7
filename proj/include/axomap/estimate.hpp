#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "axomap/config.hpp"
#include "axomap/stats.hpp"

namespace axomap {

struct QuadTerm {
    int i = 0;
    int j = 0;
    double coef = 0;

    friend bool operator==(const QuadTerm&, const QuadTerm&) = default;
};

/**
 * Polynomial surrogate over the LUT-usage bits:
 *   v = intercept + sum_i linear[i] * l_i + sum_t quad[t].coef * l_i * l_j
 * Coefficients are stored in target units (the MinMax scaling applied while
 * fitting is undone), in ranked term order.
 */
struct PolyModel {
    std::string metric_name;
    int removable = 0;
    double intercept = 0;
    std::vector<double> linear;
    std::vector<QuadTerm> quad;
    double target_min = 0; ///< MinMax scaler of the training target
    double target_max = 1;

    [[nodiscard]] double predict(const Config& config) const;
    /// Same coefficients with only the first n quadratic terms kept.
    [[nodiscard]] PolyModel truncated(std::size_t n_quad) const;

    [[nodiscard]] nlohmann::json to_json() const;
    static PolyModel from_json(const nlohmann::json& doc);

    friend bool operator==(const PolyModel&, const PolyModel&) = default;
};

struct FitReport {
    double r2_train = 0;
    double r2_test = 0;
    double mae_train = 0;
    double mae_test = 0;
    double mse_train = 0;
    double mse_test = 0;
    std::size_t n_quad = 0;
    std::size_t n_train = 0;
    std::size_t n_test = 0;
    bool rank_deficient = false;

    [[nodiscard]] nlohmann::json to_json() const;
    friend bool operator==(const FitReport&, const FitReport&) = default;
};

/// Deterministic 80/20 split of row indices: {train, test}.
[[nodiscard]] std::pair<std::vector<std::size_t>, std::vector<std::size_t>> train_test_split(std::size_t rows,
                                                                                             std::uint64_t seed);

/// Least squares on the MinMax-scaled target with linear terms plus `quad_terms`.
/// Rank-deficient designs get the minimum-norm solution and a flag in the report.
[[nodiscard]] std::pair<PolyModel, FitReport> fit_poly(const Samples& samples, std::span<const LutPair> quad_terms,
                                                       std::uint64_t split_seed);

/// Training R^2 after adding ranked terms one by one, for 0..max_terms terms.
[[nodiscard]] std::vector<FitReport> poly_progression(const Samples& samples, std::span<const LutPair> ranked,
                                                      std::size_t max_terms, std::uint64_t split_seed);

struct TreeNode {
    int feature = -1; ///< split LUT, -1 for a leaf
    int left = -1;    ///< child for l_feature == 0
    int right = -1;   ///< child for l_feature == 1
    double value = 0; ///< leaf prediction

    friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct RegressionTree {
    std::vector<TreeNode> nodes; ///< nodes[0] is the root

    [[nodiscard]] double predict(const Config& config) const;
    friend bool operator==(const RegressionTree&, const RegressionTree&) = default;
};

struct TreeSettings {
    int trees = 100;
    int max_depth = 6;
    double bagging = 0.8;
};

/// Bagged depth-limited regression trees; prediction is the mean over trees.
struct TreeEnsemble {
    std::string metric_name;
    int removable = 0;
    std::vector<RegressionTree> trees;

    [[nodiscard]] double predict(const Config& config) const;
    friend bool operator==(const TreeEnsemble&, const TreeEnsemble&) = default;
};

[[nodiscard]] std::pair<TreeEnsemble, FitReport> fit_tree_ensemble(const Samples& samples, std::uint64_t seed,
                                                                   const TreeSettings& settings = {});

enum class EstimatorKind { poly, tree_ensemble };

[[nodiscard]] std::string_view estimator_kind_name(EstimatorKind k);
[[nodiscard]] EstimatorKind parse_estimator_kind(std::string_view name);

class Estimator {
public:
    explicit Estimator(PolyModel model) : model_(std::move(model)) {}
    explicit Estimator(TreeEnsemble model) : model_(std::move(model)) {}

    [[nodiscard]] EstimatorKind kind() const noexcept
    {
        return std::holds_alternative<PolyModel>(model_) ? EstimatorKind::poly : EstimatorKind::tree_ensemble;
    }
    [[nodiscard]] double predict(const Config& config) const;
    [[nodiscard]] const PolyModel* poly() const noexcept { return std::get_if<PolyModel>(&model_); }
    [[nodiscard]] const TreeEnsemble* ensemble() const noexcept { return std::get_if<TreeEnsemble>(&model_); }

    [[nodiscard]] nlohmann::json to_json() const;
    static Estimator from_json(const nlohmann::json& doc);

private:
    std::variant<PolyModel, TreeEnsemble> model_;
};

/// Default number of ranked quadratic terms a poly estimator receives: L, capped at C(L,2).
[[nodiscard]] std::size_t default_poly_budget(int removable);

[[nodiscard]] std::pair<Estimator, FitReport> fit_estimator(const Samples& samples, EstimatorKind kind, std::uint64_t seed,
                                                            unsigned threads = 0);

[[nodiscard]] inline double predict(const PolyModel& model, const Config& config) { return model.predict(config); }
[[nodiscard]] inline double predict(const Estimator& model, const Config& config) { return model.predict(config); }

} // namespace axomap
