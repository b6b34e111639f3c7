#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "axomap/config.hpp"
#include "axomap/dataset.hpp"

namespace axomap {

/// Configurations paired with one scalar target; the common input of stats and estimate.
struct Samples {
    std::vector<Config> configs;
    std::vector<double> target;
    int removable = 0;
    std::string metric_name;

    [[nodiscard]] std::size_t size() const noexcept { return configs.size(); }
};

[[nodiscard]] Samples make_samples(const Dataset& dataset, Metric metric);

/// An unordered LUT pair with first < second.
using LutPair = std::pair<int, int>;

/// Sample Pearson r. Throws UndefinedCorrelation when either input is constant.
[[nodiscard]] double pearson(std::span<const double> xs, std::span<const double> ys);

/// sqrt(R^2) of the least-squares fit ys = c0 + c1 * xs, computed from residuals.
[[nodiscard]] double single_regressor_r(std::span<const double> xs, std::span<const double> ys);

/**
 * Multivariate correlation of a LUT pair with the target: sqrt(R^2) of the
 * two-regressor fit target = c0 + c1*l_x + c2*l_y. A constant or collinear
 * regressor is dropped; if both are constant, or the target is, throws
 * UndefinedCorrelation. Symmetric in (x, y) bit for bit.
 */
[[nodiscard]] double multivariate_r(const Samples& samples, int lut_x, int lut_y);

/// All C(L,2) pairs by descending multivariate r, ties lexicographic, undefined pairs last.
[[nodiscard]] std::vector<LutPair> rank_quadratic_features(const Samples& samples, unsigned threads = 0);

struct CorrelationReport {
    std::string metric_name;
    int removable = 0;
    std::vector<double> bivariate;    ///< Pearson r per LUT, 0 where undefined
    std::vector<double> multivariate; ///< L x L row-major, diagonal = |bivariate|
    std::vector<LutPair> ranking;
    std::vector<std::string> warnings;

    [[nodiscard]] double at(int i, int j) const
    {
        return multivariate[static_cast<std::size_t>(i) * static_cast<std::size_t>(removable) + static_cast<std::size_t>(j)];
    }
};

[[nodiscard]] CorrelationReport correlation_report(const Samples& samples, unsigned threads = 0);

/// Long form "metric,i,j,r" of the multivariate matrix.
void write_correlation_csv(const CorrelationReport& report, std::ostream& out);
/// "metric,i,r" of the bivariate vector.
void write_bivariate_csv(const CorrelationReport& report, std::ostream& out);

} // namespace axomap
