#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "axomap/config.hpp"
#include "axomap/netlist.hpp"

namespace axomap {

enum class Metric { avg_abs_err, avg_abs_rel_err, prob_err, max_abs_err, power, cpd, luts, pdp, pdplut };

[[nodiscard]] std::string_view metric_name(Metric m);
/// Accepts the lower-case CSV column names; throws ConfigurationError otherwise.
[[nodiscard]] Metric parse_metric(std::string_view name);
[[nodiscard]] bool is_behav_metric(Metric m);

struct BehavMetrics {
    double avg_abs_err = 0;
    double avg_abs_rel_err = 0; ///< pairs with an accurate result of 0 are skipped
    double prob_err = 0;        ///< percent of pairs with any error
    double max_abs_err = 0;

    friend bool operator==(const BehavMetrics&, const BehavMetrics&) = default;
};

struct PpaMetrics {
    double power = 0; ///< live-cell output toggles per input vector, Gray-code input order
    double cpd = 0;   ///< longest live path in delay units
    double luts = 0;  ///< used removable LUTs
    double pdp = 0;
    double pdplut = 0;

    friend bool operator==(const PpaMetrics&, const PpaMetrics&) = default;
};

/// Delay constants of the surrogate timing model.
struct PpaModel {
    double lut_delay = 1.0;
    double carry_delay = 0.1;
};

enum class RecordSource { simulated, ingested };

struct MetricsRecord {
    Config config;
    BehavMetrics behav;
    PpaMetrics ppa;
    RecordSource source = RecordSource::simulated;
    bool warning = false; ///< set on ingest when pdp/pdplut disagree with their factors

    [[nodiscard]] double metric(Metric m) const;
    friend bool operator==(const MetricsRecord&, const MetricsRecord&) = default;
};

/// Error metrics of an output table against exact arithmetic, over every operand pair.
[[nodiscard]] BehavMetrics behav_metrics(const Netlist& netlist, const ProductTable& approx);
[[nodiscard]] BehavMetrics behav_metrics(const Netlist& netlist, const Config& config);

[[nodiscard]] PpaMetrics ppa_metrics(const Netlist& netlist, const Config& config, const PpaModel& model = {});

/// Critical path delay alone (no simulation needed).
[[nodiscard]] double critical_path(const Netlist& netlist, const Config& config, const PpaModel& model = {});

[[nodiscard]] MetricsRecord characterize_one(const Netlist& netlist, const Config& config, const PpaModel& model = {});

/// One record per config, in input order. Configs must be distinct.
[[nodiscard]] std::vector<MetricsRecord> characterize(const Netlist& netlist, std::span<const Config> configs,
                                                      unsigned threads = 0, const PpaModel& model = {});

} // namespace axomap
