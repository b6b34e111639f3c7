#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "axomap/charac.hpp"
#include "axomap/config.hpp"

namespace axomap {

enum class Provenance { random, pattern, combined, ingested };
enum class PatternFamily { runs_of_ones, runs_of_zeros, alternating, sliding_window };

[[nodiscard]] std::string_view provenance_name(Provenance p);
[[nodiscard]] std::string_view family_name(PatternFamily f);
[[nodiscard]] PatternFamily parse_family(std::string_view name);

/**
 * How a characterization dataset is drawn.
 *
 * Pattern families, for every window size w and window offset:
 *   runs_of_zeros   w zeros in an all-ones background
 *   runs_of_ones    w ones in an all-zeros background
 *   alternating     the window filled with 1010... and 0101..., on both backgrounds
 *   sliding_window  a periodic train of w ones then w zeros, shifted by the offset
 * The two corner configurations are always included.
 */
struct SamplingPlan {
    std::size_t n_random = 0;
    std::uint64_t seed = 0;
    std::vector<PatternFamily> pattern_families;
    std::vector<int> window_sizes;

    /// Every family with every window size 1..L.
    static SamplingPlan all_patterns(int removable, std::size_t n_random, std::uint64_t seed);
    /// Every pattern plus enough random configs for `target_size` records in total.
    static SamplingPlan sized(int removable, std::size_t target_size, std::uint64_t seed);

    void validate(int removable) const;

    [[nodiscard]] nlohmann::json to_json() const;
    static SamplingPlan from_json(const nlohmann::json& doc);
};

/// Record count of the larger characterization set used for the 8x8 multiplier.
inline constexpr std::size_t kReferenceDatasetSize = 10650;

struct Dataset {
    std::vector<MetricsRecord> records;
    std::string netlist_name;
    int removable = 0;
    Provenance provenance = Provenance::random;
    std::size_t pattern_count = 0;
    std::size_t random_count = 0;

    [[nodiscard]] std::size_t size() const noexcept { return records.size(); }
    [[nodiscard]] std::vector<Config> configs() const;
    [[nodiscard]] std::vector<double> column(Metric m) const;
    [[nodiscard]] double max(Metric m) const;
    [[nodiscard]] double min(Metric m) const;
};

/// n distinct configs with i.i.d. uniform bits; duplicates (and excluded configs) are redrawn.
[[nodiscard]] std::vector<Config> sample_random(int removable, std::size_t n, std::uint64_t seed,
                                                const std::unordered_set<Config>& exclude = {});

/// Every config of length L (L <= 24), in mask order.
[[nodiscard]] std::vector<Config> all_configs(int removable);

/// Deterministic pattern configs, corners first, duplicates removed.
[[nodiscard]] std::vector<Config> sample_patterns(int removable, const SamplingPlan& plan);

struct SampledConfigs {
    std::vector<Config> configs; ///< patterns first, then random draws not already present
    std::size_t pattern_count = 0;
    std::size_t random_count = 0;
    Provenance provenance = Provenance::random;
};

[[nodiscard]] SampledConfigs plan_configs(int removable, const SamplingPlan& plan);

[[nodiscard]] Dataset build_dataset(const Netlist& netlist, const SamplingPlan& plan, unsigned threads = 0,
                                    const PpaModel& model = {});

inline constexpr const char* kDatasetHeader =
    "config,avg_abs_err,avg_abs_rel_err,prob_err,max_abs_err,power,cpd,luts,pdp,pdplut,source";

void write_csv(const Dataset& dataset, std::ostream& out);
void save_csv(const Dataset& dataset, const std::string& path);
[[nodiscard]] Dataset ingest_csv(std::istream& in, int removable, const std::string& name = "ingested");
[[nodiscard]] Dataset ingest_csv(const std::string& path, int removable);

/// Shortest text that reads back to exactly the same double.
[[nodiscard]] std::string format_double(double v);

} // namespace axomap
