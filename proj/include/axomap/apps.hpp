#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "axomap/charac.hpp"
#include "axomap/dse.hpp"
#include "axomap/netlist.hpp"

namespace axomap {

enum class AppKind { fir_peak, gemv_classify, conv2d_psnr };

[[nodiscard]] std::string_view app_name(AppKind k);
[[nodiscard]] AppKind parse_app(std::string_view name);

/**
 * A small application kernel whose multiplications run on signed 8-bit
 * operands (data, weight) with 32-bit accumulation.
 *
 *   fir_peak       15-tap low-pass FIR over a 2048-sample ECG-like trace, then
 *                  R-peak detection; error = (missed + spurious) / #reference peaks
 *   gemv_classify  10 x 32 dense layer over 200 feature vectors; error = fraction
 *                  of vectors whose argmax (lowest index on ties) changes
 *   conv2d_psnr    5x5 binomial smoothing of a 64x64 image (pixels 0..127, >>8
 *                  with rounding, clamped borders); error = PSNR drop in dB
 */
struct AppKernel {
    AppKind kind = AppKind::fir_peak;
    int rows = 0; ///< samples / vectors / image height
    int cols = 0; ///< 1 / features / image width
    std::vector<std::int8_t> data;
    std::vector<std::int8_t> weights;

    friend bool operator==(const AppKernel&, const AppKernel&) = default;
};

/// The bundled kernel data, generated deterministically.
[[nodiscard]] AppKernel builtin_kernel(AppKind kind);

/// Versioned binary asset with an FNV-1a checksum.
void save_kernel(const AppKernel& kernel, const std::string& path);
[[nodiscard]] AppKernel load_kernel(const std::string& path);
[[nodiscard]] std::vector<std::uint8_t> encode_kernel(const AppKernel& kernel);
[[nodiscard]] AppKernel decode_kernel(std::span<const std::uint8_t> bytes);

/// Application error with multiplications taken from a signed 8x8 product table.
[[nodiscard]] double app_behav(const AppKernel& kernel, const ProductTable& table);
/// Same, calling Netlist::evaluate for every multiplication.
[[nodiscard]] double app_behav_direct(const AppKernel& kernel, const Netlist& netlist, const Config& config);

/// Peak positions of the FIR kernel's reference (exact) output.
[[nodiscard]] std::vector<int> reference_peaks(const AppKernel& kernel);

[[nodiscard]] PpaMetrics app_ppa(const Config& config, const Netlist& netlist, const PpaModel& model = {});

/// Experiment inputs for application-level search: BEHAV is the application error.
[[nodiscard]] ExperimentInputs app_inputs(const Netlist& netlist, const AppKernel& kernel, std::span<const Config> training,
                                          Metric ppa_metric, unsigned threads = 0);

} // namespace axomap
