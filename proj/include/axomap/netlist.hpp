#pragma once

/*!
  \file netlist.hpp
  \brief LUT + carry-chain netlists of arithmetic operators under selective LUT removal.

  A netlist is a DAG of 6-input dual-output LUTs and carry-chain cells. Each
  removable LUT corresponds to one position of a Config. Removing a LUT drives
  both of its outputs to 0 and forces the select and data inputs of the carry
  cell it drives to 0, so that cell passes carry-in to its sum and emits a
  zero carry-out.

  Net naming:
    - "const0", "const1"      constants
    - primary inputs          as declared; the first width_a are operand a (LSB
                              first), the next width_b operand b
    - "lut<id>.o6"            primary output of a LUT
    - "lut<id>.o5"            secondary (lower 5-input) output, dual LUTs only
    - carry sum / cout nets   as declared on each carry cell
*/

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "axomap/config.hpp"

namespace axomap {

inline constexpr const char* kConst0 = "const0";
inline constexpr const char* kConst1 = "const1";

struct LutCell {
    int id = 0;                        ///< removal index when removable
    std::vector<std::string> inputs;   ///< 1..6 nets, input k selects init bit k
    std::uint64_t init = 0;            ///< O6 truth table
    std::optional<std::uint32_t> init5; ///< O5 truth table over the first min(|inputs|,5) inputs
    bool removable = true;

    [[nodiscard]] std::string o6() const { return "lut" + std::to_string(id) + ".o6"; }
    [[nodiscard]] std::string o5() const { return "lut" + std::to_string(id) + ".o5"; }
};

/// sum = sel ^ cin; cout = sel ? cin : din.
struct CarryCell {
    std::string sel;
    std::string din;
    std::string cin;
    std::string sum;
    std::string cout;
};

enum class OperatorKind { multiplier, adder };

/// Exhaustive output table of one configuration, indexed by raw operand bits.
class ProductTable {
public:
    ProductTable(int width_a, int width_b, bool is_signed, std::vector<std::int32_t> values);

    [[nodiscard]] std::int32_t at(std::int64_t a, std::int64_t b) const;
    [[nodiscard]] std::int32_t at_raw(std::uint32_t pattern) const { return values_[pattern]; }
    [[nodiscard]] const std::vector<std::int32_t>& values() const noexcept { return values_; }
    [[nodiscard]] int width_a() const noexcept { return width_a_; }
    [[nodiscard]] int width_b() const noexcept { return width_b_; }
    [[nodiscard]] bool is_signed() const noexcept { return signed_; }

    friend bool operator==(const ProductTable&, const ProductTable&) = default;

private:
    int width_a_;
    int width_b_;
    bool signed_;
    std::vector<std::int32_t> values_;
};

/// Index-based form of a netlist in topological order. Net 0 is const0, net 1 const1.
struct Program {
    struct Lut {
        std::uint32_t in_begin = 0;
        std::uint32_t in_count = 0;
        std::uint64_t init = 0;
        std::uint32_t init5 = 0;
        bool dual = false;
        std::uint32_t o6 = 0;
        std::uint32_t o5 = 0; ///< valid only if dual
        int removal = -1;     ///< Config index, -1 if not removable
    };
    struct Carry {
        std::uint32_t sel = 0, din = 0, cin = 0, sum = 0, cout = 0;
        int owner_removal = -1; ///< removal index of the LUT driving sel, -1 if none
    };
    struct Step {
        bool is_lut = true;
        std::uint32_t index = 0;
    };

    std::uint32_t net_count = 0;
    std::vector<std::uint32_t> lut_inputs;
    std::vector<Lut> luts;
    std::vector<Carry> carries;
    std::vector<Step> order;
    std::vector<std::uint32_t> input_nets;  ///< a bits then b bits
    std::vector<std::uint32_t> output_nets; ///< LSB first
};

class Netlist {
public:
    Netlist(std::string name, int width_a, int width_b, bool is_signed, std::vector<std::string> inputs,
            std::vector<std::string> outputs, std::vector<LutCell> luts, std::vector<CarryCell> carries);

    [[nodiscard]] const std::string& name() const noexcept { return name_; }
    [[nodiscard]] int width_a() const noexcept { return width_a_; }
    [[nodiscard]] int width_b() const noexcept { return width_b_; }
    [[nodiscard]] bool is_signed() const noexcept { return signed_; }
    [[nodiscard]] OperatorKind kind() const noexcept { return kind_; }
    [[nodiscard]] const std::vector<std::string>& inputs() const noexcept { return inputs_; }
    [[nodiscard]] const std::vector<std::string>& outputs() const noexcept { return outputs_; }
    [[nodiscard]] const std::vector<LutCell>& luts() const noexcept { return luts_; }
    [[nodiscard]] const std::vector<CarryCell>& carries() const noexcept { return carries_; }
    [[nodiscard]] int removable_count() const noexcept { return removable_; }
    [[nodiscard]] const Program& program() const noexcept { return *program_; }

    [[nodiscard]] std::int64_t min_a() const noexcept;
    [[nodiscard]] std::int64_t max_a() const noexcept;
    [[nodiscard]] std::int64_t min_b() const noexcept;
    [[nodiscard]] std::int64_t max_b() const noexcept;
    /// Number of operand pairs, 2^(width_a + width_b).
    [[nodiscard]] std::uint64_t operand_space() const noexcept { return 1ULL << (width_a_ + width_b_); }

    /// Exact arithmetic result of the operator this netlist implements.
    [[nodiscard]] std::int64_t exact(std::int64_t a, std::int64_t b) const;

    /// Output of the approximate circuit for one operand pair.
    [[nodiscard]] std::int64_t evaluate(const Config& config, std::int64_t a, std::int64_t b) const;

    /// Every output of the circuit, computed 64 operand pairs at a time.
    [[nodiscard]] ProductTable product_table(const Config& config) const;

    /// Raw pattern index of an operand pair: a bits low, b bits high.
    [[nodiscard]] std::uint32_t pattern(std::int64_t a, std::int64_t b) const;
    [[nodiscard]] std::int64_t operand_a(std::uint32_t pattern) const;
    [[nodiscard]] std::int64_t operand_b(std::uint32_t pattern) const;
    /// Interprets raw output bits as the operator's result type.
    [[nodiscard]] std::int64_t decode_output(std::uint64_t bits) const;

    /**
     * Bit-sliced simulation of up to 64 input patterns.
     *
     * Lane t simulates the pattern patterns[t]. net_values must have
     * program().net_count entries and receives every net's lane word.
     */
    void simulate(const Config& config, std::span<const std::uint32_t> patterns,
                  std::span<std::uint64_t> net_values) const;

    /// Checks config length against removable_count(); throws ValidationError.
    void check_config(const Config& config) const;

    [[nodiscard]] nlohmann::json to_json() const;
    static Netlist from_json(const nlohmann::json& doc);

private:
    std::string name_;
    int width_a_;
    int width_b_;
    bool signed_;
    OperatorKind kind_;
    std::vector<std::string> inputs_;
    std::vector<std::string> outputs_;
    std::vector<LutCell> luts_;
    std::vector<CarryCell> carries_;
    int removable_ = 0;
    std::shared_ptr<const Program> program_;
};

/// Signed or unsigned array multiplier, radix-4 Booth rows fused with carry-chain accumulation.
/// width in [2, 8]; signed 4 gives 10 removable LUTs and signed 8 gives 36.
Netlist build_multiplier(int width, bool is_signed);

/// Ripple-carry adder with one removable LUT per bit. width in [2, 16].
Netlist build_adder(int width);

void save_netlist(const Netlist& netlist, const std::string& path);
Netlist load_netlist(const std::string& path);

} // namespace axomap
