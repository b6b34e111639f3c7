// Built-in operator generators.
//
// Multiplier structure (operands a, b of equal width n):
//   b is recoded into K radix-4 Booth digits d_k in {-2..2}. Row k holds the
//   one's-complement partial product p = (d_k >= 0 ? |d_k|*a : ~(|d_k|*a)) as
//   an (na+1)-bit signed value at column 2k. Each bit of p is produced by one
//   removable dual-output LUT that also XORs in the running sum of the row
//   above (O6 = p ^ acc, O5 = p), and a carry chain with carry-in 0 completes
//   the addition. The "+1" of every negative digit is folded into row 0, whose
//   LUTs have a spare input. Non-removable extension LUTs sign-extend each row
//   up to the product width; they only see outputs of removable LUTs, so the
//   all-removed configuration still yields 0.

#include <functional>
#include <map>

#include "axomap/error.hpp"
#include "axomap/netlist.hpp"

namespace axomap {

namespace {

// A LUT input source: either a constant or a named net.
struct Source {
    std::string net; // empty for constants
    bool value = false;

    static Source constant(bool v) { return {"", v}; }
    static Source of(std::string n) { return {std::move(n), false}; }
};

using Env = std::function<bool(const Source&)>;
using BoolFn = std::function<bool(const Env&)>;

// Builds a LUT whose inputs are the distinct non-constant nets among `sources`
// (in order) and whose truth tables realise fn6 / fn5.
LutCell make_lut(int id, bool removable, const std::vector<Source>& sources, const BoolFn& fn6, const BoolFn& fn5)
{
    LutCell lut;
    lut.id = id;
    lut.removable = removable;
    for (const auto& s : sources) {
        if (!s.net.empty() && std::find(lut.inputs.begin(), lut.inputs.end(), s.net) == lut.inputs.end()) {
            lut.inputs.push_back(s.net);
        }
    }
    if (lut.inputs.empty()) {
        // LUTs need at least one input; tie a constant that the functions ignore.
        lut.inputs.push_back(kConst0);
    }
    if (lut.inputs.size() > 6) {
        throw ConfigurationError("generator produced a LUT with more than 6 inputs");
    }
    const auto k = static_cast<std::uint32_t>(lut.inputs.size());
    std::uint64_t init = 0;
    std::uint32_t init5 = 0;
    for (std::uint32_t idx = 0; idx < (1U << k); ++idx) {
        Env env = [&](const Source& s) {
            if (s.net.empty()) {
                return s.value;
            }
            if (s.net == kConst0) {
                return false;
            }
            const auto pos = std::find(lut.inputs.begin(), lut.inputs.end(), s.net) - lut.inputs.begin();
            return ((idx >> pos) & 1U) != 0;
        };
        if (fn6(env)) {
            init |= 1ULL << idx;
        }
        if (idx < 32 && fn5(env)) {
            init5 |= 1U << idx;
        }
    }
    lut.init = init;
    lut.init5 = init5;
    return lut;
}

} // namespace

Netlist build_multiplier(int width, bool is_signed)
{
    if (width < 2 || width > 8) {
        throw ConfigurationError("multiplier width must be in [2, 8], got " + std::to_string(width));
    }
    const int n = width;
    const int out_width = 2 * n;
    const int na = is_signed ? n : n + 1; // bits of a as a signed value
    int nb = is_signed ? n : n + 1;       // bits of b as a signed value, rounded to even
    nb += nb % 2;
    const int rows = nb / 2;

    std::vector<std::string> inputs;
    for (int i = 0; i < n; ++i) {
        inputs.push_back("a" + std::to_string(i));
    }
    for (int i = 0; i < n; ++i) {
        inputs.push_back("b" + std::to_string(i));
    }
    auto a_bit = [&](int j) -> Source {
        if (j < 0) {
            return Source::constant(false);
        }
        if (j < n) {
            return Source::of("a" + std::to_string(j));
        }
        return is_signed ? Source::of("a" + std::to_string(n - 1)) : Source::constant(false);
    };
    auto b_bit = [&](int j) -> Source {
        if (j < 0) {
            return Source::constant(false);
        }
        if (j < n) {
            return Source::of("b" + std::to_string(j));
        }
        return is_signed ? Source::of("b" + std::to_string(n - 1)) : Source::constant(false);
    };

    std::vector<LutCell> luts;
    std::vector<CarryCell> carries;
    int next_removable = 0;
    std::vector<LutCell> extension_luts; // ids assigned after all removable LUTs
    std::vector<std::pair<std::size_t, std::size_t>> extension_slots;

    // sums[k][c] = sum net of row k at column c
    std::vector<std::map<int, std::string>> sums(static_cast<std::size_t>(rows));

    for (int k = 0; k < rows; ++k) {
        const Source x2 = b_bit(2 * k + 1);
        const Source x1 = b_bit(2 * k);
        const Source x0 = b_bit(2 * k - 1);
        auto pp_bit = [=](int j) -> BoolFn {
            const Source aj = a_bit(j);
            const Source aj1 = a_bit(j - 1);
            return [=](const Env& e) {
                const bool v2 = e(x2), v1 = e(x1), v0 = e(x0);
                const bool one = v1 != v0;
                const bool two = (v2 && !v1 && !v0) || (!v2 && v1 && v0);
                const bool m = (one && e(aj)) || (two && e(aj1));
                return m != v2;
            };
        };
        auto acc_source = [&](int c) -> Source {
            if (k == 0) {
                // row 0 absorbs the +1 of every negative digit: neg_q sits at column 2q
                if (c % 2 == 0 && c / 2 < rows) {
                    return b_bit(c + 1);
                }
                return Source::constant(false);
            }
            return Source::of(sums[static_cast<std::size_t>(k - 1)].at(c));
        };

        std::string carry = kConst0;
        std::string top_o5;
        for (int c = 2 * k; c < out_width; ++c) {
            const int j = c - 2 * k;
            const Source acc = acc_source(c);
            LutCell lut;
            if (j <= na) {
                const BoolFn p = pp_bit(j);
                lut = make_lut(next_removable++, true, {a_bit(j), a_bit(j - 1), x2, x1, x0, acc},
                               [=](const Env& e) { return p(e) != e(acc); }, p);
                if (j == na) {
                    top_o5 = lut.o5();
                }
            } else {
                const Source sign = Source::of(top_o5);
                lut = make_lut(-1, false, {sign, acc}, [=](const Env& e) { return e(sign) != e(acc); },
                               [=](const Env& e) { return e(sign); });
            }
            CarryCell cell;
            cell.cin = carry;
            cell.sum = "r" + std::to_string(k) + "s" + std::to_string(c);
            cell.cout = "r" + std::to_string(k) + "c" + std::to_string(c);
            sums[static_cast<std::size_t>(k)][c] = cell.sum;
            carry = cell.cout;
            if (lut.removable) {
                cell.sel = lut.o6();
                cell.din = lut.o5();
                luts.push_back(std::move(lut));
            } else {
                extension_slots.emplace_back(extension_luts.size(), carries.size());
                extension_luts.push_back(std::move(lut));
            }
            carries.push_back(std::move(cell));
        }
    }

    // Extension LUTs take ids after the removable range.
    for (auto [ext, cell] : extension_slots) {
        auto& lut = extension_luts[ext];
        lut.id = next_removable + static_cast<int>(ext);
        carries[cell].sel = lut.o6();
        carries[cell].din = lut.o5();
    }
    for (auto& lut : extension_luts) {
        luts.push_back(std::move(lut));
    }

    std::vector<std::string> outputs;
    for (int c = 0; c < out_width; ++c) {
        const int row = std::min(rows - 1, c / 2);
        outputs.push_back(sums[static_cast<std::size_t>(row)].at(c));
    }
    const std::string name = "mul" + std::to_string(n) + "x" + std::to_string(n) + (is_signed ? "s" : "u");
    return {name, n, n, is_signed, std::move(inputs), std::move(outputs), std::move(luts), std::move(carries)};
}

Netlist build_adder(int width)
{
    if (width < 2 || width > 16) {
        throw ConfigurationError("adder width must be in [2, 16], got " + std::to_string(width));
    }
    std::vector<std::string> inputs;
    for (int i = 0; i < width; ++i) {
        inputs.push_back("a" + std::to_string(i));
    }
    for (int i = 0; i < width; ++i) {
        inputs.push_back("b" + std::to_string(i));
    }
    std::vector<LutCell> luts;
    std::vector<CarryCell> carries;
    std::vector<std::string> outputs;
    std::string carry = kConst0;
    for (int i = 0; i < width; ++i) {
        const Source a = Source::of("a" + std::to_string(i));
        const Source b = Source::of("b" + std::to_string(i));
        LutCell lut = make_lut(i, true, {a, b}, [=](const Env& e) { return e(a) != e(b); },
                               [=](const Env& e) { return e(a); });
        CarryCell cell{lut.o6(), lut.o5(), carry, "s" + std::to_string(i), "c" + std::to_string(i)};
        carry = cell.cout;
        outputs.push_back(cell.sum);
        luts.push_back(std::move(lut));
        carries.push_back(std::move(cell));
    }
    outputs.push_back(carry);
    const std::string name = "add" + std::to_string(width) + "x" + std::to_string(width) + "u";
    return {name, width, width, false, std::move(inputs), std::move(outputs), std::move(luts), std::move(carries)};
}

} // namespace axomap
