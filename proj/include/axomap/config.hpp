#pragma once

#include <bit>
#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>

namespace axomap {

/// Maximum number of removable LUTs a configuration can describe.
inline constexpr int kMaxRemovable = 64;

/**
 * LUT-usage vector l_0 ... l_{L-1}. Bit i set means removable LUT i is kept.
 *
 * The textual form is a bitstring with index 0 leftmost, so "1011" keeps
 * LUTs 0, 2 and 3. Ordering compares the textual form lexicographically.
 */
class Config {
public:
    Config() = default;
    Config(std::uint64_t mask, int size);

    static Config all_ones(int size);
    static Config all_zeros(int size);
    static Config parse(std::string_view text);

    [[nodiscard]] int size() const noexcept { return size_; }
    [[nodiscard]] std::uint64_t mask() const noexcept { return mask_; }
    [[nodiscard]] bool used(int i) const noexcept { return (mask_ >> i) & 1U; }
    [[nodiscard]] int count() const noexcept { return std::popcount(mask_); }
    [[nodiscard]] bool is_all_ones() const noexcept { return count() == size_; }

    [[nodiscard]] Config with(int i, bool value) const;
    [[nodiscard]] Config flipped(int i) const { return with(i, !used(i)); }

    [[nodiscard]] std::string to_string() const;

    friend bool operator==(const Config&, const Config&) = default;
    friend std::strong_ordering operator<=>(const Config& a, const Config& b);

private:
    std::uint64_t mask_ = 0;
    int size_ = 0;
};

} // namespace axomap

template <>
struct std::hash<axomap::Config> {
    std::size_t operator()(const axomap::Config& c) const noexcept
    {
        return std::hash<std::uint64_t>{}(c.mask() * 0x9E3779B97F4A7C15ULL ^ static_cast<std::uint64_t>(c.size()));
    }
};
