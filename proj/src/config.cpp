#include "axomap/config.hpp"

#include <algorithm>

#include "axomap/error.hpp"

namespace axomap {

namespace {
std::uint64_t low_mask(int size)
{
    return size == 64 ? ~0ULL : ((1ULL << size) - 1);
}
} // namespace

Config::Config(std::uint64_t mask, int size) : mask_(mask), size_(size)
{
    if (size < 0 || size > kMaxRemovable) {
        throw CapacityError("config length " + std::to_string(size) + " outside [0, 64]");
    }
    if ((mask & ~low_mask(size)) != 0) {
        throw ValidationError("config mask has bits beyond its length");
    }
}

Config Config::all_ones(int size) { return {low_mask(size), size}; }

Config Config::all_zeros(int size) { return {0, size}; }

Config Config::parse(std::string_view text)
{
    if (text.size() > static_cast<std::size_t>(kMaxRemovable)) {
        throw CapacityError("config string longer than 64 bits");
    }
    std::uint64_t mask = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] == '1') {
            mask |= 1ULL << i;
        } else if (text[i] != '0') {
            throw ParseError("config string may only contain '0' and '1': \"" + std::string(text) + "\"");
        }
    }
    return {mask, static_cast<int>(text.size())};
}

Config Config::with(int i, bool value) const
{
    Config c = *this;
    if (value) {
        c.mask_ |= 1ULL << i;
    } else {
        c.mask_ &= ~(1ULL << i);
    }
    return c;
}

std::string Config::to_string() const
{
    std::string s(static_cast<std::size_t>(size_), '0');
    for (int i = 0; i < size_; ++i) {
        if (used(i)) {
            s[static_cast<std::size_t>(i)] = '1';
        }
    }
    return s;
}

std::strong_ordering operator<=>(const Config& a, const Config& b)
{
    const int n = std::min(a.size_, b.size_);
    for (int i = 0; i < n; ++i) {
        if (a.used(i) != b.used(i)) {
            return a.used(i) ? std::strong_ordering::greater : std::strong_ordering::less;
        }
    }
    return a.size_ <=> b.size_;
}

} // namespace axomap
