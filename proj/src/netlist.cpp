#include "axomap/netlist.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <queue>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "axomap/error.hpp"

namespace axomap {

namespace {

std::uint64_t table_mask(std::uint32_t inputs)
{
    return inputs >= 6 ? ~0ULL : ((1ULL << (1U << inputs)) - 1);
}

// Folds a truth table over bit-sliced inputs, input 0 first.
std::uint64_t lut_words(std::uint64_t table, std::uint32_t k, const std::uint64_t* x)
{
    std::uint64_t leaves[64];
    const std::uint32_t n = 1U << k;
    for (std::uint32_t i = 0; i < n; ++i) {
        leaves[i] = ((table >> i) & 1U) ? ~0ULL : 0ULL;
    }
    for (std::uint32_t t = 0; t < k; ++t) {
        const std::uint32_t half = n >> (t + 1);
        const std::uint64_t sel = x[t];
        for (std::uint32_t i = 0; i < half; ++i) {
            leaves[i] = (sel & leaves[2 * i + 1]) | (~sel & leaves[2 * i]);
        }
    }
    return leaves[0];
}

std::string hex(std::uint64_t v, int digits)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "0x%0*llx", digits, static_cast<unsigned long long>(v));
    return buf;
}

std::uint64_t parse_hex(const std::string& s)
{
    std::size_t pos = 0;
    const std::string body = (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) ? s.substr(2) : s;
    if (body.empty() || body.size() > 16) {
        throw ParseError("bad hex init string \"" + s + "\"");
    }
    std::uint64_t v = 0;
    try {
        v = std::stoull(body, &pos, 16);
    } catch (const std::exception&) {
        throw ParseError("bad hex init string \"" + s + "\"");
    }
    if (pos != body.size()) {
        throw ParseError("bad hex init string \"" + s + "\"");
    }
    return v;
}

} // namespace

// ---------------------------------------------------------------------------
// ProductTable

ProductTable::ProductTable(int width_a, int width_b, bool is_signed, std::vector<std::int32_t> values)
    : width_a_(width_a), width_b_(width_b), signed_(is_signed), values_(std::move(values))
{
    if (values_.size() != (1ULL << (width_a + width_b))) {
        throw ValidationError("product table size does not match operand widths");
    }
}

std::int32_t ProductTable::at(std::int64_t a, std::int64_t b) const
{
    const std::int64_t lo_a = signed_ ? -(1LL << (width_a_ - 1)) : 0;
    const std::int64_t hi_a = signed_ ? (1LL << (width_a_ - 1)) - 1 : (1LL << width_a_) - 1;
    const std::int64_t lo_b = signed_ ? -(1LL << (width_b_ - 1)) : 0;
    const std::int64_t hi_b = signed_ ? (1LL << (width_b_ - 1)) - 1 : (1LL << width_b_) - 1;
    if (a < lo_a || a > hi_a || b < lo_b || b > hi_b) {
        throw DomainError("operands (" + std::to_string(a) + ", " + std::to_string(b) + ") outside table range");
    }
    const auto ra = static_cast<std::uint32_t>(a) & ((1U << width_a_) - 1);
    const auto rb = static_cast<std::uint32_t>(b) & ((1U << width_b_) - 1);
    return values_[ra | (rb << width_a_)];
}

// ---------------------------------------------------------------------------
// Netlist construction

Netlist::Netlist(std::string name, int width_a, int width_b, bool is_signed, std::vector<std::string> inputs,
                 std::vector<std::string> outputs, std::vector<LutCell> luts, std::vector<CarryCell> carries)
    : name_(std::move(name)), width_a_(width_a), width_b_(width_b), signed_(is_signed), inputs_(std::move(inputs)),
      outputs_(std::move(outputs)), luts_(std::move(luts)), carries_(std::move(carries))
{
    if (name_.rfind("mul", 0) == 0) {
        kind_ = OperatorKind::multiplier;
    } else if (name_.rfind("add", 0) == 0) {
        kind_ = OperatorKind::adder;
    } else {
        throw ValidationError("netlist name must start with \"mul\" or \"add\": " + name_);
    }
    if (width_a_ < 1 || width_b_ < 1 || width_a_ + width_b_ > 30) {
        throw ValidationError("operand widths out of range");
    }
    if (inputs_.size() != static_cast<std::size_t>(width_a_ + width_b_)) {
        throw ValidationError("primary input count must equal width_a + width_b");
    }
    if (outputs_.empty() || outputs_.size() > 32) {
        throw ValidationError("netlist needs between 1 and 32 outputs");
    }

    auto program = std::make_shared<Program>();
    std::unordered_map<std::string, std::uint32_t> nets;
    // driver[net] = node index (luts then carries), or -1 for constants and inputs
    std::vector<int> driver;
    auto define = [&](const std::string& net, int node) {
        if (!nets.emplace(net, static_cast<std::uint32_t>(driver.size())).second) {
            throw ValidationError("net \"" + net + "\" has more than one driver");
        }
        driver.push_back(node);
    };
    define(kConst0, -1);
    define(kConst1, -1);
    for (const auto& in : inputs_) {
        define(in, -1);
    }

    // LUT ids and removal order
    std::vector<int> removal_ids;
    std::unordered_map<int, std::size_t> by_id;
    for (std::size_t i = 0; i < luts_.size(); ++i) {
        const auto& lut = luts_[i];
        if (!by_id.emplace(lut.id, i).second) {
            throw ValidationError("duplicate LUT id " + std::to_string(lut.id));
        }
        if (lut.id < 0) {
            throw ValidationError("negative LUT id");
        }
        if (lut.inputs.empty() || lut.inputs.size() > 6) {
            throw ValidationError("LUT " + std::to_string(lut.id) + " must have 1 to 6 inputs");
        }
        const auto k = static_cast<std::uint32_t>(lut.inputs.size());
        if ((lut.init & ~table_mask(k)) != 0) {
            throw ValidationError("LUT " + std::to_string(lut.id) + " init has bits above 2^inputs");
        }
        if (lut.init5 && (*lut.init5 & ~table_mask(std::min(k, 5U))) != 0) {
            throw ValidationError("LUT " + std::to_string(lut.id) + " init5 has bits above its input space");
        }
        if (lut.removable) {
            removal_ids.push_back(lut.id);
        }
        define(lut.o6(), static_cast<int>(i));
        if (lut.init5) {
            define(lut.o5(), static_cast<int>(i));
        }
    }
    std::sort(removal_ids.begin(), removal_ids.end());
    for (std::size_t i = 0; i < removal_ids.size(); ++i) {
        if (removal_ids[i] != static_cast<int>(i)) {
            throw ValidationError("removable LUT ids must be exactly 0..L-1");
        }
    }
    removable_ = static_cast<int>(removal_ids.size());
    if (removable_ > kMaxRemovable) {
        throw CapacityError("more than 64 removable LUTs");
    }
    const int lut_nodes = static_cast<int>(luts_.size());
    for (std::size_t i = 0; i < carries_.size(); ++i) {
        define(carries_[i].sum, lut_nodes + static_cast<int>(i));
        define(carries_[i].cout, lut_nodes + static_cast<int>(i));
    }

    auto resolve = [&](const std::string& net) -> std::uint32_t {
        auto it = nets.find(net);
        if (it == nets.end()) {
            throw ValidationError("unresolved net reference \"" + net + "\"");
        }
        return it->second;
    };

    const std::size_t nodes = luts_.size() + carries_.size();
    std::vector<std::vector<std::size_t>> users(nodes);
    std::vector<std::size_t> pending(nodes, 0);
    auto depend = [&](std::size_t node, std::uint32_t net) {
        const int d = driver[net];
        if (d >= 0) {
            users[static_cast<std::size_t>(d)].push_back(node);
            ++pending[node];
        }
    };

    program->luts.resize(luts_.size());
    for (std::size_t i = 0; i < luts_.size(); ++i) {
        const auto& lut = luts_[i];
        auto& c = program->luts[i];
        c.in_begin = static_cast<std::uint32_t>(program->lut_inputs.size());
        c.in_count = static_cast<std::uint32_t>(lut.inputs.size());
        for (const auto& in : lut.inputs) {
            const auto net = resolve(in);
            program->lut_inputs.push_back(net);
            depend(i, net);
        }
        c.init = lut.init;
        c.dual = lut.init5.has_value();
        c.init5 = lut.init5.value_or(0);
        c.o6 = resolve(lut.o6());
        c.o5 = c.dual ? resolve(lut.o5()) : 0;
        c.removal = lut.removable ? lut.id : -1;
    }
    std::unordered_map<std::uint32_t, std::size_t> o6_owner;
    for (std::size_t i = 0; i < luts_.size(); ++i) {
        o6_owner.emplace(program->luts[i].o6, i);
    }
    program->carries.resize(carries_.size());
    for (std::size_t i = 0; i < carries_.size(); ++i) {
        const auto& cell = carries_[i];
        auto& c = program->carries[i];
        const std::size_t node = luts_.size() + i;
        c.sel = resolve(cell.sel);
        c.din = resolve(cell.din);
        c.cin = resolve(cell.cin);
        c.sum = resolve(cell.sum);
        c.cout = resolve(cell.cout);
        const int cin_driver = driver[c.cin];
        const bool from_carry = cin_driver >= lut_nodes && carries_[static_cast<std::size_t>(cin_driver - lut_nodes)].cout == cell.cin;
        if (c.cin > 1 && !from_carry) {
            throw ValidationError("carry_in of the first cell in a chain must be a constant (cell " + cell.sum + ")");
        }
        if (auto it = o6_owner.find(c.sel); it != o6_owner.end()) {
            c.owner_removal = program->luts[it->second].removal;
        }
        depend(node, c.sel);
        depend(node, c.din);
        depend(node, c.cin);
    }

    // Kahn's algorithm; ready nodes taken in declaration order for a stable program.
    std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
    for (std::size_t n = 0; n < nodes; ++n) {
        if (pending[n] == 0) {
            ready.push(n);
        }
    }
    while (!ready.empty()) {
        const std::size_t n = ready.top();
        ready.pop();
        const bool is_lut = n < luts_.size();
        program->order.push_back({is_lut, static_cast<std::uint32_t>(is_lut ? n : n - luts_.size())});
        for (const auto u : users[n]) {
            if (--pending[u] == 0) {
                ready.push(u);
            }
        }
    }
    if (program->order.size() != nodes) {
        throw ValidationError("netlist contains a combinational cycle");
    }

    for (const auto& in : inputs_) {
        program->input_nets.push_back(resolve(in));
    }
    for (const auto& out : outputs_) {
        program->output_nets.push_back(resolve(out));
    }
    program->net_count = static_cast<std::uint32_t>(driver.size());
    program_ = std::move(program);
}

// ---------------------------------------------------------------------------
// Operand handling

std::int64_t Netlist::min_a() const noexcept { return signed_ ? -(1LL << (width_a_ - 1)) : 0; }
std::int64_t Netlist::max_a() const noexcept { return signed_ ? (1LL << (width_a_ - 1)) - 1 : (1LL << width_a_) - 1; }
std::int64_t Netlist::min_b() const noexcept { return signed_ ? -(1LL << (width_b_ - 1)) : 0; }
std::int64_t Netlist::max_b() const noexcept { return signed_ ? (1LL << (width_b_ - 1)) - 1 : (1LL << width_b_) - 1; }

std::int64_t Netlist::exact(std::int64_t a, std::int64_t b) const
{
    return kind_ == OperatorKind::multiplier ? a * b : a + b;
}

std::uint32_t Netlist::pattern(std::int64_t a, std::int64_t b) const
{
    if (a < min_a() || a > max_a() || b < min_b() || b > max_b()) {
        throw DomainError("operands (" + std::to_string(a) + ", " + std::to_string(b) + ") outside declared widths of " + name_);
    }
    const auto ra = static_cast<std::uint32_t>(a) & ((1U << width_a_) - 1);
    const auto rb = static_cast<std::uint32_t>(b) & ((1U << width_b_) - 1);
    return ra | (rb << width_a_);
}

std::int64_t Netlist::operand_a(std::uint32_t pattern) const
{
    const std::int64_t raw = pattern & ((1U << width_a_) - 1);
    return (signed_ && (raw >> (width_a_ - 1))) ? raw - (1LL << width_a_) : raw;
}

std::int64_t Netlist::operand_b(std::uint32_t pattern) const
{
    const std::int64_t raw = (pattern >> width_a_) & ((1U << width_b_) - 1);
    return (signed_ && (raw >> (width_b_ - 1))) ? raw - (1LL << width_b_) : raw;
}

std::int64_t Netlist::decode_output(std::uint64_t bits) const
{
    const auto w = static_cast<int>(outputs_.size());
    const auto v = static_cast<std::int64_t>(bits);
    return (signed_ && ((bits >> (w - 1)) & 1U)) ? v - (1LL << w) : v;
}

void Netlist::check_config(const Config& config) const
{
    if (config.size() != removable_) {
        throw ValidationError("config length " + std::to_string(config.size()) + " does not match L = " +
                              std::to_string(removable_) + " of " + name_);
    }
}

// ---------------------------------------------------------------------------
// Evaluation

std::int64_t Netlist::evaluate(const Config& config, std::int64_t a, std::int64_t b) const
{
    check_config(config);
    const std::uint32_t pat = pattern(a, b);
    const Program& p = *program_;
    std::vector<std::uint8_t> v(p.net_count, 0);
    v[1] = 1;
    for (std::size_t i = 0; i < p.input_nets.size(); ++i) {
        v[p.input_nets[i]] = static_cast<std::uint8_t>((pat >> i) & 1U);
    }
    for (const auto& step : p.order) {
        if (step.is_lut) {
            const auto& lut = p.luts[step.index];
            if (lut.removal >= 0 && !config.used(lut.removal)) {
                v[lut.o6] = 0;
                if (lut.dual) {
                    v[lut.o5] = 0;
                }
                continue;
            }
            std::uint32_t idx = 0;
            for (std::uint32_t k = 0; k < lut.in_count; ++k) {
                idx |= static_cast<std::uint32_t>(v[p.lut_inputs[lut.in_begin + k]]) << k;
            }
            v[lut.o6] = static_cast<std::uint8_t>((lut.init >> idx) & 1U);
            if (lut.dual) {
                v[lut.o5] = static_cast<std::uint8_t>((lut.init5 >> (idx & 31U)) & 1U);
            }
        } else {
            const auto& c = p.carries[step.index];
            const bool removed = c.owner_removal >= 0 && !config.used(c.owner_removal);
            const std::uint8_t s = removed ? 0 : v[c.sel];
            const std::uint8_t d = removed ? 0 : v[c.din];
            const std::uint8_t ci = v[c.cin];
            v[c.sum] = s ^ ci;
            v[c.cout] = s ? ci : d;
        }
    }
    std::uint64_t bits = 0;
    for (std::size_t i = 0; i < p.output_nets.size(); ++i) {
        bits |= static_cast<std::uint64_t>(v[p.output_nets[i]]) << i;
    }
    return decode_output(bits);
}

void Netlist::simulate(const Config& config, std::span<const std::uint32_t> patterns,
                       std::span<std::uint64_t> net_values) const
{
    check_config(config);
    const Program& p = *program_;
    if (net_values.size() != p.net_count || patterns.size() > 64) {
        throw ValidationError("simulate: bad buffer sizes");
    }
    std::fill(net_values.begin(), net_values.end(), 0ULL);
    net_values[1] = ~0ULL;
    for (std::size_t i = 0; i < p.input_nets.size(); ++i) {
        std::uint64_t w = 0;
        for (std::size_t t = 0; t < patterns.size(); ++t) {
            w |= static_cast<std::uint64_t>((patterns[t] >> i) & 1U) << t;
        }
        net_values[p.input_nets[i]] = w;
    }
    std::uint64_t x[6];
    for (const auto& step : p.order) {
        if (step.is_lut) {
            const auto& lut = p.luts[step.index];
            if (lut.removal >= 0 && !config.used(lut.removal)) {
                net_values[lut.o6] = 0;
                if (lut.dual) {
                    net_values[lut.o5] = 0;
                }
                continue;
            }
            for (std::uint32_t k = 0; k < lut.in_count; ++k) {
                x[k] = net_values[p.lut_inputs[lut.in_begin + k]];
            }
            net_values[lut.o6] = lut_words(lut.init, lut.in_count, x);
            if (lut.dual) {
                net_values[lut.o5] = lut_words(lut.init5, std::min(lut.in_count, 5U), x);
            }
        } else {
            const auto& c = p.carries[step.index];
            const bool removed = c.owner_removal >= 0 && !config.used(c.owner_removal);
            const std::uint64_t s = removed ? 0 : net_values[c.sel];
            const std::uint64_t d = removed ? 0 : net_values[c.din];
            const std::uint64_t ci = net_values[c.cin];
            net_values[c.sum] = s ^ ci;
            net_values[c.cout] = (s & ci) | (~s & d);
        }
    }
}

ProductTable Netlist::product_table(const Config& config) const
{
    if (width_a_ + width_b_ > 20) {
        throw CapacityError("operand space of " + name_ + " exceeds 2^20 combinations");
    }
    check_config(config);
    const auto total = static_cast<std::uint32_t>(operand_space());
    const Program& p = *program_;
    std::vector<std::int32_t> values(total);
    std::vector<std::uint64_t> nets(p.net_count);
    std::uint32_t patterns[64];
    for (std::uint32_t base = 0; base < total; base += 64) {
        const std::uint32_t lanes = std::min<std::uint32_t>(64, total - base);
        for (std::uint32_t t = 0; t < lanes; ++t) {
            patterns[t] = base + t;
        }
        simulate(config, std::span(patterns, lanes), nets);
        for (std::uint32_t t = 0; t < lanes; ++t) {
            std::uint64_t bits = 0;
            for (std::size_t o = 0; o < p.output_nets.size(); ++o) {
                bits |= ((nets[p.output_nets[o]] >> t) & 1U) << o;
            }
            values[base + t] = static_cast<std::int32_t>(decode_output(bits));
        }
    }
    return {width_a_, width_b_, signed_, std::move(values)};
}

// ---------------------------------------------------------------------------
// JSON

nlohmann::json Netlist::to_json() const
{
    nlohmann::json doc;
    doc["name"] = name_;
    doc["widths"] = {width_a_, width_b_};
    doc["signed"] = signed_;
    doc["inputs"] = inputs_;
    doc["outputs"] = outputs_;
    auto luts = nlohmann::json::array();
    for (const auto& lut : luts_) {
        nlohmann::json j;
        j["id"] = lut.id;
        j["inputs"] = lut.inputs;
        j["init"] = hex(lut.init, 16);
        j["init5"] = lut.init5 ? nlohmann::json(hex(*lut.init5, 8)) : nlohmann::json(nullptr);
        j["removable"] = lut.removable;
        luts.push_back(std::move(j));
    }
    doc["luts"] = std::move(luts);
    auto carries = nlohmann::json::array();
    for (const auto& c : carries_) {
        carries.push_back({{"sel", c.sel}, {"din", c.din}, {"cin", c.cin}, {"sum", c.sum}, {"cout", c.cout}});
    }
    doc["carries"] = std::move(carries);
    return doc;
}

Netlist Netlist::from_json(const nlohmann::json& doc)
{
    try {
        std::vector<LutCell> luts;
        for (const auto& j : doc.at("luts")) {
            LutCell lut;
            lut.id = j.at("id").get<int>();
            lut.inputs = j.at("inputs").get<std::vector<std::string>>();
            lut.init = parse_hex(j.at("init").get<std::string>());
            if (j.contains("init5") && !j.at("init5").is_null()) {
                const auto v = parse_hex(j.at("init5").get<std::string>());
                if (v > 0xFFFFFFFFULL) {
                    throw ValidationError("init5 wider than 32 bits on LUT " + std::to_string(lut.id));
                }
                lut.init5 = static_cast<std::uint32_t>(v);
            }
            lut.removable = j.value("removable", true);
            luts.push_back(std::move(lut));
        }
        std::vector<CarryCell> carries;
        for (const auto& j : doc.at("carries")) {
            carries.push_back({j.at("sel").get<std::string>(), j.at("din").get<std::string>(),
                               j.at("cin").get<std::string>(), j.at("sum").get<std::string>(),
                               j.at("cout").get<std::string>()});
        }
        const auto& widths = doc.at("widths");
        if (!widths.is_array() || widths.size() != 2) {
            throw ParseError("\"widths\" must be a two-element array");
        }
        return {doc.at("name").get<std::string>(), widths[0].get<int>(), widths[1].get<int>(),
                doc.at("signed").get<bool>(), doc.at("inputs").get<std::vector<std::string>>(),
                doc.at("outputs").get<std::vector<std::string>>(), std::move(luts), std::move(carries)};
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("netlist JSON: ") + e.what());
    }
}

void save_netlist(const Netlist& netlist, const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot write " + path);
    }
    out << netlist.to_json().dump(2) << '\n';
}

Netlist load_netlist(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot read " + path);
    }
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    return Netlist::from_json(doc);
}

} // namespace axomap
