#include "axomap/charac.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <unordered_set>

#include "axomap/error.hpp"
#include "axomap/parallel.hpp"

namespace axomap {

namespace {

constexpr std::array<std::pair<Metric, std::string_view>, 9> kMetricNames{{
    {Metric::avg_abs_err, "avg_abs_err"},
    {Metric::avg_abs_rel_err, "avg_abs_rel_err"},
    {Metric::prob_err, "prob_err"},
    {Metric::max_abs_err, "max_abs_err"},
    {Metric::power, "power"},
    {Metric::cpd, "cpd"},
    {Metric::luts, "luts"},
    {Metric::pdp, "pdp"},
    {Metric::pdplut, "pdplut"},
}};

bool lut_live(const Program::Lut& lut, const Config& c) { return lut.removal < 0 || c.used(lut.removal); }
bool carry_live(const Program::Carry& cell, const Config& c) { return cell.owner_removal < 0 || c.used(cell.owner_removal); }

void check_exhaustive(const Netlist& netlist)
{
    if (netlist.width_a() + netlist.width_b() > 20) {
        throw CapacityError("operand space of " + netlist.name() + " is too large for exhaustive characterization");
    }
}

// Simulates every input vector in Gray-code order. Returns the output table
// (scattered back to natural order) and the total toggle count of live outputs.
std::pair<ProductTable, std::uint64_t> gray_simulation(const Netlist& netlist, const Config& config)
{
    const Program& p = netlist.program();
    const auto total = static_cast<std::uint32_t>(netlist.operand_space());

    std::vector<std::uint32_t> watched;
    for (const auto& lut : p.luts) {
        if (lut_live(lut, config)) {
            watched.push_back(lut.o6);
            if (lut.dual) {
                watched.push_back(lut.o5);
            }
        }
    }
    for (const auto& cell : p.carries) {
        if (carry_live(cell, config)) {
            watched.push_back(cell.sum);
            watched.push_back(cell.cout);
        }
    }
    std::vector<std::uint64_t> last_lane(watched.size(), 0);

    std::vector<std::int32_t> values(total);
    std::vector<std::uint64_t> nets(p.net_count);
    std::uint32_t patterns[64];
    std::uint64_t toggles = 0;
    for (std::uint32_t base = 0; base < total; base += 64) {
        const std::uint32_t lanes = std::min<std::uint32_t>(64, total - base);
        for (std::uint32_t t = 0; t < lanes; ++t) {
            const std::uint32_t i = base + t;
            patterns[t] = i ^ (i >> 1);
        }
        netlist.simulate(config, std::span(patterns, lanes), nets);
        std::uint64_t valid = lanes == 64 ? ~0ULL : ((1ULL << lanes) - 1);
        if (base == 0) {
            valid &= ~1ULL; // the first vector has no predecessor
        }
        for (std::size_t w = 0; w < watched.size(); ++w) {
            const std::uint64_t v = nets[watched[w]];
            const std::uint64_t diff = v ^ ((v << 1) | last_lane[w]);
            toggles += static_cast<std::uint64_t>(std::popcount(diff & valid));
            last_lane[w] = (v >> (lanes - 1)) & 1U;
        }
        for (std::uint32_t t = 0; t < lanes; ++t) {
            std::uint64_t bits = 0;
            for (std::size_t o = 0; o < p.output_nets.size(); ++o) {
                bits |= ((nets[p.output_nets[o]] >> t) & 1U) << o;
            }
            values[patterns[t]] = static_cast<std::int32_t>(netlist.decode_output(bits));
        }
    }
    return {ProductTable(netlist.width_a(), netlist.width_b(), netlist.is_signed(), std::move(values)), toggles};
}

PpaMetrics assemble_ppa(double power, double cpd, double luts)
{
    PpaMetrics m;
    m.power = power;
    m.cpd = cpd;
    m.luts = luts;
    m.pdp = power * cpd;
    m.pdplut = m.pdp * luts;
    return m;
}

} // namespace

std::string_view metric_name(Metric m)
{
    for (const auto& [metric, name] : kMetricNames) {
        if (metric == m) {
            return name;
        }
    }
    return "unknown";
}

Metric parse_metric(std::string_view name)
{
    for (const auto& [metric, n] : kMetricNames) {
        if (n == name) {
            return metric;
        }
    }
    throw ConfigurationError("unknown metric \"" + std::string(name) + "\"");
}

bool is_behav_metric(Metric m)
{
    return m == Metric::avg_abs_err || m == Metric::avg_abs_rel_err || m == Metric::prob_err || m == Metric::max_abs_err;
}

double MetricsRecord::metric(Metric m) const
{
    switch (m) {
    case Metric::avg_abs_err: return behav.avg_abs_err;
    case Metric::avg_abs_rel_err: return behav.avg_abs_rel_err;
    case Metric::prob_err: return behav.prob_err;
    case Metric::max_abs_err: return behav.max_abs_err;
    case Metric::power: return ppa.power;
    case Metric::cpd: return ppa.cpd;
    case Metric::luts: return ppa.luts;
    case Metric::pdp: return ppa.pdp;
    case Metric::pdplut: return ppa.pdplut;
    }
    return 0;
}

BehavMetrics behav_metrics(const Netlist& netlist, const ProductTable& approx)
{
    check_exhaustive(netlist);
    const auto total = static_cast<std::uint32_t>(netlist.operand_space());
    if (approx.values().size() != total) {
        throw ValidationError("product table does not match netlist operand space");
    }
    std::int64_t sum_abs = 0;
    std::int64_t max_abs = 0;
    std::uint64_t mismatches = 0;
    double sum_rel = 0;
    std::uint64_t rel_count = 0;
    for (std::uint32_t pat = 0; pat < total; ++pat) {
        const std::int64_t accurate = netlist.exact(netlist.operand_a(pat), netlist.operand_b(pat));
        const std::int64_t err = std::llabs(accurate - approx.at_raw(pat));
        sum_abs += err;
        max_abs = std::max(max_abs, err);
        mismatches += err != 0;
        if (accurate != 0) {
            sum_rel += static_cast<double>(err) / static_cast<double>(std::llabs(accurate));
            ++rel_count;
        }
    }
    BehavMetrics m;
    m.avg_abs_err = static_cast<double>(sum_abs) / total;
    m.avg_abs_rel_err = rel_count ? sum_rel / static_cast<double>(rel_count) : 0.0;
    m.prob_err = 100.0 * static_cast<double>(mismatches) / total;
    m.max_abs_err = static_cast<double>(max_abs);
    return m;
}

BehavMetrics behav_metrics(const Netlist& netlist, const Config& config)
{
    check_exhaustive(netlist);
    return behav_metrics(netlist, netlist.product_table(config));
}

double critical_path(const Netlist& netlist, const Config& config, const PpaModel& model)
{
    netlist.check_config(config);
    const Program& p = netlist.program();
    std::vector<double> arrival(p.net_count, 0.0);
    for (const auto& step : p.order) {
        if (step.is_lut) {
            const auto& lut = p.luts[step.index];
            if (!lut_live(lut, config)) {
                continue; // constant outputs, arrival 0
            }
            double t = 0;
            for (std::uint32_t k = 0; k < lut.in_count; ++k) {
                t = std::max(t, arrival[p.lut_inputs[lut.in_begin + k]]);
            }
            arrival[lut.o6] = t + model.lut_delay;
            if (lut.dual) {
                arrival[lut.o5] = t + model.lut_delay;
            }
        } else {
            const auto& cell = p.carries[step.index];
            if (!carry_live(cell, config)) {
                arrival[cell.sum] = arrival[cell.cin]; // sum passes carry-in through
                arrival[cell.cout] = 0;
                continue;
            }
            arrival[cell.sum] = std::max(arrival[cell.sel], arrival[cell.cin]) + model.carry_delay;
            arrival[cell.cout] = std::max({arrival[cell.sel], arrival[cell.din], arrival[cell.cin]}) + model.carry_delay;
        }
    }
    double cpd = 0;
    for (const auto net : p.output_nets) {
        cpd = std::max(cpd, arrival[net]);
    }
    return cpd;
}

PpaMetrics ppa_metrics(const Netlist& netlist, const Config& config, const PpaModel& model)
{
    check_exhaustive(netlist);
    const auto [table, toggles] = gray_simulation(netlist, config);
    const double power = static_cast<double>(toggles) / static_cast<double>(netlist.operand_space());
    return assemble_ppa(power, critical_path(netlist, config, model), config.count());
}

MetricsRecord characterize_one(const Netlist& netlist, const Config& config, const PpaModel& model)
{
    check_exhaustive(netlist);
    auto [table, toggles] = gray_simulation(netlist, config);
    MetricsRecord r;
    r.config = config;
    r.behav = behav_metrics(netlist, table);
    const double power = static_cast<double>(toggles) / static_cast<double>(netlist.operand_space());
    r.ppa = assemble_ppa(power, critical_path(netlist, config, model), config.count());
    r.source = RecordSource::simulated;
    return r;
}

std::vector<MetricsRecord> characterize(const Netlist& netlist, std::span<const Config> configs, unsigned threads,
                                        const PpaModel& model)
{
    std::unordered_set<Config> seen;
    for (const auto& c : configs) {
        netlist.check_config(c);
        if (!seen.insert(c).second) {
            throw ValidationError("duplicate config " + c.to_string() + " in characterization batch");
        }
    }
    std::vector<MetricsRecord> records(configs.size());
    parallel_for(configs.size(), threads, [&](std::size_t i) { records[i] = characterize_one(netlist, configs[i], model); });
    return records;
}

} // namespace axomap
