#include "axomap/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "axomap/error.hpp"
#include "axomap/rng.hpp"

namespace axomap {

namespace {

constexpr std::array<std::pair<PatternFamily, std::string_view>, 4> kFamilies{{
    {PatternFamily::runs_of_ones, "runs_of_ones"},
    {PatternFamily::runs_of_zeros, "runs_of_zeros"},
    {PatternFamily::alternating, "alternating"},
    {PatternFamily::sliding_window, "sliding_window"},
}};

std::vector<PatternFamily> every_family()
{
    return {PatternFamily::runs_of_ones, PatternFamily::runs_of_zeros, PatternFamily::alternating,
            PatternFamily::sliding_window};
}

std::vector<std::string> split_csv(const std::string& line)
{
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) {
        fields.push_back(field);
    }
    if (!line.empty() && line.back() == ',') {
        fields.emplace_back();
    }
    return fields;
}

double parse_double(const std::string& s, std::size_t line)
{
    double v = 0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
        throw ParseError("bad number \"" + s + "\"", line);
    }
    return v;
}

bool close_rel(double a, double b)
{
    const double scale = std::max({std::fabs(a), std::fabs(b), 1e-300});
    return std::fabs(a - b) <= 1e-6 * scale;
}

} // namespace

std::string_view provenance_name(Provenance p)
{
    switch (p) {
    case Provenance::random: return "random";
    case Provenance::pattern: return "pattern";
    case Provenance::combined: return "combined";
    case Provenance::ingested: return "ingested";
    }
    return "unknown";
}

std::string_view family_name(PatternFamily f)
{
    for (const auto& [fam, name] : kFamilies) {
        if (fam == f) {
            return name;
        }
    }
    return "unknown";
}

PatternFamily parse_family(std::string_view name)
{
    for (const auto& [fam, n] : kFamilies) {
        if (n == name) {
            return fam;
        }
    }
    throw ConfigurationError("unknown pattern family \"" + std::string(name) + "\"");
}

// ---------------------------------------------------------------------------
// SamplingPlan

SamplingPlan SamplingPlan::all_patterns(int removable, std::size_t n_random, std::uint64_t seed)
{
    SamplingPlan plan;
    plan.n_random = n_random;
    plan.seed = seed;
    plan.pattern_families = every_family();
    for (int w = 1; w <= removable; ++w) {
        plan.window_sizes.push_back(w);
    }
    return plan;
}

SamplingPlan SamplingPlan::sized(int removable, std::size_t target_size, std::uint64_t seed)
{
    SamplingPlan plan = all_patterns(removable, 0, seed);
    const std::size_t patterns = sample_patterns(removable, plan).size();
    plan.n_random = target_size > patterns ? target_size - patterns : 0;
    return plan;
}

void SamplingPlan::validate(int removable) const
{
    for (const int w : window_sizes) {
        if (w < 1 || w > removable) {
            throw ValidationError("window size " + std::to_string(w) + " outside [1, " + std::to_string(removable) + "]");
        }
    }
}

nlohmann::json SamplingPlan::to_json() const
{
    nlohmann::json doc;
    doc["n_random"] = n_random;
    doc["seed"] = seed;
    auto fams = nlohmann::json::array();
    for (const auto f : pattern_families) {
        fams.push_back(std::string(family_name(f)));
    }
    doc["pattern_families"] = std::move(fams);
    doc["window_sizes"] = window_sizes;
    return doc;
}

SamplingPlan SamplingPlan::from_json(const nlohmann::json& doc)
{
    try {
        SamplingPlan plan;
        plan.n_random = doc.value("n_random", std::size_t{0});
        plan.seed = doc.value("seed", std::uint64_t{0});
        for (const auto& f : doc.value("pattern_families", std::vector<std::string>{})) {
            plan.pattern_families.push_back(parse_family(f));
        }
        plan.window_sizes = doc.value("window_sizes", std::vector<int>{});
        return plan;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigurationError(std::string("sampling plan: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// Dataset

std::vector<Config> Dataset::configs() const
{
    std::vector<Config> out;
    out.reserve(records.size());
    for (const auto& r : records) {
        out.push_back(r.config);
    }
    return out;
}

std::vector<double> Dataset::column(Metric m) const
{
    std::vector<double> out;
    out.reserve(records.size());
    for (const auto& r : records) {
        out.push_back(r.metric(m));
    }
    return out;
}

double Dataset::max(Metric m) const
{
    if (records.empty()) {
        throw ValidationError("empty dataset has no maximum");
    }
    double v = records.front().metric(m);
    for (const auto& r : records) {
        v = std::max(v, r.metric(m));
    }
    return v;
}

double Dataset::min(Metric m) const
{
    if (records.empty()) {
        throw ValidationError("empty dataset has no minimum");
    }
    double v = records.front().metric(m);
    for (const auto& r : records) {
        v = std::min(v, r.metric(m));
    }
    return v;
}

// ---------------------------------------------------------------------------
// Sampling

std::vector<Config> sample_random(int removable, std::size_t n, std::uint64_t seed, const std::unordered_set<Config>& exclude)
{
    if (removable < 1 || removable > kMaxRemovable) {
        throw CapacityError("config length must be in [1, 64]");
    }
    if (removable < 63) {
        const std::uint64_t space = 1ULL << removable;
        std::uint64_t excluded = 0;
        for (const auto& c : exclude) {
            excluded += c.size() == removable;
        }
        if (n > space - excluded) {
            throw CapacityError("cannot draw " + std::to_string(n) + " distinct configs from a space of " +
                                std::to_string(space - excluded));
        }
    }
    const std::uint64_t mask = removable == 64 ? ~0ULL : ((1ULL << removable) - 1);
    Rng rng(seed);
    std::unordered_set<Config> seen;
    std::vector<Config> out;
    out.reserve(n);
    while (out.size() < n) {
        const Config c(rng.next() & mask, removable);
        if (exclude.contains(c) || !seen.insert(c).second) {
            continue;
        }
        out.push_back(c);
    }
    return out;
}

std::vector<Config> sample_patterns(int removable, const SamplingPlan& plan)
{
    if (removable < 1 || removable > kMaxRemovable) {
        throw CapacityError("config length must be in [1, 64]");
    }
    plan.validate(removable);
    const int L = removable;
    std::vector<Config> out;
    std::unordered_set<Config> seen;
    auto add = [&](const Config& c) {
        if (seen.insert(c).second) {
            out.push_back(c);
        }
    };
    const Config ones = Config::all_ones(L);
    const Config zeros = Config::all_zeros(L);
    add(ones);
    add(zeros);

    for (const auto family : plan.pattern_families) {
        for (const int w : plan.window_sizes) {
            switch (family) {
            case PatternFamily::runs_of_zeros:
                for (int off = 0; off + w <= L; ++off) {
                    Config c = ones;
                    for (int i = off; i < off + w; ++i) {
                        c = c.with(i, false);
                    }
                    add(c);
                }
                break;
            case PatternFamily::runs_of_ones:
                for (int off = 0; off + w <= L; ++off) {
                    Config c = zeros;
                    for (int i = off; i < off + w; ++i) {
                        c = c.with(i, true);
                    }
                    add(c);
                }
                break;
            case PatternFamily::alternating:
                for (int off = 0; off + w <= L; ++off) {
                    for (const Config& background : {ones, zeros}) {
                        for (const int phase : {0, 1}) {
                            Config c = background;
                            for (int i = off; i < off + w; ++i) {
                                c = c.with(i, ((i - off + phase) % 2) == 0);
                            }
                            add(c);
                        }
                    }
                }
                break;
            case PatternFamily::sliding_window:
                for (int off = 0; off < std::min(L, 2 * w); ++off) {
                    Config c = zeros;
                    for (int i = 0; i < L; ++i) {
                        c = c.with(i, ((i - off + 2 * w) % (2 * w)) < w);
                    }
                    add(c);
                }
                break;
            }
        }
    }
    return out;
}

std::vector<Config> all_configs(int removable)
{
    if (removable < 1 || removable > 24) {
        throw CapacityError("all_configs: L must lie in [1, 24]");
    }
    std::vector<Config> out;
    out.reserve(std::size_t{1} << removable);
    for (std::uint64_t m = 0; m < (1ULL << removable); ++m) {
        out.emplace_back(m, removable);
    }
    return out;
}

SampledConfigs plan_configs(int removable, const SamplingPlan& plan)
{
    SampledConfigs s;
    s.configs = sample_patterns(removable, plan);
    s.pattern_count = s.configs.size();
    const std::unordered_set<Config> taken(s.configs.begin(), s.configs.end());
    const auto random = sample_random(removable, plan.n_random, plan.seed, taken);
    s.random_count = random.size();
    s.configs.insert(s.configs.end(), random.begin(), random.end());
    const bool has_patterns = !plan.pattern_families.empty();
    s.provenance = has_patterns ? (plan.n_random > 0 ? Provenance::combined : Provenance::pattern) : Provenance::random;
    return s;
}

Dataset build_dataset(const Netlist& netlist, const SamplingPlan& plan, unsigned threads, const PpaModel& model)
{
    const auto sampled = plan_configs(netlist.removable_count(), plan);
    Dataset d;
    d.records = characterize(netlist, sampled.configs, threads, model);
    d.netlist_name = netlist.name();
    d.removable = netlist.removable_count();
    d.provenance = sampled.provenance;
    d.pattern_count = sampled.pattern_count;
    d.random_count = sampled.random_count;
    return d;
}

// ---------------------------------------------------------------------------
// CSV

std::string format_double(double v)
{
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, ptr};
}

void write_csv(const Dataset& dataset, std::ostream& out)
{
    out << kDatasetHeader << '\n';
    for (const auto& r : dataset.records) {
        out << r.config.to_string();
        for (const double v : {r.behav.avg_abs_err, r.behav.avg_abs_rel_err, r.behav.prob_err, r.behav.max_abs_err,
                               r.ppa.power, r.ppa.cpd, r.ppa.luts, r.ppa.pdp, r.ppa.pdplut}) {
            out << ',' << format_double(v);
        }
        out << ',' << (r.source == RecordSource::simulated ? "simulated" : "ingested") << '\n';
    }
}

void save_csv(const Dataset& dataset, const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot write " + path);
    }
    write_csv(dataset, out);
}

Dataset ingest_csv(std::istream& in, int removable, const std::string& name)
{
    Dataset d;
    d.netlist_name = name;
    d.removable = removable;
    d.provenance = Provenance::ingested;
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) {
        throw ParseError("empty dataset file", 1);
    }
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    if (line != kDatasetHeader) {
        throw ParseError("unexpected header \"" + line + "\"", line_no);
    }
    std::unordered_set<Config> seen;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        const auto f = split_csv(line);
        if (f.size() != 11) {
            throw ParseError("expected 11 fields, found " + std::to_string(f.size()), line_no);
        }
        MetricsRecord r;
        try {
            r.config = Config::parse(f[0]);
        } catch (const Error& e) {
            throw ParseError(e.what(), line_no);
        }
        if (r.config.size() != removable) {
            throw ParseError("config length " + std::to_string(r.config.size()) + " does not match L = " +
                                 std::to_string(removable),
                             line_no);
        }
        double v[9];
        for (int i = 0; i < 9; ++i) {
            v[i] = parse_double(f[static_cast<std::size_t>(i + 1)], line_no);
            if (v[i] < 0) {
                throw ParseError("negative metric value", line_no);
            }
        }
        r.behav = {v[0], v[1], v[2], v[3]};
        r.ppa = {v[4], v[5], v[6], v[7], v[8]};
        if (r.behav.prob_err > 100.0) {
            throw ParseError("prob_err above 100", line_no);
        }
        if (f[10] == "simulated") {
            r.source = RecordSource::simulated;
        } else if (f[10] == "ingested") {
            r.source = RecordSource::ingested;
        } else {
            throw ParseError("unknown source \"" + f[10] + "\"", line_no);
        }
        r.warning = !close_rel(r.ppa.pdp, r.ppa.power * r.ppa.cpd) || !close_rel(r.ppa.pdplut, r.ppa.pdp * r.ppa.luts);
        if (!seen.insert(r.config).second) {
            throw ParseError("duplicate config " + f[0], line_no);
        }
        d.records.push_back(r);
    }
    return d;
}

Dataset ingest_csv(const std::string& path, int removable)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot read " + path);
    }
    return ingest_csv(in, removable, path);
}

} // namespace axomap
