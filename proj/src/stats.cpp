#include "axomap/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "axomap/error.hpp"
#include "axomap/parallel.hpp"

namespace axomap {

namespace {

bool is_constant(std::span<const double> v)
{
    return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
}

std::vector<double> lut_column(const Samples& s, int lut)
{
    std::vector<double> col(s.size());
    for (std::size_t r = 0; r < s.size(); ++r) {
        col[r] = s.configs[r].used(lut) ? 1.0 : 0.0;
    }
    return col;
}

void check_samples(const Samples& s)
{
    if (s.configs.size() != s.target.size()) {
        throw ValidationError("samples: config and target counts differ");
    }
    if (s.size() < 2) {
        throw ValidationError("samples: need at least two rows");
    }
}

} // namespace

Samples make_samples(const Dataset& dataset, Metric metric)
{
    Samples s;
    s.configs = dataset.configs();
    s.target = dataset.column(metric);
    s.removable = dataset.removable;
    s.metric_name = std::string(metric_name(metric));
    return s;
}

double pearson(std::span<const double> xs, std::span<const double> ys)
{
    if (xs.size() != ys.size() || xs.size() < 2) {
        throw ValidationError("pearson: inputs must have equal length >= 2");
    }
    if (is_constant(xs) || is_constant(ys)) {
        throw UndefinedCorrelation("pearson: zero variance input");
    }
    const double n = static_cast<double>(xs.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double dx = xs[i] - mx;
        const double dy = ys[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double single_regressor_r(std::span<const double> xs, std::span<const double> ys)
{
    if (xs.size() != ys.size() || xs.size() < 2) {
        throw ValidationError("single_regressor_r: inputs must have equal length >= 2");
    }
    if (is_constant(xs) || is_constant(ys)) {
        throw UndefinedCorrelation("single_regressor_r: zero variance input");
    }
    const double n = static_cast<double>(xs.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    const double slope = sxy / sxx;
    const double intercept = my - slope * mx;
    double ss_res = 0, ss_tot = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double e = ys[i] - (intercept + slope * xs[i]);
        ss_res += e * e;
        ss_tot += (ys[i] - my) * (ys[i] - my);
    }
    return std::sqrt(std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0));
}

double multivariate_r(const Samples& samples, int lut_x, int lut_y)
{
    check_samples(samples);
    if (lut_x < 0 || lut_y < 0 || lut_x >= samples.removable || lut_y >= samples.removable) {
        throw ValidationError("multivariate_r: LUT index out of range");
    }
    if (lut_x > lut_y) {
        std::swap(lut_x, lut_y);
    }
    const auto xs = lut_column(samples, lut_x);
    const auto ys = lut_column(samples, lut_y);
    const std::span<const double> m = samples.target;
    if (is_constant(m)) {
        throw UndefinedCorrelation("multivariate_r: constant target");
    }
    const bool x_const = is_constant(xs);
    const bool y_const = is_constant(ys);
    if (x_const && y_const) {
        throw UndefinedCorrelation("multivariate_r: both LUT columns constant");
    }
    if (lut_x == lut_y || y_const) {
        return std::fabs(pearson(xs, m));
    }
    if (x_const) {
        return std::fabs(pearson(ys, m));
    }

    const double n = static_cast<double>(samples.size());
    double mx = 0, my = 0, mm = 0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        mx += xs[i];
        my += ys[i];
        mm += m[i];
    }
    mx /= n;
    my /= n;
    mm /= n;
    double sxx = 0, syy = 0, sxy = 0, sxm = 0, sym = 0, smm = 0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double dx = xs[i] - mx;
        const double dy = ys[i] - my;
        const double dm = m[i] - mm;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
        sxm += dx * dm;
        sym += dy * dm;
        smm += dm * dm;
    }
    const double det = sxx * syy - sxy * sxy;
    if (det <= 1e-12 * sxx * syy) {
        return std::fabs(pearson(xs, m)); // l_y is an affine copy of l_x
    }
    const double explained = (syy * sxm * sxm - 2.0 * sxy * sxm * sym + sxx * sym * sym) / det;
    return std::sqrt(std::clamp(explained / smm, 0.0, 1.0));
}

std::vector<LutPair> rank_quadratic_features(const Samples& samples, unsigned threads)
{
    check_samples(samples);
    const int L = samples.removable;
    std::vector<LutPair> pairs;
    for (int i = 0; i < L; ++i) {
        for (int j = i + 1; j < L; ++j) {
            pairs.emplace_back(i, j);
        }
    }
    constexpr double kUndefined = -std::numeric_limits<double>::infinity();
    std::vector<double> r(pairs.size());
    parallel_for(pairs.size(), threads, [&](std::size_t k) {
        try {
            r[k] = multivariate_r(samples, pairs[k].first, pairs[k].second);
        } catch (const UndefinedCorrelation&) {
            r[k] = kUndefined;
        }
    });
    std::vector<std::size_t> order(pairs.size());
    for (std::size_t k = 0; k < order.size(); ++k) {
        order[k] = k;
    }
    // pairs are generated in lexicographic order, so a stable sort keeps ties lexicographic
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return r[a] > r[b]; });
    std::vector<LutPair> ranked;
    ranked.reserve(pairs.size());
    for (const auto k : order) {
        ranked.push_back(pairs[k]);
    }
    return ranked;
}

CorrelationReport correlation_report(const Samples& samples, unsigned threads)
{
    check_samples(samples);
    CorrelationReport rep;
    rep.metric_name = samples.metric_name;
    rep.removable = samples.removable;
    const int L = samples.removable;
    const auto Lz = static_cast<std::size_t>(L);
    rep.bivariate.assign(Lz, 0.0);
    rep.multivariate.assign(Lz * Lz, 0.0);
    for (int i = 0; i < L; ++i) {
        try {
            rep.bivariate[static_cast<std::size_t>(i)] = pearson(lut_column(samples, i), samples.target);
        } catch (const UndefinedCorrelation&) {
            rep.warnings.push_back("LUT " + std::to_string(i) + ": undefined bivariate correlation, reported as 0");
        }
        rep.multivariate[static_cast<std::size_t>(i) * Lz + static_cast<std::size_t>(i)] =
            std::fabs(rep.bivariate[static_cast<std::size_t>(i)]);
    }
    std::vector<LutPair> pairs;
    for (int i = 0; i < L; ++i) {
        for (int j = i + 1; j < L; ++j) {
            pairs.emplace_back(i, j);
        }
    }
    std::vector<double> r(pairs.size(), 0.0);
    std::vector<char> undefined(pairs.size(), 0);
    parallel_for(pairs.size(), threads, [&](std::size_t k) {
        try {
            r[k] = multivariate_r(samples, pairs[k].first, pairs[k].second);
        } catch (const UndefinedCorrelation&) {
            undefined[k] = 1;
        }
    });
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        const auto [i, j] = pairs[k];
        rep.multivariate[static_cast<std::size_t>(i) * Lz + static_cast<std::size_t>(j)] = r[k];
        rep.multivariate[static_cast<std::size_t>(j) * Lz + static_cast<std::size_t>(i)] = r[k];
        if (undefined[k]) {
            rep.warnings.push_back("pair (" + std::to_string(i) + "," + std::to_string(j) +
                                   "): undefined multivariate correlation, reported as 0");
        }
    }
    std::vector<std::size_t> order(pairs.size());
    for (std::size_t k = 0; k < order.size(); ++k) {
        order[k] = k;
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (undefined[a] != undefined[b]) {
            return undefined[b] != 0;
        }
        return r[a] > r[b];
    });
    for (const auto k : order) {
        rep.ranking.push_back(pairs[k]);
    }
    return rep;
}

void write_correlation_csv(const CorrelationReport& report, std::ostream& out)
{
    out << "metric,i,j,r\n";
    for (int i = 0; i < report.removable; ++i) {
        for (int j = 0; j < report.removable; ++j) {
            out << report.metric_name << ',' << i << ',' << j << ',' << format_double(report.at(i, j)) << '\n';
        }
    }
}

void write_bivariate_csv(const CorrelationReport& report, std::ostream& out)
{
    out << "metric,i,r\n";
    for (int i = 0; i < report.removable; ++i) {
        out << report.metric_name << ',' << i << ',' << format_double(report.bivariate[static_cast<std::size_t>(i)]) << '\n';
    }
}

} // namespace axomap
