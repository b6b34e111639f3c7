#include "axomap/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "axomap/error.hpp"
#include "axomap/rng.hpp"

namespace axomap {

namespace {

struct Scores {
    double r2, mae, mse;
};

Scores score(std::span<const double> truth, std::span<const double> pred)
{
    if (truth.empty()) {
        return {0, 0, 0};
    }
    const double n = static_cast<double>(truth.size());
    const double mean = std::accumulate(truth.begin(), truth.end(), 0.0) / n;
    double ss_res = 0, ss_tot = 0, abs_sum = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const double e = truth[i] - pred[i];
        ss_res += e * e;
        abs_sum += std::fabs(e);
        ss_tot += (truth[i] - mean) * (truth[i] - mean);
    }
    double r2 = 0;
    if (ss_tot > 0) {
        r2 = 1.0 - ss_res / ss_tot;
    } else {
        r2 = ss_res == 0 ? 1.0 : 0.0;
    }
    return {r2, abs_sum / n, ss_res / n};
}

template <typename Predict>
FitReport report_for(const Samples& s, const std::vector<std::size_t>& train, const std::vector<std::size_t>& test,
                     Predict&& predict)
{
    auto collect = [&](const std::vector<std::size_t>& rows) {
        std::vector<double> truth, pred;
        truth.reserve(rows.size());
        pred.reserve(rows.size());
        for (const auto r : rows) {
            truth.push_back(s.target[r]);
            pred.push_back(predict(s.configs[r]));
        }
        return score(truth, pred);
    };
    const Scores tr = collect(train);
    const Scores te = collect(test);
    FitReport rep;
    rep.r2_train = tr.r2;
    rep.mae_train = tr.mae;
    rep.mse_train = tr.mse;
    rep.r2_test = te.r2;
    rep.mae_test = te.mae;
    rep.mse_test = te.mse;
    rep.n_train = train.size();
    rep.n_test = test.size();
    return rep;
}

void check_samples(const Samples& s)
{
    if (s.configs.size() != s.target.size()) {
        throw ValidationError("samples: config and target counts differ");
    }
    if (s.configs.empty()) {
        throw ValidationError("samples: empty dataset");
    }
    for (const auto& c : s.configs) {
        if (c.size() != s.removable) {
            throw ValidationError("samples: config length differs from L");
        }
    }
}

// ---------------------------------------------------------------------------
// regression trees

struct TreeBuilder {
    const Samples& s;
    int max_depth;
    std::vector<TreeNode> nodes;

    int build(std::vector<std::size_t>& rows, int depth)
    {
        const int index = static_cast<int>(nodes.size());
        nodes.emplace_back();
        double sum = 0;
        for (const auto r : rows) {
            sum += s.target[r];
        }
        const double n = static_cast<double>(rows.size());
        const double mean = sum / n;
        nodes[static_cast<std::size_t>(index)].value = mean;
        if (depth >= max_depth || rows.size() < 2) {
            return index;
        }
        int best = -1;
        double best_gain = 0;
        for (int f = 0; f < s.removable; ++f) {
            double sum1 = 0;
            std::size_t n1 = 0;
            for (const auto r : rows) {
                if (s.configs[r].used(f)) {
                    sum1 += s.target[r];
                    ++n1;
                }
            }
            if (n1 == 0 || n1 == rows.size()) {
                continue;
            }
            const double n1d = static_cast<double>(n1);
            const double n0d = n - n1d;
            const double sum0 = sum - sum1;
            const double gain = sum1 * sum1 / n1d + sum0 * sum0 / n0d - sum * sum / n;
            if (gain > best_gain * (1 + 1e-12) + 1e-15 * std::fabs(sum * sum / n)) {
                best_gain = gain;
                best = f;
            }
        }
        if (best < 0) {
            return index;
        }
        std::vector<std::size_t> left, right;
        for (const auto r : rows) {
            (s.configs[r].used(best) ? right : left).push_back(r);
        }
        rows.clear();
        rows.shrink_to_fit();
        const int l = build(left, depth + 1);
        const int rgt = build(right, depth + 1);
        auto& node = nodes[static_cast<std::size_t>(index)];
        node.feature = best;
        node.left = l;
        node.right = rgt;
        return index;
    }
};

} // namespace

// ---------------------------------------------------------------------------
// PolyModel

double PolyModel::predict(const Config& config) const
{
    double v = intercept;
    for (std::size_t i = 0; i < linear.size(); ++i) {
        if (config.used(static_cast<int>(i))) {
            v += linear[i];
        }
    }
    for (const auto& t : quad) {
        if (config.used(t.i) && config.used(t.j)) {
            v += t.coef;
        }
    }
    return v;
}

PolyModel PolyModel::truncated(std::size_t n_quad) const
{
    PolyModel m = *this;
    if (m.quad.size() > n_quad) {
        m.quad.resize(n_quad);
    }
    return m;
}

nlohmann::json PolyModel::to_json() const
{
    nlohmann::json doc;
    doc["kind"] = "poly";
    doc["metric"] = metric_name;
    doc["removable"] = removable;
    doc["intercept"] = intercept;
    doc["linear"] = linear;
    auto q = nlohmann::json::array();
    for (const auto& t : quad) {
        q.push_back({t.i, t.j, t.coef});
    }
    doc["quad"] = std::move(q);
    doc["scaler"] = {{"min", target_min}, {"max", target_max}};
    return doc;
}

PolyModel PolyModel::from_json(const nlohmann::json& doc)
{
    try {
        PolyModel m;
        m.metric_name = doc.at("metric").get<std::string>();
        m.removable = doc.at("removable").get<int>();
        m.intercept = doc.at("intercept").get<double>();
        m.linear = doc.at("linear").get<std::vector<double>>();
        for (const auto& t : doc.at("quad")) {
            m.quad.push_back({t.at(0).get<int>(), t.at(1).get<int>(), t.at(2).get<double>()});
        }
        m.target_min = doc.at("scaler").at("min").get<double>();
        m.target_max = doc.at("scaler").at("max").get<double>();
        if (static_cast<int>(m.linear.size()) != m.removable) {
            throw ParseError("poly model: linear coefficient count differs from L");
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("poly model JSON: ") + e.what());
    }
}

nlohmann::json FitReport::to_json() const
{
    return {{"r2_train", r2_train}, {"r2_test", r2_test},     {"mae_train", mae_train},
            {"mae_test", mae_test}, {"mse_train", mse_train}, {"mse_test", mse_test},
            {"n_quad", n_quad},     {"n_train", n_train},     {"n_test", n_test},
            {"rank_deficient", rank_deficient}};
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> train_test_split(std::size_t rows, std::uint64_t seed)
{
    std::vector<std::size_t> idx(rows);
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(seed);
    rng.shuffle(idx);
    const auto n_train = rows < 2 ? rows : static_cast<std::size_t>(std::llround(0.8 * static_cast<double>(rows)));
    std::vector<std::size_t> train(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
    std::vector<std::size_t> test(idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());
    return {std::move(train), std::move(test)};
}

std::pair<PolyModel, FitReport> fit_poly(const Samples& samples, std::span<const LutPair> quad_terms, std::uint64_t split_seed)
{
    check_samples(samples);
    const int L = samples.removable;
    for (std::size_t a = 0; a < quad_terms.size(); ++a) {
        const auto [i, j] = quad_terms[a];
        if (i < 0 || j >= L || i >= j) {
            throw ValidationError("quadratic term indices must satisfy 0 <= i < j < L");
        }
        for (std::size_t b = 0; b < a; ++b) {
            if (quad_terms[b] == quad_terms[a]) {
                throw ValidationError("duplicate quadratic term");
            }
        }
    }
    auto [train, test] = train_test_split(samples.size(), split_seed);

    double lo = samples.target[train.front()];
    double hi = lo;
    for (const auto r : train) {
        lo = std::min(lo, samples.target[r]);
        hi = std::max(hi, samples.target[r]);
    }
    const double span = hi > lo ? hi - lo : 1.0;

    const auto cols = static_cast<Eigen::Index>(1 + L + static_cast<int>(quad_terms.size()));
    Eigen::MatrixXd X(static_cast<Eigen::Index>(train.size()), cols);
    Eigen::VectorXd y(static_cast<Eigen::Index>(train.size()));
    for (std::size_t r = 0; r < train.size(); ++r) {
        const auto& c = samples.configs[train[r]];
        const auto row = static_cast<Eigen::Index>(r);
        X(row, 0) = 1.0;
        for (int i = 0; i < L; ++i) {
            X(row, 1 + i) = c.used(i) ? 1.0 : 0.0;
        }
        for (std::size_t t = 0; t < quad_terms.size(); ++t) {
            X(row, 1 + L + static_cast<Eigen::Index>(t)) = (c.used(quad_terms[t].first) && c.used(quad_terms[t].second)) ? 1.0 : 0.0;
        }
        y(row) = (samples.target[train[r]] - lo) / span;
    }

    bool deficient = false;
    Eigen::VectorXd beta;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    if (qr.rank() < cols) {
        deficient = true;
        beta = Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd>(X).solve(y);
    } else {
        beta = qr.solve(y);
    }

    PolyModel m;
    m.metric_name = samples.metric_name;
    m.removable = L;
    m.target_min = lo;
    m.target_max = hi;
    m.intercept = beta(0) * span + lo;
    m.linear.resize(static_cast<std::size_t>(L));
    for (int i = 0; i < L; ++i) {
        m.linear[static_cast<std::size_t>(i)] = beta(1 + i) * span;
    }
    for (std::size_t t = 0; t < quad_terms.size(); ++t) {
        m.quad.push_back({quad_terms[t].first, quad_terms[t].second, beta(1 + L + static_cast<Eigen::Index>(t)) * span});
    }
    FitReport rep = report_for(samples, train, test, [&](const Config& c) { return m.predict(c); });
    rep.n_quad = quad_terms.size();
    rep.rank_deficient = deficient;
    return {std::move(m), rep};
}

std::vector<FitReport> poly_progression(const Samples& samples, std::span<const LutPair> ranked, std::size_t max_terms,
                                        std::uint64_t split_seed)
{
    const std::size_t n = std::min(max_terms, ranked.size());
    std::vector<FitReport> out;
    out.reserve(n + 1);
    for (std::size_t k = 0; k <= n; ++k) {
        out.push_back(fit_poly(samples, ranked.first(k), split_seed).second);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Trees

double RegressionTree::predict(const Config& config) const
{
    int i = 0;
    while (nodes[static_cast<std::size_t>(i)].feature >= 0) {
        const auto& n = nodes[static_cast<std::size_t>(i)];
        i = config.used(n.feature) ? n.right : n.left;
    }
    return nodes[static_cast<std::size_t>(i)].value;
}

double TreeEnsemble::predict(const Config& config) const
{
    double sum = 0;
    for (const auto& t : trees) {
        sum += t.predict(config);
    }
    return trees.empty() ? 0.0 : sum / static_cast<double>(trees.size());
}

std::pair<TreeEnsemble, FitReport> fit_tree_ensemble(const Samples& samples, std::uint64_t seed, const TreeSettings& settings)
{
    check_samples(samples);
    if (settings.trees < 1 || settings.max_depth < 0 || settings.bagging <= 0 || settings.bagging > 1) {
        throw ConfigurationError("invalid tree ensemble settings");
    }
    auto [train, test] = train_test_split(samples.size(), seed);
    TreeEnsemble ens;
    ens.metric_name = samples.metric_name;
    ens.removable = samples.removable;
    Rng rng(seed ^ 0x7265655F62616767ULL);
    const auto bag = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(settings.bagging * static_cast<double>(train.size()))));
    for (int t = 0; t < settings.trees; ++t) {
        std::vector<std::size_t> pool = train;
        for (std::size_t k = 0; k < bag; ++k) {
            std::swap(pool[k], pool[k + rng.below(pool.size() - k)]);
        }
        pool.resize(bag);
        std::sort(pool.begin(), pool.end());
        TreeBuilder b{samples, settings.max_depth, {}};
        b.build(pool, 0);
        ens.trees.push_back({std::move(b.nodes)});
    }
    FitReport rep = report_for(samples, train, test, [&](const Config& c) { return ens.predict(c); });
    return {std::move(ens), rep};
}

// ---------------------------------------------------------------------------
// Estimator

std::string_view estimator_kind_name(EstimatorKind k)
{
    return k == EstimatorKind::poly ? "poly" : "tree_ensemble";
}

EstimatorKind parse_estimator_kind(std::string_view name)
{
    if (name == "poly") {
        return EstimatorKind::poly;
    }
    if (name == "tree_ensemble") {
        return EstimatorKind::tree_ensemble;
    }
    throw ConfigurationError("unknown estimator kind \"" + std::string(name) + "\"");
}

double Estimator::predict(const Config& config) const
{
    return std::visit([&](const auto& m) { return m.predict(config); }, model_);
}

nlohmann::json Estimator::to_json() const
{
    if (const auto* p = poly()) {
        return p->to_json();
    }
    const auto& e = *ensemble();
    nlohmann::json doc;
    doc["kind"] = "tree_ensemble";
    doc["metric"] = e.metric_name;
    doc["removable"] = e.removable;
    auto trees = nlohmann::json::array();
    for (const auto& t : e.trees) {
        auto nodes = nlohmann::json::array();
        for (const auto& n : t.nodes) {
            nodes.push_back({n.feature, n.left, n.right, n.value});
        }
        trees.push_back(std::move(nodes));
    }
    doc["trees"] = std::move(trees);
    return doc;
}

Estimator Estimator::from_json(const nlohmann::json& doc)
{
    try {
        const auto kind = parse_estimator_kind(doc.at("kind").get<std::string>());
        if (kind == EstimatorKind::poly) {
            return Estimator(PolyModel::from_json(doc));
        }
        TreeEnsemble e;
        e.metric_name = doc.at("metric").get<std::string>();
        e.removable = doc.at("removable").get<int>();
        for (const auto& t : doc.at("trees")) {
            RegressionTree tree;
            for (const auto& n : t) {
                tree.nodes.push_back({n.at(0).get<int>(), n.at(1).get<int>(), n.at(2).get<int>(), n.at(3).get<double>()});
            }
            e.trees.push_back(std::move(tree));
        }
        return Estimator(std::move(e));
    } catch (const nlohmann::json::exception& ex) {
        throw ParseError(std::string("estimator JSON: ") + ex.what());
    }
}

std::size_t default_poly_budget(int removable)
{
    const auto pairs = static_cast<std::size_t>(removable) * static_cast<std::size_t>(removable - 1) / 2;
    return std::min(static_cast<std::size_t>(removable), pairs);
}

std::pair<Estimator, FitReport> fit_estimator(const Samples& samples, EstimatorKind kind, std::uint64_t seed, unsigned threads)
{
    check_samples(samples);
    if (kind == EstimatorKind::tree_ensemble) {
        auto [ens, rep] = fit_tree_ensemble(samples, seed);
        return {Estimator(std::move(ens)), rep};
    }
    std::vector<LutPair> ranked;
    if (samples.size() >= 2 && samples.removable >= 2) {
        ranked = rank_quadratic_features(samples, threads);
        ranked.resize(std::min(ranked.size(), default_poly_budget(samples.removable)));
    }
    auto [model, rep] = fit_poly(samples, ranked, seed);
    return {Estimator(std::move(model)), rep};
}

} // namespace axomap
