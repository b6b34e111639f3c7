#include <doctest.h>

#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "../oracles.hpp"
#include "axomap/dataset.hpp"
#include "axomap/error.hpp"
#include "axomap/estimate.hpp"
#include "axomap/rng.hpp"
#include "axomap/stats.hpp"

using namespace axomap;

namespace {

Samples random_samples(Rng& rng, int L, std::size_t n, bool quadratic)
{
    Samples s;
    s.removable = L;
    s.metric_name = "synthetic";
    s.configs = sample_random(L, n, rng.next());
    std::vector<double> w(static_cast<std::size_t>(L));
    for (auto& x : w) {
        x = rng.uniform() * 4 - 2;
    }
    for (const auto& c : s.configs) {
        double y = 3;
        for (int i = 0; i < L; ++i) {
            y += c.used(i) ? w[static_cast<std::size_t>(i)] : 0;
        }
        if (quadratic && c.used(0) && c.used(1)) {
            y += 5;
        }
        s.target.push_back(y + rng.uniform() * 0.5);
    }
    return s;
}

const Samples& exhaustive_4x4(Metric m)
{
    static const Dataset d = [] {
        Dataset x;
        const auto n = build_multiplier(4, true);
        x.records = characterize(n, all_configs(10));
        x.removable = 10;
        return x;
    }();
    static std::map<Metric, Samples> cache;
    auto it = cache.find(m);
    if (it == cache.end()) {
        it = cache.emplace(m, make_samples(d, m)).first;
    }
    return it->second;
}

} // namespace

TEST_CASE("pearson and single-regressor r agree with oracles")
{
    Rng rng(31);
    for (int k = 0; k < 200; ++k) {
        const std::size_t n = 3 + rng.below(40);
        std::vector<double> x(n), y(n);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = rng.uniform() * 10;
            y[i] = (rng.uniform() - 0.5) * x[i] + rng.uniform();
        }
        const double r = pearson(x, y);
        CHECK(r == doctest::Approx(oracle::pearson(x, y)).epsilon(1e-10));
        CHECK(single_regressor_r(x, y) == doctest::Approx(std::fabs(r)).epsilon(1e-9));
        CHECK(std::fabs(r) <= 1.0);
    }
    const std::vector<double> flat{1, 1, 1};
    const std::vector<double> other{1, 2, 3};
    CHECK_THROWS_AS((void)pearson(flat, other), UndefinedCorrelation);
}

TEST_CASE("multivariate r equals sqrt of a two-regressor R^2 and is symmetric")
{
    Rng rng(32);
    const auto s = random_samples(rng, 8, 60, true);
    for (int x = 0; x < 8; ++x) {
        for (int y = x + 1; y < 8; ++y) {
            std::vector<std::vector<double>> design;
            for (const auto& c : s.configs) {
                design.push_back({1.0, c.used(x) ? 1.0 : 0.0, c.used(y) ? 1.0 : 0.0});
            }
            const double want = std::sqrt(std::clamp(oracle::r_squared(design, s.target), 0.0, 1.0));
            const double r = multivariate_r(s, x, y);
            CHECK(r == doctest::Approx(want).epsilon(1e-9));
            CHECK(r == multivariate_r(s, y, x));
            CHECK(r >= 0);
            CHECK(r <= 1);
        }
    }
}

TEST_CASE("correlation report: ranges, symmetry, permutation ranking, zero-variance warning")
{
    Rng rng(33);
    auto s = random_samples(rng, 6, 50, true);
    for (auto& c : s.configs) {
        c = c.with(5, true); // pin one LUT
    }
    const auto rep = correlation_report(s);
    CHECK(rep.ranking.size() == 15);
    CHECK_FALSE(rep.warnings.empty());
    CHECK(rep.bivariate[5] == 0);
    std::set<LutPair> pairs(rep.ranking.begin(), rep.ranking.end());
    CHECK(pairs.size() == 15);
    for (int i = 0; i < 6; ++i) {
        for (int j = 0; j < 6; ++j) {
            CHECK(rep.at(i, j) == rep.at(j, i));
            CHECK(rep.at(i, j) >= 0);
            CHECK(rep.at(i, j) <= 1);
        }
    }
    std::ostringstream csv;
    write_correlation_csv(rep, csv);
    CHECK(csv.str().find('\n') != std::string::npos);
}

TEST_CASE("ranking ties are lexicographic")
{
    Samples s;
    s.removable = 3;
    for (const auto* t : {"000", "111", "110", "001"}) {
        s.configs.push_back(Config::parse(t));
    }
    s.target = {0, 1, 1, 0};
    const auto r = rank_quadratic_features(s);
    REQUIRE(r.size() == 3);
    CHECK(r[0] == LutPair{0, 1});
}

TEST_CASE("train/test split is an 80/20 partition and reproducible")
{
    const auto [tr, te] = train_test_split(101, 5);
    CHECK(tr.size() == 81);
    CHECK(te.size() == 20);
    std::set<std::size_t> all(tr.begin(), tr.end());
    all.insert(te.begin(), te.end());
    CHECK(all.size() == 101);
    CHECK(train_test_split(101, 5) == std::make_pair(tr, te));
}

TEST_CASE("fit_poly predictions equal an independent least-squares solve")
{
    Rng rng(34);
    const auto s = random_samples(rng, 7, 120, true);
    const std::vector<LutPair> terms{{0, 1}, {2, 5}, {3, 4}};
    const auto [model, rep] = fit_poly(s, terms, 17);
    const auto [train, test] = train_test_split(s.size(), 17);
    std::vector<std::vector<double>> design;
    std::vector<double> y;
    for (const auto i : train) {
        const auto& c = s.configs[i];
        std::vector<double> row{1.0};
        for (int k = 0; k < 7; ++k) {
            row.push_back(c.used(k) ? 1.0 : 0.0);
        }
        for (const auto& [a, b] : terms) {
            row.push_back(c.used(a) && c.used(b) ? 1.0 : 0.0);
        }
        design.push_back(row);
        y.push_back(s.target[i]);
    }
    const auto beta = oracle::ols(design, y);
    for (const auto& c : s.configs) {
        double want = beta[0];
        for (int k = 0; k < 7; ++k) {
            want += c.used(k) ? beta[static_cast<std::size_t>(k) + 1] : 0;
        }
        for (std::size_t t = 0; t < terms.size(); ++t) {
            want += c.used(terms[t].first) && c.used(terms[t].second) ? beta[8 + t] : 0;
        }
        CHECK(model.predict(c) == doctest::Approx(want).epsilon(1e-8));
    }
    CHECK(rep.r2_train <= 1.0);
    CHECK(rep.n_train == train.size());
    CHECK(rep.mse_train >= 0);
    CHECK(rep.mae_test >= 0);
    CHECK(model.quad.size() == 3);
    for (const auto& q : model.quad) {
        CHECK(q.i < q.j);
    }
}

TEST_CASE("rank-deficient designs still fit")
{
    Samples s;
    s.removable = 4;
    for (int k = 0; k < 30; ++k) {
        s.configs.push_back(Config(static_cast<std::uint64_t>(k % 2 ? 0b0011 : 0b1100), 4));
        s.target.push_back(k % 2 ? 2.0 : 5.0);
    }
    // duplicates are fine for fitting; two columns are always equal
    const auto [m, rep] = fit_poly(s, {}, 1);
    CHECK(rep.rank_deficient);
    CHECK(m.predict(Config(0b0011, 4)) == doctest::Approx(2.0));
    CHECK(m.predict(Config(0b1100, 4)) == doctest::Approx(5.0));
}

TEST_CASE("nested-model training R^2 is non-decreasing (synthetic data)")
{
    Rng rng(35);
    for (int trial = 0; trial < 5; ++trial) {
        const auto s = random_samples(rng, 7, 80, true);
        const auto ranked = rank_quadratic_features(s);
        const auto prog = poly_progression(s, ranked, ranked.size(), 3);
        REQUIRE(prog.size() == ranked.size() + 1);
        for (std::size_t k = 1; k < prog.size(); ++k) {
            CHECK(prog[k].r2_train >= prog[k - 1].r2_train - 1e-9);
        }
    }
}

TEST_CASE("train R^2 is invariant to affine target scaling")
{
    Rng rng(36);
    auto s = random_samples(rng, 7, 80, true);
    auto scaled = s;
    for (auto& y : scaled.target) {
        y = 7 * y + 100;
    }
    const auto ranked = rank_quadratic_features(s);
    CHECK(rank_quadratic_features(scaled) == ranked);
    const auto a = poly_progression(s, ranked, 6, 2);
    const auto b = poly_progression(scaled, ranked, 6, 2);
    for (std::size_t k = 0; k < a.size(); ++k) {
        CHECK(a[k].r2_train == doctest::Approx(b[k].r2_train).epsilon(1e-9));
    }
    const auto [ma, ra] = fit_poly(s, {}, 2);
    const auto [mb, rb] = fit_poly(scaled, {}, 2);
    for (std::size_t i = 0; i < ma.linear.size(); ++i) {
        if (std::fabs(ma.linear[i]) > 1e-9) {
            CHECK((ma.linear[i] > 0) == (mb.linear[i] > 0));
        }
    }
}

TEST_CASE("fits are deterministic and serialize losslessly")
{
    const auto& s = exhaustive_4x4(Metric::pdplut);
    const auto ranked = rank_quadratic_features(s);
    const auto [m1, r1] = fit_poly(s, std::span(ranked).first(10), 4);
    const auto [m2, r2] = fit_poly(s, std::span(ranked).first(10), 4);
    CHECK(m1 == m2);
    CHECK(r1.to_json() == r2.to_json());
    const auto back = PolyModel::from_json(nlohmann::json::parse(m1.to_json().dump()));
    CHECK(back == m1);

    const auto [e1, t1] = fit_estimator(s, EstimatorKind::tree_ensemble, 4);
    const auto [e2, t2] = fit_estimator(s, EstimatorKind::tree_ensemble, 4, 3);
    CHECK(e1.to_json() == e2.to_json());
    const auto e3 = Estimator::from_json(nlohmann::json::parse(e1.to_json().dump()));
    for (const auto& c : sample_random(10, 50, 1)) {
        CHECK(e3.predict(c) == e1.predict(c));
    }
    CHECK(e1.ensemble()->trees.size() == 100);
    CHECK(t1.r2_train > 0.5);
}

TEST_CASE("tree depth never exceeds six")
{
    const auto& s = exhaustive_4x4(Metric::avg_abs_rel_err);
    const auto [ens, rep] = fit_tree_ensemble(s, 8);
    for (const auto& tree : ens.trees) {
        std::function<int(int)> depth = [&](int node) -> int {
            const auto& nd = tree.nodes[static_cast<std::size_t>(node)];
            return nd.feature < 0 ? 0 : 1 + std::max(depth(nd.left), depth(nd.right));
        };
        CHECK(depth(0) <= 6);
    }
}

TEST_CASE("default poly budget is L capped at C(L,2)")
{
    CHECK(default_poly_budget(10) == 10);
    CHECK(default_poly_budget(3) == 3);
    CHECK(default_poly_budget(2) == 1);
    CHECK(estimator_kind_name(parse_estimator_kind("tree_ensemble")) == "tree_ensemble");
}
