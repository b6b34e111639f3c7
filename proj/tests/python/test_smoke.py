import itertools
import json

import pytest

import axomap


def test_all_ones_multiplier_is_exact():
    n = axomap.build_multiplier(4, signed=True)
    assert n.removable == 10
    full = axomap.Config.all_ones(n.removable)
    for a, b in itertools.product(range(-8, 8), repeat=2):
        assert n.evaluate(full, a, b) == a * b


def test_config_roundtrip_and_ordering():
    c = axomap.Config("1001")
    assert str(c) == "1001"
    assert c.count() == 2 and c.used(0) and not c.used(1)
    assert axomap.Config("0111") < axomap.Config("1000")


def test_characterize_corners():
    n = axomap.build_multiplier(4)
    rows = axomap.characterize(n, ["1111111111", "0000000000"])
    assert rows[0]["avg_abs_err"] == 0
    assert rows[0]["luts"] == 10
    assert rows[1]["luts"] == 0
    assert rows[0]["pdplut"] == pytest.approx(rows[0]["power"] * rows[0]["cpd"] * rows[0]["luts"])


def test_pearson_matches_single_regressor():
    x = [0.0, 1.0, 2.0, 3.0, 5.0]
    y = [1.0, 0.5, 2.5, 2.0, 4.0]
    assert axomap.single_regressor_r(x, y) == pytest.approx(abs(axomap.pearson(x, y)), abs=1e-12)


def test_fit_and_solve():
    n = axomap.build_multiplier(4)
    d = axomap.exhaustive_dataset(n)
    assert len(d) == 1024
    ppa = axomap.make_samples(d, "pdplut")
    behav = axomap.make_samples(d, "avg_abs_rel_err")
    terms = axomap.rank_quadratic_features(ppa)
    assert len(terms) == 45
    pm, rep = axomap.fit_poly(ppa, terms[:10], 0)
    bm, _ = axomap.fit_poly(behav, axomap.rank_quadratic_features(behav)[:10], 0)
    assert 0.0 <= rep.r2_train <= 1.0
    maxima = axomap.DatasetMaxima(max(ppa.target), max(behav.target))
    prob = axomap.formulate(pm, bm, 0.5, 0.5, 10, maxima)
    exact = axomap.solve_exact(prob)
    heur = axomap.solve_heuristic(prob, seed=1)
    assert exact.feasible
    assert exact.objective <= heur.objective + 1e-9
    assert json.dumps(exact.to_json())


def test_hypervolume_and_pareto():
    assert axomap.hypervolume2d([(0.0, 0.0)]) == 1.0
    assert axomap.hypervolume2d([(0.0, 0.5), (0.5, 0.0)]) == pytest.approx(0.75, abs=1e-12)
    front = axomap.pareto_filter([("00", 1.0, 2.0), ("01", 2.0, 1.0), ("10", 2.0, 2.0)])
    assert [p[0] for p in front] == ["00", "01"]


def test_app_kernels_zero_error_on_exact_table():
    n = axomap.build_multiplier(8, signed=True)
    table = n.product_table(axomap.Config.all_ones(n.removable))
    for name in ("fir_peak", "gemv_classify", "conv2d_psnr"):
        assert axomap.app_behav(axomap.builtin_kernel(name), table) == 0.0


def test_errors_are_typed():
    with pytest.raises(axomap.Error):
        axomap.Config("10x1")
    n = axomap.build_multiplier(4)
    with pytest.raises(axomap.DomainError):
        axomap.app_behav(axomap.builtin_kernel("fir_peak"), n.product_table("1111111111"))
