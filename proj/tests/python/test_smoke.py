import math

import pytest

import starkit


def test_height_density_is_analytic():
    body = starkit.StarBody("height")
    r = body.density(0.25)
    assert r["method"] == "analytic"
    assert r["value"] == pytest.approx(0.25)
    assert body.bounded is True
    assert starkit.StarBody("multiplicative").bounded is False
    assert body.rectangle() == (1, 1)


def test_inline_expression_and_evaluation():
    body = starkit.StarBody("gm(abs(1,0),abs(0,1))")
    assert body(0.25, 4.0) == pytest.approx(1.0)
    assert all(line["rational"] for line in body.skeleton())


def test_series_and_verdict():
    body = starkit.StarBody("multiplicative")
    psi = starkit.Psi("pow:1.5")
    sums = starkit.series_partial_sums(body, psi, 50)
    assert len(sums) == 50
    assert all(b[1] >= a[1] for a, b in zip(sums, sums[1:]))
    assert starkit.analytic_verdict(body, psi) in {"convergent", "divergent", "inconclusive"}


def test_tail_measure_is_deterministic():
    body = starkit.StarBody("height")
    psi = starkit.Psi("pow:1.6")
    a = starkit.tail_measure(body, psi, 64, 2000, 7)
    b = starkit.tail_measure(body, psi, 64, 2000, 7)
    assert a == b
    assert 0.0 <= a["value"] <= a["union_bound"] + 4 * a["stderr"]


def test_continued_fractions():
    cf = starkit.continued_fraction("sqrt2", 6)
    assert cf["quotients"] == [1, 2, 2, 2, 2, 2]
    assert [q for _, q in cf["convergents"]] == [1, 2, 5, 12, 29, 70]
    assert starkit.continued_fraction("3/7", 5)["terminated"]


def test_three_distance_and_ubiquity():
    inv = (math.sqrt(5) - 1) / 2
    g = starkit.three_distance(inv, 0.0, 3)
    assert len(g["distinct"]) == 2
    assert sum(g["gaps"]) == pytest.approx(1.0)
    seq = starkit.ubiquity_sequence(inv, 100)
    assert 89 in seq


def test_transfer_and_prop5():
    r = starkit.transfer("mult", ["sqrt2", "sqrt3"], 0.25, 60)
    assert r["witnesses"]
    assert r["with_p"] <= len(r["witnesses"])
    p = starkit.prop5(["sqrt2", "sqrt3"], 0.3, 5.0, 50)
    assert p["p_witness"] == 1


def test_phi_sum():
    lhs, rhs, ratio = starkit.euler_phi_sum(lambda q: 1.0 / q, 1000)
    assert ratio == pytest.approx(lhs / rhs)
    assert 0.4 < ratio < 1.0


def test_errors_carry_kind():
    with pytest.raises(starkit.ValidationError) as info:
        starkit.StarBody("cusp").density(0.1)
    assert info.value.kind == "IrrationalSkeleton"
    assert isinstance(info.value, starkit.StarkitError)
    with pytest.raises(starkit.ValidationError):
        starkit.transfer("nope", ["sqrt2"], 0.1, 10)
