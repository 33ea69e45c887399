import json
import math
from fractions import Fraction

import pytest

from twosided_lerw import Estimate
from twosided_lerw.errors import NotConverged
from twosided_lerw.extrapolate import check_converged, fitted_exponent, richardson, richardson_table


def test_estimate_json_and_arithmetic():
    e = Estimate(Fraction(64, 97), 0.0, "exact")
    d = json.loads(e.to_json())
    assert d["value"] == "64/97" and d["float"] == pytest.approx(64 / 97)
    p = Estimate(2.0, 0.1, "direct") * Estimate(3.0, 0.2, "extrapolated")
    assert p.value == 6.0 and p.error == pytest.approx(math.hypot(0.3, 0.4))
    assert p.mode == "extrapolated"
    q = Estimate(6.0, 0.0) / 2
    assert q.value == 3.0
    with pytest.raises(ValueError):
        Estimate(1.0, -1.0)
    with pytest.raises(ValueError):
        Estimate(1.0, 0.0, "guess")


def test_richardson_exact_on_polynomials():
    hs = [1 / 64, 1 / 128, 1 / 256]
    vals = [2.5 + 3 * h - 7 * h * h for h in hs]
    est = richardson(vals, 2.0, (1, 2))
    assert est.value == pytest.approx(2.5, abs=1e-12)
    lev = richardson_table(vals, 2.0, (1,))
    assert len(lev) == 2 and len(lev[1]) == 2


def test_fitted_exponent_recovers_beta():
    Rs = [64, 128, 256]
    vals = [1.25 + 0.8 * R ** -1.0 for R in Rs]
    est = fitted_exponent(vals, 2.0)
    assert est.value == pytest.approx(1.25, abs=1e-12)
    assert est.details["beta"] == pytest.approx(1.0)
    vals = [1.25 + 0.8 * R ** -0.5 for R in Rs]
    assert fitted_exponent(vals).value == pytest.approx(1.25, abs=1e-12)


def test_check_converged():
    check_converged([1.0, 1.0005], 1e-3)
    with pytest.raises(NotConverged) as info:
        check_converged([1.0, 1.1], 1e-3, estimate=Estimate(1.1, 0.1))
    assert info.value.estimate.value == 1.1
