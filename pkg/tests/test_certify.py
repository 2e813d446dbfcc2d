import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from landau.certify import (
    Budget,
    CircleWitness,
    LambdaCertificate,
    candidate_radii,
    find_circle,
    lambda_lower_bound,
    lemma7_params,
    outer_radius,
)
from landau.dyadic import ComplexDyadic, Dyadic, pow2
from landau.errors import BudgetExhausted, DegenerateWindow
from landau.schedule import polynomial_bounds
from landau.stream import encode_coefficients

R04 = Dyadic(13, -5)  # 0.40625, the dyadic stand-in for r = 0.4


@pytest.fixture(scope="module")
def affine_witness(landau_schedule):
    s = encode_coefficients([ComplexDyadic(-2, 0)], landau_schedule)
    return find_circle(s, landau_schedule, R04)


@pytest.fixture(scope="module")
def identity_certificate(landau_schedule):
    s = encode_coefficients([], landau_schedule)
    return lambda_lower_bound(s, landau_schedule, 1, polynomial_bounds([], "identity"))


def test_candidate_order():
    first = [str(c) for c, _ in zip(candidate_radii(R04), range(4))]
    assert first == ["1p-1", "3p-2", "5p-3", "7p-3"]


def test_identity_witness(landau_schedule):
    s = encode_coefficients([], landau_schedule)
    w = find_circle(s, landau_schedule, Dyadic(1, -1), bounds=polynomial_bounds([]))
    assert 0 < w.rho <= 1 and Dyadic(1, -1) < w.r_hat < 1
    assert w.covers_circle()


def test_affine_witness(affine_witness):
    w = affine_witness
    assert w.r_hat != Dyadic(1, -1) and R04 < w.r_hat < 1
    assert 0 < w.rho <= Dyadic(1, -1)
    assert w.covers_circle()
    # sampled soundness against the closed form |1 - 2z| on |z| = r_hat
    theta = np.linspace(0, 2 * np.pi, 1000, endpoint=False)
    vals = np.abs(1 - 2 * float(w.r_hat) * np.exp(1j * theta))
    assert vals.min() >= float(w.rho)
    assert float(w.rho) <= abs(2 * float(w.r_hat) - 1)


def test_affine_candidate_three_quarters(landau_schedule):
    s = encode_coefficients([ComplexDyadic(-2, 0)], landau_schedule)
    w = find_circle(s, landau_schedule, R04, candidates=[Dyadic(3, -2)])
    assert w.r_hat == Dyadic(3, -2) and w.rho <= Dyadic(1, -1)


def test_zero_on_circle_is_rejected(landau_schedule):
    s = encode_coefficients([ComplexDyadic(-2, 0)], landau_schedule)
    with pytest.raises(BudgetExhausted):
        find_circle(s, landau_schedule, R04, Budget(max_stages=9), candidates=[Dyadic(1, -1)])


def test_eval_budget(landau_schedule):
    s = encode_coefficients([ComplexDyadic(-2, 0)], landau_schedule)
    with pytest.raises(BudgetExhausted):
        find_circle(s, landau_schedule, R04, Budget(max_evals=10))


def test_parameters_reference_example(landau_schedule):
    mu2 = landau_schedule.sup_bound_fsecond(Dyadic(1, -1))
    assert abs(float(mu2) - 41.27) < 0.01
    w = CircleWitness(Dyadic(3, -2), Dyadic(1, -1), mu2, Dyadic(0), [], pow2(-3), 0)
    p = lemma7_params(w, Dyadic(1, -1))
    assert p.delta_big == pow2(-9)
    assert p.eps == pow2(-14)
    assert p.delta_big.shift(1) == pow2(-8) < Dyadic(1, -2)
    assert Dyadic(1, -1) < p.r_bar < Dyadic(3, -2)


@settings(max_examples=200)
@given(st.integers(1, 2**20), st.integers(1, 2**30), st.integers(1, 255), st.integers(1, 255))
def test_delta_is_largest_power_of_two(rho_m, mu_m, a, b):
    r, r_hat = sorted((Dyadic(a, -8), Dyadic(b, -8)))
    if r == r_hat:
        r_hat = r + pow2(-9)
    if r_hat >= 1:
        return
    w = CircleWitness(r_hat, Dyadic(rho_m, -20), Dyadic(mu_m, -10), Dyadic(0), [], pow2(-3), 0)
    p = lemma7_params(w, r)
    d = p.delta_big
    assert 4 * w.mu2 * d <= w.rho and d.shift(1) < r_hat - r
    assert not (4 * w.mu2 * d.shift(1) <= w.rho and d.shift(2) < r_hat - r)
    assert p.eps == (w.rho * d).shift(-4)
    assert r < p.r_bar < r_hat


def test_degenerate_window():
    w = CircleWitness(Dyadic(1, -1), Dyadic(1, -1), Dyadic(1), Dyadic(0), [], pow2(-3), 0)
    with pytest.raises(DegenerateWindow):
        lemma7_params(w, Dyadic(1, -1))


def test_identity_certificate(identity_certificate):
    c = identity_certificate
    assert Dyadic(1, -1) <= c.l_reported <= Fraction(51, 100)
    assert c.mode == "sound" and c.audit_ok()
    assert c.l_reported <= c.l_upper
    assert c.delta == c.eps.shift(-2)
    assert c.bounds["name"] == "identity" and not c.bounds["audited"] and "sample_audit" in c.bounds
    # chain against closed forms: lambda_f(D_r) = r and lambda_f(D_r_hat) = r_hat for the identity
    assert c.l_reported >= c.r - (c.l_upper - c.l_reported)
    assert c.l_reported <= c.witness.r_hat + c.delta
    assert c.r == outer_radius(1, 8)


def test_certificate_round_trip(identity_certificate):
    text = identity_certificate.to_json()
    back = LambdaCertificate.from_json(text)
    assert back.audit() == identity_certificate.audit()
    assert back.primary_json() == identity_certificate.primary_json()
    doc = json.loads(text)
    assert set(doc) == {"certificate", "metadata"} and "timestamp" in doc["metadata"]


def test_tampered_certificate_fails_audit(identity_certificate):
    doc = json.loads(identity_certificate.to_json())
    doc["certificate"]["l_reported"] = str(identity_certificate.l_reported + pow2(-12))
    assert not LambdaCertificate.from_json(json.dumps(doc)).audit_ok()
    doc = json.loads(identity_certificate.to_json())
    doc["certificate"]["params"]["Delta"] = str(identity_certificate.params.delta_big.shift(3))
    assert not LambdaCertificate.from_json(json.dumps(doc)).audit_ok()


def test_eps_override_is_labelled(landau_schedule):
    s = encode_coefficients([], landau_schedule)
    c = lambda_lower_bound(s, landau_schedule, 1, polynomial_bounds([], "identity"), eps_override=Dyadic(1, -6))
    assert c.mode == "overridden" and c.eps == Dyadic(1, -6)
    names = [name for name, _ in c.audit()]
    assert "eps = rho Delta / 16" not in names
