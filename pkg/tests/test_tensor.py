from itertools import permutations
from math import factorial

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from homsec.expr import ONE, Sym, evaluate
from homsec.randomfields import random_field
from homsec.signs import perm_sign
from homsec.tensor import (
    BundleShape,
    MetricField,
    MixedField,
    Patch,
    ShapeError,
    contract_TM,
    de_rham,
    e_form,
    e_section,
    form,
    lie_derivative,
    pair_E,
    vector,
    wedge,
)

from conftest import max_abs


@pytest.fixture
def sh2(plane):
    return BundleShape(plane, 2)


@pytest.fixture
def sh3(space):
    return BundleShape(space, 2)


def _dense(f, point):
    """Full antisymmetric array of a pure form at one point (independent of storage)."""
    d, k = f.shape.dim, f.sig[1]
    env = {c: float(v) for c, v in zip(f.shape.coords, point)}
    out = np.zeros((d,) * k)
    for idx in np.ndindex(*out.shape) if k else [()]:
        s = perm_sign(idx) if k else 1
        if s:
            out[idx] = s * float(evaluate(f.comps[((), tuple(sorted(idx)), (), ())], env))
    return out


def _wedge_oracle(A, B):
    p, q = A.ndim, B.ndim
    n = A.shape[0] if p else B.shape[0]
    out = np.zeros((n,) * (p + q))
    for idx in np.ndindex(*out.shape):
        acc = 0.0
        for perm in permutations(range(p + q)):
            j = tuple(idx[i] for i in perm)
            acc += perm_sign(perm) * A[j[:p]] * B[j[p:]]
        out[idx] = acc / (factorial(p) * factorial(q))
    return out


# -- storage -------------------------------------------------------------------


def test_patch_validation():
    with pytest.raises(ShapeError):
        Patch(["x", "x"])
    with pytest.raises(ShapeError):
        Patch(["x"], [(1.0, 0.0)])
    with pytest.raises(ShapeError):
        BundleShape(Patch(["x"]), 0)


def test_permuted_reads_carry_the_sign(sh2):
    f = MixedField.from_entries(sh2, (0, 2, 2, 0), [(((), (1, 0), (0, 1), ()), Sym("x"))])
    pt = {"x": 3.0, "y": 0.0}
    assert float(evaluate(f.get((), (0, 1), (0, 1), ()), pt)) == -3.0
    assert float(evaluate(f.get((), (1, 0), (1, 0), ()), pt)) == -3.0
    assert f.get((), (0, 0), (0, 1), ()).is_zero


def test_duplicate_entries_are_summed(sh2):
    f = form(sh2, 2, {(0, 1): 2, (1, 0): 1})
    assert float(evaluate(f.get((), (0, 1)), {})) == 1.0


def test_oversized_blocks_are_empty(plane):
    f = MixedField.zero(BundleShape(plane, 1), (0, 3, 0, 2))
    assert f.keys() == []


@given(st.permutations([0, 1, 2]), st.floats(-3, 3))
def test_storage_roundtrip(perm, v):
    sh = BundleShape(Patch(["x", "y", "z"]), 1)
    f = form(sh, 3, {tuple(perm): v})
    assert float(evaluate(f.get((), (0, 1, 2)), {})) == pytest.approx(perm_sign(perm) * v)


# -- wedge -----------------------------------------------------------------------


def test_wedge_examples(sh2, plane):
    dx, dy = form(sh2, 1, {(0,): 1}), form(sh2, 1, {(1,): 1})
    w = wedge(dx, dy)
    assert float(evaluate(w.get((), (0, 1)), {})) == 1.0
    assert max_abs(plane, wedge(dx, dx)) == 0.0
    xdy = form(sh2, 1, {(1,): Sym("x")})
    assert float(evaluate(wedge(dx, xdy).get((), (0, 1)), {"x": 3.0})) == 3.0


def test_wedge_matches_permutation_sum(sh3):
    rng = np.random.default_rng(3)
    pt = (0.3, -0.2, 0.7)
    a = random_field(sh3, (0, 1, 0, 0), rng)
    b = random_field(sh3, (0, 2, 0, 0), rng)
    np.testing.assert_allclose(_dense(wedge(a, b), pt), _wedge_oracle(_dense(a, pt), _dense(b, pt)), atol=1e-13)


def test_e_block_has_no_cross_sign(sh2):
    # (dx) ^ (e^1) and (e^1) ^ (dx) agree: E indices carry no form grading
    dx = form(sh2, 1, {(0,): 1})
    e1 = e_form(sh2, 1, {(0,): 1})
    a, b = wedge(dx, e1), wedge(e1, dx)
    assert float(evaluate(a.get((), (0,), (), (0,)), {})) == float(evaluate(b.get((), (0,), (), (0,)), {})) == 1.0


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2), st.integers(0, 2), st.integers(0, 10_000))
def test_graded_commutativity(p, q, seed):
    sh = BundleShape(Patch(["x", "y", "z", "w"]), 1)
    rng = np.random.default_rng(seed)
    a = random_field(sh, (0, p, 0, 0), rng)
    b = random_field(sh, (0, q, 0, 0), rng)
    lhs = wedge(a, b)
    rhs = wedge(b, a).scale((-1) ** (p * q))
    assert max_abs(sh.patch, lhs - rhs) < 1e-12


# -- interior product -----------------------------------------------------------------


def test_contraction_examples(sh2, plane):
    vol = form(sh2, 2, {(0, 1): 1})
    i = contract_TM(vector(sh2, [1, 0]), vol)
    assert float(evaluate(i.get((), (1,)), {})) == 1.0 and float(evaluate(i.get((), (0,)), {})) == 0.0
    j = contract_TM(vector(sh2, [0, Sym("x")]), vol)
    assert float(evaluate(j.get((), (0,)), {"x": 2.0})) == -2.0
    v = vector(sh2, [Sym("y"), 1])
    assert max_abs(plane, contract_TM(v, contract_TM(v, vol))) == 0.0
    with pytest.raises(ShapeError):
        contract_TM(v, MixedField.zero(sh2, (0, 0, 0, 0)))


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 2), st.integers(0, 1), st.integers(0, 10_000))
def test_contraction_is_an_antiderivation(p, q, seed):
    sh = BundleShape(Patch(["x", "y", "z"]), 1)
    rng = np.random.default_rng(seed)
    a = random_field(sh, (0, p, 0, 0), rng)
    b = random_field(sh, (0, q, 0, 0), rng)
    X = random_field(sh, (1, 0, 0, 0), rng)
    lhs = contract_TM(X, wedge(a, b))
    term_b = wedge(a, contract_TM(X, b)).scale((-1) ** p) if q else MixedField.zero(sh, lhs.sig)
    rhs = wedge(contract_TM(X, a), b) + term_b
    assert max_abs(sh.patch, lhs - rhs) < 1e-12


# -- pairing -------------------------------------------------------------------------


def test_pairing_examples(sh2, plane):
    e12 = e_form(sh2, 2, {(0, 1): 1})
    w12 = e_section(sh2, 2, {(0, 1): 1})
    assert float(evaluate(pair_E(e12, w12).get(), {})) == 1.0
    assert max_abs(plane, pair_E(e12, MixedField.zero(sh2, (0, 0, 2, 0)))) == 0.0
    assert max_abs(plane, pair_E(e_form(sh2, 1, {(0,): 1}), e_section(sh2, 1, {(1,): 1}))) == 0.0
    with pytest.raises(ShapeError):
        pair_E(e12, e_section(sh2, 1, {(0,): 1}))


def test_pairing_normalisation_against_full_sum(sh3):
    # (1/m!) sum over all index orders equals the increasing-index sum
    rng = np.random.default_rng(11)
    sh = BundleShape(sh3.patch, 3)
    a = random_field(sh, (0, 0, 0, 2), rng)
    w = random_field(sh, (0, 0, 2, 0), rng)
    pt = {"x": 0.1, "y": 0.2, "z": -0.4}
    full = 0.0
    for i in range(3):
        for j in range(3):
            full += float(evaluate(a.get((), (), (), (i, j)), pt)) * float(evaluate(w.get((), (), (i, j), ()), pt))
    assert float(evaluate(pair_E(a, w).get(), pt)) == pytest.approx(full / 2, abs=1e-14)


# -- Lie derivative and d ----------------------------------------------------------------


def test_lie_derivative_example(sh2):
    L = lie_derivative(vector(sh2, [1, 0]), form(sh2, 1, {(0,): Sym("x")}))
    assert float(evaluate(L.get((), (0,)), {"x": 0.3})) == 1.0


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2), st.integers(0, 10_000))
def test_cartan_formula_and_commutation(k, seed):
    sh = BundleShape(Patch(["x", "y", "z"]), 1)
    rng = np.random.default_rng(seed)
    a = random_field(sh, (0, k, 0, 0), rng)
    X = random_field(sh, (1, 0, 0, 0), rng)
    L = lie_derivative(X, a)
    cartan = contract_TM(X, de_rham(a)) + (de_rham(contract_TM(X, a)) if k else MixedField.zero(sh, L.sig))
    assert max_abs(sh.patch, L - cartan, n=16) < 1e-9
    assert max_abs(sh.patch, lie_derivative(X, de_rham(a)) - de_rham(L), n=16) < 1e-9


def test_de_rham_examples(sh2, plane):
    x = Sym("x")
    d1 = de_rham(form(sh2, 1, {(1,): x}))
    assert float(evaluate(d1.get((), (0, 1)), {"x": 0.0, "y": 0.0})) == 1.0
    d0 = de_rham(MixedField(sh2, (0, 0, 0, 0), {((), (), (), ()): x * x}))
    assert float(evaluate(d0.get((), (0,)), {"x": 1.5, "y": 0.0})) == 3.0
    assert max_abs(plane, d0.map(lambda e: e) - form(sh2, 1, {(0,): 2 * x})) == 0.0


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2), st.integers(0, 1), st.integers(0, 10_000))
def test_d_squared_vanishes(k, m, seed):
    sh = BundleShape(Patch(["x", "y", "z", "w"]), 2)
    rng = np.random.default_rng(seed)
    a = random_field(sh, (0, k, 0, m), rng, degree=3)
    assert max_abs(sh.patch, de_rham(de_rham(a)), n=16) < 1e-9


def test_de_rham_agrees_with_alternating_formula(sh3):
    rng = np.random.default_rng(5)
    a = random_field(BundleShape(sh3.patch, 1), (0, 1, 0, 0), rng)
    da = de_rham(a)
    # (da)_{ij} = d_i a_j - d_j a_i
    for i, j in [(0, 1), (0, 2), (1, 2)]:
        ref = a.partial(i).get((), (j,)) - a.partial(j).get((), (i,))
        assert max_abs(sh3.patch, [da.get((), (i, j)) - ref]) < 1e-14


# -- metric -----------------------------------------------------------------------


def test_metric_symmetry_and_definiteness(plane):
    sh = BundleShape(plane, 1)
    pts = plane.sample_points()
    g = MetricField(sh, [[ONE, Sym("x")], [Sym("x"), 2]])
    assert g.symmetry_residual(pts) == 0.0
    assert g.is_positive_definite(pts)
    bad = MetricField(sh, [[ONE, Sym("y")], [0, -1]])
    assert bad.symmetry_residual(pts) > 0
    assert not bad.is_positive_definite(pts)
