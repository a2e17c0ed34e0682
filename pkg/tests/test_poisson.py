import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from homsec import gallery
from homsec.algebroid import check_lie_algebroid
from homsec.expr import ONE, Sym, evaluate
from homsec.momentum import PreconditionError
from homsec.poisson import cotangent_algebroid, multivector, schouten, sharp_pairing
from homsec.randomfields import random_field, random_poly
from homsec.tensor import BundleShape, MixedField, Patch, ShapeError, form, vector

from conftest import max_abs

x, y, z = Sym("x"), Sym("y"), Sym("z")


@pytest.fixture
def sh3(space):
    return BundleShape(space, 1)


def _lie_bracket(X, Y, sh):
    # [X, Y]^i = X^j d_j Y^i - Y^j d_j X^i
    d = sh.dim
    comps = []
    for i in range(d):
        acc = 0
        for j in range(d):
            acc = acc + X.get((j,)) * Y.partial(j).get((i,)) - Y.get((j,)) * X.partial(j).get((i,))
        comps.append(acc)
    return vector(sh, comps)


def test_schouten_restricts_to_lie_bracket(sh3):
    rng = np.random.default_rng(0)
    X = random_field(sh3, (1, 0, 0, 0), rng)
    Y = random_field(sh3, (1, 0, 0, 0), rng)
    assert max_abs(sh3.patch, schouten(X, Y) - _lie_bracket(X, Y, sh3)) < 1e-12


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10_000))
def test_schouten_graded_antisymmetry(seed):
    sh = BundleShape(Patch(["x", "y", "z"]), 1)
    rng = np.random.default_rng(seed)
    P = random_field(sh, (2, 0, 0, 0), rng)
    Q = random_field(sh, (1, 0, 0, 0), rng)
    # [P, Q] = -(-1)^((p-1)(q-1)) [Q, P]
    assert max_abs(sh.patch, schouten(P, Q) + schouten(Q, P)) < 1e-12
    R = random_field(sh, (2, 0, 0, 0), rng)
    assert max_abs(sh.patch, schouten(P, R) - schouten(R, P)) < 1e-12


def test_schouten_on_functions_is_hamiltonian_vector(sh3):
    # [X, f] = X(f)
    X = vector(sh3, [y, ONE, x * z])
    f = random_poly(sh3.coords, np.random.default_rng(1))
    F = MixedField(sh3, (0, 0, 0, 0), {((), (), (), ()): f})
    got = schouten(X, F).get()
    ref = sum((X.get((i,)) * F.partial(i).get() for i in range(3)), start=0 * x)
    assert max_abs(sh3.patch, [got - ref]) < 1e-12


@pytest.mark.parametrize("comps", [{(0, 1): ONE}, {(1, 2): x, (2, 0): y, (0, 1): z}, {(0, 1): x * x + y}])
def test_poisson_bivectors_have_vanishing_bracket(sh3, comps):
    pi = multivector(sh3, 2, comps)
    assert max_abs(sh3.patch, schouten(pi, pi)) < 1e-12


def test_non_poisson_bivector_is_rejected(sh3):
    pi = multivector(sh3, 2, {(0, 1): x * x + 1, (1, 2): y})
    assert max_abs(sh3.patch, schouten(pi, pi)) > 0.1
    with pytest.raises(PreconditionError):
        gallery.make_poisson_algebroid(pi)
    assert not check_lie_algebroid(cotangent_algebroid(pi)).passed


def test_koszul_structure_functions():
    sh = BundleShape(Patch(["x", "y"]), 1)
    L = gallery.make_poisson_algebroid(multivector(sh, 2, {(0, 1): x}))
    # rho^i_a = pi^{ia}; C^k_{ab} = -d_k pi^{ab}
    assert float(evaluate(L.anchor(1, 0), {"x": 0.5, "y": 0.0})) == -0.5  # pi^{10} = -x
    assert float(evaluate(L.struct(0, 0, 1), {})) == -1.0
    assert L.struct(1, 0, 1).is_zero
    assert check_lie_algebroid(L).passed
    C0 = gallery.poisson_const()
    assert all(v.is_zero for v in C0.C.values())


def test_sharp_pairing_components(sh3):
    pi = multivector(sh3, 2, {(0, 1): ONE})
    H = form(sh3, 2, {(0, 1): z})
    p = sharp_pairing(pi, H)
    # pi^{0 a} pi^{1 b} H_{ab} = pi^{01} pi^{10} H_{10} = z
    assert float(evaluate(p.get((0, 1)), {"z": 2.0})) == pytest.approx(2.0)
    with pytest.raises(ShapeError):
        sharp_pairing(H, H)


def test_schouten_normalisation_against_component_formula(sh3):
    # [pi, pi]^{ijk} = 2 sum_cyclic pi^{il} d_l pi^{jk}
    pi = multivector(sh3, 2, {(0, 1): x * x + 1, (1, 2): y, (0, 2): z * x})
    S = schouten(pi, pi)
    ref = 0 * x
    for i, j, k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        for l in range(3):
            ref = ref + pi.get((i, l)) * pi.partial(l).get((j, k))
    ref = ref * 2
    pt = {"x": 0.3, "y": -0.2, "z": 0.9}
    got = float(evaluate(S.get((0, 1, 2)), pt))
    assert got == pytest.approx(float(evaluate(ref, pt)), rel=1e-12)
