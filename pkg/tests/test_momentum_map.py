import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from homsec import gallery
from homsec.algebroid import e_differential, homology_boundary
from homsec.expr import ONE, Sym, evaluate
from homsec.momentum import MomentumData, PrePlecticForm, PreconditionError, equivariance_check, hms_check, iota_rho_k
from homsec.momentum_map import (
    ActionAlgebroidModel,
    LieAlgebraData,
    ad_star_rho,
    d_CE,
    hmm_check,
    hmm_residuals,
    hms_to_hmm,
    lie_algebra_homology,
    momentum_map_equations,
    whmm_residual,
)
from homsec.randomfields import random_field
from homsec.signs import increasing
from homsec.tensor import BundleShape, MixedField, Patch, ShapeError, e_form, e_section, form

from conftest import max_abs

x, y, z = Sym("x"), Sym("y"), Sym("z")


def _so3g():
    return gallery.so3_algebra()


def _so2():
    return gallery.make_symplectic_momentum_example("so2")


# -- Lie algebra data ----------------------------------------------------------------------------


def test_structure_constants():
    g = _so3g()
    assert g.is_lie() and g.jacobi_residual() < 1e-12
    assert g.const(2, 0, 1) == 1.0 and g.const(2, 1, 0) == -1.0
    bad = LieAlgebraData(3, {**g.nonzero(), (0, 1, 1): 0.5})
    assert not bad.is_lie()


# -- Chevalley-Eilenberg differential ----------------------------------------------------------------


def test_d_CE_examples():
    sh = BundleShape(Patch(["x"]), 3)
    g = _so3g()
    d = d_CE(g, e_form(sh, 1, {(2,): 1}))
    assert float(evaluate(d.get((), (), (), (0, 1)), {})) == -1.0
    assert all(d.get((), (), (), I).is_zero for I in [(0, 2), (1, 2)])
    ab = LieAlgebraData(3)
    assert max_abs(sh.patch, d_CE(ab, random_field(sh, (0, 0, 0, 1), np.random.default_rng(0)))) == 0.0


@pytest.mark.parametrize("m", [0, 1, 2])
def test_d_CE_squares_to_zero(m):
    sh = BundleShape(Patch(["x", "y"]), 3)
    a = random_field(sh, (0, 1, 0, m), np.random.default_rng(m))
    assert max_abs(sh.patch, d_CE(_so3g(), d_CE(_so3g(), a))) < 1e-12


def test_d_CE_squared_fails_for_non_jacobi_constants():
    sh = BundleShape(Patch(["x"]), 3)
    bad = LieAlgebraData(3, {**_so3g().nonzero(), (0, 1, 1): 0.5})
    worst = max(max_abs(sh.patch, d_CE(bad, d_CE(bad, e_form(sh, 1, {(a,): 1})))) for a in range(3))
    assert worst > 0.1


# -- the E_d split ------------------------------------------------------------------------------


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2), st.integers(0, 1), st.integers(0, 10_000))
def test_e_differential_splits_on_action_models(m, k, seed):
    A = gallery.so3_action()
    a = random_field(A.model.shape, (0, k, 0, m), np.random.default_rng(seed))
    lhs = e_differential(A.model, a)
    assert max_abs(A.patch, lhs - ad_star_rho(A, a) - d_CE(A.g, a)) < 1e-12


def test_ad_star_examples():
    A = gallery.so3_action()
    assert max_abs(A.patch, ad_star_rho(A, e_form(A.model.shape, 1, {(0,): 2}))) == 0.0
    sh = BundleShape(Patch(["x", "y"]), 2)
    Z = ActionAlgebroidModel(LieAlgebraData(2), sh, [[0, 0], [0, 0]])
    assert max_abs(sh.patch, ad_star_rho(Z, random_field(sh, (0, 0, 0, 1), np.random.default_rng(1)))) == 0.0


# -- homotopy momentum maps -----------------------------------------------------------------------


def test_sign_table():
    sh = BundleShape(Patch(["x", "y", "z"]), 1)
    m1 = MixedField.from_entries(sh, (0, 1, 0, 1), [(((), (0,), (), (0,)), x)])
    m0 = MixedField.zero(sh, (0, 0, 0, 2))
    mu = MomentumData(2, [m0, m1])
    hmu = hms_to_hmm(mu)
    assert max_abs(sh.patch, hmu[1] - m1) == 0.0
    one = MomentumData(1, [MixedField(sh, (0, 0, 0, 1), {((), (), (), (0,)): y})])
    assert max_abs(sh.patch, hms_to_hmm(one)[0] - one[0]) == 0.0
    with pytest.raises(ShapeError):
        hms_to_hmm(mu, 3)


def test_sign_table_flips_lowest_degree_for_n_two():
    sh = BundleShape(Patch(["x", "y", "z"]), 2)
    rng = np.random.default_rng(4)
    mu = MomentumData(2, [random_field(sh, (0, 0, 0, 2), rng), random_field(sh, (0, 1, 0, 1), rng)])
    hmu = hms_to_hmm(mu)
    assert max_abs(sh.patch, hmu[0] + mu[0]) == 0.0
    assert max_abs(sh.patch, hmu[1] - mu[1]) == 0.0


@given(st.integers(1, 3), st.integers(0, 10_000))
@settings(max_examples=10, deadline=None)
def test_sign_table_is_an_involution(n, seed):
    sh = BundleShape(Patch(["x", "y", "z", "w"]), 3)
    rng = np.random.default_rng(seed)
    mu = MomentumData(n, [random_field(sh, (0, k, 0, n - k), rng) for k in range(n)])
    back = hms_to_hmm(hms_to_hmm(mu))
    for k in range(n):
        assert max_abs(sh.patch, back[k] - mu[k]) == 0.0


def test_rotation_momentum_map():
    inst = _so2()
    c = hmm_check(inst.action, inst.plectic, hms_to_hmm(inst.momentum))
    assert c.passed and c.max_residual < 1e-12
    z0 = gallery.make_symplectic_momentum_example("zero")
    assert hmm_check(z0.action, z0.plectic, MomentumData.zero(z0.model.shape, 1)).passed


def test_flipped_momentum_map_fails_by_twice_iota():
    inst = _so2()
    flipped = inst.momentum.map(lambda k, m: -m)
    res = {k: r for k, r, _ in hmm_residuals(inst.action, inst.plectic, flipped)}
    ip = iota_rho_k(inst.model, inst.plectic, 1)
    # R_1 = d(-mu_0) + iota_rho omega = 2 iota_rho omega
    assert max_abs(inst.model.patch, res[1] - ip.scale(2)) < 1e-14
    assert max_abs(inst.model.patch, res[1]) == pytest.approx(2 * max_abs(inst.model.patch, ip))
    assert not hmm_check(inst.action, inst.plectic, flipped).passed


@pytest.mark.parametrize("inst", [gallery.make_symplectic_momentum_example("so2"), gallery._so3_instance(), gallery.make_multisymplectic_momentum_example(2)], ids=["so2", "so3", "translation"])
def test_equivariant_sections_give_momentum_maps(inst):
    assert hms_check(inst.model, None, inst.plectic, inst.momentum).passed
    assert equivariance_check(inst.model, None, inst.momentum.mu).passed
    assert hmm_check(inst.action, inst.plectic, hms_to_hmm(inst.momentum)).passed


@pytest.mark.parametrize("corrupt", [False, True])
def test_three_formulations_agree_for_n_equal_one(corrupt):
    for inst in (_so2(), gallery._so3_instance(corrupt=corrupt)):
        mu = inst.momentum
        if corrupt and inst.model.rank == 1:
            mu = mu.map(lambda k, m: m + MixedField(m.shape, m.sig, {((), (), (), (0,)): x * x}))
        a = hms_check(inst.model, None, inst.plectic, mu).passed
        b = hmm_check(inst.action, inst.plectic, hms_to_hmm(mu)).passed
        c = momentum_map_equations(inst.action, inst.plectic, mu[0]).passed
        assert a == b == c == (not corrupt)


# -- Lie algebra homology and weak momentum maps -----------------------------------------------------


@pytest.mark.parametrize("m", [1, 2, 3])
def test_lie_algebra_homology_matches_algebroid_operator(m):
    A = gallery.so3_action()
    rng = np.random.default_rng(m)
    w = e_section(A.model.shape, m, {J: float(rng.uniform(-1, 1)) for J in increasing(3, m)})
    ref = homology_boundary(gallery.make_action_algebroid(_so3g(), [[0] * 3] * 3, A.patch).model, w)
    assert max_abs(A.patch, lie_algebra_homology(A.g, w) - ref) == 0.0


def test_lie_algebra_homology_examples():
    sh = BundleShape(Patch(["x"]), 3)
    d = lie_algebra_homology(_so3g(), e_section(sh, 2, {(0, 1): 1}))
    assert [float(evaluate(d.get((), (), (c,), ()), {})) for c in range(3)] == [0.0, 0.0, 1.0]
    assert max_abs(sh.patch, lie_algebra_homology(LieAlgebraData(3), e_section(sh, 2, {(0, 2): 1}))) == 0.0
    w = e_section(sh, 3, {(0, 1, 2): 1})
    assert max_abs(sh.patch, lie_algebra_homology(_so3g(), lie_algebra_homology(_so3g(), w))) == 0.0
    with pytest.raises(PreconditionError):
        lie_algebra_homology(_so3g(), e_section(sh, 2, {(0, 1): Sym("x")}))


def test_weak_momentum_map_examples():
    inst = gallery._so3_instance()
    hmu = hms_to_hmm(inst.momentum)
    for a in range(3):
        res, _ = whmm_residual(inst.action, inst.plectic, hmu, e_section(inst.model.shape, 1, {(a,): ONE}), 1)
        assert max_abs(inst.model.patch, res) < 1e-9
    zero = gallery.make_symplectic_momentum_example("zero")
    res, _ = whmm_residual(zero.action, zero.plectic, MomentumData.zero(zero.model.shape, 1), e_section(zero.model.shape, 1, {(0,): ONE}), 1)
    assert max_abs(zero.model.patch, res) == 0.0
    P2 = PrePlecticForm(2, form(inst.model.shape, 3, {(0, 1, 2): 1}))
    with pytest.raises(PreconditionError):
        whmm_residual(inst.action, P2, MomentumData.zero(inst.model.shape, 2), e_section(inst.model.shape, 2, {(0, 1): ONE}), 1)
