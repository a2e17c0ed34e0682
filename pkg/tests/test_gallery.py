import pytest

from homsec import gallery
from homsec.algebroid import check_lie_algebroid, e_differential
from homsec.checks import CHECKS, run_checks
from homsec.expr import ONE, ZERO, Sym, evaluate
from homsec.momentum import PreconditionError, hms_check, hms_residuals, iota_rho_k
from homsec.poisson import multivector
from homsec.tensor import BundleShape, MixedField, Patch, ShapeError, form

from conftest import max_abs

x, y, z = Sym("x"), Sym("y"), Sym("z")

SPEC_NAMES = ["so2_symplectic", "so3_r3", "abelian_translation", "poisson_const", "twisted_poisson_demo", "r_poisson_demo", "multisymplectic_translation"]


def test_addressable_names():
    assert set(SPEC_NAMES) <= set(gallery.names())
    with pytest.raises(KeyError):
        gallery.get("no_such_instance")


@pytest.mark.parametrize("name", gallery.names())
def test_golden_verdicts(name):
    doc = gallery.load_entry(name)
    expected = gallery.get(name).expected
    assert set(expected) == set(doc.checks)
    assert all(c in CHECKS for c in doc.checks)
    report = run_checks(doc)
    got = {r["name"]: r["passed"] for r in report["checks"]}
    assert got == expected


@pytest.mark.parametrize("name", [n for n in gallery.names() if n != "so3_perturbed"])
def test_every_constructor_gives_a_lie_algebroid(name):
    assert check_lie_algebroid(gallery.load_entry(name).model).passed


# -- action algebroids -----------------------------------------------------------------------


def test_action_algebroid_examples():
    p2 = Patch(["x", "y"])
    so2 = gallery.make_action_algebroid(gallery.LieAlgebraData(1), [[-y, x]], p2)
    assert check_lie_algebroid(so2.model).passed
    ab = gallery.make_action_algebroid(gallery.LieAlgebraData(2), [[ONE, ZERO], [ZERO, ONE]], p2)
    assert check_lie_algebroid(ab.model).passed
    so3 = gallery.so3_action()
    assert check_lie_algebroid(so3.model).passed
    # rho_1 = z d_y - y d_z
    assert float(evaluate(so3.model.anchor(1, 0), {"z": 0.7})) == pytest.approx(0.7)


def test_action_algebroid_without_morphism_property_fails():
    # [rho_0, rho_1] = d_y but the algebra is abelian
    A = gallery.make_action_algebroid(gallery.LieAlgebraData(2), [[ONE, ZERO], [ZERO, x]], Patch(["x", "y"]))
    assert not check_lie_algebroid(A.model).passed


# -- Poisson-type instances ---------------------------------------------------------------------


def test_poisson_algebroids():
    for L in (gallery.poisson_const(), gallery.poisson_linear(), gallery.poisson_lie_r3()):
        assert check_lie_algebroid(L).passed
    assert all(v.is_zero for v in gallery.poisson_const().C.values())


def test_twisted_with_zero_H_is_poisson():
    sh = BundleShape(Patch(["x", "y", "z"]), 1)
    pi = multivector(sh, 2, {(1, 2): x, (2, 0): y, (0, 1): z})
    fr = gallery.make_twisted_poisson(pi, MixedField.zero(sh, (0, 3, 0, 0)))
    L = gallery.make_poisson_algebroid(pi)
    assert max_abs(sh.patch, fr.model.C - L.C) == 0.0
    assert max_abs(sh.patch, fr.model.rho - L.rho) == 0.0


def test_twisted_candidate_with_degenerate_pi():
    # pi = d_x ^ d_y, H = vol: [pi, pi] = 0 and <(x)^3 pi, H> = 0 since pi has rank 2
    sh = BundleShape(Patch(["x", "y", "z"]), 1)
    pi = multivector(sh, 2, {(0, 1): ONE})
    fr = gallery.make_twisted_poisson(pi, form(sh, 3, {(0, 1, 2): ONE}))
    assert check_lie_algebroid(fr.model).passed
    R0 = hms_residuals(fr.model, None, fr.plectic, fr.momentum)[-1]
    assert R0.k == 0 and max_abs(sh.patch, R0.residual) < 1e-12


def test_twisted_constructor_error_branches():
    shape = BundleShape(Patch(["a", "b", "c", "d"]), 1)
    a = Sym("a")
    f = ONE + a * a
    pi = multivector(shape, 2, {(0, 1): ONE, (2, 3): ONE / f})
    with pytest.raises(PreconditionError):
        gallery.make_twisted_poisson(pi, form(shape, 3, {(0, 2, 3): -2 * a}))
    with pytest.raises(PreconditionError):
        gallery.make_twisted_poisson(pi, form(shape, 3, {(0, 1, 2): Sym("d")}))  # not closed
    with pytest.raises(ShapeError):
        gallery.make_twisted_poisson(pi, form(shape, 2, {(0, 1): ONE}))


@pytest.mark.parametrize("make", [gallery.twisted_r4, gallery.r_poisson_r4, gallery.r_poisson_r3])
def test_accepted_fragments_satisfy_the_degree_zero_equation(make):
    fr = make()
    L, P, mu = fr.model, fr.plectic, fr.momentum
    res = e_differential(L, mu[0]) + iota_rho_k(L, P, P.n + 1)
    assert max_abs(L.patch, res) < 1e-9


def test_r_poisson_trivial_cases():
    sh = BundleShape(Patch(["x", "y"]), 1)
    pi = multivector(sh, 2, {(0, 1): ONE})
    fr = gallery.make_twisted_r_poisson(pi, MixedField.zero(sh, (1, 0, 0, 0)), MixedField.zero(sh, (0, 2, 0, 0)), 1)
    assert hms_check(fr.model, None, fr.plectic, fr.momentum).passed
    J = multivector(sh, 1, {(0,): 2.0})
    fr = gallery.make_twisted_r_poisson(pi, J, MixedField.zero(sh, (0, 2, 0, 0)), 1)
    assert max_abs(sh.patch, e_differential(fr.model, fr.momentum[0])) == 0.0


def test_r_poisson_rejects_inconsistent_data():
    sh = BundleShape(Patch(["x", "y", "z"]), 1)
    pi = multivector(sh, 2, {(1, 2): x, (2, 0): y, (0, 1): z})
    with pytest.raises(PreconditionError):
        # iota^3 H vanishes for any bivector on R^3 while [pi, x d_x ^ d_y] does not
        gallery.make_twisted_r_poisson(pi, multivector(sh, 2, {(0, 1): x}), form(sh, 3, {(0, 1, 2): ONE}), 2)
    with pytest.raises(ShapeError):
        gallery.make_twisted_r_poisson(pi, pi, form(sh, 2, {(0, 1): ONE}), 2)


# -- momentum instances ---------------------------------------------------------------------------


def test_abelian_translation_instance():
    inst = gallery.make_symplectic_momentum_example("abelian")
    ip = iota_rho_k(inst.model, inst.plectic, 1)
    # iota_{d_x}(dx ^ dy) = dy
    assert float(evaluate(ip.get((), (1,), (), (0,)), {})) == 1.0
    assert hms_check(inst.model, None, inst.plectic, inst.momentum).passed
    with pytest.raises(ValueError):
        gallery.make_symplectic_momentum_example("hyperbolic")


def test_multisymplectic_instance():
    inst = gallery.make_multisymplectic_momentum_example(2)
    assert hms_check(inst.model, None, inst.plectic, inst.momentum).passed
    with pytest.raises(ValueError):
        gallery.make_multisymplectic_momentum_example(3)
