"""Worked instances: Lie algebra actions, Poisson-type algebroids and momentum sections.

Each registered instance is a model document (see :mod:`homsec.document`)
with a check list and the verdict every check is expected to return.
Gallery runs load the document exactly like ``homsec check`` does, so an
exported instance reproduces the same report.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, product
from typing import Callable, Sequence

import numpy as np

from .algebroid import LieAlgebroidModel
from .document import ModelDocument, build_document, load_document
from .expr import ONE, ZERO, Sym, as_expr, const, func, mul, power, total
from .momentum import MomentumData, PreconditionError, PrePlecticForm
from .momentum_map import ActionAlgebroidModel, LieAlgebraData
from .poisson import SCHOUTEN_SIGN, cotangent_algebroid, multivector, schouten, sharp_pairing
from .residuals import DEFAULT_TOL, Sampler, residual_check
from .sigma import hms_to_gnlsm
from .tensor import BundleShape, MetricField, MixedField, Patch, ShapeError, de_rham, e_form, form

__all__ = [
    "make_action_algebroid",
    "make_poisson_algebroid",
    "make_twisted_poisson",
    "make_twisted_r_poisson",
    "anchor_pairing",
    "make_symplectic_momentum_example",
    "make_multisymplectic_momentum_example",
    "so3_algebra",
    "so3_action",
    "GalleryEntry",
    "GALLERY",
    "names",
    "get",
    "load_entry",
]


# ---------------------------------------------------------------------------
# constructors


def make_action_algebroid(g: LieAlgebraData, rho_exprs: Sequence[Sequence], patch: Patch, name: str | None = None) -> ActionAlgebroidModel:
    """Action algebroid patch x g with anchor ``rho_exprs[a][i]``."""
    return ActionAlgebroidModel(g, BundleShape(patch, g.r), [[as_expr(v) for v in row] for row in rho_exprs], name=name)


def _to_cotangent(f: MixedField, shape: BundleShape) -> MixedField:
    # a p-vector on M is a section of wedge^p E* for E = T*M
    p = f.sig[0]
    return MixedField(shape, (0, 0, 0, p), {((), (), (), I): v for (I, _, _, _), v in f.items()})


def make_poisson_algebroid(pi: MixedField, sampler: Sampler | None = None, tol: float = DEFAULT_TOL, name: str | None = None) -> LieAlgebroidModel:
    """T*M with anchor -pi^sharp and minus the Koszul bracket; requires [pi, pi] = 0."""
    sampler = sampler or Sampler(pi.shape.patch)
    c = residual_check("poisson", schouten(pi, pi), sampler, tol, terms=[pi])
    if not c.passed:
        raise PreconditionError("pi is not Poisson: [pi, pi] != 0", c.max_residual)
    return cotangent_algebroid(pi, name=name)


@dataclass
class Fragment:
    """A Poisson-type algebroid with the degree-zero momentum data it carries."""

    model: LieAlgebroidModel
    plectic: PrePlecticForm
    momentum: MomentumData


def _closed(H: MixedField, sampler: Sampler, tol: float):
    c = residual_check("closed", de_rham(H), sampler, tol, terms=[H])
    if not c.passed:
        raise PreconditionError("H is not closed", c.max_residual)


def make_twisted_poisson(pi: MixedField, H: MixedField, sampler: Sampler | None = None, tol: float = DEFAULT_TOL, name: str | None = None) -> Fragment:
    """Twisted Poisson pair: (1/2)[pi, pi] = <(x)^3 pi, H> and dH = 0.

    Returns the twisted cotangent algebroid with mu_0 = pi, mu_1 = 0 and
    omega = H (n = 2); the degree-zero equation is E_d pi + iota^3 H = 0.
    """
    if H.sig != (0, 3, 0, 0):
        raise ShapeError("H must be a 3-form")
    sampler = sampler or Sampler(pi.shape.patch)
    _closed(H, sampler, tol)
    lhs = schouten(pi, pi).scale(0.5 * SCHOUTEN_SIGN)
    rhs = sharp_pairing(pi, H)
    c = residual_check("twisted_poisson", lhs - rhs, sampler, tol, terms=[lhs, rhs])
    if not c.passed:
        raise PreconditionError("(pi, H) violates (1/2)[pi, pi] = <(x)^3 pi, H>", c.max_residual)
    L = cotangent_algebroid(pi, H, name=name)
    sh = L.shape
    mu = MomentumData(2, [_to_cotangent(pi, sh), MixedField.zero(sh, (0, 1, 0, 1))])
    return Fragment(L, PrePlecticForm(2, MixedField(sh, H.sig, dict(H.comps))), mu)


def anchor_pairing(pi: MixedField, H: MixedField) -> MixedField:
    """The (n+1)-vector with components (iota^{n+1} H)(dx^{i_1}, .., dx^{i_{n+1}}) for the anchor -pi^sharp.

    It differs from :func:`sharp_pairing` by (-1)^(n+1) (-1)^(n(n+1)/2).
    """
    k = H.sig[1]
    n = k - 1
    s = (n + 1) + n * (n + 1) // 2
    p = sharp_pairing(pi, H)
    return p if s % 2 == 0 else -p


def make_twisted_r_poisson(
    pi: MixedField, J: MixedField, H: MixedField, n: int, sampler: Sampler | None = None, tol: float = DEFAULT_TOL, name: str | None = None
) -> Fragment:
    """Poisson pi, an (n)-vector J and a closed (n+1)-form H with [pi, J] = -iota^{n+1} H.

    The bracket relation is evaluated with the Schouten bracket; the
    returned fragment carries mu_0 = J, mu_k = 0 for k > 0 and omega = H,
    so its degree-zero equation is E_d J + iota^{n+1} H = 0.
    """
    if J.sig != (n, 0, 0, 0) or H.sig != (0, n + 1, 0, 0):
        raise ShapeError(f"J must be a {n}-vector and H an {n + 1}-form")
    sampler = sampler or Sampler(pi.shape.patch)
    L = make_poisson_algebroid(pi, sampler, tol, name=name)
    _closed(H, sampler, tol)
    lhs = schouten(pi, J).scale(SCHOUTEN_SIGN)
    rhs = -anchor_pairing(pi, H)
    c = residual_check("r_poisson", lhs - rhs, sampler, tol, terms=[lhs, rhs])
    if not c.passed:
        raise PreconditionError("(pi, J, H) violates [pi, J] = -iota^{n+1} H", c.max_residual)
    sh = L.shape
    mus = [_to_cotangent(J, sh)] + [MixedField.zero(sh, (0, k, 0, n - k)) for k in range(1, n)]
    return Fragment(L, PrePlecticForm(n, MixedField(sh, H.sig, dict(H.comps))), MomentumData(n, mus))


# ---------------------------------------------------------------------------
# momentum examples


@dataclass
class MomentumInstance:
    model: LieAlgebroidModel
    plectic: PrePlecticForm
    momentum: MomentumData
    action: ActionAlgebroidModel | None = None


def make_symplectic_momentum_example(kind: str = "so2") -> MomentumInstance:
    """n = 1 instances on R^2 with omega = dx ^ dy.

    ``so2``: rotations rho = -y d_x + x d_y, mu_0 = (x^2 + y^2)/2.
    ``abelian``: rho = d_x, mu_0 = -y.
    ``zero``: rho = 0, mu_0 = 0.
    """
    x, y = Sym("x"), Sym("y")
    patch = Patch(["x", "y"], [(-1.0, 1.0), (-1.0, 1.0)])
    g = LieAlgebraData(1, name="so2" if kind == "so2" else kind)
    if kind == "so2":
        rho, m0 = [[-y, x]], (x * x + y * y) / 2
    elif kind == "abelian":
        rho, m0 = [[ONE, ZERO]], -y
    elif kind == "zero":
        rho, m0 = [[ZERO, ZERO]], ZERO
    else:
        raise ValueError(f"unknown symplectic example {kind!r}")
    A = make_action_algebroid(g, rho, patch, name=kind)
    sh = A.shape
    P = PrePlecticForm(1, form(sh, 2, {(0, 1): 1}))
    mu = MomentumData(1, [e_form(sh, 1, {(0,): m0})])
    return MomentumInstance(A.model, P, mu, A)


def make_multisymplectic_momentum_example(n: int = 2) -> MomentumInstance:
    """R^3 with omega = dx ^ dy ^ dz, rho = d_z, mu_1 = -x dy and mu_0 = 0."""
    if n != 2:
        raise ValueError("only the n = 2 translation instance is provided")
    x = Sym("x")
    patch = Patch(["x", "y", "z"], [(-1.0, 1.0)] * 3)
    A = make_action_algebroid(LieAlgebraData(1), [[ZERO, ZERO, ONE]], patch, name="translation")
    sh = A.shape
    P = PrePlecticForm(2, form(sh, 3, {(0, 1, 2): 1}))
    mu1 = MixedField.from_entries(sh, (0, 1, 0, 1), [(((), (1,), (), (0,)), -x)])
    mu = MomentumData(2, [MixedField.zero(sh, (0, 0, 0, 2)), mu1])
    return MomentumInstance(A.model, P, mu, A)


def so3_algebra() -> LieAlgebraData:
    f = {}
    for a, b, c in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        f[(a, b, c)] = 1.0
    return LieAlgebraData(3, f, name="so3")


def so3_action(perturb: float = 0.0) -> ActionAlgebroidModel:
    """so(3) on the box [0.5, 1.5]^3 with rho^i_a = eps_{aij} x^j (optionally rho_0 += perturb x^2)."""
    X = [Sym(c) for c in "xyz"]
    patch = Patch(["x", "y", "z"], [(0.5, 1.5)] * 3)
    rho = [[ZERO] * 3 for _ in range(3)]
    for a, i, j, s in ((0, 1, 2, 1), (0, 2, 1, -1), (1, 2, 0, 1), (1, 0, 2, -1), (2, 0, 1, 1), (2, 1, 0, -1)):
        rho[a][i] = X[j] if s > 0 else -X[j]
    if perturb:
        rho[0][0] = rho[0][0] + const(perturb) * X[0] * X[0]
    return make_action_algebroid(so3_algebra(), rho, patch, name="so3")


def _so3_instance(perturb: float = 0.0, corrupt: bool = False) -> MomentumInstance:
    A = so3_action(perturb)
    sh = A.shape
    X = [Sym(c) for c in "xyz"]
    r = func("sqrt", X[0] * X[0] + X[1] * X[1] + X[2] * X[2])
    r3 = power(r, 3)
    P = PrePlecticForm(1, form(sh, 2, {(1, 2): X[0] / r3, (2, 0): X[1] / r3, (0, 1): X[2] / r3}))
    comps = {(a,): X[a] / r for a in range(3)}
    if corrupt:
        comps[(0,)] = comps[(0,)] + X[0] * X[0]
    return MomentumInstance(A.model, P, MomentumData(1, [e_form(sh, 1, comps)]), A)


# ---------------------------------------------------------------------------
# Poisson-type instances


def _r4():
    return Patch(["a", "b", "c", "d"], [(-1.0, 1.0)] * 4), [Sym(s) for s in "abcd"]


def twisted_r4() -> Fragment:
    """R^4 with the non-closed 2-form da^db + (1 + a^2) dc^dd inverted to pi, twisted by H = d of it."""
    patch, (a, b, c, d) = _r4()
    sh = BundleShape(patch, 1)
    f = ONE + a * a
    pi = multivector(sh, 2, {(0, 1): ONE, (2, 3): ONE / f})
    H = form(sh, 3, {(0, 2, 3): 2 * a})
    return make_twisted_poisson(pi, H, name="twisted_r4")


def r_poisson_r4() -> Fragment:
    """Constant symplectic pi on R^4, a polynomial bivector J and the 3-form fixed by [pi, J] = -iota^3 H."""
    patch, (a, b, c, d) = _r4()
    sh = BundleShape(patch, 1)
    pi = multivector(sh, 2, {(0, 1): ONE, (2, 3): ONE})
    J = multivector(sh, 2, {(0, 1): c, (0, 2): a * d, (1, 3): b * b})
    # for constant nondegenerate pi, H = -(pi^{-1})^{(x)3} applied to SCHOUTEN_SIGN [pi, J]
    T = schouten(pi, J).scale(SCHOUTEN_SIGN)
    Pm = np.array([[0, 1, 0, 0], [-1, 0, 0, 0], [0, 0, 0, 1], [0, 0, -1, 0]], dtype=float)
    Q = np.linalg.inv(Pm)
    comps = {}
    for I in combinations(range(4), 3):
        terms = []
        for K in product(range(4), repeat=3):
            q = Q[I[0], K[0]] * Q[I[1], K[1]] * Q[I[2], K[2]]
            if q and len(set(K)) == 3:
                terms.append(mul(const(-q), T.get(K)))
        comps[I] = total(terms)
    # anchor_pairing = sharp_pairing at n = 2
    H = form(sh, 3, comps)
    return make_twisted_r_poisson(pi, J, H, 2, name="r_poisson_r4")


def r_poisson_r3() -> Fragment:
    """Linear Poisson structure of so(3)* with J = (x^2 + y^2 + z^2) pi and H = dx^dy^dz."""
    x, y, z = (Sym(s) for s in "xyz")
    patch = Patch(["x", "y", "z"], [(-1.0, 1.0)] * 3)
    sh = BundleShape(patch, 1)
    pi = multivector(sh, 2, {(1, 2): x, (2, 0): y, (0, 1): z})
    c = x * x + y * y + z * z
    J = pi.scale(c)
    H = form(sh, 3, {(0, 1, 2): ONE})
    return make_twisted_r_poisson(pi, J, H, 2, name="r_poisson_r3")


def poisson_const() -> LieAlgebroidModel:
    patch = Patch(["x", "y"], [(-1.0, 1.0)] * 2)
    return make_poisson_algebroid(multivector(BundleShape(patch, 1), 2, {(0, 1): ONE}), name="poisson_const")


def poisson_linear() -> LieAlgebroidModel:
    patch = Patch(["x", "y"], [(-1.0, 1.0)] * 2)
    return make_poisson_algebroid(multivector(BundleShape(patch, 1), 2, {(0, 1): Sym("x")}), name="poisson_linear")


def poisson_lie_r3() -> LieAlgebroidModel:
    x, y, z = (Sym(s) for s in "xyz")
    patch = Patch(["x", "y", "z"], [(-1.0, 1.0)] * 3)
    return make_poisson_algebroid(multivector(BundleShape(patch, 1), 2, {(1, 2): x, (2, 0): y, (0, 1): z}), name="poisson_lie_r3")


# ---------------------------------------------------------------------------
# sigma instances


def _euclid(sh: BundleShape) -> MetricField:
    d = sh.dim
    return MetricField(sh, [[ONE if i == j else ZERO for j in range(d)] for i in range(d)])


def sigma_r2_translations(corrupt: bool = False):
    """R^3 with rho_1 = d_z, rho_2 = d_x, omega = vol; returns (model, sigma data)."""
    x, y, z = (Sym(s) for s in "xyz")
    patch = Patch(["x", "y", "z"], [(-1.0, 1.0)] * 3)
    sh = BundleShape(patch, 2)
    L = LieAlgebroidModel.from_arrays(sh, [[ZERO, ZERO, ONE], [ONE, ZERO, ZERO]], {}, name="translations_r2")
    P = PrePlecticForm(2, form(sh, 3, {(0, 1, 2): ONE}))
    mu1 = MixedField.from_entries(sh, (0, 1, 0, 1), [(((), (1,), (), (0,)), -x), (((), (1,), (), (1,)), z / 2), (((), (2,), (), (1,)), -y / 2)])
    mu0 = e_form(sh, 2, {(0, 1): -y / 2})
    data = hms_to_gnlsm(MomentumData(2, [mu0, mu1]), P, _euclid(sh))
    if corrupt:
        data = data.replace(tmu=[data.tmu[0] + e_form(sh, 2, {(0, 1): ONE}), data.tmu[1]])
    return L, data


# ---------------------------------------------------------------------------
# registry

STRUCTURE = ["lie_algebroid", "q_squared", "de_rham_nilpotency", "e_nilpotency", "homology_nilpotency", "j_star", "derived_bracket"]
CONNECTION = ["lemma_covariant", "covariant_Q", "basic_curvature"]
MOMENTUM = ["plectic_closed", "hms", "homotopy_hamiltonian", "equivariance", "weak_hms"]
ACTION = ["ce_nilpotency", "hmm", "momentum_map_equations"]
SIGMA = ["sigma_closed", "isometry", "gnlsm", "contraction", "sigma_roundtrip"]


@dataclass
class GalleryEntry:
    name: str
    description: str
    build: Callable[[], dict]

    def document(self) -> dict:
        return self.build()

    @property
    def expected(self) -> dict[str, bool]:
        return dict(self.build().get("expected", {}))


def _all_pass(checks, **overrides) -> dict:
    out = {c: True for c in checks}
    out.update(overrides)
    return out


def _momentum_doc(name, desc, inst: MomentumInstance, checks, expected=None, sigma=None):
    exp = _all_pass(checks) if expected is None else expected
    return build_document(
        inst.model,
        name=name,
        description=desc,
        plectic=inst.plectic,
        momentum=inst.momentum,
        lie_algebra=inst.action.g if inst.action is not None else None,
        sigma=sigma,
        checks=checks,
        expected=exp,
    )


def _so2():
    inst = make_symplectic_momentum_example("so2")
    return _momentum_doc("so2_symplectic", "rotations of the plane with mu_0 = (x^2 + y^2)/2", inst, STRUCTURE + CONNECTION + MOMENTUM + ACTION)


def _so2_corrupt():
    inst = make_symplectic_momentum_example("so2")
    x = Sym("x")
    mu = inst.momentum.map(lambda k, m: m + e_form(m.shape, 1, {(0,): x * x}))
    inst = MomentumInstance(inst.model, inst.plectic, mu, inst.action)
    checks = ["lie_algebroid", "plectic_closed", "hms", "hmm", "momentum_map_equations", "equivariance"]
    exp = _all_pass(checks, hms=False, hmm=False, momentum_map_equations=False, equivariance=False)
    return _momentum_doc("so2_corrupted", "so2_symplectic with mu_0 shifted by x^2", inst, checks, exp)


def _so2_sigma():
    inst = make_symplectic_momentum_example("so2")
    data = hms_to_gnlsm(inst.momentum, inst.plectic, _euclid(inst.model.shape))
    checks = ["hms"] + SIGMA
    return _momentum_doc("so2_sigma", "so2_symplectic as n = 1 sigma-model target data", inst, checks, sigma=data)


def _abelian():
    inst = make_symplectic_momentum_example("abelian")
    return _momentum_doc("abelian_translation", "translation d_x of the plane with mu_0 = -y", inst, STRUCTURE + MOMENTUM + ACTION)


def _zero():
    inst = make_symplectic_momentum_example("zero")
    return _momentum_doc("zero_action", "zero anchor and zero momentum", inst, STRUCTURE + MOMENTUM + ACTION)


def _so3():
    inst = _so3_instance()
    return _momentum_doc(
        "so3_r3", "rotations of R^3 with the area form of spheres and mu_a = x_a / r", inst, STRUCTURE + CONNECTION + MOMENTUM + ACTION
    )


def _so3_perturbed():
    inst = _so3_instance(perturb=0.1)
    checks = ["lie_algebroid", "q_squared", "e_nilpotency", "homology_nilpotency", "j_star", "derived_bracket", "lemma_covariant", "covariant_Q"]
    exp = _all_pass(checks, lie_algebroid=False, q_squared=False, e_nilpotency=False, homology_nilpotency=False)
    doc = build_document(inst.model, name="so3_perturbed", description="so(3) anchor with rho_0 shifted by 0.1 x^2", checks=checks, expected=exp)
    return doc


def _multisym():
    inst = make_multisymplectic_momentum_example(2)
    return _momentum_doc(
        "multisymplectic_translation", "R^3 with the volume form, rho = d_z, mu_1 = -x dy", inst, STRUCTURE + CONNECTION + MOMENTUM + ["hmm"]
    )


def _multisym_sigma():
    inst = make_multisymplectic_momentum_example(2)
    data = hms_to_gnlsm(inst.momentum, inst.plectic, _euclid(inst.model.shape))
    return _momentum_doc("multisymplectic_sigma", "multisymplectic_translation as n = 2 sigma-model target data", inst, ["hms"] + SIGMA, sigma=data)


def _sigma_r2(corrupt: bool):
    L, data = sigma_r2_translations(corrupt)
    checks = ["lie_algebroid"] + SIGMA
    exp = _all_pass(checks, contraction=not corrupt)
    name = "sigma_translations_corrupted" if corrupt else "sigma_translations"
    desc = "two translations of R^3 with n = 2 target data" + (", tmu_0 shifted by 1" if corrupt else "")
    return build_document(L, name=name, description=desc, sigma=data, checks=checks, expected=exp)


def _poisson_doc(name, desc, L):
    return build_document(L, name=name, description=desc, checks=STRUCTURE + CONNECTION, expected=_all_pass(STRUCTURE + CONNECTION))


def _fragment_doc(name, desc, fr: Fragment):
    checks = STRUCTURE + ["plectic_closed", "hms_fragment"]
    return build_document(fr.model, name=name, description=desc, plectic=fr.plectic, momentum=fr.momentum, checks=checks, expected=_all_pass(checks))


GALLERY: dict[str, GalleryEntry] = {}


def _register(name, desc, build):
    GALLERY[name] = GalleryEntry(name, desc, build)


_register("so2_symplectic", "rotations of the plane, symplectic, n = 1", _so2)
_register("so2_corrupted", "so2_symplectic with mu_0 + x^2 (negative control)", _so2_corrupt)
_register("so3_r3", "rotations of R^3 with the sphere area form", _so3)
_register("so3_perturbed", "so(3) with a perturbed anchor (negative control)", _so3_perturbed)
_register("abelian_translation", "translation of the plane, symplectic", _abelian)
_register("zero_action", "zero action on the plane", _zero)
_register("poisson_const", "cotangent algebroid of d_x ^ d_y on R^2", lambda: _poisson_doc("poisson_const", "constant Poisson bivector on R^2", poisson_const()))
_register("poisson_linear", "cotangent algebroid of x d_x ^ d_y", lambda: _poisson_doc("poisson_linear", "pi = x d_x ^ d_y on R^2", poisson_linear()))
_register("poisson_lie_r3", "cotangent algebroid of the so(3)* Poisson structure", lambda: _poisson_doc("poisson_lie_r3", "linear Poisson structure on R^3", poisson_lie_r3()))
_register("twisted_poisson_demo", "twisted Poisson structure on R^4", lambda: _fragment_doc("twisted_poisson_demo", "twisted Poisson pair on R^4 with mu_0 = pi", twisted_r4()))
_register("r_poisson_demo", "twisted R-Poisson triple on R^4", lambda: _fragment_doc("r_poisson_demo", "twisted R-Poisson triple on R^4 with mu_0 = J", r_poisson_r4()))
_register("r_poisson_r3", "twisted R-Poisson triple on R^3", lambda: _fragment_doc("r_poisson_r3", "so(3)* Poisson with J = r^2 pi and H = vol", r_poisson_r3()))
_register("multisymplectic_translation", "translation of R^3, 2-plectic", _multisym)
_register("so2_sigma", "n = 1 sigma target data from so2_symplectic", _so2_sigma)
_register("multisymplectic_sigma", "n = 2 sigma target data from the translation instance", _multisym_sigma)
_register("sigma_translations", "n = 2 sigma target data with two translations", lambda: _sigma_r2(False))
_register("sigma_translations_corrupted", "sigma_translations with tmu_0 + 1", lambda: _sigma_r2(True))

SIGMA_INSTANCES = ["so2_sigma", "multisymplectic_sigma", "sigma_translations", "sigma_translations_corrupted"]


def names() -> list[str]:
    return list(GALLERY)


def get(name: str) -> GalleryEntry:
    if name not in GALLERY:
        raise KeyError(f"unknown gallery instance {name!r}; available: {', '.join(GALLERY)}")
    return GALLERY[name]


def load_entry(name: str) -> ModelDocument:
    return load_document(get(name).document())
