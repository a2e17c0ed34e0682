"""Graded functions on E[1], the homological vector field Q and derived brackets.

Functions on E[1] are Grassmann polynomials in odd generators q^a with
coefficients depending on x.  A section alpha of wedge^m E* corresponds to
sum over increasing A of alpha_A q^A.  Odd derivatives act from the left.
"""
from __future__ import annotations

from typing import Mapping, Sequence

import numpy as np

from .algebroid import LieAlgebroidModel, e_differential
from .connection import ConnectionData, _conn, e_torsion
from .expr import ONE, ZERO, Expr, Sym, add, as_expr, diff, mul, neg, total
from .residuals import DEFAULT_TOL, CheckResult, Sampler, residual_check
from .signs import increasing, sort_with_sign
from .tensor import BundleShape, MixedField, ShapeError

__all__ = [
    "SuperPolynomial",
    "GradedVectorField",
    "build_Q",
    "covariant_Q",
    "apply_Q",
    "commutator",
    "section_field",
    "q_squared_residual",
    "q_squared_check",
    "j_star_correspondence",
    "derived_bracket",
    "derived_bracket_homology",
    "covariant_Q_check",
    "from_e_form",
    "to_e_form",
]


class SuperPolynomial:
    """Grassmann polynomial: increasing index tuple -> coefficient."""

    __slots__ = ("shape", "terms")

    def __init__(self, shape: BundleShape, terms: Mapping[tuple[int, ...], Expr] | None = None):
        self.shape = shape
        clean = {}
        for A, v in (terms or {}).items():
            A = tuple(A)
            s, key = sort_with_sign(A)
            if s == 0:
                continue
            v = as_expr(v)
            if s < 0:
                v = neg(v)
            clean[key] = add(clean[key], v) if key in clean else v
        self.terms = {k: v for k, v in clean.items() if not v.is_zero}

    @classmethod
    def const(cls, shape: BundleShape, f) -> "SuperPolynomial":
        return cls(shape, {(): as_expr(f)})

    @classmethod
    def generator(cls, shape: BundleShape, a: int) -> "SuperPolynomial":
        return cls(shape, {(a,): ONE})

    def degrees(self) -> set[int]:
        return {len(A) for A in self.terms}

    def coeff(self, A: Sequence[int]) -> Expr:
        s, key = sort_with_sign(tuple(A))
        if s == 0:
            return ZERO
        v = self.terms.get(key, ZERO)
        return v if s > 0 else neg(v)

    def __add__(self, other: "SuperPolynomial") -> "SuperPolynomial":
        out = dict(self.terms)
        for A, v in other.terms.items():
            out[A] = add(out[A], v) if A in out else v
        return SuperPolynomial(self.shape, out)

    def __neg__(self) -> "SuperPolynomial":
        return SuperPolynomial(self.shape, {A: neg(v) for A, v in self.terms.items()})

    def __sub__(self, other: "SuperPolynomial") -> "SuperPolynomial":
        return self + (-other)

    def scale(self, f) -> "SuperPolynomial":
        f = as_expr(f)
        return SuperPolynomial(self.shape, {A: mul(f, v) for A, v in self.terms.items()})

    def __mul__(self, other: "SuperPolynomial") -> "SuperPolynomial":
        acc: dict[tuple, list] = {}
        for A, u in self.terms.items():
            for B, v in other.terms.items():
                s, key = sort_with_sign(A + B)
                if s == 0:
                    continue
                t = mul(u, v)
                acc.setdefault(key, []).append(t if s > 0 else neg(t))
        return SuperPolynomial(self.shape, {k: total(v) for k, v in acc.items()})

    def d_x(self, i: int) -> "SuperPolynomial":
        x = self.shape.coords[i]
        return SuperPolynomial(self.shape, {A: diff(v, x) for A, v in self.terms.items()})

    def d_q(self, a: int) -> "SuperPolynomial":
        """Left derivative: d/dq^a q^A = (-1)^(position of a in A) q^(A minus a)."""
        out = {}
        for A, v in self.terms.items():
            if a in A:
                pos = A.index(a)
                out[A[:pos] + A[pos + 1:]] = v if pos % 2 == 0 else neg(v)
        return SuperPolynomial(self.shape, out)

    def values(self) -> list[Expr]:
        return list(self.terms.values())

    def is_structurally_zero(self) -> bool:
        return not self.terms

    def __repr__(self):
        return f"SuperPolynomial({len(self.terms)} terms, degrees={sorted(self.degrees())})"


def from_e_form(alpha: MixedField) -> SuperPolynomial:
    """j_*: alpha in Gamma(wedge^m E*) to sum_A alpha_A q^A."""
    p, k, q, m = alpha.sig
    if p or k or q:
        raise ShapeError("only sections of wedge^m E* (no TM blocks) correspond to functions on E[1]")
    return SuperPolynomial(alpha.shape, {A: v for (_, _, _, A), v in alpha.items()})


def to_e_form(p: SuperPolynomial, m: int) -> MixedField:
    """j^*: the degree-m part as a section of wedge^m E*."""
    return MixedField(p.shape, (0, 0, 0, m), {((), (), (), A): v for A, v in p.terms.items() if len(A) == m})


class GradedVectorField:
    """V = V^i d/dx^i + V^a d/dq^a with homogeneous degree ``degree``."""

    def __init__(self, shape: BundleShape, degree: int, x_comps: Sequence[SuperPolynomial], q_comps: Sequence[SuperPolynomial]):
        if len(x_comps) != shape.dim or len(q_comps) != shape.rank:
            raise ShapeError("need one component per coordinate and per odd generator")
        self.shape = shape
        self.degree = degree
        self.x = list(x_comps)
        self.q = list(q_comps)

    def __call__(self, p: SuperPolynomial) -> SuperPolynomial:
        out = SuperPolynomial(self.shape)
        for i, Vi in enumerate(self.x):
            if Vi.terms:
                out = out + Vi * p.d_x(i)
        for a, Va in enumerate(self.q):
            if Va.terms:
                out = out + Va * p.d_q(a)
        return out

    def components(self) -> list[SuperPolynomial]:
        return self.x + self.q

    def __sub__(self, other: "GradedVectorField") -> "GradedVectorField":
        return GradedVectorField(self.shape, self.degree, [a - b for a, b in zip(self.x, other.x)], [a - b for a, b in zip(self.q, other.q)])


def apply_Q(Q: GradedVectorField, p: SuperPolynomial) -> SuperPolynomial:
    return Q(p)


def _coords(shape: BundleShape) -> list[SuperPolynomial]:
    """The coordinate functions x^i then q^a."""
    xs = [SuperPolynomial.const(shape, Sym(c)) for c in shape.coords]
    qs = [SuperPolynomial.generator(shape, a) for a in range(shape.rank)]
    return xs + qs


def commutator(X: GradedVectorField, Y: GradedVectorField) -> GradedVectorField:
    """[X, Y] = XY - (-1)^(|X||Y|) YX, computed on the coordinate functions."""
    sign = -1 if (X.degree * Y.degree) % 2 else 1
    comps = []
    for Xg, Yg in zip(X.components(), Y.components()):
        a = X(Yg)
        b = Y(Xg)
        comps.append(a + b if sign < 0 else a - b)
    d = X.shape.dim
    return GradedVectorField(X.shape, X.degree + Y.degree, comps[:d], comps[d:])


def build_Q(L: LieAlgebroidModel) -> GradedVectorField:
    """Q = rho^i_a q^a d/dx^i - (1/2) C^c_{ab} q^a q^b d/dq^c."""
    sh = L.shape
    r, d = L.rank, L.dim
    xs = [SuperPolynomial(sh, {(a,): L.anchor(i, a) for a in range(r)}) for i in range(d)]
    qs = [SuperPolynomial(sh, {(a, b): neg(L.struct(c, a, b)) for a, b in increasing(r, 2)}) for c in range(r)]
    return GradedVectorField(sh, 1, xs, qs)


def covariant_Q(L: LieAlgebroidModel, conn: ConnectionData | None) -> GradedVectorField:
    """rho^i_a q^a (d_i + omega^c_{bi} q^b d/dq^c) + (1/2) T^a_{bc} q^b q^c d/dq^a."""
    conn = _conn(conn, L.shape)
    sh = L.shape
    r, d = L.rank, L.dim
    T = e_torsion(L, conn)
    xs = [SuperPolynomial(sh, {(a,): L.anchor(i, a) for a in range(r)}) for i in range(d)]
    qs = []
    for c in range(r):
        terms = {}
        for a in range(r):
            for b in range(r):
                if a == b:
                    continue
                w = total(mul(L.anchor(i, a), conn.w(c, b, i)) for i in range(d))
                s, key = sort_with_sign((a, b))
                terms.setdefault(key, []).append(w if s > 0 else neg(w))
        for b, cc in increasing(r, 2):
            terms.setdefault((b, cc), []).append(T.get((), (), (c,), (b, cc)))
        qs.append(SuperPolynomial(sh, {k: total(v) for k, v in terms.items()}))
    return GradedVectorField(sh, 1, xs, qs)


def section_field(u: MixedField) -> GradedVectorField:
    """u = u^a e_a as the degree -1 vector field u^a d/dq^a."""
    if u.sig != (0, 0, 1, 0):
        raise ShapeError("expected a section of E")
    sh = u.shape
    zero = SuperPolynomial(sh)
    return GradedVectorField(sh, -1, [zero] * sh.dim, [SuperPolynomial.const(sh, u.comps[((), (), (a,), ())]) for a in range(sh.rank)])


# ---------------------------------------------------------------------------
# checks


def q_squared_residual(L: LieAlgebroidModel) -> list[Expr]:
    """Coefficients of Q(Q(x^i)) and Q(Q(q^a)); all vanish iff (rho, C) is a Lie algebroid."""
    Q = build_Q(L)
    out = []
    for g in _coords(L.shape):
        out.extend(Q(Q(g)).values())
    return out


def q_squared_check(L: LieAlgebroidModel, sampler: Sampler | None = None, tol: float = DEFAULT_TOL) -> CheckResult:
    sampler = sampler or Sampler(L.patch)
    Q = build_Q(L)
    terms = [c for g in _coords(L.shape) for c in Q(g).values()]
    # scale from the pieces of Q applied twice, which are products of Q coefficients and their derivatives
    scale_terms = [mul(a, b) for a in terms for b in terms]
    return residual_check("q_squared", q_squared_residual(L), sampler, tol, terms=[scale_terms])


def j_star_correspondence(L: LieAlgebroidModel, alpha: MixedField, sampler: Sampler | None = None, tol: float = 1e-12) -> CheckResult:
    """E_d alpha against j^* Q j_* alpha."""
    sampler = sampler or Sampler(L.patch)
    m = alpha.sig[3]
    p = from_e_form(alpha)
    viaQ = to_e_form(build_Q(L)(p), m + 1) if m + 1 <= L.rank else MixedField.zero(L.shape, (0, 0, 0, m + 1))
    direct = e_differential(L, alpha)
    extra = [v for A, v in build_Q(L)(p).terms.items() if len(A) != m + 1]
    return residual_check("j_star", [direct - viaQ, extra], sampler, tol, terms=[direct, viaQ])


def derived_bracket(L: LieAlgebroidModel, u: MixedField, v: MixedField) -> MixedField:
    """The section [[u, Q], v] (a degree -1 vector field, read as a section of E).

    With left derivatives this equals the algebroid bracket [u, v] on
    constant-coefficient sections.
    """
    Q = build_Q(L)
    D = commutator(commutator(section_field(u), Q), section_field(v))
    for comp in D.x:
        if comp.terms:
            raise AssertionError("derived bracket produced a TM component")
    return MixedField(L.shape, (0, 0, 1, 0), {((), (), (a,), ()): D.q[a].coeff(()) for a in range(L.rank)})


def _section_poly(u: MixedField) -> SuperPolynomial:
    # sections of wedge E multiplied as odd symbols (super product)
    return SuperPolynomial(u.shape, {(a,): u.comps[((), (), (a,), ())] for a in range(u.shape.rank)})


def derived_bracket_homology(L: LieAlgebroidModel, e_list: Sequence[MixedField], coeff=ONE, sampler: Sampler | None = None) -> MixedField:
    """The homology operator on coeff * e_1 ^ .. ^ e_m built from derived brackets.

    The e_i must have constant coefficients; the function ``coeff`` gives the
    anchor terms through [e_i, Q] coeff = rho(e_i) coeff.  Signs follow
    :func:`homsec.algebroid.homology_boundary`.
    """
    m = len(e_list)
    sh = L.shape
    coeff = as_expr(coeff)
    if m < 2:
        return MixedField.zero(sh, (0, 0, max(m - 1, 0), 0))
    sampler = sampler or Sampler(sh.patch)
    vals = sampler.values([v for e in e_list for v in e.values()])
    if vals.size and np.max(np.abs(vals - vals[:, :1])) > 0.0:
        raise ShapeError("derived_bracket_homology needs constant-coefficient sections")
    Q = build_Q(L)
    polys = [_section_poly(e) for e in e_list]

    def product(idx):
        out = SuperPolynomial.const(sh, ONE)
        for j in idx:
            out = out * polys[j]
        return out

    acc = SuperPolynomial(sh)
    for i in range(m):
        for j in range(i + 1, m):
            br = _section_poly(derived_bracket(L, e_list[i], e_list[j]))
            rest = product([t for t in range(m) if t not in (i, j)])
            term = (br * rest).scale(coeff)
            acc = acc + (term if (i + j) % 2 else -term)  # 0-based: -(-1)^(i+j) in 1-based terms
        # anchor term (-1)^(i-1) ([e_i, Q] coeff) with 1-based i
        f = commutator(section_field(e_list[i]), Q)(SuperPolynomial.const(sh, coeff)).coeff(())
        rest = product([t for t in range(m) if t != i])
        t = rest.scale(f)
        acc = acc + (t if i % 2 == 0 else -t)
    return MixedField(sh, (0, 0, m - 1, 0), {((), (), A, ()): v for A, v in acc.terms.items()})


def covariant_Q_check(L: LieAlgebroidModel, conn: ConnectionData | None, sampler: Sampler | None = None, tol: float = 1e-12) -> CheckResult:
    """Covariant form of Q against build_Q on the coordinate functions."""
    sampler = sampler or Sampler(L.patch)
    Q = build_Q(L)
    QC = covariant_Q(L, conn)
    res, terms = [], []
    for g in _coords(L.shape):
        a, b = Q(g), QC(g)
        res.extend((a - b).values())
        terms.extend(a.values() + b.values())
    return residual_check("covariant_Q", res, sampler, tol, terms=[terms])
