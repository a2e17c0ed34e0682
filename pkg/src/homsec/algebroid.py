"""Lie algebroid data, its defining identities, E_d, homology and Lie kernels."""
from __future__ import annotations

from typing import Mapping, Sequence

import numpy as np

from .expr import ONE, ZERO, Expr, add, as_expr, const, diff, mul, neg, total
from .residuals import DEFAULT_TOL, CheckResult, Sampler, combine, residual_check
from .signs import increasing, remove_at, sort_with_sign
from .tensor import BundleShape, MixedField, Patch, ShapeError, lie_derivative, vector

__all__ = [
    "LieAlgebroidModel",
    "check_lie_algebroid",
    "anchor_identity",
    "jacobi_identity",
    "anchor_action",
    "e_differential",
    "bracket",
    "homology_boundary",
    "lie_kernel_membership",
    "lie_kernel_basis_constant",
    "NonConstantError",
    "tangent_algebroid",
    "frame_section",
]


class NonConstantError(ValueError):
    """A constant-coefficient routine received x-dependent data."""


class LieAlgebroidModel:
    """Anchor rho^i_a and structure functions C^c_{ab} on a patch.

    ``rho`` has signature (1,0,0,1) and is read as ``rho.get((i,),(),(),(a,))``;
    ``C`` has signature (0,0,1,2) and is read as ``C.get((),(),(c,),(a,b))``.
    """

    def __init__(self, shape: BundleShape, rho: MixedField, C: MixedField, name: str | None = None):
        if rho.sig != (1, 0, 0, 1) or rho.shape != shape:
            raise ShapeError("anchor must be a (1,0,0,1) field on the model shape")
        if C.sig != (0, 0, 1, 2) or C.shape != shape:
            raise ShapeError("structure functions must be a (0,0,1,2) field on the model shape")
        self.shape = shape
        self.rho = rho
        self.C = C
        self.name = name

    @classmethod
    def from_arrays(
        cls,
        shape: BundleShape,
        rho: Sequence[Sequence],
        C: Mapping[tuple[int, int, int], object] | None = None,
        name: str | None = None,
    ) -> "LieAlgebroidModel":
        """``rho[a][i]`` and ``C[(a, b, c)] = C^c_{ab}`` (antisymmetry in ab implied)."""
        r, d = shape.rank, shape.dim
        if len(rho) != r or any(len(row) != d for row in rho):
            raise ShapeError(f"anchor needs {r} rows of {d} components")
        rho_f = MixedField.from_entries(
            shape, (1, 0, 0, 1), [(((i,), (), (), (a,)), as_expr(rho[a][i])) for a in range(r) for i in range(d)]
        )
        C_f = MixedField.from_entries(shape, (0, 0, 1, 2), [(((), (), (c,), (a, b)), as_expr(v)) for (a, b, c), v in (C or {}).items()])
        return cls(shape, rho_f, C_f, name)

    @property
    def patch(self) -> Patch:
        return self.shape.patch

    @property
    def rank(self) -> int:
        return self.shape.rank

    @property
    def dim(self) -> int:
        return self.shape.dim

    def anchor(self, i: int, a: int) -> Expr:
        return self.rho.comps[((i,), (), (), (a,))]

    def struct(self, c: int, a: int, b: int) -> Expr:
        return self.C.get((), (), (c,), (a, b))

    def rho_vector(self, a: int) -> MixedField:
        return vector(self.shape, [self.anchor(i, a) for i in range(self.dim)])

    def act(self, a: int, f: Expr) -> Expr:
        """rho(e_a) applied to a function."""
        coords = self.shape.coords
        return total(mul(self.anchor(j, a), diff(f, coords[j])) for j in range(self.dim) if not self.anchor(j, a).is_zero)

    def has_constant_structure(self, sampler: Sampler | None = None) -> bool:
        return _is_constant(self.C.values(), self.patch, sampler)

    def __repr__(self):
        return f"LieAlgebroidModel(name={self.name!r}, dim={self.dim}, rank={self.rank})"


def _is_constant(exprs, patch: Patch, sampler: Sampler | None, rtol: float = 1e-12) -> bool:
    sampler = sampler or Sampler(patch)
    vals = sampler.values(list(exprs))
    if vals.size == 0:
        return True
    spread = np.max(np.abs(vals - vals[:, :1]))
    return bool(spread <= rtol * max(1.0, float(np.max(np.abs(vals)))))


def tangent_algebroid(patch: Patch) -> LieAlgebroidModel:
    """E = TM with identity anchor and vanishing structure functions."""
    d = patch.dim
    shape = BundleShape(patch, d)
    rho = [[ONE if i == a else ZERO for i in range(d)] for a in range(d)]
    return LieAlgebroidModel.from_arrays(shape, rho, {}, name="tangent")


def frame_section(shape: BundleShape, a: int, coeff=ONE) -> MixedField:
    """The section coeff * e_a."""
    return MixedField(shape, (0, 0, 1, 0), {((), (), (a,), ()): as_expr(coeff)})


# ---------------------------------------------------------------------------
# defining identities


def anchor_identity(L: LieAlgebroidModel) -> list[list[Expr]]:
    """Components (i, a<b) of rho_a.d rho_b - rho_b.d rho_a - C^c_{ab} rho_c, with the three terms."""
    r, d = L.rank, L.dim
    res, t1, t2, t3 = [], [], [], []
    for a, b in increasing(r, 2):
        for i in range(d):
            x = L.act(a, L.anchor(i, b))
            y = L.act(b, L.anchor(i, a))
            z = total(mul(L.struct(c, a, b), L.anchor(i, c)) for c in range(r))
            res.append(add(add(x, neg(y)), neg(z)))
            t1.append(x)
            t2.append(y)
            t3.append(z)
    return [res, t1, t2, t3]


def jacobi_identity(L: LieAlgebroidModel) -> list[list[Expr]]:
    """Components of C^e_{ad} C^d_{bc} + rho_a(C^e_{bc}) + cyclic(abc) for a<b<c, with the terms."""
    r = L.rank
    res, terms = [], []
    for a, b, c in increasing(r, 3):
        for e in range(r):
            pieces = []
            for x, y, z in ((a, b, c), (b, c, a), (c, a, b)):
                pieces.append(total(mul(L.struct(e, x, dd), L.struct(dd, y, z)) for dd in range(r)))
                pieces.append(L.act(x, L.struct(e, y, z)))
            res.append(total(pieces))
            terms.extend(pieces)
    return [res, terms]


def check_lie_algebroid(L: LieAlgebroidModel, sampler: Sampler | None = None, tol: float = DEFAULT_TOL) -> CheckResult:
    sampler = sampler or Sampler(L.patch)
    res1, *t1 = anchor_identity(L)
    res2, t2 = jacobi_identity(L)
    c1 = residual_check("anchor_identity", res1, sampler, tol, terms=t1)
    c2 = residual_check("jacobi_identity", res2, sampler, tol, terms=[t2])
    return combine("lie_algebroid", [c1, c2], tol)


# ---------------------------------------------------------------------------
# Lie algebroid differential


def anchor_action(L: LieAlgebroidModel, a: int, alpha: MixedField) -> MixedField:
    """rho(e_a) acting on alpha: the Lie derivative along rho_a on the form part."""
    return lie_derivative(L.rho_vector(a), alpha)


def e_differential(L: LieAlgebroidModel, alpha: MixedField) -> MixedField:
    """E_d on Omega^k(M, wedge^m E*) (signature (0,k,0,m))."""
    p, k, q, m = alpha.sig
    if p or q:
        raise ShapeError("e_differential acts on fields of signature (0,k,0,m)")
    if alpha.shape != L.shape:
        raise ShapeError("field and algebroid live on different shapes")
    r = L.rank
    if m + 1 > r:
        return MixedField.zero(L.shape, (0, k, 0, m + 1))
    acted = [anchor_action(L, a, alpha) for a in range(r)]

    def comp(key):
        _, J, _, B = key
        terms = []
        for i, b in enumerate(B):
            t = acted[b].comps[((), J, (), remove_at(B, i))]
            terms.append(t if i % 2 == 0 else neg(t))
        for i in range(len(B)):
            for j in range(i + 1, len(B)):
                rest = remove_at(remove_at(B, j), i)
                s = total(mul(L.struct(c, B[i], B[j]), alpha.get((), J, (), (c,) + rest)) for c in range(r))
                terms.append(s if (i + j) % 2 == 0 else neg(s))
        return total(terms)

    return MixedField.build(L.shape, (0, k, 0, m + 1), comp)


def bracket(L: LieAlgebroidModel, u: MixedField, v: MixedField) -> MixedField:
    """Algebroid bracket of two sections of E (signature (0,0,1,0))."""
    if u.sig != (0, 0, 1, 0) or v.sig != (0, 0, 1, 0):
        raise ShapeError("bracket takes two sections of E")
    r, d = L.rank, L.dim
    coords = L.shape.coords
    uu = [u.comps[((), (), (a,), ())] for a in range(r)]
    vv = [v.comps[((), (), (a,), ())] for a in range(r)]

    def rho_of(w, f):
        return total(mul(mul(w[a], L.anchor(j, a)), diff(f, coords[j])) for a in range(r) for j in range(d) if not w[a].is_zero)

    def comp(key):
        c = key[2][0]
        alg = total(mul(mul(uu[a], vv[b]), L.struct(c, a, b)) for a in range(r) for b in range(r) if a != b)
        return total([alg, rho_of(uu, vv[c]), neg(rho_of(vv, uu[c]))])

    return MixedField.build(L.shape, (0, 0, 1, 0), comp)


# ---------------------------------------------------------------------------
# homology


def _bracket_coeffs(L: LieAlgebroidModel, conn) -> list[list[list[Expr]]]:
    """B[a][b][c]: the c-component of [e_a, e_b] (or of -T(e_a, e_b) with a connection)."""
    r = L.rank
    if conn is None:
        return [[[L.struct(c, a, b) for c in range(r)] for b in range(r)] for a in range(r)]
    from .connection import e_torsion  # connection imports this module

    T = e_torsion(L, conn)
    return [[[neg(T.get((), (), (c,), (a, b))) for c in range(r)] for b in range(r)] for a in range(r)]


def homology_boundary(L: LieAlgebroidModel, w: MixedField, conn=None) -> MixedField:
    """The homology operator on sections of wedge^m E (signature (0,0,m,0)).

    On frame elements the pairwise bracket sum with sign (-1)^(i+j+1) for
    1-based positions, so that d(e_1 ^ e_2) = [e_1, e_2]; coefficient
    functions contribute the anchor terms of the Leibniz rule with
    (-1)^(i-1).  This is the sign pairing for which the square vanishes.  With a
    connection the covariantised bracket -T is used.  Zero for m < 2.
    """
    p, k, m, q = w.sig
    if p or k or q:
        raise ShapeError("homology_boundary acts on sections of wedge^m E")
    if m < 2:
        return MixedField.zero(L.shape, (0, 0, max(m - 1, 0), 0))
    r = L.rank
    B = _bracket_coeffs(L, conn)
    acc: dict[tuple, list[Expr]] = {}

    def put(idx, val, sign):
        s, key = sort_with_sign(idx)
        if s == 0 or val.is_zero:
            return
        acc.setdefault(key, []).append(val if s * sign > 0 else neg(val))

    for (_, _, A, _), coeff in w.items():
        if coeff.is_zero:
            continue
        for i in range(m):
            for j in range(i + 1, m):
                rest = remove_at(remove_at(A, j), i)
                sign = -1 if (i + j) % 2 == 0 else 1
                for c in range(r):
                    bc = B[A[i]][A[j]][c]
                    if not bc.is_zero:
                        put((c,) + rest, mul(coeff, bc), sign)
        for i in range(m):
            put(remove_at(A, i), L.act(A[i], coeff), 1 if i % 2 == 0 else -1)
    comps = {((), (), key, ()): total(vals) for key, vals in acc.items()}
    return MixedField(L.shape, (0, 0, m - 1, 0), comps)


def lie_kernel_membership(
    L: LieAlgebroidModel, w: MixedField, conn=None, sampler: Sampler | None = None, tol: float = DEFAULT_TOL
) -> tuple[bool, CheckResult]:
    sampler = sampler or Sampler(L.patch)
    res = residual_check("lie_kernel", homology_boundary(L, w, conn), sampler, tol, terms=[w])
    return res.passed, res


def _rref_nullspace(M: np.ndarray, tol: float) -> list[np.ndarray]:
    """Null space basis by Gauss-Jordan elimination with partial pivoting.

    One basis vector per free column, in increasing column order.
    """
    A = np.array(M, dtype=float)
    rows, cols = A.shape
    pivots = []
    row = 0
    for col in range(cols):
        if row >= rows:
            break
        piv = row + int(np.argmax(np.abs(A[row:, col])))
        if abs(A[piv, col]) <= tol:
            continue
        A[[row, piv]] = A[[piv, row]]
        A[row] /= A[row, col]
        for other in range(rows):
            if other != row and A[other, col] != 0.0:
                A[other] -= A[other, col] * A[row]
        pivots.append(col)
        row += 1
    free = [c for c in range(cols) if c not in pivots]
    basis = []
    for f in free:
        v = np.zeros(cols)
        v[f] = 1.0
        for r_i, pc in enumerate(pivots):
            v[pc] = -A[r_i, f]
        basis.append(v)
    return basis


def lie_kernel_basis_constant(L: LieAlgebroidModel, m: int, conn=None, sampler: Sampler | None = None, tol: float = 1e-10) -> list[MixedField]:
    """Basis of constant-coefficient elements of wedge^m E killed by the homology operator.

    Requires the matrix of the operator on constant sections to be the same
    at every sample point (raises :class:`NonConstantError` otherwise).
    """
    r = L.rank
    sampler = sampler or Sampler(L.patch)
    cols = increasing(r, m)
    if m < 2:
        return [MixedField(L.shape, (0, 0, m, 0), {((), (), A, ()): ONE}) for A in cols]
    rows = increasing(r, m - 1)
    entries = []
    for A in cols:
        img = homology_boundary(L, MixedField(L.shape, (0, 0, m, 0), {((), (), A, ()): ONE}), conn)
        entries.extend(img.comps[((), (), R, ())] for R in rows)
    vals = sampler.values(entries)
    if vals.size and np.max(np.abs(vals - vals[:, :1])) > 1e-12 * max(1.0, float(np.max(np.abs(vals)))):
        raise NonConstantError("the homology operator has x-dependent coefficients on constant sections")
    mat = vals[:, 0].reshape(len(cols), len(rows)).T if vals.size else np.zeros((len(rows), len(cols)))
    out = []
    for v in _rref_nullspace(mat, tol):
        out.append(MixedField(L.shape, (0, 0, m, 0), {((), (), A, ()): const(float(x)) for A, x in zip(cols, v) if x != 0.0}))
    return out
