"""Coordinate patches and mixed antisymmetric tensor fields.

A :class:`MixedField` has four index blocks, each antisymmetric on its own:
TM-up (multivector part), TM-down (form part), E-up and E-down.  The
signature ``(p, k, q, m)`` gives the block sizes.  Components are stored
densely on strictly increasing multi-indices; :meth:`MixedField.get`
accepts any ordering and applies the permutation sign.

Only the TM-down block carries exterior-calculus grading.  There is no
sign between a form index and an E index, so an element of
Omega^k(M, wedge^m E*) is a k-form with values in wedge^m E*.
"""
from __future__ import annotations

from itertools import product
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .expr import ZERO, Expr, add, as_expr, diff, evaluate, mul, neg, total
from .signs import increasing, remove_at, sort_with_sign, splits

Index = tuple[int, ...]
Key = tuple[Index, Index, Index, Index]
Sig = tuple[int, int, int, int]

__all__ = [
    "Patch",
    "BundleShape",
    "MixedField",
    "MetricField",
    "ShapeError",
    "wedge",
    "contract_TM",
    "pair_E",
    "lie_derivative",
    "de_rham",
    "scalar",
    "vector",
    "form",
    "e_form",
    "e_section",
]


class ShapeError(ValueError):
    """Incompatible shapes or block signatures."""


class Patch:
    """A coordinate patch with a sampling box."""

    def __init__(self, coords: Sequence[str], box: Sequence[Sequence[float]] | None = None):
        coords = tuple(coords)
        if not coords:
            raise ShapeError("a patch needs at least one coordinate")
        if len(set(coords)) != len(coords):
            raise ShapeError(f"coordinate names must be distinct: {coords}")
        if box is None:
            box = [(-1.0, 1.0)] * len(coords)
        box = tuple((float(lo), float(hi)) for lo, hi in box)
        if len(box) != len(coords):
            raise ShapeError("need one sampling interval per coordinate")
        for lo, hi in box:
            if not lo <= hi:
                raise ShapeError(f"empty sampling interval [{lo}, {hi}]")
        self.coords = coords
        self.box = box

    @property
    def dim(self) -> int:
        return len(self.coords)

    def sample_points(self, n: int = 32, seed: int = 42) -> np.ndarray:
        """``n`` points drawn uniformly from the box, shape (n, dim)."""
        rng = np.random.default_rng(seed)
        lo = np.array([b[0] for b in self.box])
        hi = np.array([b[1] for b in self.box])
        return lo + (hi - lo) * rng.random((n, self.dim))

    def env(self, points: np.ndarray) -> dict[str, np.ndarray]:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        return {name: points[:, i] for i, name in enumerate(self.coords)}

    def __eq__(self, other):
        return isinstance(other, Patch) and self.coords == other.coords and self.box == other.box

    def __hash__(self):
        return hash((self.coords, self.box))

    def __repr__(self):
        return f"Patch({list(self.coords)!r}, {list(self.box)!r})"


class BundleShape:
    """A patch together with the rank of the bundle E."""

    def __init__(self, patch: Patch, rank: int):
        if int(rank) < 1:
            raise ShapeError("rank must be at least 1")
        self.patch = patch
        self.rank = int(rank)

    @property
    def dim(self) -> int:
        return self.patch.dim

    @property
    def coords(self) -> tuple[str, ...]:
        return self.patch.coords

    def __eq__(self, other):
        return isinstance(other, BundleShape) and self.patch == other.patch and self.rank == other.rank

    def __hash__(self):
        return hash((self.patch, self.rank))

    def __repr__(self):
        return f"BundleShape({self.patch!r}, rank={self.rank})"


def _keys(shape: BundleShape, sig: Sig) -> list[Key]:
    d, r = shape.dim, shape.rank
    p, k, q, m = sig
    return list(product(increasing(d, p), increasing(d, k), increasing(r, q), increasing(r, m)))


class MixedField:
    """Dense antisymmetric storage of a four-block tensor field."""

    __slots__ = ("shape", "sig", "comps")

    def __init__(self, shape: BundleShape, sig: Sequence[int], comps: Mapping[Key, Expr] | None = None):
        sig = tuple(int(s) for s in sig)
        if len(sig) != 4 or min(sig) < 0:
            raise ShapeError(f"bad block signature {sig}")
        self.shape = shape
        self.sig = sig
        store = {key: ZERO for key in _keys(shape, sig)}
        if comps:
            for key, val in comps.items():
                if key not in store:
                    raise ShapeError(f"{key} is not a canonical key for signature {sig}")
                store[key] = as_expr(val)
        self.comps = store

    # -- construction -----------------------------------------------------
    @classmethod
    def zero(cls, shape: BundleShape, sig: Sequence[int]) -> "MixedField":
        return cls(shape, sig)

    @classmethod
    def from_entries(cls, shape: BundleShape, sig: Sequence[int], entries: Iterable[tuple[Sequence[Sequence[int]], Expr]]) -> "MixedField":
        """Build from ``((up, down, eup, edown), value)`` pairs in any index order.

        Entries are canonicalised with the permutation sign and summed.
        """
        acc: dict[Key, Expr] = {}
        sig = tuple(sig)
        for blocks, val in entries:
            sign, key = _canonical(blocks, sig, shape)
            if sign == 0:
                continue
            v = as_expr(val)
            acc[key] = add(acc.get(key, ZERO), v if sign > 0 else neg(v))
        return cls(shape, sig, acc)

    @classmethod
    def build(cls, shape: BundleShape, sig: Sequence[int], fn: Callable[[Key], Expr]) -> "MixedField":
        """Build from a function of the canonical key."""
        sig = tuple(sig)
        return cls(shape, sig, {key: fn(key) for key in _keys(shape, sig)})

    # -- access -----------------------------------------------------------
    def keys(self) -> list[Key]:
        return list(self.comps)

    def get(self, up: Sequence[int] = (), down: Sequence[int] = (), eup: Sequence[int] = (), edown: Sequence[int] = ()) -> Expr:
        """Component at arbitrary (possibly unsorted or repeated) indices."""
        sign, key = _canonical((up, down, eup, edown), self.sig, self.shape)
        if sign == 0:
            return ZERO
        v = self.comps[key]
        return v if sign > 0 else neg(v)

    def __getitem__(self, key: Key) -> Expr:
        return self.comps[key]

    def items(self):
        return self.comps.items()

    def values(self) -> list[Expr]:
        return list(self.comps.values())

    def is_structurally_zero(self) -> bool:
        return all(v.is_zero for v in self.comps.values())

    # -- arithmetic -------------------------------------------------------
    def _check_same(self, other: "MixedField"):
        if not isinstance(other, MixedField):
            raise TypeError("expected a MixedField")
        if other.shape != self.shape:
            raise ShapeError("fields live on different shapes")
        if other.sig != self.sig:
            raise ShapeError(f"block signatures differ: {self.sig} vs {other.sig}")

    def __add__(self, other: "MixedField") -> "MixedField":
        self._check_same(other)
        return MixedField(self.shape, self.sig, {k: add(v, other.comps[k]) for k, v in self.comps.items()})

    def __sub__(self, other: "MixedField") -> "MixedField":
        self._check_same(other)
        return MixedField(self.shape, self.sig, {k: add(v, neg(other.comps[k])) for k, v in self.comps.items()})

    def __neg__(self) -> "MixedField":
        return MixedField(self.shape, self.sig, {k: neg(v) for k, v in self.comps.items()})

    def scale(self, f) -> "MixedField":
        """Multiply every component by the scalar expression (or number) ``f``."""
        f = as_expr(f)
        return MixedField(self.shape, self.sig, {k: mul(f, v) for k, v in self.comps.items()})

    def map(self, fn: Callable[[Expr], Expr]) -> "MixedField":
        return MixedField(self.shape, self.sig, {k: fn(v) for k, v in self.comps.items()})

    def partial(self, i: int) -> "MixedField":
        """Componentwise partial derivative along coordinate ``i``."""
        x = self.shape.coords[i]
        return self.map(lambda e: diff(e, x))

    # -- numerics ---------------------------------------------------------
    def evaluate(self, points: np.ndarray) -> dict[Key, np.ndarray]:
        env = self.shape.patch.env(points)
        n = len(next(iter(env.values())))
        out = {}
        for key, e in self.comps.items():
            out[key] = np.broadcast_to(np.asarray(evaluate(e, env), dtype=float), (n,))
        return out

    def max_abs(self, points: np.ndarray) -> float:
        vals = self.evaluate(points)
        if not vals:
            return 0.0
        return float(max(np.max(np.abs(v)) for v in vals.values()))

    def __repr__(self):
        nz = sum(1 for v in self.comps.values() if not v.is_zero)
        return f"MixedField(sig={self.sig}, rank={self.shape.rank}, dim={self.shape.dim}, nonzero={nz})"


def _canonical(blocks: Sequence[Sequence[int]], sig: Sig, shape: BundleShape) -> tuple[int, Key]:
    if len(blocks) != 4:
        raise ShapeError("need four index blocks (up, down, eup, edown)")
    sign = 1
    key = []
    bounds = (shape.dim, shape.dim, shape.rank, shape.rank)
    for block, size, bound in zip(blocks, sig, bounds):
        block = tuple(int(i) for i in block)
        if len(block) != size:
            raise ShapeError(f"index block {block} does not have length {size}")
        for i in block:
            if not 0 <= i < bound:
                raise ShapeError(f"index {i} out of range 0..{bound - 1}")
        s, sb = sort_with_sign(block)
        sign *= s
        key.append(sb)
    return sign, tuple(key)


# ---------------------------------------------------------------------------
# convenience constructors


def scalar(shape: BundleShape, f) -> MixedField:
    return MixedField(shape, (0, 0, 0, 0), {((), (), (), ()): as_expr(f)})


def vector(shape: BundleShape, comps: Sequence) -> MixedField:
    if len(comps) != shape.dim:
        raise ShapeError("vector needs one component per coordinate")
    return MixedField(shape, (1, 0, 0, 0), {((i,), (), (), ()): as_expr(c) for i, c in enumerate(comps)})


def form(shape: BundleShape, k: int, comps: Mapping[Sequence[int], object]) -> MixedField:
    """A k-form from ``{(i1..ik): value}`` (any index order)."""
    return MixedField.from_entries(shape, (0, k, 0, 0), [(((), idx, (), ()), v) for idx, v in comps.items()])


def e_form(shape: BundleShape, m: int, comps: Mapping[Sequence[int], object]) -> MixedField:
    """A section of wedge^m E* from ``{(a1..am): value}``."""
    return MixedField.from_entries(shape, (0, 0, 0, m), [(((), (), (), idx), v) for idx, v in comps.items()])


def e_section(shape: BundleShape, m: int, comps: Mapping[Sequence[int], object]) -> MixedField:
    """A section of wedge^m E from ``{(a1..am): value}``."""
    return MixedField.from_entries(shape, (0, 0, m, 0), [(((), (), idx, ()), v) for idx, v in comps.items()])


# ---------------------------------------------------------------------------
# multilinear algebra


def wedge(a: MixedField, b: MixedField) -> MixedField:
    """Blockwise exterior product (shuffle sums, no cross-block sign)."""
    if a.shape != b.shape:
        raise ShapeError("wedge of fields on different shapes")
    sig = tuple(x + y for x, y in zip(a.sig, b.sig))

    def comp(key: Key) -> Expr:
        per_block = [list(splits(K, pa)) for K, pa in zip(key, a.sig)]
        terms = []
        for choice in product(*per_block):
            sign = 1
            ka, kb = [], []
            for sgn, S, rest in choice:
                sign *= sgn
                ka.append(S)
                kb.append(rest)
            t = mul(a.comps[tuple(ka)], b.comps[tuple(kb)])
            terms.append(t if sign > 0 else neg(t))
        return total(terms)

    return MixedField.build(a.shape, sig, comp)


def _require_vector(v: MixedField):
    if v.sig != (1, 0, 0, 0):
        raise ShapeError(f"expected a pure vector field, got signature {v.sig}")


def contract_TM(v: MixedField, a: MixedField) -> MixedField:
    """Interior product: insert ``v`` into the first TM-down slot of ``a``."""
    _require_vector(v)
    if v.shape != a.shape:
        raise ShapeError("contraction of fields on different shapes")
    p, k, q, m = a.sig
    if k < 1:
        raise ShapeError("cannot contract a vector into a field without form indices")
    d = a.shape.dim
    vj = [v.comps[((j,), (), (), ())] for j in range(d)]

    def comp(key: Key) -> Expr:
        up, down, eup, edown = key
        return total(mul(vj[j], a.get(up, (j,) + down, eup, edown)) for j in range(d) if not vj[j].is_zero)

    return MixedField.build(a.shape, (p, k - 1, q, m), comp)


def pair_E(alpha: MixedField, w: MixedField) -> MixedField:
    """Contract the E-down block of ``alpha`` with the E-up block of ``w``.

    ``alpha`` must have no E-up block and ``w`` no E-down block; at most
    one of the two may carry TM indices, which pass through.
    """
    if alpha.shape != w.shape:
        raise ShapeError("pairing of fields on different shapes")
    pa, ka, qa, ma = alpha.sig
    pw, kw, qw, mw = w.sig
    if qa or mw:
        raise ShapeError("pair_E needs alpha without E-up and w without E-down indices")
    if ma != qw:
        raise ShapeError(f"E-degree mismatch: {ma} vs {qw}")
    if (pa or ka) and (pw or kw):
        raise ShapeError("only one argument of pair_E may carry TM indices")
    E_keys = increasing(alpha.shape.rank, ma)

    if pw or kw:
        def comp(key: Key) -> Expr:
            up, down, _, _ = key
            return total(mul(alpha.comps[((), (), (), A)], w.comps[(up, down, A, ())]) for A in E_keys)
        sig = (pw, kw, 0, 0)
    else:
        def comp(key: Key) -> Expr:
            up, down, _, _ = key
            return total(mul(alpha.comps[(up, down, (), A)], w.comps[((), (), A, ())]) for A in E_keys)
        sig = (pa, ka, 0, 0)
    return MixedField.build(alpha.shape, sig, comp)


def lie_derivative(X: MixedField, a: MixedField) -> MixedField:
    """Lie derivative of the form part of ``a`` along the vector field ``X``.

    E indices are carried along componentwise (the E frame is treated as
    constant); a TM-up block is not supported.
    """
    _require_vector(X)
    if X.shape != a.shape:
        raise ShapeError("Lie derivative of fields on different shapes")
    if a.sig[0]:
        raise ShapeError("lie_derivative acts on forms, not multivectors")
    coords = a.shape.coords
    d = a.shape.dim
    Xj = [X.comps[((j,), (), (), ())] for j in range(d)]
    dX = [[diff(Xj[j], coords[i]) for j in range(d)] for i in range(d)]  # dX[i][j] = d_i X^j

    def comp(key: Key) -> Expr:
        _, J, eup, edown = key
        terms = [mul(Xj[j], diff(a.comps[key], coords[j])) for j in range(d) if not Xj[j].is_zero]
        for l, il in enumerate(J):
            for j in range(d):
                if dX[il][j].is_zero:
                    continue
                J2 = J[:l] + (j,) + J[l + 1:]
                terms.append(mul(dX[il][j], a.get((), J2, eup, edown)))
        return total(terms)

    return MixedField.build(a.shape, a.sig, comp)


def de_rham(a: MixedField) -> MixedField:
    """Exterior derivative of the form part; E blocks pass through."""
    if a.sig[0]:
        raise ShapeError("de_rham acts on forms, not multivectors")
    p, k, q, m = a.sig
    coords = a.shape.coords

    def comp(key: Key) -> Expr:
        _, K, eup, edown = key
        terms = []
        for l, jl in enumerate(K):
            t = diff(a.comps[((), remove_at(K, l), eup, edown)], coords[jl])
            terms.append(t if l % 2 == 0 else neg(t))
        return total(terms)

    return MixedField.build(a.shape, (0, k + 1, q, m), comp)


class MetricField:
    """Symmetric covariant 2-tensor g_ij (positive-definiteness optional)."""

    def __init__(self, shape: BundleShape, g: Sequence[Sequence]):
        d = shape.dim
        if len(g) != d or any(len(row) != d for row in g):
            raise ShapeError("metric needs a d x d component array")
        self.shape = shape
        self.g = tuple(tuple(as_expr(v) for v in row) for row in g)

    def get(self, i: int, j: int) -> Expr:
        return self.g[i][j]

    def symmetry_residual(self, points: np.ndarray) -> float:
        env = self.shape.patch.env(points)
        worst = 0.0
        d = self.shape.dim
        for i in range(d):
            for j in range(i + 1, d):
                diffv = np.asarray(evaluate(self.g[i][j], env)) - np.asarray(evaluate(self.g[j][i], env))
                worst = max(worst, float(np.max(np.abs(diffv))))
        return worst

    def is_positive_definite(self, points: np.ndarray) -> bool:
        env = self.shape.patch.env(points)
        n = len(points)
        d = self.shape.dim
        mats = np.empty((n, d, d))
        for i in range(d):
            for j in range(d):
                mats[:, i, j] = np.broadcast_to(evaluate(self.g[i][j], env), (n,))
        sym = 0.5 * (mats + np.transpose(mats, (0, 2, 1)))
        return bool(np.all(np.linalg.eigvalsh(sym) > 0))
