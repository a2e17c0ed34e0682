"""Lie algebra actions: Chevalley-Eilenberg differential, homotopy momentum maps and their relation to momentum sections."""
from __future__ import annotations

from typing import Mapping, Sequence

import numpy as np

from .algebroid import LieAlgebroidModel, anchor_action, homology_boundary
from .expr import ZERO, const, mul, neg, total
from .momentum import MomentumData, PreconditionError, PrePlecticForm, iota_rho_k
from .residuals import DEFAULT_TOL, CheckResult, Sampler, combine, residual_check
from .signs import remove_at
from .tensor import BundleShape, MixedField, ShapeError, de_rham, pair_E

__all__ = [
    "LieAlgebraData",
    "ActionAlgebroidModel",
    "d_CE",
    "ad_star_rho",
    "hmm_residuals",
    "hmm_check",
    "hms_to_hmm",
    "lie_algebra_homology",
    "whmm_residual",
    "momentum_map_equations",
]


class LieAlgebraData:
    """Structure constants f^c_{ab} of a Lie algebra of dimension r.

    ``f`` maps (a, b, c) to f^c_{ab}; the antisymmetric partner (b, a, c)
    is implied and must not be given with a conflicting value.
    """

    def __init__(self, r: int, f: Mapping[tuple[int, int, int], float] | None = None, name: str | None = None):
        if r < 1:
            raise ValueError("a Lie algebra needs dimension at least 1")
        arr = np.zeros((r, r, r))
        for (a, b, c), v in (f or {}).items():
            v = float(v)
            if a == b and v != 0.0:
                raise ValueError("f^c_{aa} must vanish")
            for (x, y, s) in ((a, b, 1.0), (b, a, -1.0)):
                if arr[x, y, c] != 0.0 and arr[x, y, c] != s * v:
                    raise ValueError(f"conflicting values for f^{c}_{{{a}{b}}}")
                arr[x, y, c] = s * v
        self.r = r
        self.f = arr
        self.name = name

    def const(self, c: int, a: int, b: int) -> float:
        return float(self.f[a, b, c])

    def nonzero(self) -> dict[tuple[int, int, int], float]:
        """{(a, b, c): f^c_{ab}} over a < b."""
        r = self.r
        return {(a, b, c): float(self.f[a, b, c]) for a in range(r) for b in range(a + 1, r) for c in range(r) if self.f[a, b, c] != 0.0}

    def jacobi_residual(self) -> float:
        # f^e_{ad} f^d_{bc} + cyclic(abc)
        f = self.f
        J = np.einsum("ade,bcd->abce", f, f)
        J = J + np.transpose(J, (1, 2, 0, 3)) + np.transpose(J, (2, 0, 1, 3))
        return float(np.max(np.abs(J))) if J.size else 0.0

    def is_lie(self, tol: float = 1e-12) -> bool:
        return self.jacobi_residual() <= tol * max(1.0, float(np.max(np.abs(self.f))) ** 2)


class ActionAlgebroidModel:
    """A Lie algebra acting on a patch through the anchor rho.

    ``model`` is the action Lie algebroid M x g with C = f and the trivial
    connection.
    """

    def __init__(self, g: LieAlgebraData, shape: BundleShape, rho: Sequence[Sequence], name: str | None = None):
        if shape.rank != g.r:
            raise ShapeError("bundle rank must equal the Lie algebra dimension")
        self.g = g
        self.shape = shape
        self.model = LieAlgebroidModel.from_arrays(shape, rho, {k: const(v) for k, v in g.nonzero().items()}, name=name)
        self.name = name

    @property
    def patch(self):
        return self.shape.patch


def d_CE(g: LieAlgebraData, alpha: MixedField) -> MixedField:
    """Chevalley-Eilenberg differential on the E-down block; form indices pass through."""
    p, k, q, m = alpha.sig
    if p or q:
        raise ShapeError("d_CE acts on fields of signature (0,k,0,m)")
    r = alpha.shape.rank
    if r != g.r:
        raise ShapeError("field rank and Lie algebra dimension differ")
    if m + 1 > r:
        return MixedField.zero(alpha.shape, (0, k, 0, m + 1))

    def comp(key):
        _, J, _, B = key
        terms = []
        for i in range(len(B)):
            for j in range(i + 1, len(B)):
                rest = remove_at(remove_at(B, j), i)
                s = total(mul(const(g.const(c, B[i], B[j])), alpha.get((), J, (), (c,) + rest)) for c in range(r) if g.f[B[i], B[j], c] != 0.0)
                terms.append(s if (i + j) % 2 == 0 else neg(s))
        return total(terms)

    return MixedField.build(alpha.shape, (0, k, 0, m + 1), comp)


def ad_star_rho(A: ActionAlgebroidModel, alpha: MixedField) -> MixedField:
    """sum_i (-1)^(i-1) rho(e_i) alpha(.. ^e_i ..), with rho acting by the Lie derivative on forms."""
    p, k, q, m = alpha.sig
    if p or q:
        raise ShapeError("ad_star_rho acts on fields of signature (0,k,0,m)")
    L = A.model
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
        return total(terms)

    return MixedField.build(L.shape, (0, k, 0, m + 1), comp)


def hms_to_hmm(mu: MomentumData, n: int | None = None) -> MomentumData:
    """hat mu_k = (-1)^(n-k+1) mu_k (an involution)."""
    n = mu.n if n is None else n
    if n != mu.n:
        raise ShapeError("n does not match the momentum data")
    return mu.map(lambda k, m: m if (n - k + 1) % 2 == 0 else -m)


def _hmm_sign(n: int, k: int) -> int:
    return 1 if (n - k + 1) % 2 == 0 else -1


def hmm_residuals(A: ActionAlgebroidModel, P: PrePlecticForm, hmu: MomentumData) -> list[tuple[int, MixedField, list]]:
    """(k, residual, terms) for k = n..0 with residual d hmu_{k-1} + d_CE hmu_k - (-1)^(n-k+1) iota^{n+1-k} omega."""
    n = P.n
    L = A.model
    out = []
    for k in range(n, -1, -1):
        ip = iota_rho_k(L, P, n + 1 - k)
        rhs = ip if _hmm_sign(n, k) > 0 else -ip
        terms = [rhs]
        res = -rhs
        if k >= 1:
            t = de_rham(hmu[k - 1])
            terms.append(t)
            res = res + t
        if k <= n - 1:
            t = d_CE(A.g, hmu[k])
            terms.append(t)
            res = res + t
        out.append((k, res, terms))
    return out


def hmm_check(A: ActionAlgebroidModel, P: PrePlecticForm, hmu: MomentumData, sampler: Sampler | None = None, tol: float = DEFAULT_TOL) -> CheckResult:
    sampler = sampler or Sampler(A.patch)
    parts = [residual_check(f"hmm_R{k}", res, sampler, tol, terms=terms) for k, res, terms in hmm_residuals(A, P, hmu)]
    return combine("hmm", parts, tol)


def lie_algebra_homology(g: LieAlgebraData, w: MixedField, sampler: Sampler | None = None) -> MixedField:
    """Homology operator of g on constant elements of wedge^m g."""
    vals = (sampler or Sampler(w.shape.patch)).values(w.values())
    if vals.size and np.max(np.abs(vals - vals[:, :1])) > 0.0:
        raise PreconditionError("Lie algebra homology takes constant elements")
    zero_anchor = [[ZERO] * w.shape.dim for _ in range(g.r)]
    L0 = LieAlgebroidModel.from_arrays(w.shape, zero_anchor, {k: const(v) for k, v in g.nonzero().items()})
    return homology_boundary(L0, w)


def whmm_residual(
    A: ActionAlgebroidModel, P: PrePlecticForm, hmu: MomentumData, w: MixedField, k: int, sampler: Sampler | None = None, tol: float = DEFAULT_TOL
) -> tuple[MixedField, list]:
    """<d hmu_{k-1} - (-1)^(n-k+1) iota^{n+1-k} omega | w> for w in the Lie algebra homology kernel."""
    n = P.n
    if not 1 <= k <= n:
        raise ValueError(f"k must lie in 1..{n}")
    if w.sig != (0, 0, n + 1 - k, 0):
        raise ShapeError(f"w must lie in wedge^{n + 1 - k} g")
    sampler = sampler or Sampler(A.patch)
    dw = lie_algebra_homology(A.g, w, sampler)
    c = residual_check("lie_kernel", dw, sampler, tol, terms=[w])
    if not c.passed:
        raise PreconditionError("w is not in the Lie algebra homology kernel", c.max_residual)
    a = de_rham(hmu[k - 1])
    ip = iota_rho_k(A.model, P, n + 1 - k)
    b = ip if _hmm_sign(n, k) > 0 else -ip
    return pair_E(a - b, w), [pair_E(a, w), pair_E(b, w)]


def momentum_map_equations(A: ActionAlgebroidModel, P: PrePlecticForm, mu0: MixedField, sampler: Sampler | None = None, tol: float = DEFAULT_TOL) -> CheckResult:
    """Classical momentum map for n = 1: d mu_0 = -iota_rho omega and mu_0([e_a, e_b]) = rho(e_a) mu_0(e_b)."""
    if P.n != 1 or mu0.sig != (0, 0, 0, 1):
        raise ShapeError("momentum map equations need n = 1 and mu_0 in Gamma(E*)")
    sampler = sampler or Sampler(A.patch)
    L = A.model
    d = de_rham(mu0)
    ip = iota_rho_k(L, P, 1)
    c1 = residual_check("mm_gradient", d + ip, sampler, tol, terms=[d, ip])
    r = L.rank
    res, terms = [], []
    for a in range(r):
        for b in range(r):
            lhs = total(mul(const(A.g.const(c, a, b)), mu0.comps[((), (), (), (c,))]) for c in range(r) if A.g.f[a, b, c] != 0.0)
            rhs = L.act(a, mu0.comps[((), (), (), (b,))])
            res.append(lhs - rhs)
            terms.extend([lhs, rhs])
    c2 = residual_check("mm_equivariance", res, sampler, tol, terms=[terms])
    return combine("momentum_map_equations", [c1, c2], tol)
