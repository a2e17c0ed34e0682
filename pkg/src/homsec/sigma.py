"""Target-space conditions for gauged sigma models with a Wess-Zumino term.

The gauge-invariance conditions on the target data (g, H, tmu) are an
isometry condition on g, a graded system of differential equations
(``gnlsm_residuals``) and an algebraic contraction condition.  After the
sign change ``mu_k = eps_k tmu_k`` and ``omega = (-1)^(n-1) tilde H`` the
system becomes the homotopy momentum section equations; ``gauge_invariance_roundtrip``
evaluates both sides independently.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .algebroid import LieAlgebroidModel, e_differential, frame_section
from .connection import ConnectionData, e_connection_TM, nabla
from .expr import Expr, mul, neg, total
from .momentum import MomentumData, PrePlecticForm, hms_check, hms_residuals, iota_rho_k
from .residuals import DEFAULT_TOL, CheckResult, Sampler, combine, residual_check
from .tensor import MetricField, MixedField, ShapeError, de_rham, vector

__all__ = [
    "SigmaTargetData",
    "eps",
    "omega_sign",
    "isometry_residual",
    "isometry_check",
    "gnlsm_residuals",
    "gnlsm_check",
    "iota_rho_section",
    "contraction_condition_residual",
    "contraction_check",
    "algebraic_condition_check",
    "gnlsm_to_hms",
    "hms_to_gnlsm",
    "RoundTrip",
    "gauge_invariance_roundtrip",
]


def eps(n: int, k: int) -> int:
    """(-1)^(sum of j for j = k+1 .. n-1)."""
    return -1 if sum(range(k + 1, n)) % 2 else 1


def omega_sign(n: int) -> int:
    return -1 if (n - 1) % 2 else 1


def _flip(f: MixedField, s: int) -> MixedField:
    return f if s > 0 else -f


class SigmaTargetData:
    """Metric, closed (n+1)-form H and the couplings tmu_0 .. tmu_{n-1} (plus optional tmu_n)."""

    def __init__(self, g: MetricField, H: MixedField, tmu: Sequence[MixedField], tmu_n: MixedField | None = None):
        tmu = list(tmu)
        n = len(tmu)
        if n < 1:
            raise ShapeError("need at least tmu_0")
        if H.sig != (0, n + 1, 0, 0):
            raise ShapeError(f"H must be a {n + 1}-form")
        for k, m in enumerate(tmu):
            if m.sig != (0, k, 0, n - k):
                raise ShapeError(f"tmu_{k} must have signature {(0, k, 0, n - k)}, got {m.sig}")
        if tmu_n is not None and tmu_n.sig != (0, n, 0, 0):
            raise ShapeError(f"tmu_n must be an {n}-form")
        self.n = n
        self.g = g
        self.H = H
        self.tmu = tmu
        self.tmu_n = tmu_n
        self.shape = H.shape

    @property
    def H_tilde(self) -> MixedField:
        if self.tmu_n is None:
            return self.H
        return self.H + de_rham(self.tmu_n)

    def closed_check(self, sampler: Sampler | None = None, tol: float = DEFAULT_TOL) -> CheckResult:
        sampler = sampler or Sampler(self.shape.patch)
        return residual_check("sigma_closed", de_rham(self.H), sampler, tol, terms=[self.H])

    def replace(self, **kw) -> "SigmaTargetData":
        args = {"g": self.g, "H": self.H, "tmu": self.tmu, "tmu_n": self.tmu_n}
        args.update(kw)
        return SigmaTargetData(**args)


# ---------------------------------------------------------------------------
# isometry


def isometry_residual(L: LieAlgebroidModel, conn: ConnectionData | None, g: MetricField) -> list[list[list[Expr]]]:
    """res[a][i][j] = (E nabla_{e_a} g)(d_i, d_j), via the product rule on the opposite E-connection."""
    d, r = L.dim, L.rank
    basis = [vector(L.shape, [1 if j == i else 0 for j in range(d)]) for i in range(d)]
    out = []
    for a in range(r):
        e = frame_section(L.shape, a)
        moved = [e_connection_TM(L, conn, e, basis[i]) for i in range(d)]
        rows = []
        for i in range(d):
            row = []
            for j in range(d):
                terms = [L.act(a, g.get(i, j))]
                for k in range(d):
                    ci = moved[i].comps[((k,), (), (), ())]
                    cj = moved[j].comps[((k,), (), (), ())]
                    if not ci.is_zero:
                        terms.append(neg(mul(ci, g.get(k, j))))
                    if not cj.is_zero:
                        terms.append(neg(mul(cj, g.get(i, k))))
                row.append(total(terms))
            rows.append(row)
        out.append(rows)
    return out


def isometry_check(L, conn, g: MetricField, sampler: Sampler | None = None, tol: float = DEFAULT_TOL) -> CheckResult:
    sampler = sampler or Sampler(L.patch)
    res = isometry_residual(L, conn, g)
    return residual_check("isometry", res, sampler, tol, terms=[[g.get(i, j) for i in range(L.dim) for j in range(L.dim)]])


# ---------------------------------------------------------------------------
# the graded system


@dataclass
class SigmaResidual:
    """Residual in form degree k together with the sign s with hms_k = s * gnlsm_k."""

    k: int
    residual: MixedField
    terms: list
    hms_sign: int


def gnlsm_residuals(L: LieAlgebroidModel, conn: ConnectionData | None, data: SigmaTargetData) -> list[SigmaResidual]:
    """G_k = nabla tmu_{k-1} + (-1)^k E_d tmu_k + s_k iota^{n+1-k} tilde H for k = n..0.

    s_k = (-1)^(n-1) eps_{k-1} for k >= 1 and s_0 = (-1)^(n-1) eps_0.
    """
    n = data.n
    Ht = data.H_tilde
    P = PrePlecticForm(n, Ht)
    w = omega_sign(n)
    out = []
    for k in range(n, -1, -1):
        e = eps(n, k - 1) if k >= 1 else eps(n, 0)
        terms = [_flip(iota_rho_k(L, P, n + 1 - k), w * e)]
        if k >= 1:
            terms.append(nabla(conn, data.tmu[k - 1]))
        if k <= n - 1:
            terms.append(_flip(e_differential(L, data.tmu[k]), -1 if k % 2 else 1))
        res = terms[0]
        for t in terms[1:]:
            res = res + t
        out.append(SigmaResidual(k, res, terms, e))
    return out


def gnlsm_check(L, conn, data: SigmaTargetData, sampler: Sampler | None = None, tol: float = DEFAULT_TOL) -> CheckResult:
    sampler = sampler or Sampler(L.patch)
    parts = [residual_check(f"gnlsm_G{s.k}", s.residual, sampler, tol, terms=s.terms) for s in gnlsm_residuals(L, conn, data)]
    return combine("gnlsm", parts, tol)


# ---------------------------------------------------------------------------
# contraction condition


def iota_rho_section(L: LieAlgebroidModel, mu: MixedField) -> MixedField:
    """(iota_rho mu)(e_0..e_m) = sum_i (-1)^i iota_{rho(e_i)} mu(e_0 .. ^e_i .. e_m)."""
    p, k, q, m = mu.sig
    if p or q or k < 1:
        raise ShapeError("iota_rho needs a field of signature (0,k,0,m) with k >= 1")
    d = L.dim

    def comp(key):
        _, J, _, B = key
        terms = []
        for i, b in enumerate(B):
            rest = B[:i] + B[i + 1:]
            s = total(mul(L.anchor(j, b), mu.get((), (j,) + J, (), rest)) for j in range(d) if not L.anchor(j, b).is_zero)
            terms.append(s if i % 2 == 0 else neg(s))
        return total(terms)

    return MixedField.build(L.shape, (0, k - 1, 0, m + 1), comp)


def contraction_condition_residual(L: LieAlgebroidModel, data: SigmaTargetData) -> list[tuple[int, MixedField, list]]:
    """(k, tmu_{k-1} - (-1)^k iota_rho tmu_k, terms) for k = 1..n-1."""
    out = []
    for k in range(1, data.n):
        c = _flip(iota_rho_section(L, data.tmu[k]), -1 if k % 2 else 1)
        out.append((k, data.tmu[k - 1] - c, [data.tmu[k - 1], c]))
    return out


def contraction_check(L, data: SigmaTargetData, sampler: Sampler | None = None, tol: float = DEFAULT_TOL) -> CheckResult:
    sampler = sampler or Sampler(L.patch)
    parts = [residual_check(f"contraction_k{k}", res, sampler, tol, terms=t) for k, res, t in contraction_condition_residual(L, data)]
    return combine("contraction", parts, tol)


def algebraic_condition_check(L, mu: MomentumData, sampler: Sampler | None = None, tol: float = DEFAULT_TOL) -> CheckResult:
    """mu_{k-1} = iota_rho mu_k for k = 1..n-1 (momentum-section variables)."""
    sampler = sampler or Sampler(L.patch)
    parts = []
    for k in range(1, mu.n):
        c = iota_rho_section(L, mu[k])
        parts.append(residual_check(f"algebraic_k{k}", mu[k - 1] - c, sampler, tol, terms=[mu[k - 1], c]))
    return combine("algebraic_condition", parts, tol)


# ---------------------------------------------------------------------------
# translation


def gnlsm_to_hms(data: SigmaTargetData, n: int | None = None) -> tuple[MomentumData, PrePlecticForm]:
    """mu_k = eps_k tmu_k and omega = (-1)^(n-1) tilde H."""
    n = data.n if n is None else n
    if n != data.n:
        raise ShapeError("n does not match the sigma data")
    mu = MomentumData(n, [_flip(t, eps(n, k)) for k, t in enumerate(data.tmu)])
    return mu, PrePlecticForm(n, _flip(data.H_tilde, omega_sign(n)))


def hms_to_gnlsm(mu: MomentumData, P: PrePlecticForm, g: MetricField) -> SigmaTargetData:
    """Inverse of :func:`gnlsm_to_hms` (with tmu_n absent)."""
    n = P.n
    return SigmaTargetData(g, _flip(P.omega, omega_sign(n)), [_flip(m, eps(n, k)) for k, m in enumerate(mu.mu)])


@dataclass
class RoundTrip:
    """Both sides of the gauge-invariance equivalence, evaluated separately."""

    sigma_side: bool
    hms_side: bool
    checks: dict = field(default_factory=dict)
    identity_residual: float = 0.0

    @property
    def holds(self) -> bool:
        return self.sigma_side == self.hms_side

    def as_check(self, tol: float) -> CheckResult:
        return CheckResult(
            "sigma_roundtrip",
            self.holds and self.identity_residual <= tol,
            self.identity_residual,
            tol,
            0.0,
            None,
            {"sigma_side": self.sigma_side, "hms_side": self.hms_side, "parts": {k: v.passed for k, v in self.checks.items()}},
        )


def gauge_invariance_roundtrip(
    L: LieAlgebroidModel, conn: ConnectionData | None, data: SigmaTargetData, sampler: Sampler | None = None, tol: float = DEFAULT_TOL
) -> RoundTrip:
    """Evaluate (gnlsm and contraction) and (translated hms and algebraic condition).

    ``identity_residual`` is the largest |hms_k - s_k gnlsm_k| over degrees,
    which vanishes for every input; the verdicts are compared separately.
    """
    sampler = sampler or Sampler(L.patch)
    g1 = gnlsm_check(L, conn, data, sampler, tol)
    c1 = contraction_check(L, data, sampler, tol)
    mu, P = gnlsm_to_hms(data)
    h2 = hms_check(L, conn, P, mu, sampler, tol)
    a2 = algebraic_condition_check(L, mu, sampler, tol)
    worst = 0.0
    by_k = {d.k: d.residual for d in hms_residuals(L, conn, P, mu)}
    for s in gnlsm_residuals(L, conn, data):
        diff_field = by_k[s.k] - _flip(s.residual, s.hms_sign)
        worst = max(worst, sampler.max_abs(diff_field.values())[0])
    return RoundTrip(
        sigma_side=g1.passed and c1.passed,
        hms_side=h2.passed and a2.passed,
        checks={"gnlsm": g1, "contraction": c1, "hms": h2, "algebraic_condition": a2},
        identity_residual=worst,
    )
