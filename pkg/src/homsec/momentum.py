"""Pre-n-plectic forms, interior products with the anchor and momentum section residuals."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .algebroid import LieAlgebroidModel, _bracket_coeffs, e_differential, frame_section, homology_boundary, lie_kernel_basis_constant
from .connection import ConnectionData, covariantized_anchor, nabla
from .expr import mul, neg, total
from .residuals import DEFAULT_TOL, CheckResult, Sampler, combine, residual_check
from .signs import increasing, remove_at
from .tensor import BundleShape, MixedField, ShapeError, contract_TM, de_rham, pair_E

__all__ = [
    "PrePlecticForm",
    "MomentumData",
    "PreconditionError",
    "iota_rho_k",
    "hms_residuals",
    "hms_check",
    "homotopy_hamiltonian_check",
    "equivariance_residual",
    "equivariance_check",
    "kernel_pairing_check",
    "weak_hms_residual",
    "weak_hms_check",
    "nilpotency_report",
]


class PreconditionError(ValueError):
    """An input violates the stated precondition of an operation."""

    def __init__(self, message: str, norm: float | None = None):
        self.norm = norm
        super().__init__(message if norm is None else f"{message} (max |residual| = {norm:.3e})")


class PrePlecticForm:
    """A closed (n+1)-form; closedness is checked by :meth:`closed_check`, not on construction."""

    def __init__(self, n: int, omega: MixedField):
        if n < 1:
            raise ShapeError("n must be positive")
        if omega.sig != (0, n + 1, 0, 0):
            raise ShapeError(f"expected a pure {n + 1}-form, got signature {omega.sig}")
        self.n = n
        self.omega = omega
        self.shape = omega.shape

    def closed_check(self, sampler: Sampler | None = None, tol: float = DEFAULT_TOL) -> CheckResult:
        sampler = sampler or Sampler(self.shape.patch)
        return residual_check("plectic_closed", de_rham(self.omega), sampler, tol, terms=[self.omega])

    def on_shape(self, shape: BundleShape) -> "PrePlecticForm":
        """The same form regarded on a bundle of another rank over the same patch."""
        if shape.patch != self.shape.patch:
            raise ShapeError("different base patch")
        return PrePlecticForm(self.n, MixedField(shape, self.omega.sig, dict(self.omega.comps)))


class MomentumData:
    """mu_0 .. mu_{n-1} with mu_k of signature (0, k, 0, n-k)."""

    def __init__(self, n: int, mu: Sequence[MixedField]):
        mu = list(mu)
        if len(mu) != n:
            raise ShapeError(f"need {n} components mu_0..mu_{n - 1}, got {len(mu)}")
        for k, m in enumerate(mu):
            if m.sig != (0, k, 0, n - k):
                raise ShapeError(f"mu_{k} must have signature {(0, k, 0, n - k)}, got {m.sig}")
        self.n = n
        self.mu = mu

    @classmethod
    def zero(cls, shape: BundleShape, n: int) -> "MomentumData":
        return cls(n, [MixedField.zero(shape, (0, k, 0, n - k)) for k in range(n)])

    def __getitem__(self, k: int) -> MixedField:
        return self.mu[k]

    def map(self, fn) -> "MomentumData":
        """Apply ``fn(k, mu_k)`` to every component."""
        return MomentumData(self.n, [fn(k, m) for k, m in enumerate(self.mu)])


def iota_rho_k(L: LieAlgebroidModel, P: PrePlecticForm, k: int) -> MixedField:
    """(iota^k omega)(e_1..e_k) = omega(rho(e_k), .., rho(e_1), ..), signature (0, n+1-k, 0, k)."""
    n = P.n
    if not 1 <= k <= n + 1:
        raise ValueError(f"k must lie in 1..{n + 1}")
    omega = P.omega if P.shape == L.shape else P.on_shape(L.shape).omega
    r = L.rank
    out_sig = (0, n + 1 - k, 0, k)
    if k > r:
        return MixedField.zero(L.shape, out_sig)
    rv = [L.rho_vector(a) for a in range(r)]
    entries = []
    for A in increasing(r, k):
        f = omega
        for a in reversed(A):  # rho(e_k) goes into the first slot
            f = contract_TM(rv[a], f)
        for (_, J, _, _), v in f.items():
            entries.append((((), J, (), A), v))
    return MixedField.from_entries(L.shape, out_sig, entries)


@dataclass
class DegreeResidual:
    """Residual of the equation in form degree k, living in Omega^k(M, wedge^(n+1-k) E*)."""

    k: int
    residual: MixedField
    terms: list


def hms_residuals(L: LieAlgebroidModel, conn: ConnectionData | None, P: PrePlecticForm, mu: MomentumData) -> list[DegreeResidual]:
    """R_n .. R_0 with R_k = nabla mu_{k-1} + E_d mu_k + iota^{n+1-k} omega (absent terms dropped)."""
    n = P.n
    if mu.n != n:
        raise ShapeError("momentum data and plectic form disagree on n")
    out = []
    for k in range(n, -1, -1):
        terms = [iota_rho_k(L, P, n + 1 - k)]
        if k >= 1:
            terms.append(nabla(conn, mu[k - 1]))
        if k <= n - 1:
            terms.append(e_differential(L, mu[k]))
        res = terms[0]
        for t in terms[1:]:
            res = res + t
        assert res.sig == (0, k, 0, n + 1 - k)
        out.append(DegreeResidual(k, res, terms))
    return out


def hms_check(L, conn, P, mu, sampler: Sampler | None = None, tol: float = DEFAULT_TOL, name: str = "hms") -> CheckResult:
    sampler = sampler or Sampler(L.patch)
    parts = [residual_check(f"{name}_R{d.k}", d.residual, sampler, tol, terms=d.terms) for d in hms_residuals(L, conn, P, mu)]
    return combine(name, parts, tol)


def nilpotency_report(L, conn, mu: MomentumData, sampler: Sampler | None = None) -> dict:
    """Informational: max |nabla^2 mu| and max |(nabla + E_d)^2 mu| (neither is required to vanish)."""
    sampler = sampler or Sampler(L.patch)

    def D(f):
        return [nabla(conn, f), e_differential(L, f)]

    nn = 0.0
    sq: dict = {}
    for m in mu.mu:
        nn = max(nn, sampler.max_abs(nabla(conn, nabla(conn, m)).values())[0])
        for g in D(m):
            for h in D(g):
                sq[h.sig] = h if h.sig not in sq else sq[h.sig] + h
    tot = max([sampler.max_abs(f.values())[0] for f in sq.values()] or [0.0])
    return {"nabla_squared": nn, "total_squared": tot}


def homotopy_hamiltonian_check(L, conn, P, mu, sampler: Sampler | None = None, tol: float = DEFAULT_TOL) -> CheckResult:
    sampler = sampler or Sampler(L.patch)
    h = hms_check(L, conn, P, mu, sampler, tol)
    ip = iota_rho_k(L, P, 1)
    c = residual_check("nabla_iota_rho_omega", nabla(conn, ip), sampler, tol, terms=[ip])
    return combine("homotopy_hamiltonian", [h, c], tol, details={"informational": nilpotency_report(L, conn, mu, sampler)})


# ---------------------------------------------------------------------------
# equivariance and the Lie kernel


def equivariance_residual(L: LieAlgebroidModel, conn: ConnectionData | None, alpha: MixedField) -> tuple[list[MixedField], list]:
    """Per frame direction a: rho^nabla(e_a) alpha - sum_i (-1)^(i-1) alpha([e_a, e_i]^nabla, ..).

    Returns (residual fields, term fields).
    """
    p, k, q, m = alpha.sig
    if p or q:
        raise ShapeError("equivariance is defined for fields of signature (0,k,0,m)")
    r = L.rank
    B = _bracket_coeffs(L, conn)
    res, terms = [], []
    for a in range(r):
        lhs = covariantized_anchor(L, conn, frame_section(L.shape, a), alpha)

        def comp(key, a=a):
            _, J, _, A = key
            out = []
            for i, Ai in enumerate(A):
                rest = remove_at(A, i)
                s = total(mul(B[a][Ai][c], alpha.get((), J, (), (c,) + rest)) for c in range(r) if not B[a][Ai][c].is_zero)
                out.append(s if i % 2 == 0 else neg(s))
            return total(out)

        rhs = MixedField.build(L.shape, alpha.sig, comp)
        res.append(lhs - rhs)
        terms.extend([lhs, rhs])
    return res, terms


def equivariance_check(L, conn, alphas, sampler: Sampler | None = None, tol: float = DEFAULT_TOL, name: str = "equivariance") -> CheckResult:
    """Equivariance of one field or of every field in a list (e.g. all mu_k)."""
    sampler = sampler or Sampler(L.patch)
    if isinstance(alphas, MixedField):
        alphas = [alphas]
    parts = []
    for idx, al in enumerate(alphas):
        res, terms = equivariance_residual(L, conn, al)
        parts.append(residual_check(f"{name}_{idx}", res, sampler, tol, terms=terms))
    return combine(name, parts, tol)


def _require_kernel(L, conn, w: MixedField, sampler: Sampler, tol: float):
    dw = homology_boundary(L, w, conn)
    c = residual_check("lie_kernel", dw, sampler, tol, terms=[w])
    if not c.passed:
        raise PreconditionError("w is not in the Lie kernel", c.max_residual)


def kernel_pairing_check(L, conn, alpha: MixedField, w: MixedField, sampler: Sampler | None = None, tol: float = DEFAULT_TOL) -> CheckResult:
    """<E_d alpha | w> for w in the Lie kernel (vanishes when alpha is equivariant)."""
    sampler = sampler or Sampler(L.patch)
    _require_kernel(L, conn, w, sampler, tol)
    Ea = e_differential(L, alpha)
    return residual_check("kernel_pairing", pair_E(Ea, w), sampler, tol, terms=[Ea])


def weak_hms_residual(
    L: LieAlgebroidModel,
    conn: ConnectionData | None,
    P: PrePlecticForm,
    mu: MomentumData,
    w: MixedField,
    k: int,
    sampler: Sampler | None = None,
    tol: float = DEFAULT_TOL,
) -> tuple[MixedField, list]:
    """<nabla mu_{k-1} + iota^{n+1-k} omega | w> as a k-form, for 1 <= k <= n and kernel w."""
    n = P.n
    if not 1 <= k <= n:
        raise ValueError(f"k must lie in 1..{n}")
    if w.sig != (0, 0, n + 1 - k, 0):
        raise ShapeError(f"w must be a section of wedge^{n + 1 - k} E")
    sampler = sampler or Sampler(L.patch)
    _require_kernel(L, conn, w, sampler, tol)
    a = nabla(conn, mu[k - 1])
    b = iota_rho_k(L, P, n + 1 - k)
    return pair_E(a + b, w), [pair_E(a, w), pair_E(b, w)]


def weak_hms_check(L, conn, P, mu, sampler: Sampler | None = None, tol: float = DEFAULT_TOL, basis: dict | None = None) -> CheckResult:
    """Weak equations for every constant Lie kernel basis element in every degree.

    ``basis`` maps k to a list of kernel elements; by default constant
    kernel bases are computed (which needs constant structure data).
    """
    sampler = sampler or Sampler(L.patch)
    n = P.n
    parts = []
    for k in range(1, n + 1):
        m = n + 1 - k
        if m > L.rank:
            continue
        ws = basis[k] if basis is not None else lie_kernel_basis_constant(L, m, conn, sampler)
        for j, w in enumerate(ws):
            res, terms = weak_hms_residual(L, conn, P, mu, w, k, sampler, tol)
            parts.append(residual_check(f"weak_hms_k{k}_{j}", res, sampler, tol, terms=terms))
    return combine("weak_hms", parts, tol)
