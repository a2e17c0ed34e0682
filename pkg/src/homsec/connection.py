"""Connections on E, E-connections, torsion, curvatures and covariant forms.

Conventions (see the sign table): with the connection 1-form
omega^b_{ai},

    nabla_i e_a = -omega^b_{ai} e_b
    nabla_i u^a = d_i u^a - omega^a_{bi} u^b
    nabla_i b_a = d_i b_a + omega^b_{ai} b_b
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .algebroid import LieAlgebroidModel, anchor_action, bracket, frame_section
from .expr import Expr, add, as_expr, diff, mul, neg, total
from .residuals import DEFAULT_TOL, CheckResult, Sampler, residual_check
from .signs import increasing, remove_at
from .tensor import BundleShape, MixedField, ShapeError, vector

__all__ = [
    "ConnectionData",
    "CurvatureReport",
    "covariant_partial",
    "nabla",
    "nabla_along",
    "e_connection_TM",
    "e_connection_E",
    "e_torsion",
    "torsion_formula",
    "curvature",
    "e_curvature",
    "basic_curvature",
    "basic_curvature_formula",
    "curvatures",
    "covariantized_bracket",
    "covariantized_anchor",
    "covariant_e_differential",
    "covariant_anchor_identity",
]


class ConnectionData:
    """Connection 1-form omega^b_{ai}, stored with signature (0,1,1,1) as get((),(i,),(b,),(a,))."""

    def __init__(self, omega: MixedField):
        if omega.sig != (0, 1, 1, 1):
            raise ShapeError("connection 1-form must have signature (0,1,1,1)")
        self.omega = omega
        self.shape = omega.shape

    @classmethod
    def zero(cls, shape: BundleShape) -> "ConnectionData":
        return cls(MixedField.zero(shape, (0, 1, 1, 1)))

    @classmethod
    def from_entries(cls, shape: BundleShape, entries: Mapping[tuple[int, int, int], object]) -> "ConnectionData":
        """``entries[(i, a, b)] = omega^b_{ai}``."""
        return cls(MixedField.from_entries(shape, (0, 1, 1, 1), [(((), (i,), (b,), (a,)), as_expr(v)) for (i, a, b), v in entries.items()]))

    def w(self, b: int, a: int, i: int) -> Expr:
        """omega^b_{ai}"""
        return self.omega.comps[((), (i,), (b,), (a,))]

    def is_zero(self) -> bool:
        return self.omega.is_structurally_zero()


def _conn(conn, shape) -> ConnectionData:
    return ConnectionData.zero(shape) if conn is None else conn


def covariant_partial(conn: ConnectionData | None, a: MixedField, i: int) -> MixedField:
    """Componentwise nabla_i (no antisymmetrisation); TM indices are differentiated plainly."""
    conn = _conn(conn, a.shape)
    r = a.shape.rank
    x = a.shape.coords[i]

    def comp(key):
        up, down, eup, edown = key
        terms = [diff(a.comps[key], x)]
        for s, A_s in enumerate(eup):
            for c in range(r):
                w = conn.w(A_s, c, i)
                if not w.is_zero:
                    terms.append(neg(mul(w, a.get(up, down, eup[:s] + (c,) + eup[s + 1:], edown))))
        for s, B_s in enumerate(edown):
            for c in range(r):
                w = conn.w(c, B_s, i)
                if not w.is_zero:
                    terms.append(mul(w, a.get(up, down, eup, edown[:s] + (c,) + edown[s + 1:])))
        return total(terms)

    return MixedField.build(a.shape, a.sig, comp)


def nabla(conn: ConnectionData | None, a: MixedField) -> MixedField:
    """Exterior covariant derivative; the new TM-down index is alternated like de_rham."""
    p, k, q, m = a.sig
    if p:
        raise ShapeError("nabla acts on forms with values in E tensors")
    parts = [covariant_partial(conn, a, i) for i in range(a.shape.dim)]

    def comp(key):
        up, K, eup, edown = key
        terms = []
        for l, jl in enumerate(K):
            t = parts[jl].comps[(up, remove_at(K, l), eup, edown)]
            terms.append(t if l % 2 == 0 else neg(t))
        return total(terms)

    return MixedField.build(a.shape, (0, k + 1, q, m), comp)


def nabla_along(conn: ConnectionData | None, X: MixedField, a: MixedField) -> MixedField:
    """nabla_X a = X^i nabla_i a, componentwise."""
    if X.sig != (1, 0, 0, 0):
        raise ShapeError("direction must be a vector field")
    d = a.shape.dim
    acc = MixedField.zero(a.shape, a.sig)
    for i in range(d):
        Xi = X.comps[((i,), (), (), ())]
        if not Xi.is_zero:
            acc = acc + covariant_partial(conn, a, i).scale(Xi)
    return acc


def _section_coeffs(e: MixedField) -> list[Expr]:
    if e.sig != (0, 0, 1, 0):
        raise ShapeError("expected a section of E")
    return [e.comps[((), (), (a,), ())] for a in range(e.shape.rank)]


def e_connection_TM(L: LieAlgebroidModel, conn: ConnectionData | None, e: MixedField, v: MixedField) -> MixedField:
    """Opposite E-connection on TM: [rho(e), v] + rho(nabla_v e), for a section e and vector v."""
    conn = _conn(conn, L.shape)
    if v.sig != (1, 0, 0, 0):
        raise ShapeError("v must be a vector field")
    d, r = L.dim, L.rank
    coords = L.shape.coords
    ea = _section_coeffs(e)
    vv = [v.comps[((i,), (), (), ())] for i in range(d)]
    out = []
    for i in range(d):
        terms = []
        for a in range(r):
            if ea[a].is_zero:
                continue
            inner = [L.act(a, vv[i])]
            for j in range(d):
                if vv[j].is_zero:
                    continue
                inner.append(neg(mul(diff(L.anchor(i, a), coords[j]), vv[j])))
                for b in range(r):
                    w = conn.w(b, a, j)
                    if not w.is_zero:
                        inner.append(neg(mul(mul(L.anchor(i, b), w), vv[j])))
            terms.append(mul(ea[a], total(inner)))
        out.append(total(terms))
    return vector(L.shape, out)


def e_connection_E(L: LieAlgebroidModel, conn: ConnectionData | None, e: MixedField, a: MixedField) -> MixedField:
    """Standard E-connection: nabla_{rho(e)} a, componentwise."""
    d, r = L.dim, L.rank
    ea = _section_coeffs(e)
    X = vector(L.shape, [total(mul(ea[b], L.anchor(i, b)) for b in range(r) if not ea[b].is_zero) for i in range(d)])
    return nabla_along(conn, X, a)


def e_torsion(L: LieAlgebroidModel, conn: ConnectionData | None) -> MixedField:
    """T(e_a, e_b) = E-nabla_{e_a} e_b - E-nabla_{e_b} e_a - [e_a, e_b], from the definition."""
    r = L.rank
    frames = [frame_section(L.shape, a) for a in range(r)]
    entries = []
    for a, b in increasing(r, 2):
        t = e_connection_E(L, conn, frames[a], frames[b]) - e_connection_E(L, conn, frames[b], frames[a]) - bracket(L, frames[a], frames[b])
        for c in range(r):
            entries.append((((), (), (c,), (a, b)), t.comps[((), (), (c,), ())]))
    return MixedField.from_entries(L.shape, (0, 0, 1, 2), entries)


def torsion_formula(L: LieAlgebroidModel, conn: ConnectionData | None) -> MixedField:
    """T^c_{ab} = -C^c_{ab} - rho^i_a omega^c_{bi} + rho^i_b omega^c_{ai} in components."""
    conn = _conn(conn, L.shape)
    d = L.dim

    def comp(key):
        _, _, (c,), (a, b) = key
        terms = [neg(L.struct(c, a, b))]
        for i in range(d):
            terms.append(neg(mul(L.anchor(i, a), conn.w(c, b, i))))
            terms.append(mul(L.anchor(i, b), conn.w(c, a, i)))
        return total(terms)

    return MixedField.build(L.shape, (0, 0, 1, 2), comp)


def curvature(L_or_shape, conn: ConnectionData | None) -> MixedField:
    """R^c_{ija}: the e_c component of [nabla_i, nabla_j] e_a (signature (0,2,1,1))."""
    shape = L_or_shape.shape if isinstance(L_or_shape, LieAlgebroidModel) else L_or_shape
    d, r = shape.dim, shape.rank
    entries = []
    for a in range(r):
        ea = frame_section(shape, a)
        first = [covariant_partial(conn, ea, j) for j in range(d)]
        for i, j in increasing(d, 2):
            comm = covariant_partial(conn, first[j], i) - covariant_partial(conn, first[i], j)
            for c in range(r):
                entries.append((((), (i, j), (c,), (a,)), comm.comps[((), (), (c,), ())]))
    return MixedField.from_entries(shape, (0, 2, 1, 1), entries)


def e_curvature(L: LieAlgebroidModel, conn: ConnectionData | None) -> list[MixedField]:
    """ER as a list over the argument c: ER[c] = ER(e_a, e_b) e_c with E-up d and E-down (a, b)."""
    r = L.rank
    frames = [frame_section(L.shape, a) for a in range(r)]
    out = []
    for c in range(r):
        entries = []
        for a, b in increasing(r, 2):
            lhs = e_connection_E(L, conn, frames[a], e_connection_E(L, conn, frames[b], frames[c]))
            rhs = e_connection_E(L, conn, frames[b], e_connection_E(L, conn, frames[a], frames[c]))
            br = bracket(L, frames[a], frames[b])
            val = lhs - rhs - e_connection_E(L, conn, br, frames[c])
            for dd in range(r):
                entries.append((((), (), (dd,), (a, b)), val.comps[((), (), (dd,), ())]))
        out.append(MixedField.from_entries(L.shape, (0, 0, 1, 2), entries))
    return out


def basic_curvature(L: LieAlgebroidModel, conn: ConnectionData | None) -> MixedField:
    """S^c_{iab} built from brackets and derivatives of sections.

    S(s, s')(X) = [s, nabla_X s'] - [s', nabla_X s] - nabla_X [s, s']
                  - nabla_{E-nabla_s X} s' + nabla_{E-nabla_s' X} s
    evaluated on frames s = e_a, s' = e_b, X = d_i.
    """
    d, r = L.dim, L.rank
    frames = [frame_section(L.shape, a) for a in range(r)]
    coord_vec = [vector(L.shape, [1 if j == i else 0 for j in range(d)]) for i in range(d)]
    entries = []
    for i in range(d):
        Xi = coord_vec[i]
        nab = [covariant_partial(conn, frames[a], i) for a in range(r)]
        opp = [e_connection_TM(L, conn, frames[a], Xi) for a in range(r)]
        for a, b in increasing(r, 2):
            val = (
                bracket(L, frames[a], nab[b])
                - bracket(L, frames[b], nab[a])
                - covariant_partial(conn, bracket(L, frames[a], frames[b]), i)
                - nabla_along(conn, opp[a], frames[b])
                + nabla_along(conn, opp[b], frames[a])
            )
            for c in range(r):
                entries.append((((), (i,), (c,), (a, b)), val.comps[((), (), (c,), ())]))
    return MixedField.from_entries(L.shape, (0, 1, 1, 2), entries)


def basic_curvature_formula(L: LieAlgebroidModel, conn: ConnectionData | None) -> MixedField:
    """S^c_{iab} = nabla_i T^c_{ab} + rho^j_a R^c_{jib} - rho^j_b R^c_{jia}.

    R^c_{jia} as returned by :func:`curvature`.  The placement of the two
    curvature terms is the one that agrees with :func:`basic_curvature`.
    """
    d = L.dim
    T = e_torsion(L, conn)
    R = curvature(L, conn)
    dT = [covariant_partial(conn, T, i) for i in range(d)]

    def comp(key):
        _, (i,), (c,), (a, b) = key
        terms = [dT[i].comps[((), (), (c,), (a, b))]]
        for j in range(d):
            terms.append(mul(L.anchor(j, a), R.get((), (j, i), (c,), (b,))))
            terms.append(neg(mul(L.anchor(j, b), R.get((), (j, i), (c,), (a,)))))
        return total(terms)

    return MixedField.build(L.shape, (0, 1, 1, 2), comp)


@dataclass
class CurvatureReport:
    T: MixedField
    R: MixedField
    ER: list
    S: MixedField
    S_formula: MixedField
    S_difference: MixedField

    def s_consistency(self, sampler: Sampler, tol: float = DEFAULT_TOL) -> CheckResult:
        return residual_check("basic_curvature_consistency", self.S_difference, sampler, tol, terms=[self.S, self.S_formula])


def curvatures(L: LieAlgebroidModel, conn: ConnectionData | None) -> CurvatureReport:
    S = basic_curvature(L, conn)
    S2 = basic_curvature_formula(L, conn)
    return CurvatureReport(e_torsion(L, conn), curvature(L, conn), e_curvature(L, conn), S, S2, S - S2)


# ---------------------------------------------------------------------------
# covariantised structures


def covariantized_bracket(L: LieAlgebroidModel, conn: ConnectionData | None, e1: MixedField, e2: MixedField) -> MixedField:
    """[e1, e2]^nabla = -T(e1, e2) (tensorial in both arguments)."""
    r = L.rank
    T = e_torsion(L, conn)
    u, v = _section_coeffs(e1), _section_coeffs(e2)

    def comp(key):
        c = key[2][0]
        return neg(total(mul(mul(u[a], v[b]), T.get((), (), (c,), (a, b))) for a in range(r) for b in range(r) if a != b))

    return MixedField.build(L.shape, (0, 0, 1, 0), comp)


def covariantized_anchor(L: LieAlgebroidModel, conn: ConnectionData | None, e: MixedField, alpha: MixedField) -> MixedField:
    """rho^nabla(e) alpha.

    For alpha in Gamma(wedge^m E*) this is nabla_{rho(e)} alpha.  A form part
    is acted on by the Lie derivative along rho(e) (the same operator that
    E_d uses), the E indices by the connection.
    """
    p, k, q, m = alpha.sig
    if p:
        raise ShapeError("covariantized_anchor acts on forms with E indices")
    conn = _conn(conn, L.shape)
    d, r = L.dim, L.rank
    ea = _section_coeffs(e)
    acc = MixedField.zero(L.shape, alpha.sig)
    for a in range(r):
        if ea[a].is_zero:
            continue
        rho_a = [L.anchor(j, a) for j in range(d)]

        def comp(key, rho_a=rho_a):
            up, down, eup, edown = key
            terms = []
            for s, A_s in enumerate(eup):
                for c in range(r):
                    w = total(mul(rho_a[j], conn.w(A_s, c, j)) for j in range(d))
                    if not w.is_zero:
                        terms.append(neg(mul(w, alpha.get(up, down, eup[:s] + (c,) + eup[s + 1:], edown))))
            for s, B_s in enumerate(edown):
                for c in range(r):
                    w = total(mul(rho_a[j], conn.w(c, B_s, j)) for j in range(d))
                    if not w.is_zero:
                        terms.append(mul(w, alpha.get(up, down, eup, edown[:s] + (c,) + edown[s + 1:])))
            return total(terms)

        part = anchor_action(L, a, alpha) + MixedField.build(L.shape, alpha.sig, comp)
        acc = acc + part.scale(ea[a])
    return acc


def covariant_e_differential(L: LieAlgebroidModel, conn: ConnectionData | None, alpha: MixedField) -> MixedField:
    """E_d written with rho^nabla and [,]^nabla."""
    p, k, q, m = alpha.sig
    if p or q:
        raise ShapeError("covariant_e_differential acts on fields of signature (0,k,0,m)")
    r = L.rank
    if m + 1 > r:
        return MixedField.zero(L.shape, (0, k, 0, m + 1))
    frames = [frame_section(L.shape, a) for a in range(r)]
    acted = [covariantized_anchor(L, conn, frames[a], alpha) for a in range(r)]
    T = e_torsion(L, conn)

    def comp(key):
        _, J, _, B = key
        terms = []
        for i, b in enumerate(B):
            t = acted[b].comps[((), J, (), remove_at(B, i))]
            terms.append(t if i % 2 == 0 else neg(t))
        for i in range(len(B)):
            for j in range(i + 1, len(B)):
                rest = remove_at(remove_at(B, j), i)
                s = neg(total(mul(T.get((), (), (c,), (B[i], B[j])), alpha.get((), J, (), (c,) + rest)) for c in range(r)))
                terms.append(s if (i + j) % 2 == 0 else neg(s))
        return total(terms)

    return MixedField.build(L.shape, (0, k, 0, m + 1), comp)


def covariant_anchor_identity(L: LieAlgebroidModel, conn: ConnectionData | None) -> list[Expr]:
    """rho_a^j nabla_j rho_b^i - rho_b^j nabla_j rho_a^i - rho^i_c [e_a, e_b]^nabla_c for a<b."""
    d, r = L.dim, L.rank
    T = e_torsion(L, conn)
    drho = [covariant_partial(conn, L.rho, j) for j in range(d)]
    out = []
    for a, b in increasing(r, 2):
        for i in range(d):
            x = total(mul(L.anchor(j, a), drho[j].comps[((i,), (), (), (b,))]) for j in range(d))
            y = total(mul(L.anchor(j, b), drho[j].comps[((i,), (), (), (a,))]) for j in range(d))
            z = total(mul(L.anchor(i, c), neg(T.get((), (), (c,), (a, b)))) for c in range(r))
            out.append(add(add(x, neg(y)), neg(z)))
    return out
