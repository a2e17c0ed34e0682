"""Multivector fields, the Schouten bracket and Lie algebroids on T*M.

Multivectors are handled as odd functions of fibre coordinates theta_i
(degree one, paired with dx^i), reusing the Grassmann algebra of
:mod:`homsec.supergeo`.  The Schouten bracket is

    [P, Q] = sum_i (dP/dtheta_i)_right d_i Q - (-1)^((p-1)(q-1)) (dQ/dtheta_i)_right d_i P

which restricts to the Lie bracket on vector fields.
"""
from __future__ import annotations

from itertools import product

from .algebroid import LieAlgebroidModel
from .expr import diff, mul, neg, total
from .signs import increasing
from .supergeo import SuperPolynomial
from .tensor import BundleShape, MixedField, ShapeError

__all__ = [
    "multivector",
    "schouten",
    "sharp_pairing",
    "cotangent_algebroid",
    "TWIST_SIGN",
    "SCHOUTEN_SIGN",
]

# Sign of the H term in the structure functions of the twisted algebroid.
# With anchor -pi^sharp only this sign makes (rho, C) a Lie algebroid for data
# with (1/2)[pi, pi] = -<(x)^3 pi, H> in the normalisation above.
TWIST_SIGN = -1
# The bracket in the twisted and R-Poisson relations is SCHOUTEN_SIGN * schouten(.);
# with this choice E_d pi = -iota^3 H holds for every accepted twisted pair.
SCHOUTEN_SIGN = -1


def _theta_shape(shape: BundleShape) -> BundleShape:
    return BundleShape(shape.patch, shape.dim)


def _to_poly(P: MixedField) -> SuperPolynomial:
    p, k, q, m = P.sig
    if k or q or m:
        raise ShapeError("expected a multivector field (TM-up block only)")
    return SuperPolynomial(_theta_shape(P.shape), {I: v for (I, _, _, _), v in P.items()})


def _from_poly(poly: SuperPolynomial, shape: BundleShape, p: int) -> MixedField:
    return MixedField(shape, (p, 0, 0, 0), {(I, (), (), ()): v for I, v in poly.terms.items() if len(I) == p})


def multivector(shape: BundleShape, p: int, comps) -> MixedField:
    """A p-vector field from ``{(i1..ip): value}`` (any index order)."""
    return MixedField.from_entries(shape, (p, 0, 0, 0), [((idx, (), (), ()), v) for idx, v in comps.items()])


def _d_theta_right(poly: SuperPolynomial, i: int) -> SuperPolynomial:
    out = {}
    for I, v in poly.terms.items():
        if i in I:
            pos = I.index(i)
            s = (len(I) - 1 - pos) % 2
            out[I[:pos] + I[pos + 1:]] = neg(v) if s else v
    return SuperPolynomial(poly.shape, out)


def schouten(P: MixedField, Q: MixedField) -> MixedField:
    """Schouten bracket of a p-vector and a q-vector, a (p+q-1)-vector."""
    if P.shape != Q.shape:
        raise ShapeError("multivectors on different shapes")
    p, q = P.sig[0], Q.sig[0]
    if p + q - 1 < 0:
        raise ShapeError("bracket of two functions is not defined here")
    A, B = _to_poly(P), _to_poly(Q)
    out = SuperPolynomial(A.shape)
    sign = -1 if ((p - 1) * (q - 1)) % 2 else 1
    for i in range(P.shape.dim):
        out = out + _d_theta_right(A, i) * B.d_x(i)
        t = _d_theta_right(B, i) * A.d_x(i)
        out = out - t if sign > 0 else out + t
    return _from_poly(out, P.shape, p + q - 1)


def sharp_pairing(pi: MixedField, H: MixedField) -> MixedField:
    """<(x)^k pi, H>: the k-vector with components pi^{i1 a1} .. pi^{ik ak} H_{a1..ak}."""
    if pi.sig != (2, 0, 0, 0):
        raise ShapeError("pi must be a bivector")
    k = H.sig[1]
    if H.sig != (0, k, 0, 0):
        raise ShapeError("H must be a pure form")
    d = pi.shape.dim

    def comp(key):
        I = key[0]
        terms = []
        for A in product(range(d), repeat=k):
            if len(set(A)) < k:
                continue
            h = H.get((), A)
            if h.is_zero:
                continue
            f = h
            for i, a in zip(I, A):
                f = mul(pi.get((i, a)), f)
            terms.append(f)
        return total(terms)

    return MixedField.build(pi.shape, (k, 0, 0, 0), comp)


def cotangent_algebroid(pi: MixedField, H: MixedField | None = None, name: str | None = None) -> LieAlgebroidModel:
    """E = T*M with frame e_a = dx^a, anchor -pi^sharp and minus the (twisted) Koszul bracket.

    rho^i_a = pi^{ia};  C^k_{ab} = -d_k pi^{ab} + pi^{ai} pi^{bj} H_{jik} (TWIST_SIGN = -1).
    """
    if pi.sig != (2, 0, 0, 0):
        raise ShapeError("pi must be a bivector")
    d = pi.shape.dim
    shape = BundleShape(pi.shape.patch, d)
    coords = shape.coords
    rho = [[pi.get((i, a)) for i in range(d)] for a in range(d)]
    C = {}
    for a, b in increasing(d, 2):
        for k in range(d):
            terms = [neg(diff(pi.get((a, b)), coords[k]))]
            if H is not None:
                if H.sig != (0, 3, 0, 0):
                    raise ShapeError("the twist must be a 3-form")
                tw = total(mul(mul(pi.get((a, i)), pi.get((b, j))), H.get((), (j, i, k))) for i in range(d) for j in range(d) if i != j and j != k and i != k)
                terms.append(neg(tw) if TWIST_SIGN > 0 else tw)
            C[(a, b, k)] = total(terms)
    return LieAlgebroidModel.from_arrays(shape, rho, C, name=name)
