"""Twisted Poisson structures as momentum data of degree zero.

A bivector pi and a closed 3-form H are twisted Poisson when
[pi, pi] equals the triple contraction of H. The constructor checks this,
then the cotangent algebroid carries pi itself as a degree-zero momentum
section. Accepted and rejected inputs are both shown.
"""
from homsec import gallery
from homsec.algebroid import check_lie_algebroid, e_differential
from homsec.expr import ONE, Sym
from homsec.momentum import PreconditionError, iota_rho_k
from homsec.poisson import multivector
from homsec.residuals import Sampler
from homsec.tensor import BundleShape, Patch, form


def degree_zero_residual(fr):
    L, P, mu = fr.model, fr.plectic, fr.momentum
    res = e_differential(L, mu[0]) + iota_rho_k(L, P, P.n + 1)
    return Sampler(L.patch).max_abs(res.values())[0]


for label, make in [("twisted, R^4", gallery.twisted_r4), ("R-Poisson, R^4", gallery.r_poisson_r4), ("R-Poisson, R^3", gallery.r_poisson_r3)]:
    fr = make()
    print(f"{label:16s} algebroid={check_lie_algebroid(fr.model).passed}  residual={degree_zero_residual(fr):.2e}")

# pi = d_a ^ d_b + (1 + a^2)^-1 d_c ^ d_d needs H = 2a da ^ dc ^ dd
shape = BundleShape(Patch(["a", "b", "c", "d"]), 1)
a = Sym("a")
pi = multivector(shape, 2, {(0, 1): ONE, (2, 3): ONE / (ONE + a * a)})
for label, H in [("H = 2a", form(shape, 3, {(0, 2, 3): 2 * a})), ("H = -2a", form(shape, 3, {(0, 2, 3): -2 * a})), ("H = d da^db^dc", form(shape, 3, {(0, 1, 2): Sym("d")}))]:
    try:
        fr = gallery.make_twisted_poisson(pi, H)
        print(f"{label:16s} accepted, residual={degree_zero_residual(fr):.2e}")
    except PreconditionError as e:
        print(f"{label:16s} rejected: {e}")
