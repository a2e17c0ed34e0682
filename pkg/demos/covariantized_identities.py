"""What survives when brackets are covariantized with a connection.

With a connection on E, the covariantized bracket
[u, v]^nabla = nabla_{rho u} v - nabla_{rho v} u - [u, v] is minus the
E-torsion, so it is C-infinity linear in both slots. The covariantized
anchor identity holds for every connection. The covariantized Jacobi sum
vanishes without a connection but not for a generic one. The Lie algebroid
differential can always be rewritten with the connection.
"""
import numpy as np

from homsec import gallery
from homsec.algebroid import bracket, e_differential, frame_section
from homsec.connection import covariant_anchor_identity, covariant_e_differential, covariantized_bracket
from homsec.expr import Sym
from homsec.randomfields import random_connection, random_field
from homsec.residuals import Sampler

L = gallery.so3_action().model
s = Sampler(L.patch)
conn = random_connection(L.shape, np.random.default_rng(5))
e = [frame_section(L.shape, a) for a in range(3)]
x, y = Sym("x"), Sym("y")


def worst(field):
    vals = field if isinstance(field, list) else field.values()
    return s.max_abs(vals)[0] if vals else 0.0


f = x * x + y
tensorial = covariantized_bracket(L, conn, e[0], e[1].scale(f)) - covariantized_bracket(L, conn, e[0], e[1]).scale(f)
leibniz = bracket(L, e[0], e[1].scale(f)) - bracket(L, e[0], e[1]).scale(f) - e[1].scale(L.act(0, f))
print(f"[e1, f e2]^nabla - f [e1, e2]^nabla : {worst(tensorial):.2e}")
print(f"plain Leibniz defect                : {worst(leibniz):.2e}")
print(f"anchor identity, random connection  : {worst(covariant_anchor_identity(L, conn)):.2e}")


def jacobi(c):
    cb = lambda u, v: covariantized_bracket(L, c, u, v)
    return cb(cb(e[0], e[1]), e[2]) + cb(cb(e[1], e[2]), e[0]) + cb(cb(e[2], e[0]), e[1])


print(f"Jacobi sum, no connection           : {worst(jacobi(None)):.2e}")
print(f"Jacobi sum, random connection       : {worst(jacobi(conn)):.2e}")

for m in range(3):
    alpha = random_field(L.shape, (0, 0, 0, m), np.random.default_rng(m))
    r = covariant_e_differential(L, conn, alpha) - e_differential(L, alpha)
    print(f"covariant E_d - E_d, degree {m}       : {worst(r):.2e}")
