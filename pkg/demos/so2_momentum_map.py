"""Rotations of the plane as a Lie algebroid with a momentum section.

The so(2) action x -> rotation on R^2 carries the symplectic form dx ^ dy.
The Hamiltonian (x^2 + y^2)/2 generates it, and three formulations of
"momentum map" agree on it. Adding x^2 to the Hamiltonian breaks all three.

    python demos/so2_momentum_map.py
"""
from homsec import gallery
from homsec.expr import Sym
from homsec.momentum import hms_check, hms_residuals
from homsec.momentum_map import hmm_check, hms_to_hmm, momentum_map_equations
from homsec.residuals import Sampler
from homsec.tensor import e_form


def three_way(inst):
    A, P, mu = inst.action, inst.plectic, inst.momentum
    s = Sampler(A.patch)
    return [
        hms_check(A.model, None, P, mu, s),
        hmm_check(A, P, hms_to_hmm(mu), s),
        momentum_map_equations(A, P, mu[0], s),
    ]


inst = gallery.make_symplectic_momentum_example("so2")
print("anchor:", [str(inst.model.anchor(i, 0)) for i in range(2)])
print("mu_0  :", inst.momentum[0].get((), (), (), (0,)))

for r in hms_residuals(inst.model, None, inst.plectic, inst.momentum):
    print(f"  degree {r.k} residual sig {r.residual.sig}")

print("\nclean Hamiltonian")
for c in three_way(inst):
    print(f"  {c.name:28s} passed={c.passed}  max={c.max_residual:.2e}")

x = Sym("x")
bad = inst.momentum.map(lambda k, m: m + e_form(m.shape, 1, {(0,): x * x}))
inst_bad = gallery.MomentumInstance(inst.model, inst.plectic, bad, inst.action)
print("\nHamiltonian + x^2")
for c in three_way(inst_bad):
    print(f"  {c.name:28s} passed={c.passed}  max={c.max_residual:.2e}")
