"""The homological vector field of a Lie algebroid.

On functions of x and odd coordinates q^a, Q acts by
Q = rho^i_a q^a d/dx^i - (1/2) C^c_ab q^a q^b d/dq^c.
Q^2 = 0 is the same statement as the algebroid axioms, so a perturbed
anchor or a non-Jacobi bracket shows up as a nonzero Q^2.
"""
from homsec import gallery
from homsec.algebroid import LieAlgebroidModel, check_lie_algebroid
from homsec.expr import ONE, ZERO, Sym
from homsec.supergeo import SuperPolynomial, build_Q, q_squared_check
from homsec.tensor import BundleShape, Patch

so3 = gallery.so3_action().model
Q = build_Q(so3)
q3 = Q(SuperPolynomial.generator(so3.shape, 2))
print("Q(q^3) terms:", {k: str(v) for k, v in q3.terms.items()})
print("Q(x) terms  :", {k: str(v) for k, v in Q(SuperPolynomial.const(so3.shape, Sym("x"))).terms.items()})

x = Sym("x")
bent = LieAlgebroidModel.from_arrays(BundleShape(Patch(["x", "y"]), 2), [[ONE, ZERO], [0.3 * x, ONE]], {})
models = [("so3_r3", so3), ("so3, anchor perturbed", gallery.so3_action(0.1).model), ("tangent, bent anchor", bent)]
for label, L in models:
    c = q_squared_check(L)
    print(f"{label:24s} Q^2 max={c.max_residual:.2e}  algebroid axioms hold={check_lie_algebroid(L).passed}")
