"""so(3) acting on R^3 by rotations: equivariance and weak momentum sections.

An E-form is equivariant when its E-Lie derivative along every frame section
vanishes. The squared radius is invariant, the coordinate x is not; pairing
their E-differentials with a constant kernel element shows the difference.
"""
from homsec import gallery
from homsec.algebroid import check_lie_algebroid, lie_kernel_basis_constant
from homsec.checks import run_checks
from homsec.expr import ONE, Sym
from homsec.momentum import equivariance_check, kernel_pairing_check
from homsec.tensor import MixedField, e_form

A = gallery.so3_action()
L, sh = A.model, A.shape
print("Lie algebroid:", check_lie_algebroid(L).passed)

for m in (1, 2, 3):
    print(f"constant kernel of the boundary on degree {m}: dim {len(lie_kernel_basis_constant(L, m))}")

x, y, z = (Sym(c) for c in "xyz")
w = MixedField.from_entries(sh, (0, 0, 1, 0), [(((), (), (1,), ()), ONE)])


def scalar(f):
    return MixedField(sh, (0, 0, 0, 0), {((), (), (), ()): f})


for label, f in [("x^2+y^2+z^2", x * x + y * y + z * z), ("x", x)]:
    c = kernel_pairing_check(L, None, scalar(f), w)
    print(f"pairing <E_d {label}, e_2>: passed={c.passed} max={c.max_residual:.3f}")

e1 = equivariance_check(L, None, e_form(sh, 1, {(0,): ONE}))
print(f"e^1 equivariant: {e1.passed} (residual {e1.max_residual:.2f})")

doc = gallery.load_entry("so3_r3")
for r in run_checks(doc)["checks"]:
    print(f"  {r['name']:24s} {'PASS' if r['passed'] else 'FAIL'}")
