"""Gauged sigma-model target data and homotopy momentum sections.

Target data (metric g, closed H, forms tmu_k) translates into momentum
data on the same algebroid. The gauge-invariance conditions hold exactly
when the translated momentum section does, which the roundtrip checks on
each gallery sigma instance.
"""
from homsec import gallery
from homsec.sigma import contraction_check, gauge_invariance_roundtrip, gnlsm_residuals, isometry_check

for name in gallery.SIGMA_INSTANCES:
    doc = gallery.load_entry(name)
    L, conn, data = doc.model, doc.connection, doc.sigma
    rt = gauge_invariance_roundtrip(L, conn, data)
    signs = [s.hms_sign for s in gnlsm_residuals(L, conn, data)]
    print(f"{name}")
    print(f"  isometry={isometry_check(L, conn, data.g).passed}  contraction={contraction_check(L, data).passed}")
    print(f"  sigma side={rt.sigma_side}  momentum side={rt.hms_side}  agree={rt.holds}  degree signs={signs}")
