"""Named checks over a loaded model document, and the report they produce."""
from __future__ import annotations

import zlib
from typing import Callable

import numpy as np

from . import __version__
from .algebroid import NonConstantError, check_lie_algebroid, e_differential, frame_section, homology_boundary
from .connection import covariant_e_differential, curvatures
from .document import InputError, ModelDocument
from .momentum import equivariance_check, hms_check, hms_residuals, homotopy_hamiltonian_check, weak_hms_check
from .momentum_map import d_CE, hmm_check, hms_to_hmm, momentum_map_equations
from .randomfields import random_connection, random_field, random_poly
from .residuals import CheckResult, Sampler, combine, residual_check
from .sigma import contraction_check, gauge_invariance_roundtrip, gnlsm_check, isometry_check
from .signs import increasing, ledger_hash
from .supergeo import covariant_Q_check, derived_bracket_homology, j_star_correspondence, q_squared_check
from .tensor import MixedField, de_rham

__all__ = ["CHECKS", "run_check", "run_checks", "report_text"]

# identities that hold exactly in exact arithmetic are compared at this relative level
EXACT_TOL = 1e-12

Check = Callable[[ModelDocument, Sampler, float, np.random.Generator], CheckResult]
CHECKS: dict[str, Check] = {}


def _check(name: str):
    def deco(fn):
        CHECKS[name] = fn
        return fn

    return deco


def _need(doc: ModelDocument, *sections: str):
    for s in sections:
        if getattr(doc, s) is None:
            raise InputError(f"this check needs the '{s}' section", f"/{s}")


def _rng(seed: int, name: str) -> np.random.Generator:
    return np.random.default_rng([seed, zlib.crc32(name.encode())])


def e_degrees(doc: ModelDocument, sampler: Sampler) -> list[tuple[int, int]]:
    """(form degree, E degree) pairs on which E_d squares to zero.

    Form degree 0 always; positive form degrees only when the structure
    functions are constant.
    """
    r, d = doc.shape.rank, doc.shape.dim
    ks = [0]
    if doc.model.has_constant_structure(sampler):
        ks += list(range(1, min(d, 2) + 1))
    return [(k, m) for k in ks for m in range(0, max(r - 1, 1))]


# -- structure --------------------------------------------------------------


@_check("lie_algebroid")
def _lie_algebroid(doc, sampler, tol, rng):
    return check_lie_algebroid(doc.model, sampler, tol)


@_check("q_squared")
def _q_squared(doc, sampler, tol, rng):
    return q_squared_check(doc.model, sampler, tol)


@_check("de_rham_nilpotency")
def _de_rham(doc, sampler, tol, rng):
    d = doc.shape.dim
    parts = []
    for k in range(0, max(d - 1, 1)):
        a = random_field(doc.shape, (0, k, 0, 0), rng)
        da = de_rham(a)
        parts.append(residual_check(f"dd_k{k}", de_rham(da), sampler, tol, terms=[a, da]))
    return combine("de_rham_nilpotency", parts, tol)


@_check("e_nilpotency")
def _e_nil(doc, sampler, tol, rng):
    L = doc.model
    parts = []
    for k, m in e_degrees(doc, sampler):
        a = random_field(doc.shape, (0, k, 0, m), rng)
        da = e_differential(L, a)
        parts.append(residual_check(f"EdEd_k{k}_m{m}", e_differential(L, da), sampler, tol, terms=[a, da]))
    return combine("e_nilpotency", parts, tol)


@_check("homology_nilpotency")
def _hom_nil(doc, sampler, tol, rng):
    L = doc.model
    parts = []
    for m in range(2, L.rank + 1):
        w = random_field(doc.shape, (0, 0, m, 0), rng)
        dw = homology_boundary(L, w)
        parts.append(residual_check(f"dd_m{m}", homology_boundary(L, dw), sampler, tol, terms=[w, dw]))
    return combine("homology_nilpotency", parts, tol)


@_check("ce_nilpotency")
def _ce_nil(doc, sampler, tol, rng):
    _need(doc, "lie_algebra")
    g = doc.lie_algebra
    parts = []
    for m in range(0, max(g.r - 1, 1)):
        a = random_field(doc.shape, (0, 0, 0, m), rng)
        da = d_CE(g, a)
        parts.append(residual_check(f"dCEdCE_m{m}", d_CE(g, da), sampler, tol, terms=[a, da]))
    return combine("ce_nilpotency", parts, tol)


# -- connections --------------------------------------------------------------


def _connections(doc, rng):
    out = [("random", random_connection(doc.shape, rng))]
    if doc.connection is not None:
        out.insert(0, ("document", doc.connection))
    return out


@_check("lemma_covariant")
def _lemma(doc, sampler, tol, rng):
    L = doc.model
    parts = []
    for label, conn in _connections(doc, rng):
        for m in range(0, min(2, L.rank) + 1):
            a = random_field(doc.shape, (0, 0, 0, m), rng)
            x, y = covariant_e_differential(L, conn, a), e_differential(L, a)
            parts.append(residual_check(f"covariant_{label}_m{m}", x - y, sampler, tol, terms=[x, y]))
    return combine("lemma_covariant", parts, tol)


@_check("covariant_Q")
def _cov_q(doc, sampler, tol, rng):
    parts = [covariant_Q_check(doc.model, conn, sampler, min(tol, EXACT_TOL)) for _, conn in _connections(doc, rng)]
    return combine("covariant_Q", parts, min(tol, EXACT_TOL))


@_check("basic_curvature")
def _basic(doc, sampler, tol, rng):
    parts = []
    for label, conn in _connections(doc, rng):
        c = curvatures(doc.model, conn).s_consistency(sampler, tol)
        c.name = f"basic_curvature_{label}"
        parts.append(c)
    return combine("basic_curvature", parts, tol)


# -- graded picture -----------------------------------------------------------


@_check("j_star")
def _jstar(doc, sampler, tol, rng):
    L = doc.model
    parts = []
    for m in range(0, min(L.rank, 3) + 1):
        a = random_field(doc.shape, (0, 0, 0, m), rng)
        c = j_star_correspondence(L, a, sampler, min(tol, EXACT_TOL))
        c.name = f"j_star_m{m}"
        parts.append(c)
    return combine("j_star", parts, min(tol, EXACT_TOL))


@_check("derived_bracket")
def _derived(doc, sampler, tol, rng):
    L = doc.model
    t = min(tol, EXACT_TOL)
    parts = []
    for m in range(2, L.rank + 1):
        for A in increasing(L.rank, m):
            f = random_poly(doc.shape.coords, rng)
            es = [frame_section(doc.shape, a) for a in A]
            x = derived_bracket_homology(L, es, f, sampler)
            y = homology_boundary(L, MixedField(doc.shape, (0, 0, m, 0), {((), (), A, ()): f}))
            parts.append(residual_check(f"derived_{''.join(map(str, A))}", x - y, sampler, t, terms=[x, y]))
    return combine("derived_bracket", parts, t)


# -- momentum sections --------------------------------------------------------


@_check("plectic_closed")
def _closed(doc, sampler, tol, rng):
    _need(doc, "plectic")
    return doc.plectic.closed_check(sampler, tol)


@_check("hms")
def _hms(doc, sampler, tol, rng):
    _need(doc, "plectic", "momentum")
    return hms_check(doc.model, doc.connection, doc.plectic, doc.momentum, sampler, tol)


@_check("hms_fragment")
def _hms_fragment(doc, sampler, tol, rng):
    _need(doc, "plectic", "momentum")
    d0 = [d for d in hms_residuals(doc.model, doc.connection, doc.plectic, doc.momentum) if d.k == 0][0]
    return residual_check("hms_fragment", d0.residual, sampler, tol, terms=d0.terms)


@_check("homotopy_hamiltonian")
def _hh(doc, sampler, tol, rng):
    _need(doc, "plectic", "momentum")
    return homotopy_hamiltonian_check(doc.model, doc.connection, doc.plectic, doc.momentum, sampler, tol)


@_check("equivariance")
def _equiv(doc, sampler, tol, rng):
    _need(doc, "momentum")
    return equivariance_check(doc.model, doc.connection, doc.momentum.mu, sampler, tol)


@_check("weak_hms")
def _weak(doc, sampler, tol, rng):
    _need(doc, "plectic", "momentum")
    try:
        return weak_hms_check(doc.model, doc.connection, doc.plectic, doc.momentum, sampler, tol)
    except NonConstantError as e:
        return CheckResult("weak_hms", False, 0.0, tol, 0.0, None, {"error": str(e)})


@_check("hmm")
def _hmm(doc, sampler, tol, rng):
    _need(doc, "action", "plectic", "momentum")
    return hmm_check(doc.action, doc.plectic, hms_to_hmm(doc.momentum), sampler, tol)


@_check("momentum_map_equations")
def _mm(doc, sampler, tol, rng):
    _need(doc, "action", "plectic", "momentum")
    if doc.plectic.n != 1:
        raise InputError("momentum map equations need n = 1", "/plectic/n")
    return momentum_map_equations(doc.action, doc.plectic, doc.momentum[0], sampler, tol)


# -- sigma model --------------------------------------------------------------


@_check("isometry")
def _iso(doc, sampler, tol, rng):
    _need(doc, "sigma")
    return isometry_check(doc.model, doc.connection, doc.sigma.g, sampler, tol)


@_check("sigma_closed")
def _sclosed(doc, sampler, tol, rng):
    _need(doc, "sigma")
    return doc.sigma.closed_check(sampler, tol)


@_check("gnlsm")
def _gnlsm(doc, sampler, tol, rng):
    _need(doc, "sigma")
    return gnlsm_check(doc.model, doc.connection, doc.sigma, sampler, tol)


@_check("contraction")
def _contr(doc, sampler, tol, rng):
    _need(doc, "sigma")
    return contraction_check(doc.model, doc.sigma, sampler, tol)


@_check("sigma_roundtrip")
def _rt(doc, sampler, tol, rng):
    _need(doc, "sigma")
    return gauge_invariance_roundtrip(doc.model, doc.connection, doc.sigma, sampler, tol).as_check(tol)


# -- orchestration ------------------------------------------------------------


def run_check(doc: ModelDocument, name: str, sampler: Sampler | None = None, tol: float | None = None) -> CheckResult:
    if name not in CHECKS:
        raise InputError(f"unknown check {name!r}; known checks: {', '.join(sorted(CHECKS))}", "/checks")
    sampler = sampler or doc.sampler()
    tol = doc.tolerance if tol is None else tol
    return CHECKS[name](doc, sampler, tol, _rng(sampler.seed, name))


def run_checks(doc: ModelDocument, tol: float | None = None, points: int | None = None, seed: int | None = None) -> dict:
    """Run the document's checks in order and return the report dictionary."""
    tol = doc.tolerance if tol is None else tol
    n = doc.sample_points if points is None else points
    seed = doc.seed if seed is None else seed
    for name in doc.checks:
        if name not in CHECKS:
            raise InputError(f"unknown check {name!r}; known checks: {', '.join(sorted(CHECKS))}", "/checks")
    sampler = Sampler(doc.patch, n, seed)
    results = [run_check(doc, name, sampler, tol).as_dict() for name in doc.checks]
    return {
        "model": doc.name,
        "passed": all(r["passed"] for r in results),
        "checks": results,
        "metadata": {"version": __version__, "seed": seed, "points": n, "tolerance": tol, "sign_ledger_hash": ledger_hash()},
    }


def report_text(report: dict) -> str:
    lines = [f"model: {report['model']}"]
    for r in report["checks"]:
        flag = "PASS" if r["passed"] else "FAIL"
        lines.append(f"{flag}  {r['name']:<24} max_residual={r['max_residual']:.3e}  scale={r['scale']:.3e}  tol={r['tolerance']:.1e}")
    m = report["metadata"]
    lines.append(f"overall: {'PASS' if report['passed'] else 'FAIL'}  (seed={m['seed']}, points={m['points']}, version={m['version']})")
    return "\n".join(lines) + "\n"
