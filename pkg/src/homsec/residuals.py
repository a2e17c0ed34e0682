"""Pointwise residual evaluation and check results."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .expr import Expr, evaluate
from .tensor import MixedField, Patch

DEFAULT_TOL = 1e-9
DEFAULT_POINTS = 32
DEFAULT_SEED = 42


@dataclass
class CheckResult:
    """Outcome of one check.

    ``passed`` is ``max_residual <= tol * max(1, scale)`` where ``scale`` is
    the largest magnitude among the terms that make up the identity.
    """

    name: str
    passed: bool
    max_residual: float
    tol: float
    scale: float = 0.0
    argmax: list[float] | None = None
    details: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": bool(self.passed),
            "max_residual": float(self.max_residual),
            "relative_residual": float(self.max_residual / max(1.0, self.scale)),
            "scale": float(self.scale),
            "tolerance": float(self.tol),
            "argmax": None if self.argmax is None else [float(v) for v in self.argmax],
            "details": self.details,
        }

    def __bool__(self):
        return bool(self.passed)


class Sampler:
    """Fixed sample points on a patch."""

    def __init__(self, patch: Patch, n: int = DEFAULT_POINTS, seed: int = DEFAULT_SEED, points: np.ndarray | None = None):
        self.patch = patch
        self.seed = seed
        self.points = patch.sample_points(n, seed) if points is None else np.atleast_2d(np.asarray(points, dtype=float))
        self.env = patch.env(self.points)

    @property
    def n(self) -> int:
        return len(self.points)

    def values(self, exprs: Iterable[Expr]) -> np.ndarray:
        """Array of shape (len(exprs), n)."""
        rows = [np.broadcast_to(np.asarray(evaluate(e, self.env), dtype=float), (self.n,)) for e in exprs]
        if not rows:
            return np.zeros((0, self.n))
        return np.vstack(rows)

    def max_abs(self, exprs: Iterable[Expr]) -> tuple[float, int | None]:
        vals = self.values(list(exprs))
        if vals.size == 0:
            return 0.0, None
        a = np.abs(vals)
        flat = int(np.argmax(a))  # first maximum in (component, point) order
        return float(a.flat[flat]), flat % self.n


def _exprs(items) -> list[Expr]:
    out: list[Expr] = []
    for it in items:
        if isinstance(it, MixedField):
            out.extend(it.values())
        elif isinstance(it, Expr):
            out.append(it)
        else:
            out.extend(_exprs(it))
    return out


def residual_check(
    name: str,
    residual,
    sampler: Sampler,
    tol: float = DEFAULT_TOL,
    terms: Sequence = (),
    details: dict | None = None,
) -> CheckResult:
    """Evaluate the residual field(s) and compare with ``tol``.

    ``terms`` are the pieces the residual is assembled from; their largest
    magnitude sets the relative scale.
    """
    res_exprs = _exprs([residual])
    worst, at = sampler.max_abs(res_exprs)
    scale = 0.0
    for t in terms:
        s, _ = sampler.max_abs(_exprs([t]))
        scale = max(scale, s)
    passed = bool(worst <= tol * max(1.0, scale))
    point = None if at is None else [float(v) for v in sampler.points[at]]
    return CheckResult(name, passed, worst, tol, scale, point, dict(details or {}))


def combine(name: str, parts: Sequence[CheckResult], tol: float, details: dict | None = None) -> CheckResult:
    """A check that passes iff every part passes; reports the worst part."""
    if not parts:
        return CheckResult(name, True, 0.0, tol, 0.0, None, dict(details or {}))
    worst = max(parts, key=lambda c: c.max_residual / max(1.0, c.scale))
    info = {"parts": [{"name": c.name, "passed": c.passed, "max_residual": c.max_residual} for c in parts]}
    info.update(details or {})
    return CheckResult(name, all(c.passed for c in parts), worst.max_residual, tol, worst.scale, worst.argmax, info)
