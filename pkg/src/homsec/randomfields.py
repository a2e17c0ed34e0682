"""Seeded random polynomial fields and connections for identity checks."""
from __future__ import annotations

from itertools import combinations_with_replacement
from typing import Sequence

import numpy as np

from .connection import ConnectionData
from .expr import Expr, ONE, Sym, const, mul, total
from .tensor import BundleShape, MixedField


def _coef(rng: np.random.Generator) -> float:
    # three significant decimals keep exported documents readable
    return float(np.round(rng.uniform(-1.0, 1.0), 3))


def random_poly(coords: Sequence[str], rng: np.random.Generator, degree: int = 2, nterms: int = 3) -> Expr:
    """A sum of ``nterms`` monomials of degree <= ``degree`` with coefficients in [-1, 1]."""
    monos = [()]
    for k in range(1, degree + 1):
        monos.extend(combinations_with_replacement(range(len(coords)), k))
    picks = rng.choice(len(monos), size=min(nterms, len(monos)), replace=False)
    terms = []
    for p in sorted(int(i) for i in picks):
        m: Expr = ONE
        for i in monos[p]:
            m = mul(m, Sym(coords[i]))
        terms.append(mul(const(_coef(rng)), m))
    return total(terms)


def random_field(shape: BundleShape, sig: Sequence[int], rng: np.random.Generator, degree: int = 2, nterms: int = 3) -> MixedField:
    """Every canonical component an independent random polynomial."""
    probe = MixedField.zero(shape, sig)
    return MixedField(shape, sig, {k: random_poly(shape.coords, rng, degree, nterms) for k in probe.keys()})


def random_constant_field(shape: BundleShape, sig: Sequence[int], rng: np.random.Generator) -> MixedField:
    probe = MixedField.zero(shape, sig)
    return MixedField(shape, sig, {k: const(_coef(rng)) for k in probe.keys()})


def random_connection(shape: BundleShape, rng: np.random.Generator, degree: int = 1, nterms: int = 2) -> ConnectionData:
    """omega^b_{ai} with random polynomial entries."""
    d, r = shape.dim, shape.rank
    return ConnectionData.from_entries(
        shape, {(i, a, b): random_poly(shape.coords, rng, degree, nterms) for i in range(d) for a in range(r) for b in range(r)}
    )
