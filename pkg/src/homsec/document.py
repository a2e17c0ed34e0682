"""JSON model documents: schema, loading into model objects, and export.

A document describes a patch, a bundle rank, the algebroid data and any of
the optional sections (connection, plectic form, momentum, Lie algebra,
sigma-model target data) together with the list of checks to run.  Tensor
components are lists of entries ``{"up": [..], "down": [..], "eup": [..],
"edown": [..], "value": expr}`` with 0-based indices in any order; missing
blocks are empty.  Two entries with the same canonical key are an error.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import jsonschema

from .algebroid import LieAlgebroidModel
from .connection import ConnectionData
from .expr import Expr, ExprError, ExprSyntaxError, as_expr, fold, parse, to_string
from .momentum import MomentumData, PrePlecticForm
from .momentum_map import ActionAlgebroidModel, LieAlgebraData
from .residuals import DEFAULT_POINTS, DEFAULT_SEED, DEFAULT_TOL, Sampler
from .sigma import SigmaTargetData
from .signs import sort_with_sign
from .tensor import BundleShape, MetricField, MixedField, Patch, ShapeError

__all__ = [
    "SCHEMA",
    "InputError",
    "ModelDocument",
    "load",
    "load_document",
    "build_document",
    "field_entries",
    "dumps",
]

_value = {"type": ["string", "number"]}
_index_list = {"type": "array", "items": {"type": "integer", "minimum": 0}}
_entry = {
    "type": "object",
    "properties": {"up": _index_list, "down": _index_list, "eup": _index_list, "edown": _index_list, "value": _value},
    "required": ["value"],
    "additionalProperties": False,
}
_entries = {"type": "array", "items": _entry}

SCHEMA: dict[str, Any] = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "homsec model document",
    "type": "object",
    "required": ["patch", "bundle", "algebroid"],
    "additionalProperties": False,
    "properties": {
        "name": {"type": "string"},
        "description": {"type": "string"},
        "patch": {
            "type": "object",
            "required": ["coords"],
            "additionalProperties": False,
            "properties": {
                "dim": {"type": "integer", "minimum": 1},
                "coords": {"type": "array", "items": {"type": "string", "pattern": "^[A-Za-z_][A-Za-z0-9_]*$"}, "minItems": 1},
                "box": {"type": "array", "items": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}},
            },
        },
        "bundle": {
            "type": "object",
            "required": ["rank"],
            "additionalProperties": False,
            "properties": {"rank": {"type": "integer", "minimum": 1}},
        },
        "algebroid": {
            "type": "object",
            "required": ["rho"],
            "additionalProperties": False,
            "properties": {
                "rho": {"type": "array", "items": {"type": "array", "items": _value}},
                "C": {
                    "type": "array",
                    "items": {"type": "array", "prefixItems": [{"type": "integer"}] * 3 + [_value], "minItems": 4, "maxItems": 4},
                },
            },
        },
        "connection": {
            "type": "object",
            "required": ["omega"],
            "additionalProperties": False,
            "properties": {
                "omega": {
                    "type": "array",
                    "items": {"type": "array", "prefixItems": [{"type": "integer"}] * 3 + [_value], "minItems": 4, "maxItems": 4},
                }
            },
        },
        "plectic": {
            "type": "object",
            "required": ["n", "omega"],
            "additionalProperties": False,
            "properties": {"n": {"type": "integer", "minimum": 1}, "omega": _entries},
        },
        "momentum": {
            "type": "object",
            "required": ["mu"],
            "additionalProperties": False,
            "properties": {"mu": {"type": "array", "items": _entries}},
        },
        "lie_algebra": {
            "type": "object",
            "required": ["f"],
            "additionalProperties": False,
            "properties": {
                "f": {
                    "type": "array",
                    "items": {"type": "array", "prefixItems": [{"type": "integer"}] * 3 + [{"type": "number"}], "minItems": 4, "maxItems": 4},
                }
            },
        },
        "sigma": {
            "type": "object",
            "required": ["n", "g", "H", "tmu"],
            "additionalProperties": False,
            "properties": {
                "n": {"type": "integer", "minimum": 1},
                "g": {"type": "array", "items": {"type": "array", "items": _value}},
                "H": _entries,
                "tmu": {"type": "array", "items": _entries},
                "tmu_n": _entries,
            },
        },
        "checks": {"type": "array", "items": {"type": "string"}},
        "expected": {"type": "object", "additionalProperties": {"type": "boolean"}},
        "tolerance": {"type": "number", "exclusiveMinimum": 0},
        "sample_points": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer", "minimum": 0},
    },
}


class InputError(ValueError):
    """A model document is malformed; ``path`` points into the document."""

    def __init__(self, message: str, path: str = ""):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


@dataclass
class ModelDocument:
    raw: dict
    patch: Patch
    shape: BundleShape
    model: LieAlgebroidModel
    connection: ConnectionData | None = None
    plectic: PrePlecticForm | None = None
    momentum: MomentumData | None = None
    lie_algebra: LieAlgebraData | None = None
    action: ActionAlgebroidModel | None = None
    sigma: SigmaTargetData | None = None
    checks: list[str] = field(default_factory=list)
    tolerance: float = DEFAULT_TOL
    sample_points: int = DEFAULT_POINTS
    seed: int = DEFAULT_SEED

    @property
    def name(self) -> str | None:
        return self.raw.get("name")

    def sampler(self) -> Sampler:
        return Sampler(self.patch, self.sample_points, self.seed)


# ---------------------------------------------------------------------------
# loading


def _expr(v, coords, path: str) -> Expr:
    if isinstance(v, bool):
        raise InputError("expected an expression string or a number", path)
    if isinstance(v, (int, float)):
        return as_expr(float(v))
    try:
        return fold(parse(v, coords))
    except ExprSyntaxError as e:
        raise InputError(f"cannot parse {v!r}: {e}", path) from e
    except ExprError as e:
        raise InputError(f"bad expression {v!r}: {e}", path) from e


def _entries(shape: BundleShape, sig, items, path: str) -> MixedField:
    names = ("up", "down", "eup", "edown")
    seen: dict = {}
    out = []
    for n, item in enumerate(items):
        p = f"{path}/{n}"
        blocks = [tuple(item.get(k, ())) for k in names]
        for k, b, size in zip(names, blocks, sig):
            if len(b) != size:
                raise InputError(f"block '{k}' has {len(b)} indices, expected {size}", p)
        try:
            _, key = _canon(blocks, shape)
        except ShapeError as e:
            raise InputError(str(e), p) from e
        if key in seen:
            raise InputError(f"duplicate component {key} (also given at {seen[key]})", p)
        seen[key] = p
        out.append((blocks, _expr(item["value"], shape.coords, p + "/value")))
    try:
        return MixedField.from_entries(shape, sig, out)
    except ShapeError as e:
        raise InputError(str(e), path) from e


def _canon(blocks, shape):
    bounds = (shape.dim, shape.dim, shape.rank, shape.rank)
    key = []
    sign = 1
    for b, bound in zip(blocks, bounds):
        for i in b:
            if not 0 <= i < bound:
                raise ShapeError(f"index {i} out of range 0..{bound - 1}")
        s, sb = sort_with_sign(b)
        if s == 0:
            raise ShapeError(f"repeated index in antisymmetric block {b}")
        sign *= s
        key.append(sb)
    return sign, tuple(key)


def _triples(items, bounds, coords, path: str, numeric: bool = False) -> dict:
    out: dict = {}
    for n, (a, b, c, v) in enumerate(items):
        p = f"{path}/{n}"
        for idx, bound in zip((a, b, c), bounds):
            if not 0 <= idx < bound:
                raise InputError(f"index {idx} out of range 0..{bound - 1}", p)
        if (a, b, c) in out:
            raise InputError(f"duplicate entry {(a, b, c)}", p)
        out[(a, b, c)] = float(v) if numeric else _expr(v, coords, p + "/3")
    return out


def _validate(raw) -> None:
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(raw), key=lambda e: (list(e.absolute_path), e.message))
    if errors:
        e = errors[0]
        path = "/" + "/".join(str(p) for p in e.absolute_path)
        raise InputError(f"schema error: {e.message}", path)


def load_document(raw: dict) -> ModelDocument:
    """Validate ``raw`` and build every model object it describes."""
    _validate(raw)
    pr = raw["patch"]
    coords = pr["coords"]
    if "dim" in pr and pr["dim"] != len(coords):
        raise InputError(f"dim is {pr['dim']} but {len(coords)} coordinates are given", "/patch/dim")
    try:
        patch = Patch(coords, pr.get("box"))
    except ShapeError as e:
        raise InputError(str(e), "/patch") from e
    d = patch.dim
    r = raw["bundle"]["rank"]
    shape = BundleShape(patch, r)

    rho_raw = raw["algebroid"]["rho"]
    if len(rho_raw) != r or any(len(row) != d for row in rho_raw):
        found = [len(row) for row in rho_raw]
        raise InputError(f"rho must be {r} rows of {d} entries, found rows of lengths {found}", "/algebroid/rho")
    rho = [[_expr(v, coords, f"/algebroid/rho/{a}/{i}") for i, v in enumerate(row)] for a, row in enumerate(rho_raw)]

    g = None
    if "lie_algebra" in raw:
        try:
            g = LieAlgebraData(r, _triples(raw["lie_algebra"]["f"], (r, r, r), coords, "/lie_algebra/f", numeric=True))
        except ValueError as e:
            raise InputError(str(e), "/lie_algebra/f") from e

    if "C" in raw["algebroid"]:
        C = _triples(raw["algebroid"]["C"], (r, r, r), coords, "/algebroid/C")
    elif g is not None:
        C = {k: as_expr(v) for k, v in g.nonzero().items()}
    else:
        C = {}
    for (a, b, c) in C:
        if a == b:
            raise InputError(f"C^{c}_{{{a}{a}}} must vanish", "/algebroid/C")
    model = LieAlgebroidModel.from_arrays(shape, rho, C, name=raw.get("name"))

    action = None
    if g is not None:
        # structure functions of an action algebroid are the structure constants
        for (a, b, c), v in C.items():
            want = g.const(c, a, b)
            if not v.is_const or float(getattr(v, "value", float("nan"))) != want:
                raise InputError(f"C^{c}_{{{a}{b}}} differs from the Lie algebra constant {want}", "/algebroid/C")
        given = {(min(a, b), max(a, b), c) for (a, b, c) in C}
        if not set(g.nonzero()) <= given:
            raise InputError("C is missing nonzero Lie algebra constants", "/algebroid/C")
        action = ActionAlgebroidModel(g, shape, rho, name=raw.get("name"))

    conn = None
    if "connection" in raw:
        om = _triples(raw["connection"]["omega"], (d, r, r), coords, "/connection/omega")
        conn = ConnectionData.from_entries(shape, om)

    plectic = None
    if "plectic" in raw:
        n = raw["plectic"]["n"]
        plectic = PrePlecticForm(n, _entries(shape, (0, n + 1, 0, 0), raw["plectic"]["omega"], "/plectic/omega"))

    momentum = None
    if "momentum" in raw:
        if plectic is None:
            raise InputError("momentum data needs a plectic section", "/momentum")
        n = plectic.n
        mus = raw["momentum"]["mu"]
        if len(mus) != n:
            raise InputError(f"need {n} momentum components mu_0..mu_{n - 1}, found {len(mus)}", "/momentum/mu")
        momentum = MomentumData(n, [_entries(shape, (0, k, 0, n - k), m, f"/momentum/mu/{k}") for k, m in enumerate(mus)])

    sig = None
    if "sigma" in raw:
        s = raw["sigma"]
        n = s["n"]
        if len(s["g"]) != d or any(len(row) != d for row in s["g"]):
            raise InputError(f"metric must be {d} x {d}", "/sigma/g")
        gm = MetricField(shape, [[_expr(v, coords, f"/sigma/g/{i}/{j}") for j, v in enumerate(row)] for i, row in enumerate(s["g"])])
        if len(s["tmu"]) != n:
            raise InputError(f"need {n} couplings tmu_0..tmu_{n - 1}, found {len(s['tmu'])}", "/sigma/tmu")
        tmu = [_entries(shape, (0, k, 0, n - k), m, f"/sigma/tmu/{k}") for k, m in enumerate(s["tmu"])]
        H = _entries(shape, (0, n + 1, 0, 0), s["H"], "/sigma/H")
        tn = _entries(shape, (0, n, 0, 0), s["tmu_n"], "/sigma/tmu_n") if "tmu_n" in s else None
        sig = SigmaTargetData(gm, H, tmu, tn)

    return ModelDocument(
        raw=raw,
        patch=patch,
        shape=shape,
        model=model,
        connection=conn,
        plectic=plectic,
        momentum=momentum,
        lie_algebra=g,
        action=action,
        sigma=sig,
        checks=list(raw.get("checks", [])),
        tolerance=float(raw.get("tolerance", DEFAULT_TOL)),
        sample_points=int(raw.get("sample_points", DEFAULT_POINTS)),
        seed=int(raw.get("seed", DEFAULT_SEED)),
    )


def load(path) -> ModelDocument:
    """Read a UTF-8 JSON model file."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as e:
        raise InputError(f"cannot read {path}: {e}") from e
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise InputError(f"invalid JSON: {e.msg} (line {e.lineno}, column {e.colno})") from e
    return load_document(raw)


# ---------------------------------------------------------------------------
# export


def _s(e) -> str:
    return to_string(as_expr(e))


def field_entries(f: MixedField) -> list[dict]:
    """Nonzero canonical components of ``f`` as document entries."""
    out = []
    for (up, down, eup, edown), v in f.items():
        if v.is_zero:
            continue
        item: dict = {}
        for name, block in (("up", up), ("down", down), ("eup", eup), ("edown", edown)):
            if block:
                item[name] = list(block)
        item["value"] = _s(v)
        out.append(item)
    return out


def build_document(
    model: LieAlgebroidModel,
    *,
    name: str | None = None,
    description: str | None = None,
    connection: ConnectionData | None = None,
    plectic: PrePlecticForm | None = None,
    momentum: MomentumData | None = None,
    lie_algebra: LieAlgebraData | None = None,
    sigma: SigmaTargetData | None = None,
    checks: Sequence[str] = (),
    expected: dict | None = None,
    tolerance: float = DEFAULT_TOL,
    sample_points: int = DEFAULT_POINTS,
    seed: int = DEFAULT_SEED,
) -> dict:
    """The JSON-ready document describing the given objects."""
    shape = model.shape
    patch = shape.patch
    d, r = shape.dim, shape.rank
    doc: dict = {}
    if name:
        doc["name"] = name
    if description:
        doc["description"] = description
    doc["patch"] = {"dim": d, "coords": list(patch.coords), "box": [list(b) for b in patch.box]}
    doc["bundle"] = {"rank": r}
    C = []
    for (_, _, (c,), (a, b)), v in model.C.items():
        if not v.is_zero:
            C.append([a, b, c, _s(v)])
    doc["algebroid"] = {"rho": [[_s(model.anchor(i, a)) for i in range(d)] for a in range(r)], "C": C}
    if connection is not None:
        om = []
        for (_, (i,), (b,), (a,)), v in connection.omega.items():
            if not v.is_zero:
                om.append([i, a, b, _s(v)])
        doc["connection"] = {"omega": om}
    if plectic is not None:
        doc["plectic"] = {"n": plectic.n, "omega": field_entries(plectic.omega)}
    if momentum is not None:
        doc["momentum"] = {"mu": [field_entries(m) for m in momentum.mu]}
    if lie_algebra is not None:
        doc["lie_algebra"] = {"f": [[a, b, c, v] for (a, b, c), v in lie_algebra.nonzero().items()]}
    if sigma is not None:
        s = {
            "n": sigma.n,
            "g": [[_s(sigma.g.get(i, j)) for j in range(d)] for i in range(d)],
            "H": field_entries(sigma.H),
            "tmu": [field_entries(t) for t in sigma.tmu],
        }
        if sigma.tmu_n is not None:
            s["tmu_n"] = field_entries(sigma.tmu_n)
        doc["sigma"] = s
    doc["checks"] = list(checks)
    if expected is not None:
        doc["expected"] = dict(expected)
    doc["tolerance"] = tolerance
    doc["sample_points"] = sample_points
    doc["seed"] = seed
    return doc


def dumps(obj) -> str:
    """Canonical JSON text (sorted keys, two-space indent, trailing newline)."""
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"
