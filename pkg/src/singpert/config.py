"""JSON configuration loading for the command line and the experiment scripts.

A study config looks like::

    {"system": {"N": [[0.0]], "x0": [2.0], "f": "[1]"},
     "family": {"kind": "shift"},
     "indices": [16, 32, 64],
     "bank": "standard",
     "quad": {"abs_tol": 1e-10, "rel_tol": 1e-8}}

``system`` may instead describe a pencil ``{"E", "A", "g", "x0"}``; studies on
a pencil run on its fast subsystem.
"""

from __future__ import annotations

import json
import logging
from dataclasses import replace
from pathlib import Path

import numpy as np

from .errors import InputError
from .pencil import Pencil, weierstrass_reduce
from .perturbed import PerturbationFamily
from .quadrature import QuadratureSpec
from .signal_lang import VectorSignal, apply_matrix, parse_signal
from .singular import SolveRequest
from .test_functions import standard_bank, testfn_from_json

log = logging.getLogger(__name__)

_QUAD_KEYS = {"abs_tol", "rel_tol", "max_subdivisions"}


def load_json(path) -> dict:
    try:
        with open(Path(path)) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise InputError(f"{path} must contain a JSON object")
    return data


def _require(d: dict, key: str, where: str):
    if key not in d:
        raise InputError(f"{where} is missing {key!r}")
    return d[key]


def _signal(text, n):
    if text is None:
        return VectorSignal.zeros(n)
    if not isinstance(text, str):
        raise InputError("signals must be given as text, e.g. \"[sin(t), 1]\"")
    return parse_signal(text, n)


def is_pencil(system: dict) -> bool:
    return "E" in system


def parse_pencil(system: dict):
    """``(Pencil, x0, g)`` from ``{"E", "A", "g", "x0"}``."""
    p = Pencil(_require(system, "E", "pencil"), _require(system, "A", "pencil"))
    x0 = np.asarray(system.get("x0", np.zeros(p.n)), dtype=float)
    return p, x0, _signal(system.get("g"), p.n)


def parse_system(system: dict) -> SolveRequest:
    """A nilpotent ``SolveRequest``; pencils are reduced to their fast subsystem."""
    if not isinstance(system, dict):
        raise InputError("system must be a JSON object")
    if is_pencil(system):
        p, x0, g = parse_pencil(system)
        red = weierstrass_reduce(p, system.get("tol", 1e-8))
        if red.n_fast == 0:
            raise InputError("pencil has no fast subsystem to study")
        z0 = red.Tinv @ x0
        log.info("pencil reduced: slow dimension %d, fast index %d", red.n_slow, red.q)
        return SolveRequest(red.M, z0[red.n_slow :], apply_matrix(red.fast_forcing, g))
    N = np.asarray(_require(system, "N", "system"), dtype=float)
    n = N.shape[0] if N.ndim == 2 else 1
    x0 = system.get("x0", [0.0] * n)
    kwargs = {"tol": float(system["tol"])} if "tol" in system else {}
    return SolveRequest(N, x0, _signal(system.get("f"), n), **kwargs)


def parse_family(spec: dict, base) -> PerturbationFamily:
    if not isinstance(spec, dict):
        raise InputError("family must be a JSON object")
    kind = _require(spec, "kind", "family")
    members = None
    if kind == "custom":
        members = _require(spec, "members", "custom family")
        if not isinstance(members, dict):
            raise InputError("custom family members must map indices to matrices")
    return PerturbationFamily(
        kind, base, scale=float(spec.get("scale", 1.0)), members=members, name=spec.get("name", "")
    )


def parse_quad(spec, base: QuadratureSpec = QuadratureSpec()) -> QuadratureSpec:
    spec = spec or {}
    unknown = set(spec) - _QUAD_KEYS
    if unknown:
        raise InputError(f"unknown quadrature keys {sorted(unknown)}")
    return replace(base, **spec)


def parse_bank(spec, n: int, q: int):
    if spec is None or spec == "standard":
        return standard_bank(n, q)
    if not isinstance(spec, list):
        raise InputError('bank must be "standard" or a list of test functions')
    return [testfn_from_json(item) for item in spec]


def quad_with_overrides(quad: QuadratureSpec, abs_tol=None, rel_tol=None, max_subdiv=None) -> QuadratureSpec:
    changes = {}
    if abs_tol is not None:
        changes["abs_tol"] = abs_tol
    if rel_tol is not None:
        changes["rel_tol"] = rel_tol
    if max_subdiv is not None:
        changes["max_subdivisions"] = max_subdiv
    return replace(quad, **changes)
