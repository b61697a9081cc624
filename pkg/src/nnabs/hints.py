"""Per-neuron bound/phase hints for external SMT-based verifiers.

A solver that knows a ReLU is always active (or always inactive) over the
input region can drop the case split on it.  The file format is JSON::

    {"version": "nnabs-hints-v1",
     "model_sha256": "...",
     "region": {"kind": "linf", "delta": 0.1, "x0_sha256": "..."},
     "neurons": [{"layer": 1, "index": 0, "pre_lo": 17.0, "pre_hi": 24.0,
                  "phase": "active"}, ...]}

``pre_lo``/``pre_hi`` bound the pre-activation value.  Floats carry 17
significant digits so a reader recovers the exact doubles.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._jsonfmt import dumps
from .analyzer import AnalysisReport
from .errors import HintsSchemaError
from .network import REGION_KINDS, Network, RobustnessQuery
from .symprop import NeuronPhase

VERSION = "nnabs-hints-v1"
_PHASES = {ph.value for ph in NeuronPhase}


@dataclass(frozen=True)
class NeuronHint:
    layer: int
    index: int
    pre_lo: float
    pre_hi: float
    phase: str

    def to_dict(self) -> dict:
        return {"layer": self.layer, "index": self.index, "pre_lo": self.pre_lo,
                "pre_hi": self.pre_hi, "phase": self.phase}


@dataclass(frozen=True)
class HintsFile:
    model_sha256: str
    region: dict
    neurons: list[NeuronHint] = field(default_factory=list)
    version: str = VERSION

    def to_dict(self) -> dict:
        return {"version": self.version, "model_sha256": self.model_sha256,
                "region": dict(self.region), "neurons": [h.to_dict() for h in self.neurons]}

    def dumps(self) -> str:
        return dumps(self.to_dict()) + "\n"

    def decided(self) -> list[NeuronHint]:
        return [h for h in self.neurons if h.phase != NeuronPhase.UNCERTAIN.value]


def x0_digest(x0) -> str:
    return hashlib.sha256(np.asarray(x0, dtype="<f8").tobytes()).hexdigest()


def hints_from_report(report: AnalysisReport, net: Network, q: RobustnessQuery) -> HintsFile:
    region = {"kind": q.region_kind, "delta": float(q.delta), "x0_sha256": x0_digest(q.x0)}
    neurons = [NeuronHint(layer, j, lo, hi, ph.value) for layer, j, lo, hi, ph in report.relu_neurons()]
    return HintsFile(net.sha256(), region, neurons)


def write_hints(hints: HintsFile, path: str | Path) -> None:
    Path(path).write_text(hints.dumps(), encoding="utf-8")


def export_hints(report: AnalysisReport, net: Network, q: RobustnessQuery, path: str | Path) -> HintsFile:
    hints = hints_from_report(report, net, q)
    write_hints(hints, path)
    return hints


def _number(rec: dict, key: str, idx: int | None) -> float:
    v = rec.get(key)
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise HintsSchemaError(f"{key!r} must be a finite number", idx)
    return float(v)


def _integer(rec: dict, key: str, idx: int, minimum: int) -> int:
    v = rec.get(key)
    if isinstance(v, bool) or not isinstance(v, int) or v < minimum:
        raise HintsSchemaError(f"{key!r} must be an integer >= {minimum}", idx)
    return v


def parse_hints(doc) -> HintsFile:
    if not isinstance(doc, dict):
        raise HintsSchemaError("top level must be an object")
    if doc.get("version") != VERSION:
        raise HintsSchemaError(f"unsupported version {doc.get('version')!r}")
    sha = doc.get("model_sha256")
    if not isinstance(sha, str):
        raise HintsSchemaError("'model_sha256' must be a string")
    region = doc.get("region")
    if not isinstance(region, dict) or region.get("kind") not in REGION_KINDS:
        raise HintsSchemaError("'region' must be an object with kind linf or brightness")
    if _number(region, "delta", None) < 0:
        raise HintsSchemaError("region delta is negative")
    records = doc.get("neurons")
    if not isinstance(records, list):
        raise HintsSchemaError("'neurons' must be a list")
    neurons, seen = [], set()
    for i, rec in enumerate(records):
        if not isinstance(rec, dict):
            raise HintsSchemaError("record must be an object", i)
        layer = _integer(rec, "layer", i, 1)
        index = _integer(rec, "index", i, 0)
        lo, hi = _number(rec, "pre_lo", i), _number(rec, "pre_hi", i)
        phase = rec.get("phase")
        if phase not in _PHASES:
            raise HintsSchemaError(f"unknown phase {phase!r}", i)
        if lo > hi:
            raise HintsSchemaError(f"pre_lo {lo} exceeds pre_hi {hi}", i)
        if phase == "active" and lo < 0:
            raise HintsSchemaError("phase 'active' with negative lower bound", i)
        if phase == "inactive" and hi > 0:
            raise HintsSchemaError("phase 'inactive' with positive upper bound", i)
        if (layer, index) in seen:
            raise HintsSchemaError(f"duplicate neuron ({layer}, {index})", i)
        seen.add((layer, index))
        neurons.append(NeuronHint(layer, index, lo, hi, phase))
    return HintsFile(sha, dict(region), neurons, VERSION)


def import_hints(path: str | Path) -> HintsFile:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise HintsSchemaError(f"not valid JSON: {exc}") from None
    return parse_hints(doc)
