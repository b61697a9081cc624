"""Layer-by-layer abstract execution and robustness checks."""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .interval import IntervalElement
from .linexpr import LinearExpr
from .network import FullyConnected, InputRegion, MaxPool, Network, RobustnessQuery, build_region, concrete_forward
from .symprop import NeuronPhase, SymbolicState, relu_after_assign, sym_assign_linear, sym_maxpool
from .zonotope import ZonotopeElement

DOMAINS = ("box", "zono")


@dataclass(frozen=True)
class AnalysisConfig:
    domain: str = "box"
    symprop: bool = True
    eps_out: float = 0.0
    sample_count: int = 1000

    def __post_init__(self):
        if self.domain not in DOMAINS:
            raise ValueError(f"unknown domain {self.domain!r}")
        if self.eps_out < 0:
            raise ValueError("eps_out must be nonnegative")

    @property
    def name(self) -> str:
        base = "Box" if self.domain == "box" else "Zono"
        return "Sym" + base if self.symprop else base


# the four configurations compared throughout
CONFIGS = {c.name: c for c in (AnalysisConfig("box", False), AnalysisConfig("zono", False),
                               AnalysisConfig("box", True), AnalysisConfig("zono", True))}


@dataclass
class LayerReport:
    index: int
    kind: str
    names: list[str]
    pre_lo: np.ndarray
    pre_hi: np.ndarray
    post_lo: np.ndarray
    post_hi: np.ndarray
    phases: list[NeuronPhase] | None = None


@dataclass
class AnalysisReport:
    config: AnalysisConfig
    layers: list[LayerReport]
    state: SymbolicState = field(repr=False)
    wall_time: float = 0.0

    @property
    def output(self) -> LayerReport:
        return self.layers[-1]

    @property
    def output_lo(self) -> np.ndarray:
        return self.output.post_lo

    @property
    def output_hi(self) -> np.ndarray:
        return self.output.post_hi

    def relu_neurons(self):
        """Yield ``(layer_index, neuron_index, pre_lo, pre_hi, phase)``."""
        for lr in self.layers:
            if lr.phases is None:
                continue
            for j, ph in enumerate(lr.phases):
                yield lr.index, j, float(lr.pre_lo[j]), float(lr.pre_hi[j]), ph


@dataclass(frozen=True)
class Verdict:
    verified: bool
    label: int
    margins: dict[int, float]
    method: str

    @property
    def status(self) -> str:
        return "Verified" if self.verified else "Unknown"


def _initial_element(domain: str, names: list[str], region: InputRegion):
    if domain == "box":
        return IntervalElement.from_box(names, region.lo, region.hi)
    return ZonotopeElement.from_box(names, region.lo, region.hi, first_id=0)


def _row_expr(prev: Sequence[str], row: np.ndarray, bias: float) -> LinearExpr:
    nz = np.flatnonzero(row)
    return LinearExpr(tuple((prev[i], row[i]) for i in nz), bias)


def analyze(net: Network, region: InputRegion, cfg: AnalysisConfig = AnalysisConfig()) -> AnalysisReport:
    if region.dim != net.input_dim:
        raise ValueError(f"region has {region.dim} dimensions, network expects {net.input_dim}")
    t0 = time.perf_counter()
    prev = [f"x{i}" for i in range(net.input_dim)]
    st = SymbolicState.initial(_initial_element(cfg.domain, prev, region), cfg.symprop)
    counter = itertools.count(net.input_dim)
    layers = []
    for k, (layer, shape) in enumerate(zip(net.layers, net.shapes), start=1):
        width = int(np.prod(net.shapes[k]))
        names = [f"h{k}_{j}" for j in range(width)]
        pre_lo, pre_hi = np.empty(width), np.empty(width)
        phases = None
        if isinstance(layer, MaxPool):
            kind = "maxpool"
            for j, win in enumerate(layer.windows(shape)):
                st = sym_maxpool(st, names[j], [prev[i] for i in win], counter)
                pre_lo[j], pre_hi[j] = st.bounds(names[j])
        else:
            kind = "fc" if isinstance(layer, FullyConnected) else "conv"
            W, b = layer.affine(shape)
            if layer.relu:
                phases = []
            for j in range(width):
                st = sym_assign_linear(st, names[j], _row_expr(prev, W[j], b[j]), cfg.eps_out, counter)
                pre_lo[j], pre_hi[j] = st.bounds(names[j])
                if layer.relu:
                    st, ph = relu_after_assign(st, names[j], counter)
                    phases.append(ph)
        st = replace(st, n=st.n.compact())
        post = [st.bounds(v) for v in names]
        post_lo = np.array([lo for lo, _ in post])
        post_hi = np.array([hi for _, hi in post])
        layers.append(LayerReport(k, kind, names, pre_lo, pre_hi, post_lo, post_hi, phases))
        prev = names
    return AnalysisReport(cfg, layers, st, time.perf_counter() - t0)


def check_robustness(report: AnalysisReport, label: int) -> Verdict:
    """Decide whether every output other than ``label`` stays strictly below it.

    Each margin is the better of two sound lower bounds on ``y_label - y_j``:
    the plain interval difference, and the difference evaluated in the
    numeric domain after substituting symbolic expressions (for zonotopes
    this keeps the shared noise symbols).
    """
    out = report.output
    n_out = len(out.names)
    if not 0 <= label < n_out:
        raise ValueError(f"label {label} out of range for {n_out} outputs")
    st = report.state
    yl = out.names[label]
    margins = {}
    for j, yj in enumerate(out.names):
        if j == label:
            continue
        diff = st.expr_of(yl) - st.expr_of(yj)
        rel_lo, _ = st.n.eval_bounds(diff)
        margins[j] = max(rel_lo, float(out.post_lo[label] - out.post_hi[j]))
    if st.symbolic and yl in st.xi and all(y in st.xi for y in out.names):
        method = "symbolic"
    elif isinstance(st.n, ZonotopeElement):
        method = "zonotope"
    else:
        method = "interval"
    return Verdict(all(m > 0 for m in margins.values()), label, margins, method)


def stable_stats(report: AnalysisReport) -> dict[str, int]:
    counts = {ph.value: 0 for ph in NeuronPhase}
    for *_, ph in report.relu_neurons():
        counts[ph.value] += 1
    return counts


def verify(net: Network, q: RobustnessQuery, cfg: AnalysisConfig = AnalysisConfig()) -> tuple[Verdict, AnalysisReport]:
    report = analyze(net, build_region(q), cfg)
    return check_robustness(report, q.resolved_label(net)), report


def max_verifiable_delta(net: Network, x0, deltas: Sequence[float], cfg: AnalysisConfig = AnalysisConfig(),
                         region_kind: str = "linf", label: int | None = None) -> float | None:
    """Largest δ on the ascending grid ``deltas`` that verifies; stops at the first failure."""
    if not deltas:
        raise ValueError("empty delta list")
    if any(d < 0 for d in deltas) or list(deltas) != sorted(deltas):
        raise ValueError("deltas must be nonnegative and ascending")
    best = None
    for d in deltas:
        verdict, _ = verify(net, RobustnessQuery(x0, d, region_kind, label), cfg)
        if not verdict.verified:
            break
        best = d
    return best


def soundness_sample(net: Network, region: InputRegion, report: AnalysisReport, n: int,
                     rng: np.random.Generator | None = None, slack: float = 1e-9) -> int:
    """Number of uniformly sampled inputs whose output escapes the reported bounds."""
    if n < 1:
        raise ValueError("need at least one sample")
    rng = np.random.default_rng(0) if rng is None else rng
    ys = concrete_forward(net, region.sample(n, rng))
    bad = (ys < report.output_lo - slack) | (ys > report.output_hi + slack)
    return int(np.count_nonzero(bad.any(axis=1)))


def report_to_dict(report: AnalysisReport, verdict: Verdict | None = None) -> dict:
    """Machine-readable report; wall time is left out so reruns compare equal."""
    cfg = report.config
    doc = {
        "version": "nnabs-report-v1",
        "config": {"domain": cfg.domain, "symprop": cfg.symprop, "eps_out": cfg.eps_out},
        "layers": [],
        "output": {"lo": report.output_lo.tolist(), "hi": report.output_hi.tolist()},
        "stability": stable_stats(report),
    }
    for lr in report.layers:
        entry = {"layer": lr.index, "kind": lr.kind,
                 "pre_lo": lr.pre_lo.tolist(), "pre_hi": lr.pre_hi.tolist(),
                 "post_lo": lr.post_lo.tolist(), "post_hi": lr.post_hi.tolist()}
        if lr.phases is not None:
            entry["phases"] = [ph.value for ph in lr.phases]
        doc["layers"].append(entry)
    if verdict is not None:
        doc["verdict"] = {"status": verdict.status, "label": verdict.label, "method": verdict.method,
                          "margins": {str(j): m for j, m in sorted(verdict.margins.items())}}
    return doc
