"""Sound bounds for feed-forward ReLU networks by abstract interpretation.

Box and zonotope domains, optionally sharpened by symbolic propagation of
linear expressions through the network.
"""

from .analyzer import (CONFIGS, AnalysisConfig, AnalysisReport, Verdict, analyze, check_robustness,
                       max_verifiable_delta, soundness_sample, stable_stats, verify)
from .hints import HintsFile, export_hints, import_hints
from .interval import IntervalElement
from .linexpr import LinearExpr
from .network import (Convolutional, FullyConnected, InputRegion, MaxPool, Network, RobustnessQuery,
                      build_region, concrete_forward, forward_trace, load_input, load_network)
from .symprop import NeuronPhase, SymbolicState
from .zonotope import ZonotopeElement

__version__ = "0.1.0"
