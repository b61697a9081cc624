import numpy as np
import pytest

from nnabs.analyzer import (CONFIGS, AnalysisConfig, analyze, check_robustness, max_verifiable_delta,
                            report_to_dict, soundness_sample, stable_stats, verify)
from nnabs.network import FullyConnected, InputRegion, Network, RobustnessQuery, load_network
from netgen import random_conv_net

SYMBOX = AnalysisConfig("box", True)
BOX = AnalysisConfig("box", False)


def test_wide_bounds(tiny_net, wide_region):
    sym = analyze(tiny_net, wide_region, SYMBOX)
    plain = analyze(tiny_net, wide_region, BOX)
    assert (sym.output_lo[0], sym.output_hi[0]) == (16.0, 22.0)
    assert (plain.output_lo[0], plain.output_hi[0]) == (14.0, 24.0)
    assert list(sym.layers[0].pre_lo) == [17.0, 0.0] and list(sym.layers[0].pre_hi) == [24.0, 3.0]


def test_straddle_bounds(tiny_net, straddle_region):
    rep = analyze(tiny_net, straddle_region, SYMBOX)
    assert (rep.output_lo[0], rep.output_hi[0]) == (20.0, 27.0)
    h = rep.layers[0]
    assert (h.pre_lo[1], h.pre_hi[1]) == (-1.0, 1.5)
    assert (h.post_lo[1], h.post_hi[1]) == (0.0, 1.5)
    assert stable_stats(rep) == {"active": 1, "inactive": 0, "uncertain": 1}


def test_wide_stability(tiny_net, wide_region):
    assert stable_stats(analyze(tiny_net, wide_region, SYMBOX)) == {"active": 2, "inactive": 0, "uncertain": 0}


def test_identity_network_is_exact():
    net = Network((3,), [FullyConnected(np.eye(3), np.zeros(3), relu=False)])
    region = InputRegion([0, -1, 2], [1, 0, 5])
    for cfg in CONFIGS.values():
        rep = analyze(net, region, cfg)
        np.testing.assert_array_equal(rep.output_lo, region.lo)
        np.testing.assert_array_equal(rep.output_hi, region.hi)


def test_symbolic_difference_verifies():
    # y0 = x0 + x1, y1 = x1; y0 - y1 = x0 > 0 although the intervals overlap
    net = Network((2,), [FullyConnected([[1, 1], [0, 1]], [0, 0], relu=False)])
    region = InputRegion([0.1, -1], [1, 1])
    v_sym = check_robustness(analyze(net, region, SYMBOX), 0)
    v_box = check_robustness(analyze(net, region, BOX), 0)
    assert v_sym.verified and v_sym.method == "symbolic"
    assert v_sym.margins[1] == pytest.approx(0.1)
    assert not v_box.verified and v_box.method == "interval"
    v_zono = check_robustness(analyze(net, region, AnalysisConfig("zono", False)), 0)
    assert v_zono.verified and v_zono.method == "zonotope"


def test_verify_and_label(data_dir):
    net = load_network(data_dir / "tiny_net_two_outputs.json")
    verdict, rep = verify(net, RobustnessQuery([5, 3.5], 1.0), SYMBOX)
    assert verdict.verified and verdict.label == 0
    with pytest.raises(ValueError):
        check_robustness(rep, 5)


def test_max_delta_stops_at_first_failure(monkeypatch, tiny_net):
    import nnabs.analyzer as mod
    outcomes = iter([True, True, False, True])

    class Fake:
        def __init__(self, ok):
            self.verified = ok

    monkeypatch.setattr(mod, "verify", lambda *a, **k: (Fake(next(outcomes)), None))
    assert max_verifiable_delta(tiny_net, [4, 3], [0.1, 0.2, 0.3, 0.4]) == 0.2


def test_max_delta_none_and_validation(data_dir):
    net = load_network(data_dir / "tiny_net_two_outputs.json")
    assert max_verifiable_delta(net, [5, 3.5], [0.5, 1.0]) == 1.0
    assert max_verifiable_delta(net, [5, 3.5], [100.0]) is None
    with pytest.raises(ValueError):
        max_verifiable_delta(net, [5, 3.5], [0.2, 0.1])
    with pytest.raises(ValueError):
        max_verifiable_delta(net, [5, 3.5], [])


def test_sampling_detects_truncated_bounds(tiny_net, wide_region, rng):
    rep = analyze(tiny_net, wide_region, SYMBOX)
    assert soundness_sample(tiny_net, wide_region, rep, 1000, rng) == 0
    rep.layers[-1].post_hi = rep.layers[-1].post_hi - 2.0
    assert soundness_sample(tiny_net, wide_region, rep, 1000, rng) > 0


def test_conv_net_soundness(rng):
    for _ in range(10):
        net = random_conv_net(rng)
        x0 = rng.uniform(0, 1, size=net.input_dim)
        region = InputRegion(x0 - 0.1, x0 + 0.1)
        for cfg in CONFIGS.values():
            rep = analyze(net, region, cfg)
            assert soundness_sample(net, region, rep, 300, rng) == 0


def test_eps_out_widens(tiny_net, wide_region):
    tight = analyze(tiny_net, wide_region, SYMBOX)
    loose = analyze(tiny_net, wide_region, AnalysisConfig("box", True, eps_out=1e-3))
    assert np.all(loose.output_lo <= tight.output_lo) and np.all(loose.output_hi >= tight.output_hi)


def test_report_dict_is_deterministic(tiny_net, wide_region):
    a = report_to_dict(analyze(tiny_net, wide_region, SYMBOX))
    b = report_to_dict(analyze(tiny_net, wide_region, SYMBOX))
    assert a == b and "wall_time" not in a
    assert a["output"] == {"lo": [16.0], "hi": [22.0]}


def test_config_validation():
    with pytest.raises(ValueError):
        AnalysisConfig("octagon")
    with pytest.raises(ValueError):
        AnalysisConfig("box", True, -1.0)
    assert list(CONFIGS) == ["Box", "Zono", "SymBox", "SymZono"]


def test_region_dimension_mismatch(tiny_net):
    with pytest.raises(ValueError):
        analyze(tiny_net, InputRegion([0], [1]))
