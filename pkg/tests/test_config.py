import json

import numpy as np
import pytest

from dgft.config import RunConfig, StepPolicy, build_problem, sec6_initial_condition
from dgft.errors import ConfigurationError
from dgft.polykernel import gauss_rule


def test_defaults_describe_burgers_shock_example():
    cfg = RunConfig()
    assert cfg.domain == (0.0, 10.0) and cfg.x_s0 == 3.18 and cfg.inflow == 1.2
    assert cfg.p == 3 and cfg.T == 4.0 and cfg.h == 0.5


def test_json_roundtrip(tmp_path):
    cfg = RunConfig(m=40, step_policy=StepPolicy(tau=1 / 64), snapshot_times=[0.0, 4.0],
                    detector={"growth": 2.0, "persistence": 2, "window": 3, "floor": 1.0})
    path = tmp_path / "c.json"
    path.write_text(json.dumps(cfg.to_dict()))
    back = RunConfig.load(path)
    assert back == cfg


@pytest.mark.parametrize("data, match", [
    ({"mesh_size": 0.5}, "unknown"),
    ({"h": 0.5}, "give m"),
    ({"step_policy": {"gama": 0.1}}, "step_policy"),
    ({"stage_frame": "lagrangian"}, "stage_frame"),
    ({"T": -1.0}, "end time"),
    ({"x_s0": 10.0}, "shock position"),
    ({"tau_schedule": [[2.5, 0.1]]}, "tau_schedule"),
])
def test_invalid_configs_rejected(data, match):
    with pytest.raises(ConfigurationError, match=match):
        RunConfig.from_dict(data)


def test_unreadable_file_is_config_error(tmp_path):
    with pytest.raises(ConfigurationError):
        RunConfig.load(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigurationError):
        RunConfig.load(bad)


def test_expression_initial_condition_matches_preset():
    expr = {"left": "1.2 + 0.4*sin(x/1.4)**4", "right": "0.8 - 0.3*sin((x - 3.1)/0.85)"}
    _, a = build_problem(RunConfig(initial_condition=expr))
    _, b = build_problem(RunConfig())
    np.testing.assert_allclose(a.coeffs, b.coeffs, rtol=0, atol=1e-15)


@pytest.mark.parametrize("expr", ["__import__('os')", "x +", "open('f')", "x.real"])
def test_unsafe_or_broken_expressions_rejected(expr):
    with pytest.raises(ConfigurationError):
        build_problem(RunConfig(initial_condition={"left": expr, "right": "x"}))


def test_inflow_expression_in_time():
    scheme, _ = build_problem(RunConfig(inflow="1.2 + 0.0*t"))
    assert scheme.inflow.value(2.0) == pytest.approx(1.2)


def test_initial_projection_close_to_data():
    # quartic projection error: O(h^4) away from the shock cell
    for m, tol in ((20, 5e-3), (80, 2e-5)):
        _, st = build_problem(RunConfig(m=m))
        left, right = sec6_initial_condition()
        xi = gauss_rule(6).nodes
        err = 0.0
        for k, poly in enumerate(st.polys()):
            x = poly.x_lo + 0.5 * (xi + 1) * poly.width
            piece = left if poly.x_hi <= 3.18 else right
            err = max(err, np.max(np.abs(poly(x) - piece(x))))
        assert err < tol
