import warnings

import numpy as np
import pytest

from dgft.config import RunConfig, StepPolicy, build_problem, project_initial_state, sec6_initial_condition
from dgft.errors import CFLWarning
from dgft.polykernel import legendre_table
from dgft.timestepper import run


def random_state(scheme, base, rng, amplitude=1e-2):
    """Sec6 data projected on a mesh with a random shock position in its cell, then perturbed.

    Draws are repeated until every cell stays inside the flux's admissible interval.
    """
    mesh = base.mesh
    lo, hi = mesh.grid(mesh.i), mesh.grid(mesh.i + 1)
    left, right = sec6_initial_condition()
    scale = amplitude / (1.0 + np.arange(base.p + 1))
    probe = legendre_table(base.p, np.linspace(-1.0, 1.0, 33))
    while True:
        x_s = lo + (hi - lo) * rng.uniform(0.02, 0.98)
        st = project_initial_state(mesh.with_shock(x_s), left, right, base.p)
        coeffs = st.coeffs + rng.standard_normal(st.coeffs.shape) * scale
        u = coeffs @ probe
        if u.min() >= scheme.flux.u_min and u.max() <= scheme.flux.u_max:
            return st.replace(coeffs=coeffs, t=float(rng.uniform(0.0, 1.0)))


@pytest.fixture(scope="session")
def sec6_problem():
    return build_problem(RunConfig(m=20))


@pytest.fixture(scope="session")
def reference_run():
    """h=1/2, tau=1/25 run to T=4 with indicators every step."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", CFLWarning)
        return run(RunConfig(m=20, step_policy=StepPolicy(tau=1 / 25)))


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
