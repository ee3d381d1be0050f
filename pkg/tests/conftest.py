import numpy as np
import pytest

from hypiss import certifier, lyapunov, solver
from hypiss.models import build_linear_benchmark, saint_venant_scenario

BENCHMARK_J = (200, 400, 800, 1600)


def run_scenario(scenario, report=None):
    if report is None:
        report = certifier.certify(scenario)
    result = solver.run(solver.SimulationRun(
        grid=scenario.grid, coefficients=scenario.coefficients,
        initial=scenario.initial, weights=scenario.weights))
    eta = report.eta if report.eta is not None else report.c1.eta_ratio
    trace = lyapunov.build_trace(result.times, result.lyapunov,
                                 result.sup_b_sq_before, scenario.grid,
                                 eta, report.nu, scenario.xi)
    return report, trace


@pytest.fixture(scope="session")
def benchmark_traces():
    """(cfl, J) -> (certificate, trace) for the standard benchmark."""
    out = {}
    for cfl in (0.75, 1.0):
        for J in BENCHMARK_J:
            sc = build_linear_benchmark(J=J, cfl=cfl, T=10.0, mu=0.575, xi=0.125,
                                        kappa12=0.5, kappa21=0.5)
            out[(cfl, J)] = run_scenario(sc)
    return out


@pytest.fixture(scope="session")
def saint_venant_trace():
    """Certificate and trace of the shipped channel-flow decay experiment."""
    sc = saint_venant_scenario(J=1600, cfl=0.75, T=10.0, mu=0.575)
    return run_scenario(sc)
