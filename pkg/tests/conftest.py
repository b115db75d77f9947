import numpy as np
import pytest

from pbident import (ControllerKind, EstimatorKind, SimConfig,
                     circuit_scenario, ph_scenario, run)


def rk4(rate, y0, t0, t1, n):
    """Test-local fixed-step RK4; independent of the package stepping."""
    y = np.asarray(y0, dtype=float).copy()
    h = (t1 - t0) / n
    t = t0
    out = [y.copy()]
    for _ in range(n):
        k1 = rate(t, y)
        k2 = rate(t + h / 2, y + h / 2 * k1)
        k3 = rate(t + h / 2, y + h / 2 * k2)
        k4 = rate(t + h, y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t += h
        out.append(y.copy())
    return np.array(out)


@pytest.fixture(scope="session")
def circuit():
    return circuit_scenario()


@pytest.fixture(scope="session")
def ph():
    return ph_scenario()


# -- shared heavy runs (reused by the acceptance suite and unit tests) -----

@pytest.fixture(scope="session")
def circuit_gd_run(circuit):
    """Flagship run: circuit, power-balance regression, interlaced estimator."""
    return run(circuit, SimConfig())


@pytest.fixture(scope="session")
def circuit_gradient_run(circuit):
    """Failure baseline: circuit, standard regression, gradient at gamma=30."""
    return run(circuit, SimConfig(estimator=EstimatorKind.GRADIENT_STD,
                                  gamma=30.0))


@pytest.fixture(scope="session")
def circuit_known_run(circuit):
    return run(circuit, SimConfig(estimator=EstimatorKind.NONE,
                                  controller=ControllerKind.KNOWN_PARAMETER))


@pytest.fixture(scope="session")
def ph_known_run(ph):
    return run(ph, SimConfig(t_end=10.0, estimator=EstimatorKind.NONE,
                             controller=ControllerKind.KNOWN_PARAMETER))


@pytest.fixture(scope="session")
def ph_gd_run(ph):
    return run(ph, SimConfig())


@pytest.fixture(scope="session")
def ph_gradient_run(ph):
    """Starved gradient baseline: small initial disturbance, gamma=30."""
    return run(ph, SimConfig(estimator=EstimatorKind.GRADIENT_PBEP_OVERPARAM,
                             gamma=30.0, x0=np.array([0.3, 0.3])))
