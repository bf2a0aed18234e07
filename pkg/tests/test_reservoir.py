import math
import warnings

import numpy as np
import pytest

from qfic import qmath
from qfic.reservoir import (HADAMARD, ReservoirUnitSpec, hphih, ideal_hphih, phase_gate,
                            prepare_unit)


def hand_expanded(phi):
    # H diag(1, e^{i phi}) H |0> = ((1 + e^{i phi}) |0> + (1 - e^{i phi}) |1>) / 2
    c, s = math.cos(phi), math.sin(phi)
    return np.array([[(1 + c) / 2, 0.5j * s], [-0.5j * s, (1 - c) / 2]])


@pytest.mark.parametrize("phi", [0.0, 0.3, math.pi / 2, 2.0, math.pi, 5.5])
def test_ideal_matches_hand_expansion(phi):
    assert np.allclose(ideal_hphih(phi), hand_expanded(phi), atol=1e-15)


def test_ideal_half_pi_bloch_sign():
    # realized convention: H phi H |0> at pi/2 points along -y
    assert np.allclose(qmath.bloch_from_rho(ideal_hphih(math.pi / 2)), [0, -1, 0])
    assert np.allclose(np.diag(ideal_hphih(math.pi / 2)).real, [0.5, 0.5])


def test_hphih_is_unitary_and_rx_like():
    for phi in np.linspace(0, 2 * math.pi, 17):
        u = hphih(phi)
        assert np.allclose(u.conj().T @ u, np.eye(2), atol=1e-14)
        # up to a global phase H Rz H = Rx
        rx = np.cos(phi / 2) * np.eye(2) - 1j * np.sin(phi / 2) * qmath.SX
        assert abs(abs(np.trace(rx.conj().T @ u)) - 2) < 1e-12
    assert np.allclose(HADAMARD @ HADAMARD, np.eye(2))
    assert np.allclose(phase_gate(math.pi), qmath.SZ)


def test_prepare_unit_default_values(golden):
    rho = prepare_unit(ReservoirUnitSpec(math.pi / 2))
    assert rho[0, 0].real == pytest.approx(golden["unit_half_pi_pop"], rel=1e-14)
    assert rho[1, 1].real == pytest.approx(golden["unit_half_pi_pop"], rel=1e-14)
    assert rho[0, 1] == pytest.approx(1j * golden["unit_half_pi_coh_im"], rel=1e-14)
    assert np.allclose(qmath.bloch_from_rho(rho), [0, golden["unit_half_pi_ry"], 0], atol=1e-15)
    assert rho[0, 0].real == pytest.approx(0.498402, abs=1e-6)
    assert rho[0, 1].imag == pytest.approx(0.497606, abs=1e-6)


def test_prepare_unit_trace_and_normalize():
    spec = ReservoirUnitSpec(1.1)
    assert np.trace(prepare_unit(spec)).real == pytest.approx(math.exp(-480e-9 / 150e-6))
    assert np.trace(prepare_unit(spec, normalize=True)).real == pytest.approx(1.0)


def test_zero_exposure_is_ideal():
    for phi in np.linspace(0, 2 * math.pi, 9):
        assert np.allclose(prepare_unit(ReservoirUnitSpec(phi, 0.0)), ideal_hphih(phi))


def test_spec_validation():
    with pytest.raises(ValueError):
        ReservoirUnitSpec(0.0, t1=0.0)
    with pytest.raises(ValueError):
        ReservoirUnitSpec(0.0, exposure_time=-1.0)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        ReservoirUnitSpec(0.0, t1=100e-6, t2=400e-6)
    assert caught
