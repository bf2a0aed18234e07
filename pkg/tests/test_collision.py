import math

import numpy as np
import pytest
from scipy.linalg import expm

from qfic import qmath
from qfic.collision import (CollisionParams, NonConvergenceError, collide, collision_unitary,
                            interaction_hamiltonian, plus_state, run_collisions,
                            steady_state_exact, steady_state_numeric, transfer_maps)
from qfic.reservoir import ReservoirUnitSpec, prepare_unit
from conftest import random_density

DEFAULT = CollisionParams()


def test_hamiltonian_structure():
    h = interaction_hamiltonian(DEFAULT)
    assert h[1, 2] == pytest.approx(0.1) and h[2, 1] == pytest.approx(0.1)
    off = h - np.diag(np.diag(h))
    off[1, 2] = off[2, 1] = 0
    assert np.allclose(off, 0)
    n_exc = qmath.kron(qmath.SZ, qmath.I2) + qmath.kron(qmath.I2, qmath.SZ)
    assert np.abs(h @ n_exc - n_exc @ h).max() <= 1e-14


def test_unitary():
    u = collision_unitary(DEFAULT)
    assert np.abs(u.conj().T @ u - np.eye(4)).max() <= 1e-12
    assert np.allclose(u, expm(-1j * DEFAULT.tau * interaction_hamiltonian(DEFAULT)), atol=1e-13)


def test_full_swap(golden):
    p = CollisionParams(g=1.0, tau=math.pi / 2)
    out, _ = collide(qmath.projector([1, 0]), qmath.projector([0, 1]), p)
    assert out[1, 1].real == pytest.approx(golden["swap_probe_p1"], abs=1e-12)
    assert np.allclose(out, qmath.projector([0, 1]), atol=1e-12)


def test_one_collision_golden(golden):
    unit = prepare_unit(ReservoirUnitSpec(math.pi / 2))
    rho, mi = collide(plus_state(), unit, DEFAULT)
    assert mi > 0
    assert mi == pytest.approx(golden["mi_one_collision_half_pi"], rel=1e-8)
    a, re01, im01, d = golden["probe_after_one_collision_half_pi"][0]
    assert np.allclose(rho, [[a, re01 + 1j * im01], [re01 - 1j * im01, d]], atol=1e-13)


def test_collide_is_trace_preserving(rng):
    unit = prepare_unit(ReservoirUnitSpec(0.8))
    for _ in range(1000):
        rho = random_density(rng)
        out, mi = collide(rho, unit, DEFAULT)
        assert abs(np.trace(out) - 1) < 1e-12
        assert mi >= 0


def test_g_zero_no_correlations():
    tr = run_collisions(plus_state(), ReservoirUnitSpec(math.pi / 2),
                        CollisionParams(g=0.0), max_steps=2000, stop_at_convergence=False)
    assert np.all(tr.mutual_info == 0.0)
    pops = tr.probe_states[:, (0, 1), (0, 1)].real
    assert np.allclose(pops, 0.5)


def test_single_step_trace():
    spec = ReservoirUnitSpec(1.0)
    tr = run_collisions(plus_state(), spec, DEFAULT, max_steps=1)
    rho, mi = collide(plus_state(), prepare_unit(spec), DEFAULT)
    assert len(tr) == 1
    assert np.allclose(tr.probe_states[0], rho, atol=1e-14)
    assert tr.mutual_info[0] == pytest.approx(mi, rel=1e-9, abs=1e-15)


def test_transfer_matches_direct():
    spec = ReservoirUnitSpec(math.pi / 4)
    a = run_collisions(plus_state(), spec, DEFAULT, max_steps=3000, stop_at_convergence=False)
    b = run_collisions(plus_state(), spec, DEFAULT, max_steps=3000, stop_at_convergence=False,
                       method="direct")
    assert np.abs(a.probe_states - b.probe_states).max() < 1e-12
    assert np.abs(a.mutual_info - b.mutual_info).max() < 1e-11


def test_transfer_maps_linear(rng):
    unit = prepare_unit(ReservoirUnitSpec(2.0))
    to_probe, _ = transfer_maps(unit, DEFAULT)
    for _ in range(100):
        rho = random_density(rng)
        assert np.allclose((to_probe @ rho.ravel()).reshape(2, 2), collide(rho, unit, DEFAULT)[0])


@pytest.mark.parametrize("phi", [math.pi / 4, math.pi / 2, math.pi])
def test_converges_to_exact_fixed_point(phi):
    spec = ReservoirUnitSpec(phi)
    numeric = steady_state_numeric(spec, DEFAULT)
    exact = steady_state_exact(spec, DEFAULT)
    assert qmath.trace_distance(numeric, exact) < 1e-6


def test_steady_mi_ordering():
    final = {}
    for phi in (math.pi / 4, math.pi / 2, math.pi):
        tr = run_collisions(plus_state(), ReservoirUnitSpec(phi), DEFAULT)
        assert tr.converged
        final[phi] = tr.mutual_info[-1]
    assert final[math.pi / 2] > final[math.pi / 4] > final[math.pi]


def test_half_pi_populations_after_normalization():
    rho = steady_state_numeric(ReservoirUnitSpec(math.pi / 2), DEFAULT)
    assert np.allclose(np.diag(rho).real, 0.5, atol=1e-3)


def test_monotone_approach_after_transient():
    spec = ReservoirUnitSpec(math.pi / 4)
    exact = steady_state_exact(spec, DEFAULT)
    tr = run_collisions(plus_state(), spec, DEFAULT, max_steps=200_000, stop_at_convergence=False)
    # compare at stroboscopic multiples of the free-precession period
    period = int(round(2 * math.pi / DEFAULT.tau))
    idx = np.arange(len(tr) // 10, len(tr), 50 * period)
    d = [qmath.trace_distance(tr.probe_states[i], exact) for i in idx]
    assert np.all(np.diff(d) <= 1e-12)


def test_non_convergence_raises():
    with pytest.raises(NonConvergenceError):
        steady_state_numeric(ReservoirUnitSpec(math.pi / 4), DEFAULT, max_steps=100)


def test_argument_validation():
    with pytest.raises(ValueError):
        CollisionParams(tau=0.0)
    with pytest.raises(ValueError):
        CollisionParams(g=-1.0)
    with pytest.raises(ValueError):
        run_collisions(plus_state(), ReservoirUnitSpec(0.0), DEFAULT, max_steps=0)
    with pytest.raises(ValueError):
        run_collisions(plus_state(), ReservoirUnitSpec(0.0), DEFAULT, conv_tol=0.0)
    with pytest.raises(ValueError):
        run_collisions(plus_state(), ReservoirUnitSpec(0.0), DEFAULT, method="magic")
