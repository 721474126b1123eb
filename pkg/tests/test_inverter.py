import cmath
import math

import pytest
from hypothesis import given, settings, strategies as st

from gridsim import inverter as inv_mod
from gridsim.errors import DivergenceError, DomainError
from gridsim.inverter import (ControllerGains, CurrentReference, InverterParams, PowerReference,
                              compute_reference, phasor_solve_forward, phasor_solve_inverse,
                              track_references)

V_MV = 2771.28
UNIT = InverterParams()  # R = 1, wL = 1


def test_defaults():
    assert UNIT.impedance == pytest.approx(1 + 1j, rel=1e-15)
    assert UNIT.period == pytest.approx(0.02, rel=1e-15)
    assert inv_mod.turns_ratio(V_MV) == pytest.approx(12.597, abs=5e-4)


def test_reference_unity_power_factor():
    ref = compute_reference(PowerReference(4000.0), V_MV)
    assert ref.phi_l_star == 0.0
    assert ref.i_l_mv_star == pytest.approx(1.4434, abs=5e-5)


def test_reference_angle():
    ref = compute_reference(PowerReference(3000.0, 3000.0), V_MV)
    assert ref.phi_l_star == pytest.approx(math.pi / 4, rel=1e-15)


def test_reference_lv_current():
    inv = InverterParams(turns_ratio_n=V_MV / 220.0)
    ref = compute_reference(PowerReference(4000.0), V_MV, inv)
    assert ref.i_l_star == pytest.approx(18.182, abs=5e-4)


@pytest.mark.parametrize("p, v", [(0.0, V_MV), (-10.0, V_MV), (100.0, 0.0)])
def test_reference_domain(p, v):
    with pytest.raises(DomainError):
        compute_reference(PowerReference(p), v)


@settings(max_examples=50)
@given(p=st.floats(1.0, 1e6), q=st.floats(-1e6, 1e6), v=st.floats(100.0, 1e5))
def test_power_consistency(p, q, v):
    ref = compute_reference(PowerReference(p, q), v)
    i_mv = cmath.rect(ref.i_l_mv_star, -ref.phi_l_star)
    s = v * i_mv.conjugate()
    assert abs(s - complex(p, q)) <= 1e-6 * abs(complex(p, q))


def test_forward_worked_case():
    assert phasor_solve_forward(230 + 10j, UNIT, 220.0) == pytest.approx(10 + 0j, abs=1e-12)


def test_forward_no_drive():
    assert phasor_solve_forward(220.0 / UNIT.r, UNIT, 220.0) == 0


def test_forward_linear():
    a = phasor_solve_forward(100 + 30j, UNIT, 220.0)
    b = phasor_solve_forward(3 * (100 + 30j), UNIT, 3 * 220.0)
    assert b == pytest.approx(3 * a, rel=1e-14)


def test_inverse_worked_case():
    mag, phi = phasor_solve_inverse(CurrentReference(0.0, 0.0, 10.0), UNIT, 220.0)
    assert mag == pytest.approx(math.hypot(230, 10), rel=1e-14)
    assert phi == pytest.approx(math.atan(10 / 230), rel=1e-14)
    assert mag == pytest.approx(230.217, rel=1e-4)
    assert phi == pytest.approx(0.043426, abs=1e-4)


def test_inverse_zero_target():
    mag, phi = phasor_solve_inverse(CurrentReference(0.0, 0.0, 0.0), UNIT, 220.0)
    assert mag == pytest.approx(220.0) and phi == 0.0


@settings(max_examples=50)
@given(mag=st.floats(0.01, 500.0), phi=st.floats(-1.5, 1.5), r=st.floats(0.1, 10.0),
       wl=st.floats(0.1, 10.0))
def test_round_trip(mag, phi, r, wl):
    inv = InverterParams(r=r, l=wl / (2 * math.pi * 50))
    target = CurrentReference(phi, 0.0, mag)
    m, a = phasor_solve_inverse(target, inv, 220.0)
    back = phasor_solve_forward(cmath.rect(m, a), inv, 220.0)
    assert abs(back - target.phasor()) <= 1e-9 * max(abs(target.phasor()), 1.0)


# -- time-domain tracking ---------------------------------------------------

TARGET = compute_reference(PowerReference(4000.0, 1000.0), V_MV)


def test_tracking_from_zero_settles():
    res = track_references(TARGET, periods=30)
    assert res.converged
    assert res.settled_period <= 20
    mag, _ = phasor_solve_inverse(TARGET, UNIT, 220.0)
    assert res.command_magnitude[-1] == pytest.approx(mag, rel=1e-2)
    assert res.period_rms[-1] == pytest.approx(TARGET.i_l_star, rel=1e-2)


def test_tracking_from_equilibrium():
    res = track_references(TARGET, periods=20, initial="steady")
    assert max(res.period_error) < 1e-6
    assert res.settled_period == 1


def test_tracking_zero_gains_stalls():
    res = track_references(TARGET, gains=ControllerGains(0.0, 0.0, 0.0), periods=20)
    assert not res.converged
    assert res.stalled


def test_tracking_divergence_detected():
    with pytest.raises(DivergenceError):
        track_references(TARGET, gains=ControllerGains(5.0, 5.0, 500.0), periods=40)


def test_tracking_duration_too_short():
    with pytest.raises(DomainError):
        track_references(TARGET, duration=0.1)


def test_tracking_duration_in_seconds():
    assert track_references(TARGET, duration=0.5).periods == 25


def test_tracking_table_shape():
    res = track_references(TARGET, periods=20)
    table = inv_mod.tracking_table(res)
    assert table.shape == (20, 4)
    assert table[0, 0] == 1 and table[-1, 0] == 20


def test_tracking_rejects_bad_initial():
    with pytest.raises(DomainError):
        track_references(TARGET, initial="warm")
