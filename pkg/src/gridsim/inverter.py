"""Inverter power references and the simplified RL inverter circuit.

Phasors are rms, the LV grid voltage sits at angle 0 unless given otherwise,
and a reference (P*, Q*) is delivered to the grid as S = V * conj(I) = P* + jQ*,
so the inductor current lags the voltage by arctan(Q*/P*).

The circuit is ``R (i_pv - i_L) = L di_L/dt + v_g``; in steady state
``I_L = (R I_pv - V_g) / (R + j w L)``.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import DivergenceError, DomainError
from .grid import DEFAULT_V_BASE

DEFAULT_FREQUENCY = 50.0
DEFAULT_V_LV = 220.0
SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class InverterParams:
    r: float = 1.0
    l: float = 1.0 / (2.0 * math.pi * DEFAULT_FREQUENCY)
    omega: float = 2.0 * math.pi * DEFAULT_FREQUENCY
    v_lv_rms: float = DEFAULT_V_LV
    turns_ratio_n: float = DEFAULT_V_BASE / DEFAULT_V_LV

    def __post_init__(self):
        for name in ("r", "l", "omega", "v_lv_rms", "turns_ratio_n"):
            if not getattr(self, name) > 0:
                raise DomainError(f"inverter parameter {name} must be positive")

    @property
    def impedance(self) -> complex:
        return complex(self.r, self.omega * self.l)

    @property
    def period(self) -> float:
        return 2.0 * math.pi / self.omega


def turns_ratio(v_mv_rms: float, v_lv_rms: float = DEFAULT_V_LV) -> float:
    return v_mv_rms / v_lv_rms


@dataclass(frozen=True)
class PowerReference:
    p_star: float  # W
    q_star: float = 0.0  # var


@dataclass(frozen=True)
class CurrentReference:
    phi_l_star: float  # rad
    i_l_mv_star: float  # A rms, MV side
    i_l_star: float  # A rms, LV side

    def phasor(self) -> complex:
        """LV inductor current phasor relative to a grid voltage at angle 0."""
        return cmath.rect(self.i_l_star, -self.phi_l_star)


def compute_reference(ref: PowerReference, v_mv_rms: float,
                      inv: InverterParams = InverterParams()) -> CurrentReference:
    if not v_mv_rms > 0:
        raise DomainError(f"MV voltage must be positive, got {v_mv_rms}")
    if not ref.p_star > 0:
        raise DomainError("p_star must be positive (generating operation only)")
    phi = math.atan(ref.q_star / ref.p_star)
    i_mv = ref.p_star / (v_mv_rms * math.cos(phi))
    return CurrentReference(phi, i_mv, inv.turns_ratio_n * i_mv)


def phasor_solve_forward(i_pv: complex, inv: InverterParams, v_g: complex) -> complex:
    return (inv.r * i_pv - v_g) / inv.impedance


def phasor_solve_inverse(target: CurrentReference, inv: InverterParams,
                         v_g: complex = DEFAULT_V_LV) -> tuple[float, float]:
    """Inverter current (rms magnitude, phase) that realises ``target``."""
    i_pv = (inv.impedance * target.phasor() + v_g) / inv.r
    return abs(i_pv), cmath.phase(i_pv)


# -- time-domain tracking ---------------------------------------------------

@dataclass(frozen=True)
class ControllerGains:
    """Per-period gains: proportional on magnitude, PI on phase."""
    kp_mag: float = 0.5
    kp_phase: float = 0.1
    ki_phase: float = 30.0  # 1/s


@dataclass
class TrackingResult:
    period_rms: list[float] = field(default_factory=list)
    period_phase: list[float] = field(default_factory=list)
    period_error: list[float] = field(default_factory=list)
    command_magnitude: list[float] = field(default_factory=list)
    command_phase: list[float] = field(default_factory=list)
    target: complex = 0j
    tolerance: float = 0.01

    @property
    def periods(self) -> int:
        return len(self.period_rms)

    @property
    def settled_period(self) -> int | None:
        """First period (1-based) from which every later error stays within tolerance."""
        settled = None
        for k, e in enumerate(self.period_error, start=1):
            if e <= self.tolerance:
                if settled is None:
                    settled = k
            else:
                settled = None
        return settled

    @property
    def converged(self) -> bool:
        return self.settled_period is not None

    @property
    def stalled(self) -> bool:
        """Output stopped changing while still outside tolerance (e.g. zero gains)."""
        if self.converged or self.periods < 3:
            return False
        a, b = self.period_error[-2:]
        return abs(a - b) <= 1e-9 * max(1.0, abs(a))


def _wrap(angle: float) -> float:
    return (angle + math.pi) % (2.0 * math.pi) - math.pi


def track_references(target: CurrentReference, inv: InverterParams = InverterParams(),
                     gains: ControllerGains = ControllerGains(), duration: float | None = None,
                     *, periods: int | None = None, dt: float = 1e-5,
                     v_g: complex = DEFAULT_V_LV, initial: str = "zero",
                     tolerance: float = 0.01) -> TrackingResult:
    """Simulate closed-loop tracking of the inductor current reference.

    The inductor ODE is integrated with fixed-step RK4. At the end of every grid
    period the fundamental phasor of ``i_L`` is extracted; its error is referred
    to the inverter side through the nominal RL impedance, and the radial and
    angular parts of that referred error drive the magnitude (P) and phase (PI)
    commands held during the next period.

    ``initial="zero"`` starts from zero current and zero commands,
    ``initial="steady"`` from the phasor solution.
    """
    t_period = inv.period
    if periods is None:
        if duration is None:
            periods = 20
        else:
            periods = int(round(duration / t_period))
    if periods < 20:
        raise DomainError("tracking run must cover at least 20 grid periods")
    nsteps = int(round(t_period / dt))
    if abs(nsteps * dt - t_period) > 1e-9 * t_period:
        raise DomainError("dt must divide the grid period")

    i_target = target.phasor()
    z_ratio = inv.impedance / inv.r
    if initial == "steady":
        mag, phi = phasor_solve_inverse(target, inv, v_g)
        i_l = SQRT2 * i_target.real
    elif initial == "zero":
        mag, phi, i_l = 0.0, 0.0, 0.0
    else:
        raise DomainError(f"unknown initial state {initial!r}")

    amp_g = SQRT2 * abs(v_g)
    phase_g = cmath.phase(v_g)
    scale = max(abs(i_target), 1e-12)
    e_phase_prev = 0.0
    result = TrackingResult(target=i_target, tolerance=tolerance)
    for k in range(periods):
        i_l, sc, ss, sq = kernels.rl_period(i_l, dt, nsteps, inv.r, inv.l, inv.omega,
                                            SQRT2 * mag, phi, amp_g, phase_g)
        measured = complex(2.0 * sc / nsteps, -2.0 * ss / nsteps) / SQRT2
        rms = math.sqrt(sq / nsteps)
        result.period_rms.append(rms)
        result.period_phase.append(cmath.phase(measured))
        result.period_error.append(abs(measured - i_target) / scale)
        if k >= 5 and result.period_rms[k - 5] > 1e-9 and rms > 10.0 * result.period_rms[k - 5]:
            raise DivergenceError(f"tracking diverged: rms grew {rms / result.period_rms[k - 5]:.3g}x"
                                  f" over 5 periods (period {k + 1})")
        required = cmath.rect(mag, phi) + z_ratio * (i_target - measured)
        e_mag = abs(required) - mag
        e_phase = _wrap(cmath.phase(required) - phi) if required != 0 else 0.0
        mag = max(0.0, mag + gains.kp_mag * e_mag)
        phi += gains.kp_phase * (e_phase - e_phase_prev) + gains.ki_phase * t_period * e_phase
        e_phase_prev = e_phase
        result.command_magnitude.append(mag)
        result.command_phase.append(phi)
    return result


def tracking_table(result: TrackingResult) -> np.ndarray:
    """Rows of (period, rms magnitude, phase, relative error)."""
    return np.column_stack([np.arange(1, result.periods + 1), result.period_rms,
                            result.period_phase, result.period_error])
