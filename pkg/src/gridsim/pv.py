"""Single-diode PV array model.

The array current solves the implicit equation

    I = Ipv*Np - I0*Np*(exp((V + Rs*I)/(a*Vt)) - 1) - (V + Rs*I)/Rp

with the thermal voltage Vt = Ns*k*T/q, an irradiance/temperature scaled
photo-current and a temperature dependent saturation current. Currents are
found with the damped Newton kernel in :mod:`gridsim.kernels`.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import kernels
from .constants import CONSTANTS, KELVIN_OFFSET
from .errors import ConvergenceError, DomainError, NumericError, ParseError, ValidationError
from .grid import data_dir

SOLVE_TOL = 1e-9
SOLVE_MAXITER = 100
MPP_GRID_POINTS = 200
MPP_VOLTAGE_TOL = 1e-4
_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class PVArrayParams:
    i_pv_n: float
    i_sc_n: float
    v_oc_n: float
    k_i: float
    k_v: float
    a: float
    r_s: float
    r_p: float
    n_s: int
    n_p: int
    noct: float = 47.0
    t_n: float = 298.0
    g_n: float = 1000.0

    def __post_init__(self):
        if not (self.r_s > 0 and self.r_p > 0 and self.a > 0):
            raise ValidationError("r_s, r_p and a must be positive")
        if self.n_s < 1 or self.n_p < 1:
            raise ValidationError("n_s and n_p must be >= 1")
        if self.g_n != 1000.0 or self.t_n != 298.0:
            raise ValidationError("reference conditions must be g_n=1000 W/m2, t_n=298 K")


@dataclass(frozen=True)
class OperatingPoint:
    v: float
    i: float
    p: float

    @classmethod
    def at(cls, v: float, i: float) -> "OperatingPoint":
        return cls(v, i, v * i)


@dataclass(frozen=True)
class WeatherSample:
    g: float  # W/m2
    t_air: float  # degC

    def __post_init__(self):
        if self.g < 0:
            raise DomainError(f"irradiance must be >= 0, got {self.g}")


def cell_temperature(t_air: float, g: float, noct: float = 47.0) -> float:
    """Cell temperature [K] from air temperature [degC] and irradiance [W/m2].

    Irradiance enters in mW/cm2 (G/10), so the rise is (NOCT - 20)/800 * G.
    """
    if g < 0:
        raise DomainError(f"irradiance must be >= 0, got {g}")
    return (t_air + KELVIN_OFFSET) + (noct - 20.0) / 800.0 * g


def thermal_voltage(params: PVArrayParams, t_cell: float) -> float:
    if not t_cell > 0:
        raise DomainError(f"cell temperature must be positive, got {t_cell} K")
    return params.n_s * CONSTANTS.boltzmann_k * t_cell / CONSTANTS.electron_charge_q


def photo_current(params: PVArrayParams, g: float, t_cell: float) -> float:
    if g < 0:
        raise DomainError(f"irradiance must be >= 0, got {g}")
    return (params.i_pv_n + params.k_i * (t_cell - params.t_n)) * g / params.g_n


def saturation_current(params: PVArrayParams, t_cell: float) -> float:
    dt = t_cell - params.t_n
    arg = (params.v_oc_n + params.k_v * dt) / (params.a * thermal_voltage(params, t_cell))
    if arg > kernels.EXP_ARG_LIMIT:
        raise NumericError(f"saturation current exponent {arg:.3g} out of range")
    denom = math.expm1(arg)
    if not denom > 0:
        raise DomainError("unphysical parameter set: saturation current denominator <= 0")
    return (params.i_sc_n + params.k_i * dt) / denom


def _model(params: PVArrayParams, g: float, t_cell: float):
    """Kernel arguments (iph, i0, a*Vt, Rs, Rp, Np) at one operating condition."""
    return (photo_current(params, g, t_cell), saturation_current(params, t_cell),
            params.a * thermal_voltage(params, t_cell), params.r_s, params.r_p,
            float(params.n_p))


def residual(params: PVArrayParams, i: float, v: float, g: float, t_cell: float) -> float:
    """Single-diode residual f(I); zero at the array current."""
    return kernels.pv_residual(i, v, *_model(params, g, t_cell))


def residual_prime(params: PVArrayParams, i: float, v: float, g: float, t_cell: float) -> float:
    """Analytic df/dI used by the Newton iteration."""
    return kernels.pv_residual_prime(i, v, *_model(params, g, t_cell))


def _raise_for(status, v, f):
    if status == kernels.OVERFLOW:
        raise NumericError(f"exponent above {kernels.EXP_ARG_LIMIT:g} at V={v:.6g} V")
    raise ConvergenceError(f"current did not converge at V={v:.6g} V (residual {f:.3g} A)",
                           residual=f)


def solve_current(params: PVArrayParams, v: float, g: float, t_cell: float) -> float:
    if v < 0:
        raise DomainError(f"voltage must be >= 0, got {v}")
    i, f, _, status = kernels.pv_solve_current(v, *_model(params, g, t_cell),
                                               SOLVE_TOL, SOLVE_MAXITER)
    if status != kernels.OK:
        _raise_for(status, v, f)
    return i


def solve_currents(params: PVArrayParams, v, g: float, t_cell: float) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if np.any(v < 0):
        raise DomainError("voltages must be >= 0")
    out, f, status = kernels.pv_solve_many(v, *_model(params, g, t_cell),
                                           SOLVE_TOL, SOLVE_MAXITER)
    if status != kernels.OK:
        bad = float(v[np.isnan(out)][0])
        _raise_for(status, bad, f)
    return out


def open_circuit_voltage(params: PVArrayParams, g: float, t_cell: float) -> float:
    """Voltage where the array current crosses zero, by bisection."""
    model = _model(params, g, t_cell)
    iph, i0, vta = model[0], model[1], model[2]
    if iph <= 0:
        return 0.0

    def current(v):
        i, f, _, status = kernels.pv_solve_current(v, *model, SOLVE_TOL, SOLVE_MAXITER)
        if status != kernels.OK:
            _raise_for(status, v, f)
        return i

    lo = 0.0
    hi = vta * math.log1p(iph / i0) * 1.05 + 1e-3
    while current(hi) > 0:
        lo, hi = hi, 2.0 * hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if current(mid) > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-12 * max(1.0, hi):
            break
    return 0.5 * (lo + hi)


def iv_curve(params: PVArrayParams, g: float, t_cell: float, n_points: int = 100):
    if n_points < 2:
        raise DomainError("n_points must be >= 2")
    voc = open_circuit_voltage(params, g, t_cell)
    vs = np.linspace(0.0, voc, n_points)
    currents = solve_currents(params, vs, g, t_cell)
    return [OperatingPoint.at(float(v), float(i)) for v, i in zip(vs, currents)]


def mpp(params: PVArrayParams, g: float, t_cell: float) -> OperatingPoint:
    """Maximum power point: grid scan on [0, Voc], then golden-section refinement."""
    if g < 0:
        raise DomainError(f"irradiance must be >= 0, got {g}")
    if g == 0:
        return OperatingPoint(0.0, 0.0, 0.0)
    voc = open_circuit_voltage(params, g, t_cell)
    if voc == 0:
        return OperatingPoint(0.0, 0.0, 0.0)
    vs = np.linspace(0.0, voc, MPP_GRID_POINTS)
    currents = solve_currents(params, vs, g, t_cell)
    k = int(np.argmax(vs * currents))
    best = OperatingPoint.at(float(vs[k]), float(currents[k]))
    lo = float(vs[max(k - 1, 0)])
    hi = float(vs[min(k + 1, len(vs) - 1)])

    def power(v):
        return v * solve_current(params, v, g, t_cell)

    x1 = hi - _INV_PHI * (hi - lo)
    x2 = lo + _INV_PHI * (hi - lo)
    p1, p2 = power(x1), power(x2)
    while hi - lo >= MPP_VOLTAGE_TOL:
        if p1 > p2:
            hi, x2, p2 = x2, x1, p1
            x1 = hi - _INV_PHI * (hi - lo)
            p1 = power(x1)
        else:
            lo, x1, p1 = x1, x2, p2
            x2 = lo + _INV_PHI * (hi - lo)
            p2 = power(x2)
    v = 0.5 * (lo + hi)
    refined = OperatingPoint.at(v, solve_current(params, v, g, t_cell))
    return refined if refined.p >= best.p else best


# -- parameter files --------------------------------------------------------

_FIELDS = ("i_pv_n", "i_sc_n", "v_oc_n", "k_i", "k_v", "a", "r_s", "r_p", "n_s", "n_p",
           "noct", "t_n", "g_n")


def check_open_circuit(params: PVArrayParams) -> None:
    """At STC the current at the rated open-circuit voltage must be close to zero."""
    i = solve_current(params, params.v_oc_n, params.g_n, params.t_n)
    if abs(i) >= 0.02 * params.i_sc_n:
        raise ValidationError(
            f"inconsistent PV parameters: I(v_oc_n) = {i:.4g} A at STC")


def params_from_dict(doc: dict) -> PVArrayParams:
    missing = [k for k in _FIELDS[:10] if k not in doc]
    if missing:
        raise ValidationError(f"PV parameter file missing {missing[0]!r}")
    kw = {k: doc[k] for k in _FIELDS if k in doc}
    kw["n_s"] = int(kw["n_s"])
    kw["n_p"] = int(kw["n_p"])
    for k in _FIELDS:
        if k in kw and k not in ("n_s", "n_p"):
            kw[k] = float(kw[k])
    params = PVArrayParams(**kw)
    check_open_circuit(params)
    return params


def load_pv_params(path=None) -> PVArrayParams:
    path = Path(path) if path is not None else data_dir() / "kc200gt.json"
    try:
        text = path.read_text()
    except OSError as exc:
        raise ValidationError(f"cannot read PV parameter file {path}: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno) from None
    return params_from_dict(doc)


def save_pv_params(params: PVArrayParams, path) -> None:
    Path(path).write_text(json.dumps(asdict(params), indent=2) + "\n")
