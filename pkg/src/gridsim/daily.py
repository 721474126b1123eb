"""24-hour feeder scenario: household loads, PV injections and per-hour power flow."""
from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import DomainError, GridsimError, ParseError, ValidationError
from .grid import SLACK, NetworkModel, data_dir
from .inverter import PowerReference
from .powerflow import BusInjection, PowerFlowSolution, solve_newton
from .pv import PVArrayParams, WeatherSample, cell_temperature, mpp
from .sequence import SequenceLineParams, assemble_ybus

HOURS = 24
UNITS = ("kW", "W/m2", "degC")

FIXED_ZERO = "fixed-zero"
FIXED_PF = "fixed-power-factor"
# Tighter than the solver default so the summed per-bus residuals keep the
# slack = load - generation + losses balance below 1e-8 p.u.
DAILY_TOL = 1e-10


def fmt(x: float) -> str:
    """Full-precision CSV number (12 significant digits)."""
    return f"{x:.12g}"


@dataclass(frozen=True)
class HourlyProfile:
    values: tuple[float, ...]
    unit: str = "kW"

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if len(self.values) != HOURS:
            raise ValidationError(f"profile needs {HOURS} hourly values, got {len(self.values)}")
        if self.unit not in UNITS:
            raise ValidationError(f"unknown profile unit {self.unit!r}")
        if self.unit == "W/m2" and min(self.values) < 0:
            raise ValidationError("irradiance must be >= 0")

    def __getitem__(self, hour: int) -> float:
        """Value for clock hour ``hour`` (1-24)."""
        if not 1 <= hour <= HOURS:
            raise DomainError(f"hour must be in 1..{HOURS}, got {hour}")
        return self.values[hour - 1]

    def peak(self) -> tuple[int, float]:
        k = int(np.argmax(self.values))
        return k + 1, self.values[k]

    def minimum(self) -> tuple[int, float]:
        k = int(np.argmin(self.values))
        return k + 1, self.values[k]


def load_profile_csv(path, unit: str = "kW") -> HourlyProfile:
    path = Path(path)
    try:
        fh = path.open(newline="")
    except OSError as exc:
        raise ValidationError(f"cannot read profile {path}: {exc.strerror}") from None
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["hour", "value"]:
            raise ParseError("expected header 'hour,value'", line=1)
        values = {}
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                hour, value = int(row[0]), float(row[1])
            except (ValueError, IndexError):
                raise ParseError(f"bad row {row!r}", line=lineno) from None
            if not 1 <= hour <= HOURS or hour in values:
                raise ParseError(f"bad or repeated hour {hour}", line=lineno)
            values[hour] = value
    if sorted(values) != list(range(1, HOURS + 1)):
        raise ValidationError(f"profile {path} must list hours 1..{HOURS}")
    return HourlyProfile(tuple(values[h] for h in range(1, HOURS + 1)), unit)


def save_profile_csv(profile: HourlyProfile, path) -> None:
    with Path(path).open("w", newline="") as fh:
        fh.write("hour,value\n")
        for h, v in enumerate(profile.values, start=1):
            fh.write(f"{h},{v!r}\n")


@dataclass(frozen=True)
class DayProfiles:
    load: HourlyProfile
    irradiance: HourlyProfile
    temperature: HourlyProfile

    def weather(self, hour: int) -> WeatherSample:
        return WeatherSample(self.irradiance[hour], self.temperature[hour])


def bundled_profiles() -> DayProfiles:
    d = data_dir()
    return DayProfiles(load_profile_csv(d / "load_profile.csv", "kW"),
                       load_profile_csv(d / "irradiance.csv", "W/m2"),
                       load_profile_csv(d / "temperature.csv", "degC"))


def average_day(day_series: Sequence[Sequence[float]], unit: str = "kW") -> HourlyProfile:
    """Element-wise mean of several 24-hour days."""
    if len(day_series) == 0:
        raise DomainError("need at least one day")
    lengths = {len(d) for d in day_series}
    if lengths != {HOURS}:
        raise DomainError(f"every day must have {HOURS} entries, got lengths {sorted(lengths)}")
    return HourlyProfile(tuple(np.mean(np.asarray(day_series, dtype=float), axis=0)), unit)


@dataclass(frozen=True)
class ScenarioConfig:
    households_per_bus: int = 20
    q_fraction: float = 0.5
    pv_sites: Mapping[int, int] = field(default_factory=dict)
    policy: str = FIXED_ZERO
    power_factor: float = 1.0

    def __post_init__(self):
        if self.households_per_bus < 1:
            raise ValidationError("households_per_bus must be >= 1")
        if not 0.0 <= self.q_fraction <= 1.0:
            raise ValidationError("q_fraction must lie in [0, 1]")
        if self.policy not in (FIXED_ZERO, FIXED_PF):
            raise ValidationError(f"unknown Q* policy {self.policy!r}")
        if not 0.0 < self.power_factor <= 1.0:
            raise ValidationError("power_factor must lie in (0, 1]")
        for bus, n in self.pv_sites.items():
            if n < 0:
                raise ValidationError(f"pv site {bus}: array count must be >= 0")


def scenario_from_dict(doc: Mapping) -> ScenarioConfig:
    try:
        sites = {int(k): int(v) for k, v in dict(doc.get("pv_sites", {})).items()}
        return ScenarioConfig(int(doc.get("households_per_bus", 20)),
                              float(doc.get("q_fraction", 0.5)), sites,
                              str(doc.get("policy", FIXED_ZERO)),
                              float(doc.get("power_factor", 1.0)))
    except (TypeError, ValueError) as exc:
        if isinstance(exc, GridsimError):
            raise
        raise ValidationError(f"bad scenario value: {exc}") from None


def load_scenario(path) -> ScenarioConfig:
    """Read a TOML (default) or JSON (``.json``) scenario file."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise ValidationError(f"cannot read scenario {path}: {exc.strerror}") from None
    if path.suffix == ".json":
        try:
            doc = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ParseError(exc.msg, line=exc.lineno) from None
    else:
        try:
            import tomllib
        except ModuleNotFoundError:
            import tomli as tomllib
        try:
            doc = tomllib.loads(raw.decode())
        except tomllib.TOMLDecodeError as exc:
            raise ParseError(str(exc)) from None
    return scenario_from_dict(doc)


def bus_load(profile: HourlyProfile, hour: int, cfg: ScenarioConfig) -> tuple[float, float]:
    """Per-bus (kW, kvar) demand at ``hour``."""
    p = cfg.households_per_bus * profile[hour]
    return p, cfg.q_fraction * p


def pv_site_output(params: PVArrayParams, weather: WeatherSample, n_arrays: int,
                   cfg: ScenarioConfig = ScenarioConfig()) -> PowerReference:
    """Site power reference in W/var; lossless DC to AC."""
    if n_arrays < 0:
        raise DomainError("n_arrays must be >= 0")
    if n_arrays == 0 or weather.g == 0:
        return PowerReference(0.0, 0.0)
    point = mpp(params, weather.g, cell_temperature(weather.t_air, weather.g, params.noct))
    p = n_arrays * point.p
    if cfg.policy == FIXED_PF:
        q = p * math.tan(math.acos(cfg.power_factor))
    else:
        q = 0.0
    return PowerReference(p, q)


@dataclass
class HourResult:
    hour: int
    solution: PowerFlowSolution
    pv: dict[int, PowerReference]
    load_kw: complex  # total P + jQ demand, kW/kvar
    generation_kw: complex
    losses_kw: complex
    slack_kw: complex
    weather: WeatherSample


@dataclass
class DailyResult:
    hours: list[HourResult]

    def __getitem__(self, hour: int) -> HourResult:
        return self.hours[hour - 1]


def site_counts(net: NetworkModel, cfg: ScenarioConfig) -> dict[int, int]:
    counts = {b.id: b.pv_array_count for b in net.buses if b.pv_array_count > 0}
    counts.update(cfg.pv_sites)
    unknown = set(counts) - set(net.bus_ids)
    if unknown:
        raise ValidationError(f"pv site at unknown bus {sorted(unknown)[0]}")
    return {b: n for b, n in sorted(counts.items()) if n > 0}


def run_hour(net: NetworkModel, ybus, pv_params: PVArrayParams, profiles: DayProfiles,
             cfg: ScenarioConfig, hour: int, sites: Mapping[int, int],
             tol: float = DAILY_TOL) -> HourResult:
    s_base_kw = net.base.s_base / 1e3
    p_load, q_load = bus_load(profiles.load, hour, cfg)
    weather = profiles.weather(hour)
    pv = {}
    if sites:
        unit = pv_site_output(pv_params, weather, 1, cfg)
        pv = {b: PowerReference(n * unit.p_star, n * unit.q_star) for b, n in sites.items()}
    injections = []
    load_total = 0j
    gen_total = 0j
    for b in net.buses:
        if b.kind == SLACK:
            continue
        ref = pv.get(b.id, PowerReference(0.0, 0.0))
        gen = complex(ref.p_star, ref.q_star) / 1e3
        load = complex(p_load, q_load)
        load_total += load
        gen_total += gen
        s = (gen - load) / s_base_kw
        injections.append(BusInjection(b.id, s.real, s.imag))
    try:
        sol = solve_newton(ybus, injections, tol=tol)
    except GridsimError as exc:
        raise type(exc)(f"hour {hour}: {exc}") from exc
    return HourResult(hour, sol, pv, load_total, gen_total, sol.total_loss * s_base_kw,
                      sol.slack_power * s_base_kw, weather)


def run_day(net: NetworkModel, seq: Mapping[int, SequenceLineParams], pv_params: PVArrayParams,
            profiles: DayProfiles, cfg: ScenarioConfig = ScenarioConfig(),
            workers: int = 1, tol: float = DAILY_TOL) -> DailyResult:
    """Solve all 24 hours; ``workers > 1`` solves hours concurrently with identical results."""
    ybus = assemble_ybus(net, seq)
    sites = site_counts(net, cfg)

    def one(hour):
        return run_hour(net, ybus, pv_params, profiles, cfg, hour, sites, tol)

    hours = range(1, HOURS + 1)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, hours))
    else:
        results = [one(h) for h in hours]
    return DailyResult(results)


# -- output files -----------------------------------------------------------

def write_results(result: DailyResult, out_dir) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = [out / "voltages.csv", out / "flows.csv", out / "pv.csv", out / "summary.json"]
    with paths[0].open("w", newline="") as fh:
        fh.write("hour,bus,vmag,vang\n")
        for hr in result.hours:
            for bus in sorted(hr.solution.voltages):
                fh.write(f"{hr.hour},{bus},{fmt(hr.solution.vmag(bus))},"
                         f"{fmt(hr.solution.vang_deg(bus))}\n")
    with paths[1].open("w", newline="") as fh:
        fh.write("hour,from,to,p_from_pu,q_from_pu,p_to_pu,q_to_pu,p_loss_pu,q_loss_pu\n")
        for hr in result.hours:
            for (a, b), (sf, st) in hr.solution.branch_flows.items():
                loss = sf + st
                fh.write(f"{hr.hour},{a},{b},{fmt(sf.real)},{fmt(sf.imag)},{fmt(st.real)},"
                         f"{fmt(st.imag)},{fmt(loss.real)},{fmt(loss.imag)}\n")
    with paths[2].open("w", newline="") as fh:
        fh.write("hour,bus,p_star_w,q_star_var,g_wm2,t_air_c\n")
        for hr in result.hours:
            for bus, ref in sorted(hr.pv.items()):
                fh.write(f"{hr.hour},{bus},{fmt(ref.p_star)},{fmt(ref.q_star)},"
                         f"{fmt(hr.weather.g)},{fmt(hr.weather.t_air)}\n")
    summary = {"hours": [
        {"hour": hr.hour,
         "iterations": hr.solution.iterations,
         "max_mismatch_pu": float(fmt(hr.solution.max_mismatch)),
         "load_kw": float(fmt(hr.load_kw.real)),
         "load_kvar": float(fmt(hr.load_kw.imag)),
         "generation_kw": float(fmt(hr.generation_kw.real)),
         "losses_kw": float(fmt(hr.losses_kw.real)),
         "losses_kvar": float(fmt(hr.losses_kw.imag)),
         "slack_kw": float(fmt(hr.slack_kw.real)),
         "slack_kvar": float(fmt(hr.slack_kw.imag)),
         "vmin_pu": float(fmt(min(abs(v) for v in hr.solution.voltages.values()))),
         } for hr in result.hours]}
    paths[3].write_text(json.dumps(summary, indent=2) + "\n")
    return paths


def read_voltages_csv(path) -> dict[tuple[int, int], tuple[float, float]]:
    """(hour, bus) -> (vmag, vang) from a ``voltages.csv``."""
    with Path(path).open(newline="") as fh:
        return {(int(r["hour"]), int(r["bus"])): (float(r["vmag"]), float(r["vang"]))
                for r in csv.DictReader(fh)}


def read_pv_csv(path) -> dict[tuple[int, int], tuple[float, float]]:
    with Path(path).open(newline="") as fh:
        return {(int(r["hour"]), int(r["bus"])): (float(r["p_star_w"]), float(r["q_star_var"]))
                for r in csv.DictReader(fh)}
