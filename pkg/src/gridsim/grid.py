"""Network domain types, per-unit bases and the feeder file loader.

Network files are JSON documents::

    {
      "base": {"v_base_v": 2771.28, "s_base_va": 2.5e6},
      "buses": [{"id": 799, "kind": "slack", "pv_arrays": 0}, ...],
      "segments": [{"from": 799, "to": 701, "length_ft": 1850, "config": 721}, ...],
      "transformers": [{"from": 709, "to": 775, "r_pu": 1e-6}],
      "configs": {"721": {"z": [[[re, im], ...], ...], "b": [[...], ...]}}
    }

``transformers`` and ``configs`` are optional; without ``configs`` the four
IEEE 37 line configurations below are used.
"""
from __future__ import annotations

import json
import math
import os
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

import numpy as np

from .constants import FEET_PER_MILE
from .errors import DomainError, ParseError, TopologyError, ValidationError

SLACK = "slack"
LOAD = "load"

DEFAULT_V_BASE = 4800.0 / math.sqrt(3.0)
DEFAULT_S_BASE = 2.5e6
DEFAULT_LINK_R_PU = 1e-6


def _cmat(rows):
    return np.array(rows, dtype=complex)


# Phase series impedance [ohm/mile] and shunt susceptance [uS/mile] of the
# balanced single-phase IEEE 37 line configurations, entries in ohm/mile and uS/mile
# (including the sign asymmetries of 722/723).
_CONFIG_Z = {
    721: [[0.2926 + 0.1973j, 0.0673 - 0.0368j, 0.0337 - 0.0417j],
          [0.0673 - 0.0368j, 0.2646 + 0.1900j, 0.0673 - 0.0368j],
          [0.0337 - 0.0417j, 0.0673 - 0.0368j, 0.2926 + 0.1973j]],
    722: [[0.4751 + 0.2973j, 0.1629 - 0.0326j, 0.1234 - 0.0607j],
          [0.1629 - 0.0326j, 0.4488 + 0.2678j, 0.1629 - 0.0326j],
          [0.1234 - 0.0607j, 0.1629 - 0.0326j, 0.4751 + 0.2973j]],
    723: [[1.2936 + 0.6713j, 0.4871 + 0.2111j, 0.4585 + 0.1521j],
          [0.4871 + 0.2111j, 1.3022 + 0.6326j, 0.4871 - 0.2111j],
          [0.4585 + 0.1521j, 0.4871 - 0.2111j, 1.2936 + 0.6713j]],
    724: [[2.0952 + 0.7758j, 0.5204 + 0.2738j, 0.4926 + 0.2123j],
          [0.5204 + 0.2738j, 2.1068 + 0.7398j, 0.5204 + 0.2738j],
          [0.4926 + 0.2123j, 0.5204 + 0.2738j, 2.0952 + 0.7758j]],
}
_CONFIG_B = {721: 159.7919, 722: 127.8306, 723: 74.8405, 724: 60.2483}


@dataclass(frozen=True, eq=False)
class LineConfigMatrix:
    config_id: int
    z_phase: np.ndarray  # 3x3 complex, ohm/mile
    b_shunt: np.ndarray  # 3x3 real, uS/mile

    def __post_init__(self):
        z = np.asarray(self.z_phase, dtype=complex)
        b = np.asarray(self.b_shunt, dtype=float)
        if z.shape != (3, 3) or b.shape != (3, 3):
            raise ValidationError(f"config {self.config_id}: matrices must be 3x3")
        if np.any(np.diag(z).real <= 0):
            raise ValidationError(f"config {self.config_id}: diagonal resistance must be positive")
        if np.any(np.diag(b) < 0):
            raise ValidationError(f"config {self.config_id}: negative shunt susceptance")
        z.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "z_phase", z)
        object.__setattr__(self, "b_shunt", b)

    def __eq__(self, other):
        if not isinstance(other, LineConfigMatrix):
            return NotImplemented
        return (self.config_id == other.config_id
                and np.array_equal(self.z_phase, other.z_phase)
                and np.array_equal(self.b_shunt, other.b_shunt))


IEEE37_CONFIGS: dict[int, LineConfigMatrix] = {
    cid: LineConfigMatrix(cid, _cmat(_CONFIG_Z[cid]), np.eye(3) * _CONFIG_B[cid])
    for cid in sorted(_CONFIG_Z)
}


@dataclass(frozen=True)
class Bus:
    id: int
    kind: str = LOAD
    pv_array_count: int = 0

    @property
    def has_pv(self) -> bool:
        return self.pv_array_count > 0


@dataclass(frozen=True)
class Segment:
    from_bus: int
    to_bus: int
    length_ft: float
    config_id: int

    @property
    def length(self) -> float:
        """Length in miles."""
        return self.length_ft / FEET_PER_MILE


@dataclass(frozen=True)
class Transformer:
    """Ideal 1:1 transformer, represented by a small series resistance in p.u."""
    from_bus: int
    to_bus: int
    r_pu: float = DEFAULT_LINK_R_PU


@dataclass(frozen=True)
class BaseSystem:
    v_base: float  # V, line-to-neutral
    s_base: float  # VA

    @property
    def z_base(self) -> float:
        return self.v_base ** 2 / self.s_base

    @property
    def y_base(self) -> float:
        return 1.0 / self.z_base

    @property
    def i_base(self) -> float:
        return self.s_base / self.v_base


def make_base(v_base: float = DEFAULT_V_BASE, s_base: float = DEFAULT_S_BASE) -> BaseSystem:
    if not (v_base > 0 and s_base > 0):
        raise DomainError(f"bases must be positive, got v_base={v_base}, s_base={s_base}")
    return BaseSystem(float(v_base), float(s_base))


@dataclass(frozen=True)
class NetworkModel:
    buses: tuple[Bus, ...]
    segments: tuple[Segment, ...]
    configs: Mapping[int, LineConfigMatrix] = field(default_factory=lambda: dict(IEEE37_CONFIGS))
    base: BaseSystem = field(default_factory=make_base)
    transformers: tuple[Transformer, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "buses", tuple(self.buses))
        object.__setattr__(self, "segments", tuple(self.segments))
        object.__setattr__(self, "transformers", tuple(self.transformers))
        validate_network(self)

    @property
    def slack(self) -> Bus:
        return next(b for b in self.buses if b.kind == SLACK)

    @property
    def bus_ids(self) -> list[int]:
        return [b.id for b in self.buses]

    def bus(self, bus_id: int) -> Bus:
        for b in self.buses:
            if b.id == bus_id:
                return b
        raise KeyError(bus_id)

    def edges(self) -> list[tuple[int, int]]:
        return ([(s.from_bus, s.to_bus) for s in self.segments]
                + [(t.from_bus, t.to_bus) for t in self.transformers])

    def with_pv(self, sites: Mapping[int, int]) -> "NetworkModel":
        """Copy with the PV array count replaced at the given buses."""
        unknown = set(sites) - set(self.bus_ids)
        if unknown:
            raise ValidationError(f"pv site at unknown bus {sorted(unknown)[0]}")
        buses = [Bus(b.id, b.kind, int(sites.get(b.id, b.pv_array_count))) for b in self.buses]
        return NetworkModel(buses, self.segments, self.configs, self.base, self.transformers)


def validate_network(net: NetworkModel) -> None:
    ids = [b.id for b in net.buses]
    if len(set(ids)) != len(ids):
        raise ValidationError("duplicate bus id")
    for b in net.buses:
        if b.kind not in (SLACK, LOAD):
            raise ValidationError(f"bus {b.id}: unknown kind {b.kind!r}")
        if b.pv_array_count < 0:
            raise ValidationError(f"bus {b.id}: pv_arrays must be >= 0")
    n_slack = sum(b.kind == SLACK for b in net.buses)
    if n_slack != 1:
        raise ValidationError(f"exactly one slack bus required, found {n_slack}")
    known = set(ids)
    for s in net.segments:
        if s.from_bus not in known or s.to_bus not in known:
            raise ValidationError(f"segment {s.from_bus}-{s.to_bus} references an unknown bus")
        if s.config_id not in net.configs:
            raise ValidationError(f"segment {s.from_bus}-{s.to_bus}: unknown config {s.config_id}")
        if not s.length_ft > 0:
            raise ValidationError(f"segment {s.from_bus}-{s.to_bus}: length must be positive")
    for t in net.transformers:
        if t.from_bus not in known or t.to_bus not in known:
            raise ValidationError(f"transformer {t.from_bus}-{t.to_bus} references an unknown bus")
        if not t.r_pu > 0:
            raise ValidationError(f"transformer {t.from_bus}-{t.to_bus}: r_pu must be positive")
    check_radial(net)


def adjacency(net: NetworkModel) -> dict[int, list[int]]:
    adj: dict[int, list[int]] = {b.id: [] for b in net.buses}
    for a, b in net.edges():
        adj[a].append(b)
        adj[b].append(a)
    return adj


def check_radial(net: NetworkModel) -> None:
    """Raise TopologyError unless the branches form a tree spanning every bus."""
    edges = net.edges()
    if len(edges) != len(net.buses) - 1:
        raise TopologyError(
            f"not radial: {len(edges)} branches for {len(net.buses)} buses")
    adj = adjacency(net)
    root = net.slack.id
    seen = {root}
    queue = deque([root])
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if v not in seen:
                seen.add(v)
                queue.append(v)
    missing = set(adj) - seen
    if missing:
        raise TopologyError(f"disconnected bus {sorted(missing)[0]}")


# -- file I/O ---------------------------------------------------------------

def data_dir() -> Path:
    env = os.environ.get("GRIDSIM_DATA")
    if env:
        return Path(env)
    return Path(__file__).resolve().parent / "data"


def bundled_network_path() -> Path:
    return data_dir() / "ieee37.json"


def _require(obj, key, where):
    try:
        return obj[key]
    except (KeyError, TypeError):
        raise ValidationError(f"{where}: missing key {key!r}") from None


def _config_from_json(cid, raw) -> LineConfigMatrix:
    where = f"config {cid}"
    z = np.array([[complex(e[0], e[1]) for e in row] for row in _require(raw, "z", where)])
    b = np.array(_require(raw, "b", where), dtype=float)
    return LineConfigMatrix(int(cid), z, b)


def network_from_dict(doc: dict) -> NetworkModel:
    if not isinstance(doc, dict):
        raise ValidationError("network document must be an object")
    base_raw = doc.get("base", {})
    base = make_base(float(base_raw.get("v_base_v", DEFAULT_V_BASE)),
                     float(base_raw.get("s_base_va", DEFAULT_S_BASE)))
    try:
        buses = [Bus(int(_require(b, "id", "bus")), str(b.get("kind", LOAD)),
                     int(b.get("pv_arrays", 0)))
                 for b in _require(doc, "buses", "network")]
        segments = [Segment(int(_require(s, "from", "segment")), int(_require(s, "to", "segment")),
                            float(_require(s, "length_ft", "segment")),
                            int(_require(s, "config", "segment")))
                    for s in _require(doc, "segments", "network")]
        transformers = [Transformer(int(_require(t, "from", "transformer")),
                                    int(_require(t, "to", "transformer")),
                                    float(t.get("r_pu", DEFAULT_LINK_R_PU)))
                        for t in doc.get("transformers", [])]
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"bad field value: {exc}") from None
    if "configs" in doc:
        configs = {int(k): _config_from_json(k, v) for k, v in doc["configs"].items()}
    else:
        configs = dict(IEEE37_CONFIGS)
    return NetworkModel(buses, segments, configs, base, transformers)


def network_to_dict(net: NetworkModel) -> dict:
    return {
        "base": {"v_base_v": net.base.v_base, "s_base_va": net.base.s_base},
        "buses": [{"id": b.id, "kind": b.kind, "pv_arrays": b.pv_array_count}
                  for b in net.buses],
        "segments": [{"from": s.from_bus, "to": s.to_bus, "length_ft": s.length_ft,
                      "config": s.config_id} for s in net.segments],
        "transformers": [{"from": t.from_bus, "to": t.to_bus, "r_pu": t.r_pu}
                         for t in net.transformers],
        "configs": {
            str(cid): {
                "z": [[[z.real, z.imag] for z in row] for row in cfg.z_phase.tolist()],
                "b": cfg.b_shunt.tolist(),
            }
            for cid, cfg in sorted(net.configs.items())
        },
    }


def load_network(path) -> NetworkModel:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ValidationError(f"cannot read network file {path}: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno) from None
    return network_from_dict(doc)


def save_network(net: NetworkModel, path) -> None:
    Path(path).write_text(json.dumps(network_to_dict(net), indent=2) + "\n")
