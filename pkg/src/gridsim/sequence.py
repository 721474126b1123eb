"""Positive-sequence reduction of transposed three-phase lines and Y-bus assembly."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import DomainError, NumericError
from .grid import LineConfigMatrix, NetworkModel

_UPPER = ((0, 1), (0, 2), (1, 2))


@dataclass(frozen=True)
class SequenceLineParams:
    config_id: int
    z_positive: complex  # ohm/mile
    b_positive: float  # uS/mile
    z_zero: complex  # ohm/mile, informational only


def transpose_average(z_phase) -> tuple[complex, complex]:
    """Self and mutual impedance of the transposed line.

    The mutual term averages the upper-triangle entries as given, so
    asymmetric inputs are not symmetrised first.
    """
    z = np.asarray(z_phase, dtype=complex)
    if z.shape != (3, 3):
        raise DomainError(f"expected a 3x3 matrix, got shape {z.shape}")
    z_self = (z[0, 0] + z[1, 1] + z[2, 2]) / 3.0
    z_mutual = (z[0, 1] + z[0, 2] + z[1, 2]) / 3.0
    return complex(z_self), complex(z_mutual)


def positive_sequence(z_self: complex, z_mutual: complex) -> complex:
    return z_self - z_mutual


def zero_sequence(z_self: complex, z_mutual: complex) -> complex:
    return z_self + 2.0 * z_mutual


def positive_sequence_shunt(b_shunt) -> float:
    b = np.asarray(b_shunt, dtype=float)
    if b.shape != (3, 3):
        raise DomainError(f"expected a 3x3 matrix, got shape {b.shape}")
    b_self = (b[0, 0] + b[1, 1] + b[2, 2]) / 3.0
    b_mutual = sum(b[i, j] for i, j in _UPPER) / 3.0
    return float(b_self - b_mutual)


def reduce_config(cfg: LineConfigMatrix) -> SequenceLineParams:
    zs, zm = transpose_average(cfg.z_phase)
    return SequenceLineParams(cfg.config_id, positive_sequence(zs, zm),
                              positive_sequence_shunt(cfg.b_shunt), zero_sequence(zs, zm))


def reduce_all(configs: Mapping[int, LineConfigMatrix]) -> dict[int, SequenceLineParams]:
    return {cid: reduce_config(cfg) for cid, cfg in sorted(configs.items())}


@dataclass(frozen=True)
class Branch:
    """Per-unit pi-model of one network branch."""
    from_bus: int
    to_bus: int
    z_series: complex
    y_shunt_half: complex

    @property
    def y_series(self) -> complex:
        return 1.0 / self.z_series


def branch_models(net: NetworkModel, seq: Mapping[int, SequenceLineParams]) -> list[Branch]:
    """Per-unit pi-branches for every segment and transformer of ``net``."""
    zb = net.base.z_base
    branches = []
    for s in net.segments:
        try:
            p = seq[s.config_id]
        except KeyError:
            raise DomainError(f"no sequence parameters for config {s.config_id}") from None
        z = p.z_positive * s.length / zb
        if z == 0:
            raise NumericError(f"segment {s.from_bus}-{s.to_bus} has zero impedance")
        b_total = p.b_positive * 1e-6 * s.length * zb
        branches.append(Branch(s.from_bus, s.to_bus, z, 0.5j * b_total))
    for t in net.transformers:
        branches.append(Branch(t.from_bus, t.to_bus, complex(t.r_pu, 0.0), 0j))
    return branches


@dataclass(frozen=True, eq=False)
class AdmittanceMatrix:
    y: np.ndarray
    bus_index: Mapping[int, int]
    slack_bus: int
    branches: tuple[Branch, ...] = ()

    @property
    def order(self) -> int:
        return self.y.shape[0]

    @property
    def bus_ids(self) -> list[int]:
        return sorted(self.bus_index, key=self.bus_index.__getitem__)


def assemble_branches(bus_ids, slack_bus: int, branches) -> AdmittanceMatrix:
    index = {b: k for k, b in enumerate(bus_ids)}
    y = np.zeros((len(index), len(index)), dtype=complex)
    for br in branches:
        i, j = index[br.from_bus], index[br.to_bus]
        ys = br.y_series
        y[i, i] += ys + br.y_shunt_half
        y[j, j] += ys + br.y_shunt_half
        y[i, j] -= ys
        y[j, i] -= ys
    y.setflags(write=False)
    return AdmittanceMatrix(y, index, slack_bus, tuple(branches))


def assemble_ybus(net: NetworkModel, seq: Mapping[int, SequenceLineParams]) -> AdmittanceMatrix:
    return assemble_branches(net.bus_ids, net.slack.id, branch_models(net, seq))
