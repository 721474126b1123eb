"""Single-phase AC power flow: polar Newton-Raphson plus a radial sweep cross-check."""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .errors import ConvergenceError, DomainError, NumericError, TopologyError
from .grid import NetworkModel, adjacency
from .sequence import AdmittanceMatrix, Branch, SequenceLineParams, branch_models

DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 30


@dataclass(frozen=True)
class BusInjection:
    bus: int
    p: float  # p.u., generation minus load
    q: float  # p.u.


@dataclass
class PowerFlowSolution:
    voltages: dict[int, complex]
    branch_flows: dict[tuple[int, int], tuple[complex, complex]]
    total_loss: complex
    iterations: int
    max_mismatch: float
    slack_power: complex = 0j
    mismatch_history: list[float] = field(default_factory=list)

    def vmag(self, bus: int) -> float:
        return abs(self.voltages[bus])

    def vang_deg(self, bus: int) -> float:
        return math.degrees(math.atan2(self.voltages[bus].imag, self.voltages[bus].real))


def injection_vector(y: AdmittanceMatrix, injections: Iterable[BusInjection]) -> np.ndarray:
    s = np.zeros(y.order, dtype=complex)
    for inj in injections:
        if inj.bus not in y.bus_index:
            raise DomainError(f"injection at unknown bus {inj.bus}")
        if inj.bus == y.slack_bus:
            if inj.p != 0 or inj.q != 0:
                raise DomainError("the slack bus cannot carry a specified injection")
            continue
        s[y.bus_index[inj.bus]] += complex(inj.p, inj.q)
    return s


def power_mismatch(ybus: np.ndarray, v: np.ndarray, s_spec: np.ndarray) -> np.ndarray:
    """Complex mismatch S_spec - V conj(Y V) at every bus."""
    return s_spec - v * np.conj(ybus @ v)


def polar_jacobian(ybus: np.ndarray, v: np.ndarray, pq: np.ndarray) -> np.ndarray:
    """Jacobian of the calculated injections (P; Q) w.r.t. (theta; |V|) on the pq buses."""
    vm = np.abs(v)
    i = ybus @ v
    diag_v = np.diag(v)
    diag_i = np.diag(i)
    diag_vn = np.diag(v / vm)
    ds_dth = 1j * diag_v @ np.conj(diag_i - ybus @ diag_v)
    ds_dvm = diag_v @ np.conj(ybus @ diag_vn) + np.conj(diag_i) @ diag_vn
    sub = np.ix_(pq, pq)
    return np.block([[ds_dth[sub].real, ds_dvm[sub].real],
                     [ds_dth[sub].imag, ds_dvm[sub].imag]])


def solve_newton(y: AdmittanceMatrix, injections: Iterable[BusInjection],
                 slack_v: complex = 1.0 + 0j, tol: float = DEFAULT_TOL,
                 max_iter: int = DEFAULT_MAX_ITER) -> PowerFlowSolution:
    if not tol > 0:
        raise DomainError("tol must be positive")
    s_spec = injection_vector(y, injections)
    n = y.order
    slack = y.bus_index[y.slack_bus]
    pq = np.array([k for k in range(n) if k != slack], dtype=int)
    npq = len(pq)
    theta = np.full(n, np.angle(slack_v))
    vm = np.ones(n)
    vm[slack] = abs(slack_v)
    history = []
    for it in range(max_iter + 1):
        v = vm * np.exp(1j * theta)
        mis = power_mismatch(y.y, v, s_spec)[pq]
        f = np.concatenate([mis.real, mis.imag])
        worst = float(np.max(np.abs(f))) if npq else 0.0
        history.append(worst)
        if worst < tol:
            return _finish(y, v, it, worst, history)
        if it == max_iter:
            break
        jac = polar_jacobian(y.y, v, pq)
        try:
            dx = np.linalg.solve(jac, f)
        except np.linalg.LinAlgError:
            raise NumericError("singular Newton correction system") from None
        theta[pq] += dx[:npq]
        vm[pq] += dx[npq:]
    raise ConvergenceError(f"Newton power flow did not converge in {max_iter} iterations",
                           residual=history[-1], history=history)


def branch_flows(branches: Iterable[Branch], voltages: Mapping[int, complex]):
    """Per-branch (from-side, to-side) complex power and the total loss."""
    flows = {}
    total = 0j
    for br in branches:
        vi, vj = voltages[br.from_bus], voltages[br.to_bus]
        i_series = (vi - vj) * br.y_series
        s_from = vi * np.conj(i_series + vi * br.y_shunt_half)
        s_to = vj * np.conj(-i_series + vj * br.y_shunt_half)
        flows[(br.from_bus, br.to_bus)] = (complex(s_from), complex(s_to))
        total += s_from + s_to
    return flows, complex(total)


def _finish(y: AdmittanceMatrix, v: np.ndarray, iterations: int, worst: float,
            history) -> PowerFlowSolution:
    voltages = {b: complex(v[k]) for b, k in y.bus_index.items()}
    flows, loss = branch_flows(y.branches, voltages)
    slack = y.bus_index[y.slack_bus]
    s_slack = complex(v[slack] * np.conj(y.y[slack] @ v))
    return PowerFlowSolution(voltages, flows, loss, iterations, worst, s_slack, list(history))


def solve_sweep(net: NetworkModel, seq: Mapping[int, SequenceLineParams],
                injections: Iterable[BusInjection], slack_v: complex = 1.0 + 0j,
                tol: float = 1e-12, max_iter: int = 200) -> PowerFlowSolution:
    """Backward/forward sweep on the radial feeder.

    Works branch by branch from the pi-models and never forms the Y-bus.
    """
    if not tol > 0:
        raise DomainError("tol must be positive")
    branches = branch_models(net, seq)
    if len(branches) != len(net.buses) - 1:
        raise TopologyError("sweep requires a radial network")
    root = net.slack.id
    by_pair = {}
    for br in branches:
        by_pair[(br.from_bus, br.to_bus)] = br
        by_pair[(br.to_bus, br.from_bus)] = br
    adj = adjacency(net)
    parent: dict[int, int] = {}
    order = [root]
    queue = deque([root])
    while queue:
        u = queue.popleft()
        for w in adj[u]:
            if w != root and w not in parent:
                parent[w] = u
                order.append(w)
                queue.append(w)
    if len(order) != len(net.buses):
        raise TopologyError("sweep requires a connected radial network")

    s_inj = {b: 0j for b in net.bus_ids}
    for inj in injections:
        if inj.bus not in s_inj:
            raise DomainError(f"injection at unknown bus {inj.bus}")
        if inj.bus == root:
            if inj.p != 0 or inj.q != 0:
                raise DomainError("the slack bus cannot carry a specified injection")
            continue
        s_inj[inj.bus] += complex(inj.p, inj.q)
    shunt = {b: 0j for b in net.bus_ids}
    for br in branches:
        shunt[br.from_bus] += br.y_shunt_half
        shunt[br.to_bus] += br.y_shunt_half

    v = {b: complex(slack_v) for b in net.bus_ids}
    history = []
    for it in range(1, max_iter + 1):
        # backward: current drawn by each subtree
        j = {b: np.conj(-s_inj[b] / v[b]) + shunt[b] * v[b] for b in net.bus_ids}
        for b in reversed(order[1:]):
            j[parent[b]] += j[b]
        # forward: voltage drops from the root
        change = 0.0
        for b in order[1:]:
            new = v[parent[b]] - by_pair[(parent[b], b)].z_series * j[b]
            change = max(change, abs(new - v[b]))
            v[b] = complex(new)
        history.append(change)
        if change < tol:
            flows, loss = branch_flows(branches, v)
            s_out = {b: 0j for b in net.bus_ids}
            for (a, b), (s_from, s_to) in flows.items():
                s_out[a] += s_from
                s_out[b] += s_to
            worst = max((abs(s_inj[b] - s_out[b]) for b in net.bus_ids if b != root),
                        default=0.0)
            return PowerFlowSolution(dict(v), flows, loss, it, float(worst),
                                     complex(s_out[root]), history)
    raise ConvergenceError(f"sweep did not converge in {max_iter} iterations",
                           residual=history[-1], history=history)
