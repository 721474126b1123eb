import numpy as np
import pytest

from gridsim import grid, sequence
from gridsim.daily import ScenarioConfig, bus_load
from gridsim.errors import ConvergenceError, DomainError
from gridsim.powerflow import (BusInjection, branch_flows, injection_vector, polar_jacobian,
                               power_mismatch, solve_newton, solve_sweep)
from gridsim.sequence import Branch, assemble_branches


def hour_injections(net, profiles, hour):
    p_kw, q_kvar = bus_load(profiles.load, hour, ScenarioConfig())
    s = -complex(p_kw, q_kvar) * 1e3 / net.base.s_base
    return [BusInjection(b.id, s.real, s.imag) for b in net.buses if b.kind != grid.SLACK]


def two_bus(z, y_half=0j):
    return assemble_branches([1, 2], 1, [Branch(1, 2, z, y_half)])


def fixed_point_v2(z, s_load, tol=1e-15):
    v2 = 1 + 0j
    for _ in range(500):
        new = 1 - z * np.conj(s_load / v2)
        if abs(new - v2) < tol:
            return new
        v2 = new
    raise AssertionError("oracle did not converge")


def test_zero_injection_no_shunts(ybus):
    bare = [Branch(b.from_bus, b.to_bus, b.z_series, 0j) for b in ybus.branches]
    y = assemble_branches(ybus.bus_ids, ybus.slack_bus, bare)
    sol = solve_newton(y, [])
    assert sol.iterations <= 1
    assert all(v == 1 for v in sol.voltages.values())
    assert all(sf == 0 and st == 0 for sf, st in sol.branch_flows.values())
    assert sol.total_loss == 0


def test_zero_injection_line_charging_raises_voltage(ybus):
    sol = solve_newton(ybus, [])
    assert all(abs(v) >= 1.0 for v in sol.voltages.values())
    assert sol.total_loss.imag < 0


def test_zero_injection_slack_angle():
    sol = solve_newton(two_bus(0.01 + 0.02j), [], slack_v=1.02 + 0j)
    assert abs(sol.voltages[2] - 1.02) < 1e-12


def test_two_bus_matches_fixed_point():
    z = 0.01 + 0.02j
    s_load = 0.5 + 0.25j
    sol = solve_newton(two_bus(z), [BusInjection(2, -0.5, -0.25)])
    assert abs(sol.voltages[2] - fixed_point_v2(z, s_load)) < 1e-8


def test_two_bus_sweep_matches_fixed_point():
    net = grid.NetworkModel([grid.Bus(1, grid.SLACK), grid.Bus(2)],
                            [grid.Segment(1, 2, 528.0, 722)])
    seq = sequence.reduce_all(net.configs)
    y = sequence.assemble_ybus(net, seq)
    inj = [BusInjection(2, -0.3, -0.1)]
    a = solve_newton(y, inj)
    b = solve_sweep(net, seq, inj)
    assert abs(a.voltages[2] - b.voltages[2]) < 1e-10


def test_hour12_newton(ybus, net, profiles):
    sol = solve_newton(ybus, hour_injections(net, profiles, 12))
    assert sol.iterations <= 6
    assert sol.max_mismatch < 1e-8
    assert sol.mismatch_history[-1] == sol.max_mismatch
    assert all(b < a for a, b in zip(sol.mismatch_history, sol.mismatch_history[1:]))


def test_jacobian_matches_finite_difference(ybus):
    n = ybus.order
    slack = ybus.bus_index[ybus.slack_bus]
    pq = np.array([k for k in range(n) if k != slack])
    rng = np.random.default_rng(3)
    for trial in range(2):
        theta = np.zeros(n) if trial == 0 else rng.normal(0, 0.02, n)
        vm = np.ones(n) if trial == 0 else rng.uniform(0.95, 1.05, n)
        theta[slack], vm[slack] = 0.0, 1.0

        def calc(th, m):
            v = m * np.exp(1j * th)
            s = v * np.conj(ybus.y @ v)
            return np.concatenate([s.real[pq], s.imag[pq]])

        jac = polar_jacobian(ybus.y, vm * np.exp(1j * theta), pq)
        h = 1e-6
        for col, k in enumerate(pq):
            dth = np.zeros(n)
            dth[k] = h
            fd = (calc(theta + dth, vm) - calc(theta - dth, vm)) / (2 * h)
            assert np.max(np.abs(jac[:, col] - fd)) < 1e-5 * max(1.0, np.abs(fd).max())
            fd = (calc(theta, vm + dth) - calc(theta, vm - dth)) / (2 * h)
            assert np.max(np.abs(jac[:, len(pq) + col] - fd)) < 1e-5 * max(1.0, np.abs(fd).max())


def test_branch_losses_non_negative(ybus, net, profiles):
    sol = solve_newton(ybus, hour_injections(net, profiles, 20))
    for s_from, s_to in sol.branch_flows.values():
        assert (s_from + s_to).real >= -1e-12


def test_power_balance(ybus, net, profiles):
    inj = hour_injections(net, profiles, 12)
    sol = solve_newton(ybus, inj)
    load = -sum(complex(i.p, i.q) for i in inj)
    assert abs(sol.slack_power - (load + sol.total_loss)) < 1e-8


def test_newton_and_sweep_agree_every_hour(ybus, net, seq, profiles):
    for hour in range(1, 25):
        inj = hour_injections(net, profiles, hour)
        a = solve_newton(ybus, inj)
        b = solve_sweep(net, seq, inj)
        worst = max(abs(a.voltages[k] - b.voltages[k]) for k in a.voltages)
        assert worst < 1e-6, hour
        assert abs(a.slack_power - b.slack_power) < 1e-6


def test_sweep_reports_power_mismatch(net, seq, profiles):
    sol = solve_sweep(net, seq, hour_injections(net, profiles, 12))
    assert sol.max_mismatch < 1e-8


def test_convergence_error_history(ybus, net, profiles):
    with pytest.raises(ConvergenceError) as info:
        solve_newton(ybus, hour_injections(net, profiles, 12), max_iter=1)
    assert len(info.value.history) == 2


def test_heavy_load_fails_to_converge():
    with pytest.raises(ConvergenceError):
        solve_newton(two_bus(0.1 + 0.2j), [BusInjection(2, -5.0, -5.0)])


def test_slack_injection_rejected(ybus):
    with pytest.raises(DomainError):
        injection_vector(ybus, [BusInjection(ybus.slack_bus, 0.1, 0.0)])
    with pytest.raises(DomainError):
        injection_vector(ybus, [BusInjection(123456, 0.1, 0.0)])


def test_mismatch_zero_at_solution(ybus, net, profiles):
    inj = hour_injections(net, profiles, 8)
    sol = solve_newton(ybus, inj)
    v = np.array([sol.voltages[b] for b in ybus.bus_ids])
    mis = power_mismatch(ybus.y, v, injection_vector(ybus, inj))
    mis[ybus.bus_index[ybus.slack_bus]] = 0
    assert np.abs(mis).max() < 1e-8


def test_branch_flows_single_branch():
    br = Branch(1, 2, 0.01 + 0.02j, 0.001j)
    flows, loss = branch_flows([br], {1: 1 + 0j, 2: 0.99 - 0.01j})
    s_from, s_to = flows[(1, 2)]
    assert loss == pytest.approx(s_from + s_to)
    i = (1 - (0.99 - 0.01j)) / (0.01 + 0.02j)
    series_loss = abs(i) ** 2 * (0.01 + 0.02j)
    shunt = -(abs(1) ** 2 + abs(0.99 - 0.01j) ** 2) * 0.001j
    assert loss == pytest.approx(series_loss + shunt, abs=1e-15)


def test_bad_tolerance(ybus):
    with pytest.raises(DomainError):
        solve_newton(ybus, [], tol=0.0)
