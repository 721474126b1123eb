"""``gridsim`` command-line interface.

Exit status: 0 on success, 1 on usage, file or validation errors, 2 on
numeric/solver failures.
"""
from __future__ import annotations

import argparse
import csv
import math
import sys
from pathlib import Path

from . import __version__
from .daily import (bundled_profiles, fmt, load_profile_csv, load_scenario, read_voltages_csv,
                    DayProfiles, ScenarioConfig, run_day, write_results)
from .errors import DomainError, NumericError, ParseError, ValidationError
from .grid import bundled_network_path, load_network
from .inverter import (ControllerGains, InverterParams, PowerReference, compute_reference,
                       phasor_solve_inverse, track_references)
from .powerflow import BusInjection, solve_newton, solve_sweep
from .pv import cell_temperature, iv_curve, load_pv_params, mpp
from .sequence import assemble_ybus, reduce_all
from .svg import PlotSpec, Series, emit_svg


def g6(x: float) -> str:
    return f"{x:.6g}"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


# -- injections CSV ---------------------------------------------------------

def read_injections_csv(path, s_base_va: float) -> list[BusInjection]:
    """Rows ``bus,p_kw,q_kvar`` (net injection, generation positive) to p.u. injections."""
    path = Path(path)
    try:
        fh = path.open(newline="")
    except OSError as exc:
        raise ValidationError(f"cannot read injections {path}: {exc.strerror}") from None
    out = []
    with fh:
        reader = csv.reader(fh)
        if next(reader, None) != ["bus", "p_kw", "q_kvar"]:
            raise ParseError("expected header 'bus,p_kw,q_kvar'", line=1)
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                bus, p, q = int(row[0]), float(row[1]), float(row[2])
            except (ValueError, IndexError):
                raise ParseError(f"bad row {row!r}", line=lineno) from None
            out.append(BusInjection(bus, p * 1e3 / s_base_va, q * 1e3 / s_base_va))
    return out


def write_injections_csv(injections, s_base_va: float, path) -> None:
    with Path(path).open("w", newline="") as fh:
        fh.write("bus,p_kw,q_kvar\n")
        for inj in injections:
            fh.write(f"{inj.bus},{fmt(inj.p * s_base_va / 1e3)},{fmt(inj.q * s_base_va / 1e3)}\n")


def write_voltage_table(solution, path) -> None:
    with Path(path).open("w", newline="") as fh:
        fh.write("bus,vmag_pu,vang_deg\n")
        for bus in sorted(solution.voltages):
            fh.write(f"{bus},{fmt(solution.vmag(bus))},{fmt(solution.vang_deg(bus))}\n")


def read_voltage_table(path) -> dict[int, tuple[float, float]]:
    with Path(path).open(newline="") as fh:
        return {int(r["bus"]): (float(r["vmag_pu"]), float(r["vang_deg"]))
                for r in csv.DictReader(fh)}


# -- subcommands -------------------------------------------------------------

def _network(args):
    return load_network(args.network or bundled_network_path())


def cmd_reduce(args):
    configs = _network(args).configs if args.network else None
    if configs is None:
        from .grid import IEEE37_CONFIGS
        configs = IEEE37_CONFIGS
    print("config,z1_re_ohm_mi,z1_im_ohm_mi,b1_us_mi,z0_re_ohm_mi,z0_im_ohm_mi")
    for cid, p in reduce_all(configs).items():
        print(f"{cid},{fmt(p.z_positive.real)},{fmt(p.z_positive.imag)},{fmt(p.b_positive)},"
              f"{fmt(p.z_zero.real)},{fmt(p.z_zero.imag)}")


def _t_cell(args, params):
    if args.t_cell is not None:
        return args.t_cell
    return cell_temperature(args.t_air, args.g, params.noct)


def cmd_pv_curve(args):
    params = load_pv_params(args.params)
    t_cell = _t_cell(args, params)
    points = iv_curve(params, args.g, t_cell, args.points)
    rows = ["v,i,p"] + [f"{fmt(p.v)},{fmt(p.i)},{fmt(p.p)}" for p in points]
    if args.csv:
        Path(args.csv).write_text("\n".join(rows) + "\n")
    else:
        print("\n".join(rows))
    if args.svg:
        emit_svg(PlotSpec([Series(f"G={args.g:g} W/m2, T={t_cell:.2f} K",
                                  [p.v for p in points], [p.i for p in points])],
                          "Voltage [V]", "Current [A]", "PV array I-V curve"), args.svg)


def cmd_mpp(args):
    params = load_pv_params(args.params)
    point = mpp(params, args.g, _t_cell(args, params))
    print(f"V = {g6(point.v)} V")
    print(f"I = {g6(point.i)} A")
    print(f"P = {g6(point.p)} W")


def cmd_inverter(args):
    v_mv = args.v_mv
    inv = InverterParams(r=args.r, l=args.l, omega=2 * math.pi * args.freq, v_lv_rms=args.v_lv,
                         turns_ratio_n=v_mv / args.v_lv)
    ref = compute_reference(PowerReference(args.p_star, args.q_star), v_mv, inv)
    mag, phase = phasor_solve_inverse(ref, inv, complex(args.v_lv, 0.0))
    print("quantity,value")
    print(f"phi_l_star_rad,{g6(ref.phi_l_star)}")
    print(f"i_l_mv_star_a,{g6(ref.i_l_mv_star)}")
    print(f"turns_ratio,{g6(inv.turns_ratio_n)}")
    print(f"i_l_star_a,{g6(ref.i_l_star)}")
    print(f"i_pv_mag_a,{g6(mag)}")
    print(f"i_pv_phase_rad,{g6(phase)}")
    if not args.time_domain:
        return
    result = track_references(ref, inv, ControllerGains(args.kp_mag, args.kp_phase,
                                                        args.ki_phase),
                              periods=args.periods, v_g=complex(args.v_lv, 0.0))
    rows = ["period,rms_a,phase_rad,rel_error"]
    rows += [f"{k},{fmt(r)},{fmt(p)},{fmt(e)}" for k, (r, p, e) in
             enumerate(zip(result.period_rms, result.period_phase, result.period_error), 1)]
    if args.csv:
        Path(args.csv).write_text("\n".join(rows) + "\n")
    else:
        print("\n".join(rows))
    if args.svg:
        ks = list(range(1, result.periods + 1))
        emit_svg(PlotSpec([Series("rms i_L", ks, result.period_rms),
                           Series("target", ks, [abs(result.target)] * result.periods)],
                          "Grid period", "Inductor current [A rms]",
                          "Inverter current tracking"), args.svg)
    settled = result.settled_period
    print(f"settled_period,{settled if settled is not None else 'none'}", file=sys.stderr)


def cmd_powerflow(args):
    net = _network(args)
    seq = reduce_all(net.configs)
    injections = read_injections_csv(args.injections, net.base.s_base) if args.injections else []
    if args.sweep:
        sol = solve_sweep(net, seq, injections)
    else:
        sol = solve_newton(assemble_ybus(net, seq), injections, tol=args.tol,
                           max_iter=args.max_iter)
    if args.out:
        write_voltage_table(sol, args.out)
    else:
        print("bus,vmag_pu,vang_deg")
        for bus in sorted(sol.voltages):
            print(f"{bus},{g6(sol.vmag(bus))},{g6(sol.vang_deg(bus))}")
    kw = net.base.s_base / 1e3
    print(f"iterations={sol.iterations} max_mismatch={sol.max_mismatch:.3e} "
          f"losses_kw={g6(sol.total_loss.real * kw)} losses_kvar={g6(sol.total_loss.imag * kw)}")


def _profiles(args) -> DayProfiles:
    base = bundled_profiles()
    return DayProfiles(
        load_profile_csv(args.load_profile, "kW") if args.load_profile else base.load,
        load_profile_csv(args.irradiance, "W/m2") if args.irradiance else base.irradiance,
        load_profile_csv(args.temperature, "degC") if args.temperature else base.temperature)


def cmd_simulate(args):
    net = _network(args)
    cfg = load_scenario(args.scenario) if args.scenario else ScenarioConfig()
    result = run_day(net, reduce_all(net.configs), load_pv_params(args.params), _profiles(args),
                     cfg, workers=args.workers)
    paths = write_results(result, args.out)
    worst = max(h.solution.iterations for h in result.hours)
    print(f"hours=24 max_iterations={worst} files={len(paths)} out={args.out}")


def cmd_plot(args):
    hours = list(range(1, 25))
    if args.kind == "load":
        prof = _profiles(args).load
        spec = PlotSpec([Series("household load", hours, prof.values)], "Hour",
                        "Active power [kW]", "Daily household load profile")
    elif args.kind == "irradiance":
        prof = _profiles(args).irradiance
        spec = PlotSpec([Series("irradiance", hours, prof.values)], "Hour",
                        "Irradiance [W/m2]", "Average June day")
    elif args.kind == "temperature":
        prof = _profiles(args).temperature
        spec = PlotSpec([Series("air temperature", hours, prof.values)], "Hour",
                        "Temperature [degC]", "Average June day")
    elif args.kind == "iv":
        params = load_pv_params(args.params)
        series = []
        for g in (1000.0, 800.0, 600.0, 400.0, 200.0):
            pts = iv_curve(params, g, params.t_n, args.points)
            series.append(Series(f"G={g:g} W/m2", [p.v for p in pts], [p.i for p in pts]))
        spec = PlotSpec(series, "Voltage [V]", "Current [A]", "I-V curves at 298 K")
    else:
        if not args.results:
            raise DomainError("--results is required for voltage plots")
        table = read_voltages_csv(Path(args.results) / "voltages.csv")
        buses = sorted({b for _, b in table})
        by_hour = {}
        for (h, _), (vm, _) in table.items():
            by_hour.setdefault(h, []).append(vm)
        spec = PlotSpec([Series("min |V|", hours, [min(by_hour[h]) for h in hours]),
                         Series("max |V|", hours, [max(by_hour[h]) for h in hours])],
                        "Hour", "Voltage [p.u.]", f"Feeder voltage envelope ({len(buses)} buses)")
    emit_svg(spec, args.out)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="gridsim", description="Single-phase feeder simulation with PV generation")
    p.add_argument("--version", action="version", version=f"gridsim {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("reduce", help="positive-sequence line parameters as CSV")
    r.add_argument("--network")
    r.set_defaults(func=cmd_reduce)

    def weather_args(sp):
        sp.add_argument("--g", type=float, required=True, help="irradiance [W/m2]")
        sp.add_argument("--t-air", type=float, default=25.0, help="air temperature [degC]")
        sp.add_argument("--t-cell", type=float, help="cell temperature [K], overrides --t-air")
        sp.add_argument("--params", help="PV parameter file (default: bundled KC200GT)")

    c = sub.add_parser("pv-curve", help="I-V curve as CSV and optional SVG")
    weather_args(c)
    c.add_argument("--points", type=int, default=100)
    c.add_argument("--csv")
    c.add_argument("--svg")
    c.set_defaults(func=cmd_pv_curve)

    m = sub.add_parser("mpp", help="maximum power point")
    weather_args(m)
    m.set_defaults(func=cmd_mpp)

    i = sub.add_parser("inverter", help="inverter current references")
    i.add_argument("--p-star", type=float, required=True, help="W")
    i.add_argument("--q-star", type=float, default=0.0, help="var")
    i.add_argument("--v-mv", type=float, default=InverterParams().turns_ratio_n * 220.0,
                   help="MV rms line-to-neutral voltage [V]")
    i.add_argument("--v-lv", type=float, default=220.0)
    i.add_argument("--r", type=float, default=InverterParams().r)
    i.add_argument("--l", type=float, default=InverterParams().l)
    i.add_argument("--freq", type=float, default=50.0)
    i.add_argument("--time-domain", action="store_true")
    i.add_argument("--periods", type=int, default=20)
    i.add_argument("--kp-mag", type=float, default=ControllerGains().kp_mag)
    i.add_argument("--kp-phase", type=float, default=ControllerGains().kp_phase)
    i.add_argument("--ki-phase", type=float, default=ControllerGains().ki_phase)
    i.add_argument("--csv")
    i.add_argument("--svg")
    i.set_defaults(func=cmd_inverter)

    f = sub.add_parser("powerflow", help="single power-flow solve")
    f.add_argument("--network")
    f.add_argument("--injections", help="CSV bus,p_kw,q_kvar (net injection)")
    f.add_argument("--out", help="CSV of bus,vmag_pu,vang_deg")
    f.add_argument("--sweep", action="store_true", help="use backward/forward sweep")
    f.add_argument("--tol", type=float, default=1e-8)
    f.add_argument("--max-iter", type=int, default=30)
    f.set_defaults(func=cmd_powerflow)

    def profile_args(sp):
        sp.add_argument("--load-profile")
        sp.add_argument("--irradiance")
        sp.add_argument("--temperature")

    s = sub.add_parser("simulate", help="24-hour scenario")
    s.add_argument("--network")
    s.add_argument("--scenario", help="TOML or JSON scenario file")
    s.add_argument("--params")
    s.add_argument("--out", required=True)
    s.add_argument("--workers", type=int, default=1)
    profile_args(s)
    s.set_defaults(func=cmd_simulate)

    pl = sub.add_parser("plot", help="SVG figures")
    pl.add_argument("--kind", required=True,
                    choices=["load", "irradiance", "temperature", "iv", "voltages"])
    pl.add_argument("--out", required=True)
    pl.add_argument("--results", help="simulate output directory (voltages)")
    pl.add_argument("--params")
    pl.add_argument("--points", type=int, default=100)
    profile_args(pl)
    pl.set_defaults(func=cmd_plot)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        args.func(args)
    except NumericError as exc:
        print(f"gridsim: numeric error: {exc}", file=sys.stderr)
        return 2
    except (DomainError, OSError) as exc:
        print(f"gridsim: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
