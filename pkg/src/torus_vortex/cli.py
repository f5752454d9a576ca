"""``torus-vortex`` command line interface.

    torus-vortex <command> [--config FILE] [--out DIR] [--dt DT] [--mu MU]
                 [--t-final T] [--grid N] [--eps EPS]

Commands: reduce, sweep, pde-compare, gamma, verify-harmonic.  The config
file is INI style; flags override file values.  Every run writes a
``metadata.json`` record; failures write ``error.json`` and exit with the
error's code.

Example config::

    [vortices]
    positions = 0.3 0.5; 0.7 0.5
    degrees = 1 -1
    q0 = dipole-default

    [sim]
    mu = 0.01
    mu_list = 0.01 0.0025 0.000625 0
    dt = 1e-4
    t_final = 1.0
    output_stride = 10
"""

import argparse
import configparser
import json
import sys
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigError, LatticeViolation, TorusVortexError
from .reduced import SimParams, integrate, invariant_drift, mu_sweep
from .renorm import VortexConfig, check_momentum
from .serialize import (digest, write_diagnostics, write_field, write_json, write_rows,
                        write_trajectory)

COMMANDS = ("reduce", "sweep", "pde-compare", "gamma", "verify-harmonic")
DEFAULT_MU_LIST = (1 / 100, 1 / 400, 1 / 1600, 0.0)
VERIFY_FAILED = 3


@dataclass
class RunConfig:
    command: str
    positions: np.ndarray
    degrees: np.ndarray
    q0: np.ndarray
    params: SimParams
    out: Path
    mu_list: tuple = DEFAULT_MU_LIST
    t_compare: float = None
    workers: int = 1
    grid: int = 256
    hessian_grid: int = 512
    pde_t_final: float = 0.25
    gamma_eps: tuple = (1 / 16, 1 / 32, 1 / 64, 1 / 128)
    q0_token: str = "dipole-default"
    extra: dict = field(default_factory=dict)

    @property
    def cfg(self):
        return VortexConfig(self.positions, self.degrees)

    def record(self):
        """Every parameter needed to re-run the command."""
        return {
            "command": self.command,
            "positions": self.positions.tolist(),
            "degrees": self.degrees.tolist(),
            "q0": self.q0.tolist(),
            "q0_token": self.q0_token,
            "params": asdict(self.params),
            "mu_list": list(self.mu_list),
            "t_compare": self.t_compare,
            "grid": self.grid,
            "hessian_grid": self.hessian_grid,
            "pde_t_final": self.pde_t_final,
            "gamma_eps": list(self.gamma_eps),
        }


def _floats(text, what):
    try:
        return [float(x) for x in text.replace(",", " ").split()]
    except ValueError as exc:
        raise ConfigError(f"{what}: cannot parse {text!r}") from exc


def _positions(text):
    rows = [r for r in text.split(";") if r.strip()]
    pts = [_floats(r, "positions") for r in rows]
    if any(len(p) != 2 for p in pts):
        raise ConfigError("positions: each entry needs two coordinates, separated by ';'")
    return np.array(pts, dtype=float).reshape(-1, 2)


def load_config(command, path=None, overrides=None):
    """Build a RunConfig from an INI file plus flag overrides; validates before returning."""
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r}; expected one of {', '.join(COMMANDS)}")
    cp = configparser.ConfigParser()
    if path is not None:
        if not Path(path).is_file():
            raise ConfigError(f"config file {path} does not exist")
        try:
            cp.read(path)
        except configparser.Error as exc:
            raise ConfigError(f"config file {path}: {exc}") from exc
    ov = {k: v for k, v in (overrides or {}).items() if v is not None}

    def get(section, key, default):
        if cp.has_option(section, key):
            return cp.get(section, key)
        return default

    try:
        positions = _positions(get("vortices", "positions", "0.3 0.5; 0.7 0.5"))
        degrees = np.array([int(round(d)) for d in _floats(get("vortices", "degrees", "1 -1"),
                                                           "degrees")])
        cfg = VortexConfig(positions, degrees)
    except TorusVortexError as exc:
        raise ConfigError(f"vortices: {exc}") from exc
    q_text = get("vortices", "q0", "dipole-default").strip()
    if q_text == "dipole-default":
        q0 = cfg.anchor()
    else:
        q0 = np.array(_floats(q_text, "q0"))
        if q0.shape != (2,):
            raise ConfigError("q0 needs two components")
        try:
            check_momentum(cfg, q0)
        except LatticeViolation as exc:
            raise ConfigError(f"q0: {exc}") from exc

    def num(section, key, default, flag=None, cast=float):
        if flag is not None and flag in ov:
            return cast(ov[flag])
        try:
            return cast(get(section, key, default))
        except ValueError as exc:
            raise ConfigError(f"[{section}] {key}: {exc}") from exc

    try:
        params = SimParams(
            mu=num("sim", "mu", 0.01, "mu"),
            eps=num("sim", "eps", 0.05, "eps"),
            dt=num("sim", "dt", 1e-4, "dt"),
            t_final=num("sim", "t_final", 1.0, "t_final"),
            collision_radius=num("sim", "collision_radius", 1e-3),
            output_stride=num("sim", "output_stride", 10, cast=int),
        )
    except TorusVortexError as exc:
        raise ConfigError(f"sim: {exc}") from exc
    mu_list = tuple(_floats(get("sim", "mu_list", " ".join(map(repr, DEFAULT_MU_LIST))),
                            "mu_list"))
    if any(m < 0 for m in mu_list) or not mu_list:
        raise ConfigError("mu_list must be a non-empty list of non-negative values")
    t_cmp = get("sim", "t_compare", None)
    gamma_eps = tuple(_floats(get("gamma", "eps_list", "0.0625 0.03125 0.015625 0.0078125"),
                              "eps_list"))
    out = Path(ov.get("out") or get("run", "out", f"out-{command}"))
    rc = RunConfig(
        command=command, positions=cfg.positions.copy(), degrees=cfg.degrees.copy(), q0=q0,
        params=params, out=out, mu_list=mu_list,
        t_compare=float(t_cmp) if t_cmp is not None else None,
        workers=num("run", "workers", 1, cast=int),
        grid=num("grid", "n", 256, "grid", cast=int),
        hessian_grid=num("grid", "hessian_n", 512, cast=int),
        pde_t_final=num("pde", "t_final", 0.25, "t_final"),
        gamma_eps=gamma_eps, q0_token=q_text,
    )
    if command == "pde-compare" and rc.grid * 1.0 * params.eps < 4.0:
        raise ConfigError(f"pde-compare: eps={params.eps} is below 4h for grid {rc.grid}")
    return rc


# -- commands ---------------------------------------------------------------

def _mu_tag(mu):
    return "mu_0" if mu == 0 else f"mu_1_over_{1.0 / mu:g}"


def _metadata(rc, results):
    rec = rc.record()
    return {"version": __version__, "config": rec, "config_digest": digest(rec),
            "results": results}


def cmd_reduce(rc):
    from .plot import write_plot

    traj = integrate(rc.cfg, rc.q0, rc.params)
    write_trajectory(traj, rc.out / "trajectory.csv")
    write_diagnostics(traj, rc.out / "diagnostics.csv")
    write_plot([traj], rc.out / "trajectory.svg")
    return {"termination": traj.termination.value, "message": traj.message,
            "samples": len(traj), "t_end": float(traj.times[-1]),
            "invariant_drift": invariant_drift(traj),
            "W0": traj.energy[0]}


def cmd_sweep(rc):
    from .plot import write_plot

    report = mu_sweep(rc.cfg, rc.q0, rc.mu_list, rc.params, rc.t_compare, rc.workers)
    rows = []
    for mu, dev, tr in zip(report.mu_values, report.deviations, report.trajectories):
        tag = _mu_tag(mu)
        write_trajectory(tr, rc.out / f"trajectory_{tag}.csv")
        write_diagnostics(tr, rc.out / f"diagnostics_{tag}.csv")
        rows.append([mu, dev, tr.termination.value, float(tr.times[-1]), invariant_drift(tr)])
    write_rows(rc.out / "sweep.csv", ["mu", "D", "termination", "t_end", "invariant_drift"],
               rows)
    labels = [f"mu = 1/{1 / m:g}" if m > 0 else "mu = 0" for m in report.mu_values]
    write_plot(report.trajectories, rc.out / "sweep.svg", labels)
    return {"reference_mu": report.reference_mu, "t_compare": report.t_compare,
            "rows": [{"mu": r[0], "D": r[1], "termination": r[2], "t_end": r[3],
                      "invariant_drift": r[4]} for r in rows],
            "terminated_early": report.terminated_early()}


def cmd_pde_compare(rc):
    from .pde import run_pde_compare

    params = replace(rc.params, t_final=rc.pde_t_final)
    reduced = integrate(rc.cfg, rc.q0, params)
    write_trajectory(reduced, rc.out / "reduced.csv")
    rep = run_pde_compare(rc.cfg, rc.q0, params, reduced, n=rc.grid)
    header = ["t", "deviation"]
    for j in range(len(rc.degrees)):
        header += [f"bx_{j + 1}", f"by_{j + 1}"]
    rows = [[t, d] + list(tr.positions.ravel())
            for t, d, tr in zip(rep.times, rep.deviations, rep.tracks)]
    write_rows(rc.out / "pde_compare.csv", header, rows)
    return {"summary": rep.summary(), "max_deviation": rep.max_deviation,
            "hamiltonian_drift": rep.hamiltonian_drift, "losses": rep.losses,
            "window_end": rep.window_end, "covers_window": rep.covers_window,
            "reduced_termination": reduced.termination.value, "dt": rep.dt, "mode": rep.mode}


def cmd_gamma(rc):
    from .core import UPPER_BOUND, core_energy_gamma

    res = {}
    rows = []
    for method in ("newton", "collocation"):
        cc = core_energy_gamma(rc.gamma_eps, method=method)
        res[method] = {"gamma": cc.gamma, "raw": cc.raw, "extrapolated": cc.extrapolated,
                       "satisfies_upper_bound": cc.satisfies_upper_bound()}
        for e, g in zip(cc.epsilon_schedule, cc.raw):
            rows.append([method, e, g])
    write_rows(rc.out / "gamma.csv", ["method", "eps", "gamma_eps"], rows)
    res["upper_bound"] = UPPER_BOUND
    res["method_gap"] = abs(res["newton"]["gamma"] - res["collocation"]["gamma"])
    return res


def cmd_verify_harmonic(rc):
    from .harmonic import EtaSpec, build_harmonic_map, hessian_pairing_check, verify_canonical
    from .renorm import min_separation

    f = build_harmonic_map(rc.grid, rc.cfg, rc.q0)
    rep = verify_canonical(f, rc.cfg, rc.q0)
    write_field(f.values, rc.out / f"harmonic_n{rc.grid}.bin")
    r_a = min_separation(rc.cfg)
    pairing = []
    for j in range(len(rc.degrees)):
        for nu in ((1.0, 0.0), (0.0, 1.0)):
            spec = EtaSpec(direction=nu, r_lin=r_a / 4, r_sup=r_a)
            lhs, rhs, err = hessian_pairing_check(rc.cfg, rc.q0, j, spec, rc.hessian_grid)
            pairing.append({"vortex": j, "direction": nu, "lhs": lhs, "rhs": rhs,
                            "abs_err": err, "rel_err": err / (1.0 + abs(rhs))})
    (rc.out / "verify.txt").write_text("\n".join(rep.lines()) + "\n")
    return {"passed": rep.passed, "report": rep.lines(), "shift": f.shift.tolist(),
            "hessian_pairing": pairing}


RUNNERS = {"reduce": cmd_reduce, "sweep": cmd_sweep, "pde-compare": cmd_pde_compare,
           "gamma": cmd_gamma, "verify-harmonic": cmd_verify_harmonic}


def run_command(rc):
    """Run one command; returns the exit status.  Errors become error.json records."""
    rc.out.mkdir(parents=True, exist_ok=True)
    try:
        results = RUNNERS[rc.command](rc)
    except TorusVortexError as exc:
        write_error(rc.out, exc)
        return exc.code
    write_json(rc.out / "metadata.json", _metadata(rc, results))
    if rc.command == "verify-harmonic" and not results["passed"]:
        return VERIFY_FAILED
    return 0


def write_error(out, exc):
    rec = {"error": type(exc).__name__, "code": getattr(exc, "code", 1), "message": str(exc)}
    if out is not None:
        Path(out).mkdir(parents=True, exist_ok=True)
        write_json(Path(out) / "error.json", rec)
    print(json.dumps(rec, sort_keys=True), file=sys.stderr)


def build_parser():
    p = argparse.ArgumentParser(prog="torus-vortex",
                                description="Vortex dynamics on the unit torus.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="INI configuration file")
    p.add_argument("--out", help="output directory")
    p.add_argument("--dt", type=float)
    p.add_argument("--mu", type=float)
    p.add_argument("--t-final", dest="t_final", type=float)
    p.add_argument("--grid", type=int)
    p.add_argument("--eps", type=float)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    overrides = {"out": args.out, "dt": args.dt, "mu": args.mu, "t_final": args.t_final,
                 "grid": args.grid, "eps": args.eps}
    try:
        rc = load_config(args.command, args.config, overrides)
    except TorusVortexError as exc:
        write_error(args.out, exc)
        return exc.code
    status = run_command(rc)
    summary = rc.out / "metadata.json"
    if status in (0, VERIFY_FAILED) and summary.exists():
        print(f"{rc.command}: wrote {rc.out} (status {status})")
    return status


if __name__ == "__main__":
    sys.exit(main())
