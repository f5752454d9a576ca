"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run on its own with

    python3 -m pytest tests/test_acceptance.py -v

The collected lines are repeated in an "acceptance criteria" section at
the end of the pytest output.
"""

import csv
import json
import math
import sys
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from oracles import DampedFourierOracle
from torus_vortex.cli import main
from torus_vortex.core import UPPER_BOUND, core_energy_gamma
from torus_vortex.green import green_eval
from torus_vortex.harmonic import EtaSpec, build_harmonic_map, hessian_pairing_check, verify_canonical
from torus_vortex.pde import (PdeState, advance, grid_nodes, hamiltonian, init_field, mass,
                              run_pde_compare, step_nls)
from torus_vortex.reduced import SimParams, integrate
from torus_vortex.renorm import VortexConfig, min_separation, renorm_grad, renormalized_energy


def record(number, title, passed, detail):
    line = f"criterion {number} [{'PASS' if passed else 'FAIL'}] {title}: {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)
    assert passed, line


def elapsed(t0):
    return time.perf_counter() - t0


@pytest.fixture(scope="module")
def sweep_dir(tmp_path_factory):
    """The default `sweep` run (dipole, dt = 1e-4, t_final = 1, four mu values)."""
    out = tmp_path_factory.mktemp("sweep")
    t0 = time.perf_counter()
    status = main(["sweep", "--out", str(out)])
    return out, status, elapsed(t0)


# ---------------------------------------------------------------------------
# 1. Green's function against the damped Fourier oracle
# ---------------------------------------------------------------------------

def test_criterion_1_green_oracle():
    rng = np.random.default_rng(1)
    pts = rng.uniform(0.0, 1.0, size=(100, 2))
    t0 = time.perf_counter()
    vals = green_eval(pts)
    t_eval = elapsed(t0)
    oracle = DampedFourierOracle()
    ref = np.array([oracle.value(p) for p in pts])
    t_all = elapsed(t0)
    err = float(np.max(np.abs(vals - ref)))
    record(1, "Green oracle equivalence", err <= 1e-8 and t_all < 10.0,
           f"max abs error {err:.2e} (tol 1e-8) at 100 points; "
           f"evaluator {t_eval:.3f} s, with oracle {t_all:.1f} s (limit 10 s)")


# ---------------------------------------------------------------------------
# 2. renorm_grad against finite differences
# ---------------------------------------------------------------------------

def test_criterion_2_gradient_consistency():
    rng = np.random.default_rng(2)
    t0 = time.perf_counter()
    worst = 0.0
    done = 0
    h = 1e-6
    while done < 10:
        cfg = VortexConfig(rng.uniform(0, 1, size=(4, 2)), [1, -1, 1, -1])
        if min_separation(cfg) < 0.02:
            continue
        q = cfg.anchor() + 2 * math.pi * rng.integers(-1, 2, size=2)
        g = renorm_grad(cfg, q)
        fd = np.zeros_like(g)
        for j, d in enumerate(cfg.degrees):
            for c in range(2):
                e = np.zeros((4, 2))
                e[j, c] = h
                dq = 2 * math.pi * d * e[j]
                fd[j, c] = (renormalized_energy(VortexConfig(cfg.positions + e, cfg.degrees), q + dq)
                            - renormalized_energy(VortexConfig(cfg.positions - e, cfg.degrees), q - dq)
                            ) / (2 * h)
        worst = max(worst, float(np.linalg.norm(g - fd) / np.linalg.norm(fd)))
        done += 1
    t = elapsed(t0)
    record(2, "gradient consistency", worst <= 1e-6 and t < 10.0,
           f"max relative error {worst:.2e} (tol 1e-6) on 10 configs; {t:.2f} s (limit 10 s)")


# ---------------------------------------------------------------------------
# 3. / 4. The mu sweep and the conserved quantity
# ---------------------------------------------------------------------------

def test_criterion_3_sweep(sweep_dir):
    out, status, t = sweep_dir
    with open(out / "sweep.csv") as fh:
        rows = list(csv.DictReader(fh))
    mus = [float(r["mu"]) for r in rows]
    devs = [float(r["D"]) for r in rows]
    order = np.argsort(mus)[::-1]
    d_sorted = [devs[k] for k in order]
    decreasing = all(a > b for a, b in zip(d_sorted, d_sorted[1:]))
    files = sorted(p.name for p in out.glob("trajectory_mu_*.csv"))
    ends = ", ".join(f"mu={mus[k]:g}: D={devs[k]:.4g} ({rows[k]['termination']} "
                     f"at t={float(rows[k]['t_end']):.4g})" for k in order)
    record(3, "mu sweep reproduction",
           status == 0 and len(files) == 4 and decreasing and t < 120.0,
           f"{ends}; strictly decreasing in mu: {decreasing}; {t:.1f} s (limit 120 s)")


def test_criterion_4_conservation(sweep_dir):
    out, _, _ = sweep_dir
    data = np.loadtxt(out / "diagnostics_mu_1_over_100.csv", delimiter=",", skiprows=1, ndmin=2)
    w0 = data[0, 1]
    drift = float(np.max(np.abs(data[:, 4])))
    tol = 1e-6 * (1 + abs(w0))
    meta = json.loads((out / "metadata.json").read_text())
    row = next(r for r in meta["results"]["rows"] if r["mu"] == 0.01)
    record(4, "invariant conservation (mu = 1/100)", drift <= tol,
           f"max drift {drift:.3e} (tol {tol:.3e}); run ended {row['termination']} "
           f"at t={row['t_end']:.4g}")


# ---------------------------------------------------------------------------
# 5. RK4 self-convergence
# ---------------------------------------------------------------------------

def test_criterion_5_rk4_order():
    cfg = VortexConfig.dipole()
    q0 = cfg.anchor()
    t0 = time.perf_counter()
    ends = []
    for dt in (4e-4, 2e-4, 1e-4):
        p = SimParams(mu=1 / 100, dt=dt, t_final=0.01, output_stride=10**6)
        ends.append(integrate(cfg, q0, p).positions(lifted=True)[-1])
    e1 = np.max(np.abs(ends[0] - ends[1]))
    e2 = np.max(np.abs(ends[1] - ends[2]))
    order = math.log2(e1 / e2)
    t = elapsed(t0)
    record(5, "RK4 order", order >= 3.8 and t < 30.0,
           f"observed order {order:.3f} (need >= 3.8) at t = 0.01, mu = 1/100; {t:.2f} s (limit 30 s)")


# ---------------------------------------------------------------------------
# 6. Canonical harmonic map and the Hessian pairing identity
# ---------------------------------------------------------------------------

def test_criterion_6_canonical_map():
    cfg = VortexConfig.dipole()
    q = cfg.anchor()
    t0 = time.perf_counter()
    rep = verify_canonical(build_harmonic_map(256, cfg, q), cfg, q)
    pair = []
    for j in range(2):
        for nu in ((1.0, 0.0), (0.0, 1.0)):
            lhs, rhs, err = hessian_pairing_check(cfg, q, j, EtaSpec(direction=nu), n=512)
            pair.append(err / (1 + abs(rhs)))
    t = elapsed(t0)
    pair_ok = max(pair) <= 5e-3
    checks = (f"unimodularity {rep.unimodularity:.1e} [{'ok' if rep.unimodular_ok else 'FAIL'}], "
              f"windings {rep.windings} [{'ok' if rep.windings_ok else 'FAIL'}], "
              f"|int j - Jq| {rep.momentum_error:.2e} [{'ok' if rep.momentum_ok else 'FAIL'}], "
              f"divergence residual beyond 4h {rep.divergence:.3g} vs bound {rep.divergence_bound:.3g} "
              f"[{'ok' if rep.divergence_ok else 'FAIL'}] (beyond r(a)/2: {rep.divergence_far:.3g}), "
              f"Hessian pairing max rel error {max(pair):.2e} [{'ok' if pair_ok else 'FAIL'}]")
    record(6, "canonical map verification", rep.passed and pair_ok and t < 60.0,
           f"{checks}; {t:.1f} s (limit 60 s)")


# ---------------------------------------------------------------------------
# 7. Core constant
# ---------------------------------------------------------------------------

def test_criterion_7_gamma():
    t0 = time.perf_counter()
    a = core_energy_gamma(method="newton")
    b = core_energy_gamma(method="collocation")
    t = elapsed(t0)
    gap = abs(a.gamma - b.gamma)
    ok = a.gamma <= UPPER_BOUND + 1e-3 and b.gamma <= UPPER_BOUND + 1e-3 and gap <= 1e-3
    record(7, "gamma bound and stability", ok and t < 60.0,
           f"gamma newton {a.gamma:.7f}, collocation {b.gamma:.7f}, gap {gap:.1e} (tol 1e-3), "
           f"bound {UPPER_BOUND:.4f}; {t:.1f} s (limit 60 s)")


# ---------------------------------------------------------------------------
# 8. PDE sanity at n = 128
# ---------------------------------------------------------------------------

def _plane(n, t=0.0, omega=0.0):
    x = grid_nodes(n)
    return np.exp(1j * (2 * math.pi * x[..., 0] - omega * t))


def test_criterion_8_pde_sanity():
    n = 128
    t0 = time.perf_counter()
    # plane-wave dispersion, both solvers
    p_nls = SimParams(mu=0.0, eps=0.05)
    nls_errs = []
    for dt in (2e-3, 1e-3, 5e-4):
        s = advance(PdeState(_plane(n), 0.0, p_nls, dt, mode="nls"), int(round(0.02 / dt)))
        nls_errs.append(float(np.max(np.abs(s.u - _plane(n, s.t, 4 * math.pi**2)))))
    p = SimParams(mu=1 / 100, eps=0.05)
    mu_k = p.mu * p.k_eps
    om = (-1 + math.sqrt(1 + 16 * math.pi**2 * mu_k)) / (2 * mu_k)
    nlsw_errs = []
    for dt in (2e-3, 1e-3, 5e-4):
        s = PdeState(_plane(n), 0.0, p, dt, mode="nlsw", u_prev=_plane(n, -dt, om))
        s = advance(s, int(round(0.02 / dt)))
        nlsw_errs.append(float(np.max(np.abs(s.u - _plane(n, s.t, om)))))
    nlsw_order = min(math.log2(a / b) for a, b in zip(nlsw_errs, nlsw_errs[1:]))
    disp_ok = max(nls_errs) <= 1e-10 and nlsw_order >= 1.9
    # NLS mass per step on the dipole field
    cfg = VortexConfig.dipole()
    q = cfg.anchor()
    s = init_field(n, cfg, q, 0.05, params=p_nls)
    m_prev, mass_step = mass(s.u), 0.0
    for _ in range(50):
        s = step_nls(s)
        m = mass(s.u)
        mass_step = max(mass_step, abs(m - m_prev))
        m_prev = m
    # NLSW Hamiltonian over [0, 0.1]
    s = init_field(n, cfg, q, 0.05, params=p)
    h0 = hamiltonian(s)
    s = advance(s, int(round(0.1 / s.dt)))
    drift = abs(hamiltonian(s) - h0) / abs(h0)
    t = elapsed(t0)
    ok = disp_ok and mass_step <= 1e-12 and drift <= 0.01 and t < 120.0
    record(8, "PDE sanity", ok,
           f"NLS plane-wave error {max(nls_errs):.1e}, NLSW dispersion order {nlsw_order:.2f} "
           f"(errors {', '.join(f'{e:.1e}' for e in nlsw_errs)}); NLS mass change per step "
           f"{mass_step:.1e} (tol 1e-12); NLSW Hamiltonian drift {drift:.2e} over t in [0, {s.t:.3g}] "
           f"(tol 1e-2); {t:.1f} s (limit 120 s)")


# ---------------------------------------------------------------------------
# 9. PDE against the reduced law
# ---------------------------------------------------------------------------

@pytest.mark.slow
def test_criterion_9_cross_validation():
    cfg = VortexConfig.dipole()
    q = cfg.anchor()
    params = SimParams(mu=1 / 100, eps=0.05, t_final=0.25, output_stride=10)
    t0 = time.perf_counter()
    reduced = integrate(cfg, q, params)
    rep = run_pde_compare(cfg, q, params, reduced, n=256)
    t = elapsed(t0)
    ok = (rep.max_deviation <= 0.1 and rep.losses == 0 and rep.covers_window
          and t < 1800.0)
    record(9, "PDE vs reduced law", ok,
           f"{rep.summary()}; reduced run {reduced.termination.value} at "
           f"t={reduced.times[-1]:.4g}; window covers t_final: {rep.covers_window}; "
           f"{t:.1f} s (limit 1800 s)")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
