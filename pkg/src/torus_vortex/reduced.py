"""Reduced dynamical law for the vortex centres and its RK4 integration.

    mu a_j'' + d_j J a_j' = -(1/pi) grad_{a_j} W(a; q_*(a))

q_* is the continuous lift of 2 pi sum d_j a_j + 2 pi Z^2 along the path,
tracked here through unwrapped (planar) vortex positions.  For mu = 0 the
law is first order, a_j' = (d_j/pi) J grad_{a_j} W, and is integrated as
such rather than as a stiff limit of the second-order system.
"""

import enum
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (CollisionImminent, InvalidInitialData, LatticeViolation,
                     ParameterError, StepFailure)
from .green import canonical, default_evaluator, wrap
from .renorm import (DEGENERATE_SEPARATION, VortexConfig, check_momentum, interaction_gradient, jrot,
                     pair_separations, renormalized_energy)


@dataclass(frozen=True)
class SimParams:
    mu: float = 0.01
    eps: float = 0.05
    dt: float = 1e-4
    t_final: float = 1.0
    collision_radius: float = 1e-3
    output_stride: int = 1

    def __post_init__(self):
        if self.mu < 0:
            raise ParameterError("mu must be non-negative")
        if not 0.0 < self.eps < 1.0:
            raise ParameterError("eps must lie in (0, 1)")
        if self.dt <= 0:
            raise ParameterError("dt must be positive")
        if self.t_final < 0:
            raise ParameterError("t_final must be non-negative")
        if self.output_stride < 1:
            raise ParameterError("output_stride must be >= 1")

    @property
    def k_eps(self):
        return 1.0 / abs(math.log(self.eps))

    @property
    def n_steps(self):
        return int(round(self.t_final / self.dt))


@dataclass(frozen=True)
class ReducedState:
    t: float
    lifted_positions: np.ndarray
    velocities: np.ndarray
    base_momentum: np.ndarray
    origin: np.ndarray

    def projected(self):
        return canonical(self.lifted_positions)

    def config(self, degrees):
        return VortexConfig(self.projected(), degrees)


def initial_state(cfg, q0):
    pos = np.array(cfg.positions, dtype=float)
    return ReducedState(0.0, pos, np.zeros_like(pos), np.asarray(q0, dtype=float).copy(),
                        pos.copy())


def lifted_momentum(lifted, origin, q0, degrees):
    shift = (np.asarray(degrees, dtype=float)[:, None] * (lifted - origin)).sum(axis=0)
    return q0 + 2.0 * math.pi * shift


def update_lift(state, degrees, tol=1e-6):
    """q_*(t) = q0 + 2 pi sum_j d_j (a_j(t) - a_j(0)) from the unwrapped path."""
    q = lifted_momentum(state.lifted_positions, state.origin, state.base_momentum, degrees)
    anchor = 2.0 * math.pi * (np.asarray(degrees)[:, None] * state.projected()).sum(axis=0)
    off = (q - anchor) / (2.0 * math.pi)
    err = 2.0 * math.pi * float(np.max(np.abs(off - np.round(off))))
    if err > tol:
        raise LatticeViolation(f"lifted momentum left the lattice by {err:.3e}")
    return q


class _Law:
    """Right-hand side of the reduced law with per-run constants bound."""

    def __init__(self, degrees, q0, origin, params, evaluator=None):
        self.deg = np.asarray(degrees, dtype=float)
        self.q0 = np.asarray(q0, dtype=float)
        self.origin = np.asarray(origin, dtype=float)
        self.params = params
        self.ev = evaluator or default_evaluator()

    def guard(self, pos, radius=None):
        radius = self.params.collision_radius if radius is None else radius
        seps = pair_separations(pos)
        if seps.size and seps.min() < radius:
            raise CollisionImminent(f"vortex separation {seps.min():.3e} below {radius:.3e}")

    def momentum(self, pos):
        return lifted_momentum(pos, self.origin, self.q0, self.deg)

    def force(self, pos):
        """grad_{a_j} W with q following the lift."""
        self.guard(pos, DEGENERATE_SEPARATION)
        q = self.momentum(pos)
        return (interaction_gradient(pos, self.deg, self.ev)
                + 2.0 * math.pi * self.deg[:, None] * q[None, :])

    def first_order_velocity(self, pos):
        return (self.deg[:, None] / math.pi) * jrot(self.force(pos))

    def acceleration(self, pos, vel):
        mu = self.params.mu
        return (-self.force(pos) / math.pi - self.deg[:, None] * jrot(vel)) / mu

    def energy(self, pos):
        q = self.momentum(pos)
        cfg = VortexConfig(canonical(pos), self.deg.astype(int))
        return renormalized_energy(cfg, q, self.ev, check=False)


def ode_rhs(state, params, degrees, evaluator=None):
    """(velocities, accelerations) of the reduced law at ``state``.

    For mu = 0 the velocities are the first-order ones and the
    accelerations are zero; the incoming velocity field is ignored.
    """
    law = _Law(degrees, state.base_momentum, state.origin, params, evaluator)
    pos = state.lifted_positions
    if params.mu == 0.0:
        return law.first_order_velocity(pos), np.zeros_like(pos)
    return state.velocities.copy(), law.acceleration(pos, state.velocities)


def _rk4(law, pos, vel, dt):
    if law.params.mu == 0.0:
        f = law.first_order_velocity
        k1 = f(pos)
        k2 = f(pos + 0.5 * dt * k1)
        k3 = f(pos + 0.5 * dt * k2)
        k4 = f(pos + dt * k3)
        return pos + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4), None
    a = law.acceleration
    p1, v1 = vel, a(pos, vel)
    p2, v2 = vel + 0.5 * dt * v1, a(pos + 0.5 * dt * p1, vel + 0.5 * dt * v1)
    p3, v3 = vel + 0.5 * dt * v2, a(pos + 0.5 * dt * p2, vel + 0.5 * dt * v2)
    p4, v4 = vel + dt * v3, a(pos + dt * p3, vel + dt * v3)
    new_pos = pos + dt / 6.0 * (p1 + 2 * p2 + 2 * p3 + p4)
    new_vel = vel + dt / 6.0 * (v1 + 2 * v2 + 2 * v3 + v4)
    return new_pos, new_vel


def _advance(law, state, dt, t_new=None):
    try:
        pos, vel = _rk4(law, state.lifted_positions, state.velocities, dt)
        if vel is None:
            vel = law.first_order_velocity(pos)
    except CollisionImminent as exc:
        raise StepFailure(f"RK4 stage failed at t={state.t:.6g}: {exc}") from exc
    if not (np.all(np.isfinite(pos)) and np.all(np.isfinite(vel))):
        raise StepFailure(f"non-finite state after step from t={state.t:.6g}")
    t = state.t + dt if t_new is None else t_new
    return replace(state, t=t, lifted_positions=pos, velocities=vel)


def rk4_step(state, params, degrees, evaluator=None):
    """One classical RK4 step of size params.dt."""
    law = _Law(degrees, state.base_momentum, state.origin, params, evaluator)
    new = _advance(law, state, params.dt)
    update_lift(new, degrees)
    return new


class Termination(str, enum.Enum):
    TIME_REACHED = "TimeReached"
    COLLISION = "Collision"
    STEP_FAILURE = "StepFailure"


@dataclass
class Trajectory:
    degrees: np.ndarray
    params: SimParams
    samples: list = field(default_factory=list)
    energy: list = field(default_factory=list)
    kinetic: list = field(default_factory=list)
    invariant: list = field(default_factory=list)
    min_sep: list = field(default_factory=list)
    momentum: list = field(default_factory=list)
    termination: Termination = Termination.TIME_REACHED
    message: str = ""

    def __len__(self):
        return len(self.samples)

    @property
    def times(self):
        return np.array([s.t for s in self.samples])

    def positions(self, lifted=False):
        """Array (n_samples, n_vortices, 2) of wrapped or lifted positions."""
        if not self.samples:
            return np.zeros((0, len(self.degrees), 2))
        arr = np.array([s.lifted_positions for s in self.samples])
        return arr if lifted else canonical(arr)

    def velocities(self):
        if not self.samples:
            return np.zeros((0, len(self.degrees), 2))
        return np.array([s.velocities for s in self.samples])

    def record(self, state, law):
        pos = state.lifted_positions
        w = law.energy(pos)
        kin = float(np.sum(state.velocities**2))
        self.samples.append(state)
        self.energy.append(w)
        self.kinetic.append(kin)
        self.invariant.append(w + 0.5 * math.pi * self.params.mu * kin)
        seps = pair_separations(pos)
        self.min_sep.append(0.25 * float(seps.min()) if seps.size else math.inf)
        self.momentum.append(update_lift(state, self.degrees))


def integrate(cfg, q0, params, evaluator=None):
    """Integrate from a(0) = a0, a'(0) = 0, q_*(0) = q0.

    Stops at t_final, when the pairwise wrap distance of an accepted state
    drops below ``params.collision_radius`` (that state is still recorded),
    or when an RK4 stage becomes degenerate.
    """
    try:
        check_momentum(cfg, q0)
    except LatticeViolation as exc:
        raise InvalidInitialData(str(exc)) from exc
    state = initial_state(cfg, q0)
    law = _Law(cfg.degrees, state.base_momentum, state.origin, params, evaluator)
    traj = Trajectory(degrees=np.array(cfg.degrees), params=params)
    if params.mu == 0.0:
        state = replace(state, velocities=law.first_order_velocity(state.lifted_positions))
    traj.record(state, law)
    try:
        law.guard(state.lifted_positions)
    except CollisionImminent as exc:
        traj.termination, traj.message = Termination.COLLISION, str(exc)
        return traj
    n = params.n_steps
    for k in range(1, n + 1):
        try:
            state = _advance(law, state, params.dt, t_new=k * params.dt)
        except StepFailure as exc:
            traj.termination, traj.message = Termination.STEP_FAILURE, str(exc)
            break
        try:
            law.guard(state.lifted_positions)
        except CollisionImminent as exc:
            traj.record(state, law)
            traj.termination, traj.message = Termination.COLLISION, str(exc)
            break
        if k % params.output_stride == 0 or k == n:
            traj.record(state, law)
    return traj


def invariant_drift(traj, params=None):
    """max_t |W + (mu pi/2)|a'|^2 - value at t = 0| (just W for mu = 0)."""
    if not traj.invariant:
        return 0.0
    inv = np.asarray(traj.invariant)
    return float(np.max(np.abs(inv - inv[0])))


def trajectory_deviation(traj, ref, t_max=None):
    """sup over common sample times <= t_max of max_j wrap-distance."""
    ta, tb = traj.times, ref.times
    pa, pb = traj.positions(), ref.positions()
    ia = {round(t, 12): i for i, t in enumerate(ta)}
    worst = 0.0
    for jb, t in enumerate(tb):
        if t_max is not None and t > t_max + 1e-12:
            continue
        i = ia.get(round(t, 12))
        if i is None:
            continue
        d = wrap(pa[i] - pb[jb])
        worst = max(worst, float(np.max(np.hypot(d[:, 0], d[:, 1]))))
    return worst


def _run_one(args):
    cfg, q0, params, evaluator = args
    return integrate(cfg, q0, params, evaluator)


@dataclass
class SweepReport:
    mu_values: list
    deviations: list
    reference_mu: float
    t_compare: float
    trajectories: list

    def rows(self):
        return list(zip(self.mu_values, self.deviations))

    def terminated_early(self):
        """mu values whose run ended (collision or step failure) before t_compare."""
        return [m for m, tr in zip(self.mu_values, self.trajectories)
                if tr.termination is not Termination.TIME_REACHED
                and tr.times[-1] < self.t_compare - 1e-12]


def mu_sweep(cfg, q0, mu_list, params, t_compare=None, workers=1, evaluator=None):
    """Run the reduced law for each mu and measure the gap to the mu = 0 path.

    The reference is mu = 0 if listed, otherwise min(mu_list).  Runs are
    independent; results keep the input order.  A run that ends in a
    collision before ``t_compare`` has no path to compare over the whole
    window and gets D = inf.
    """
    mu_list = [float(m) for m in mu_list]
    if not mu_list:
        raise ParameterError("mu_list is empty")
    ref_mu = 0.0 if 0.0 in mu_list else min(mu_list)
    jobs = [(cfg, q0, replace(params, mu=m), evaluator) for m in mu_list]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            trajs = list(pool.map(_run_one, jobs))
    else:
        trajs = [_run_one(j) for j in jobs]
    ref = trajs[mu_list.index(ref_mu)]
    t_cmp = params.t_final if t_compare is None else t_compare
    report = SweepReport(mu_list, [], ref_mu, t_cmp, trajs)
    early = set(report.terminated_early())
    report.deviations = [math.inf if m in early and m != ref_mu
                         else trajectory_deviation(tr, ref, t_cmp)
                         for m, tr in zip(mu_list, trajs)]
    return report
