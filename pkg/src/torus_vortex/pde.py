"""Pseudospectral solvers for the NLSW and NLS equations on the unit torus.

NLSW:  -i u_t + mu k_eps u_tt - Lap u + eps^-2 (|u|^2 - 1) u = 0
NLS:    i u_t = -Lap u + eps^-2 (|u|^2 - 1) u

NLS uses Strang splitting (pointwise phase rotation / exact Fourier
propagator).  NLSW uses a three-level scheme with the Laplacian averaged
over the outer levels and the nonlinearity explicit, which is diagonal in
Fourier space.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .core import core_profile
from .errors import CoreUnresolved, ParameterError, UnstableStep
from .green import canonical, wrap
from .harmonic import GridField, build_harmonic_map, grid_nodes, plaquette_windings
from .reduced import SimParams, Termination
from .renorm import min_separation, VortexConfig

# cores are cut off at CORE_RADIUS * eps, where the profile reaches 1
CORE_RADIUS = 3.0
HAMILTONIAN_JUMP = 0.1


def stable_dt(n, eps, mode="nlsw", safety=0.9):
    """Default step: safety * min(eps^2/8, h/(4 pi)) for NLSW.

    Split-step Fourier for NLS is unstable once lambda_max dt exceeds pi
    (lambda_max = 2 pi^2 n^2 at the corner mode), so NLS also caps dt at
    1/(2 pi n^2).
    """
    h = 1.0 / n
    bound = min(eps * eps / 8.0, h / (4.0 * math.pi))
    if mode == "nls":
        bound = min(bound, 1.0 / (2.0 * math.pi * n * n))
    return safety * bound


def wavenumbers(n):
    k = np.fft.fftfreq(n, d=1.0 / n)
    kx, ky = np.meshgrid(k, k, indexing="ij")
    return kx, ky


def laplacian_symbol(n):
    """lambda_k = |2 pi k|^2, so that Lap e^{2 pi i k.x} = -lambda_k e^{2 pi i k.x}."""
    kx, ky = wavenumbers(n)
    return 4.0 * math.pi**2 * (kx**2 + ky**2)


@dataclass
class PdeState:
    u: np.ndarray
    t: float
    params: SimParams
    dt: float
    mode: str = "nlsw"
    u_prev: np.ndarray = None
    steps: int = 0
    _lam: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.mode not in ("nlsw", "nls"):
            raise ParameterError(f"unknown mode {self.mode!r}")
        if self.mode == "nlsw":
            if self.u_prev is None or self.u_prev.shape != self.u.shape:
                raise ParameterError("NLSW needs two time levels of equal size")
        if self._lam is None:
            self._lam = laplacian_symbol(self.u.shape[0])

    @property
    def n(self):
        return self.u.shape[0]

    @property
    def field(self):
        return GridField(self.u)

    @property
    def k_mu(self):
        return self.params.mu * self.params.k_eps


# -- energies ---------------------------------------------------------------

def gradient_energy(u, lam=None):
    """int |grad u|^2 / 2 with the spectral gradient."""
    n = u.shape[0]
    lam = laplacian_symbol(n) if lam is None else lam
    uh = np.fft.fft2(u)
    return 0.5 * float(np.sum(lam * np.abs(uh) ** 2)) / n**4


def potential_energy(u, eps):
    n = u.shape[0]
    return float(np.sum((1.0 - np.abs(u) ** 2) ** 2)) / (4.0 * eps * eps * n * n)


def gl_energy(u, eps, lam=None):
    """Ginzburg-Landau energy E^eps(u) by spectral quadrature."""
    return gradient_energy(u, lam) + potential_energy(u, eps)


def mass(u):
    return float(np.sum(np.abs(u) ** 2)) / u.size


def hamiltonian(state):
    """Discrete H = int (mu k_eps / 2)|u_t|^2 + E^eps at the half level n - 1/2.

    For NLS this is E^eps(u).  For NLSW u_t is (u^n - u^{n-1})/dt and the
    energy is averaged over both levels; the linear part of the scheme
    conserves this quantity exactly.
    """
    eps = state.params.eps
    if state.mode == "nls":
        return gl_energy(state.u, eps, state._lam)
    ut = (state.u - state.u_prev) / state.dt
    kin = 0.5 * state.k_mu * float(np.sum(np.abs(ut) ** 2)) / ut.size
    return kin + 0.5 * (gl_energy(state.u, eps, state._lam) + gl_energy(state.u_prev, eps, state._lam))


# -- initial data -----------------------------------------------------------

def core_modulus(n, positions, eps, profile=None):
    """prod_j rho(|x - a_j| / eps) on the grid, rho saturating at CORE_RADIUS."""
    rho = profile or core_profile(CORE_RADIUS)
    nodes = grid_nodes(n)
    out = np.ones((n, n))
    for a in np.asarray(positions).reshape(-1, 2):
        w = wrap(nodes - a)
        out *= rho(np.hypot(w[..., 0], w[..., 1]) / eps)
    return out


def _nonlinear(u, eps):
    return (np.abs(u) ** 2 - 1.0) * u / (eps * eps)


def _laplacian(u, lam):
    return np.fft.ifft2(-lam * np.fft.fft2(u))


def init_field(n, cfg, q, eps, params=None, mode=None, dt=None, evaluator=None):
    """Vortex initial data u0 = H(x; a, q) * prod_j rho(|x - a_j|/eps), u1 = 0.

    For NLSW the level u^{-1} comes from the second-order Taylor step
    u^{-1} = u0 + dt^2/2 u_tt(0), with u_tt(0) taken from the equation at
    u_t = 0.
    """
    h = 1.0 / n
    if eps < 4.0 * h:
        raise CoreUnresolved(f"eps={eps} is below 4h={4 * h:.4g}")
    params = params or SimParams(eps=eps)
    if params.eps != eps:
        params = replace(params, eps=eps)
    mode = mode or ("nls" if params.mu == 0.0 else "nlsw")
    dt = stable_dt(n, eps, mode) if dt is None else dt
    hm = build_harmonic_map(n, cfg, q, evaluator)
    u0 = hm.values * core_modulus(n, hm.cfg.positions, eps)
    lam = laplacian_symbol(n)
    u_prev = None
    if mode == "nlsw":
        k_mu = params.mu * params.k_eps
        if k_mu <= 0.0:
            raise ParameterError("NLSW mode needs mu > 0")
        utt = (_laplacian(u0, lam) - _nonlinear(u0, eps)) / k_mu
        u_prev = u0 + 0.5 * dt * dt * utt
    return PdeState(u=u0, t=0.0, params=params, dt=dt, mode=mode, u_prev=u_prev, _lam=lam)


# -- stepping ---------------------------------------------------------------

def step_nls(state, dt=None):
    """One Strang step: half nonlinear rotation, exact linear flow, half rotation."""
    dt = state.dt if dt is None else dt
    eps2 = state.params.eps ** 2
    u = state.u
    u = u * np.exp(-0.5j * dt * (np.abs(u) ** 2 - 1.0) / eps2)
    u = np.fft.ifft2(np.exp(-1j * state._lam * dt) * np.fft.fft2(u))
    u = u * np.exp(-0.5j * dt * (np.abs(u) ** 2 - 1.0) / eps2)
    return replace(state, u=u, t=state.t + dt, steps=state.steps + 1)


def step_nlsw(state, dt=None, check=True):
    """One step of the three-level scheme

        mu k (u+ - 2u + u-)/dt^2 - i (u+ - u-)/(2 dt) = Lap (u+ + u-)/2 - eps^-2 (|u|^2 - 1) u

    solved mode by mode.  ``dt`` must equal the spacing of the stored levels.
    """
    if dt is not None and abs(dt - state.dt) > 1e-15 * max(dt, state.dt):
        raise ParameterError("the three-level scheme cannot change dt between steps")
    dt = state.dt
    a = state.k_mu / dt**2
    b = 0.5 / dt
    lam = state._lam
    uh = np.fft.fft2(state.u)
    uph = np.fft.fft2(state.u_prev)
    nh = np.fft.fft2(_nonlinear(state.u, state.params.eps))
    rhs = a * (2.0 * uh - uph) - 1j * b * uph - 0.5 * lam * uph - nh
    new = np.fft.ifft2(rhs / (a - 1j * b + 0.5 * lam))
    out = replace(state, u=new, u_prev=state.u, t=state.t + dt, steps=state.steps + 1)
    if check:
        h0, h1 = hamiltonian(state), hamiltonian(out)
        if not np.isfinite(h1) or abs(h1 - h0) > HAMILTONIAN_JUMP * max(abs(h0), 1e-300):
            raise UnstableStep(f"Hamiltonian jumped from {h0:.6g} to {h1:.6g} at t={out.t:.6g}")
    return out


def advance(state, n_steps):
    step = step_nls if state.mode == "nls" else step_nlsw
    for _ in range(n_steps):
        state = step(state)
    return state


# -- vortex tracking --------------------------------------------------------

@dataclass
class TrackedVortices:
    positions: np.ndarray
    degrees: np.ndarray
    t: float = 0.0
    lost: np.ndarray = None
    unmatched: int = 0

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=float).reshape(-1, 2)
        self.degrees = np.asarray(self.degrees, dtype=int).reshape(-1)
        if self.lost is None:
            self.lost = np.zeros(len(self.degrees), dtype=bool)

    def __len__(self):
        return len(self.degrees)

    @property
    def any_lost(self):
        return bool(np.any(self.lost))


def _bilinear_zero(c00, c10, c01, c11, iters=30):
    """Zero of the bilinear interpolant on [0, 1]^2 by Newton from the centre."""
    s, t = 0.5, 0.5
    for _ in range(iters):
        val = c00 * (1 - s) * (1 - t) + c10 * s * (1 - t) + c01 * (1 - s) * t + c11 * s * t
        ds = (c10 - c00) * (1 - t) + (c11 - c01) * t
        dtt = (c01 - c00) * (1 - s) + (c11 - c10) * s
        jac = np.array([[ds.real, dtt.real], [ds.imag, dtt.imag]])
        try:
            step = np.linalg.solve(jac, [-val.real, -val.imag])
        except np.linalg.LinAlgError:
            break
        s = min(max(s + step[0], 0.0), 1.0)
        t = min(max(t + step[1], 0.0), 1.0)
        if abs(step[0]) + abs(step[1]) < 1e-13:
            break
    return s, t


def detect_vortices(u):
    """All plaquettes with nonzero winding, located by bilinear zero crossing."""
    n = u.shape[0]
    wind = plaquette_windings(u)
    pos, deg = [], []
    for i, j in zip(*np.nonzero(wind)):
        i1, j1 = (i + 1) % n, (j + 1) % n
        s, t = _bilinear_zero(u[i, j], u[i1, j], u[i, j1], u[i1, j1])
        pos.append(((i + s) / n, (j + t) / n))
        deg.append(int(wind[i, j]))
    return canonical(np.array(pos).reshape(-1, 2)), np.array(deg, dtype=int)


def track_vortices(state, previous=None):
    """Locate vortices and carry identities over from ``previous``.

    Matching is greedy nearest-neighbour among equal degrees within r(a)/2
    of the previous positions; unmatched previous vortices are flagged lost
    and keep their last position.
    """
    u = state.u if isinstance(state, PdeState) else np.asarray(state)
    t = state.t if isinstance(state, PdeState) else 0.0
    pos, deg = detect_vortices(u)
    if previous is None:
        return TrackedVortices(pos, deg, t)
    prev_pos = previous.positions
    if len(previous) >= 2:
        radius = 0.5 * min_separation(_as_cfg(prev_pos, previous.degrees))
    else:
        radius = 0.5
    pairs = []
    for a, pa in enumerate(prev_pos):
        for b, pb in enumerate(pos):
            if deg[b] != previous.degrees[a]:
                continue
            d = wrap(pb - pa)
            pairs.append((math.hypot(d[0], d[1]), a, b))
    pairs.sort()
    new_pos = prev_pos.copy()
    lost = previous.lost.copy()
    taken_a, taken_b = set(), set()
    for dist, a, b in pairs:
        if dist > radius or a in taken_a or b in taken_b or previous.lost[a]:
            continue
        taken_a.add(a)
        taken_b.add(b)
        new_pos[a] = pos[b]
    for a in range(len(prev_pos)):
        if a not in taken_a:
            lost[a] = True
    return TrackedVortices(new_pos, previous.degrees.copy(), t, lost,
                           unmatched=len(pos) - len(taken_b))


def _as_cfg(positions, degrees):
    """VortexConfig when the degrees allow it; used only for r(a)."""
    try:
        return VortexConfig(positions, degrees)
    except Exception:
        return VortexConfig(positions[:2], np.array([1, -1]))


# -- cross-validation -------------------------------------------------------

@dataclass
class PdeComparison:
    times: np.ndarray
    deviations: np.ndarray
    max_deviation: float
    hamiltonian_drift: float
    losses: int
    lost_at: float
    window_end: float
    t_final: float
    n: int
    dt: float
    mode: str
    tracks: list = field(default_factory=list)

    @property
    def covers_window(self):
        return self.window_end >= self.t_final - 1e-12

    def summary(self):
        return (f"mode={self.mode} n={self.n} dt={self.dt:.3e} window=[0, {self.window_end:.4g}] "
                f"of {self.t_final:.4g}; max deviation {self.max_deviation:.4e}; "
                f"relative Hamiltonian drift {self.hamiltonian_drift:.3e}; losses {self.losses}")


def run_pde_compare(cfg, q0, params, reduced, n=256, dt=None, evaluator=None):
    """Step the PDE alongside a reduced trajectory and measure the gap.

    Vortices are tracked at the reduced sample times up to params.t_final.
    If the reduced run stopped early (collision) or the tracker loses a
    vortex, the comparison window ends there and the report says so.
    """
    eps = params.eps
    mode = "nls" if params.mu == 0.0 else "nlsw"
    base_dt = stable_dt(n, eps, mode) if dt is None else dt
    times = reduced.times
    sample_pos = reduced.positions()
    keep = times <= params.t_final + 1e-12
    times, sample_pos = times[keep], sample_pos[keep]
    if len(times) > 1:
        gap = float(np.min(np.diff(times)))
        base_dt = gap / max(1, math.ceil(gap / base_dt - 1e-9))
    state = init_field(n, cfg, q0, eps, params=params, mode=mode, dt=base_dt,
                       evaluator=evaluator)
    h0 = hamiltonian(state)
    track = track_vortices(state)
    # order the tracked list like the reduced configuration
    track = _align(track, sample_pos[0], np.asarray(reduced.degrees))
    tracks = [track]
    devs = [_deviation(track, sample_pos[0])]
    lost_at = math.nan
    used_times = [times[0]]
    for k in range(1, len(times)):
        steps = int(round((times[k] - state.t) / state.dt))
        state = advance(state, steps)
        track = track_vortices(state, track)
        if track.any_lost:
            lost_at = float(times[k])
            tracks.append(track)
            break
        tracks.append(track)
        used_times.append(times[k])
        devs.append(_deviation(track, sample_pos[k]))
    drift = abs(hamiltonian(state) - h0) / max(abs(h0), 1e-300)
    end = float(used_times[-1])
    return PdeComparison(np.array(used_times), np.array(devs), float(max(devs)), drift,
                         int(np.count_nonzero(tracks[-1].lost)), lost_at, end,
                         params.t_final, n, state.dt, state.mode, tracks)


def _align(track, ref_pos, ref_deg):
    order, lost = [], []
    free = list(range(len(track)))
    for p, d in zip(ref_pos, ref_deg):
        cands = [b for b in free if track.degrees[b] == d]
        if not cands:
            order.append(None)
            continue
        dist = [float(np.hypot(*wrap(track.positions[b] - p))) for b in cands]
        best = cands[int(np.argmin(dist))]
        free.remove(best)
        order.append(best)
    pos = np.array([track.positions[b] if b is not None else p
                    for b, p in zip(order, ref_pos)])
    lost = np.array([b is None for b in order])
    return TrackedVortices(pos, ref_deg, track.t, lost, unmatched=len(free))


def _deviation(track, ref_pos):
    d = wrap(track.positions - ref_pos)
    return float(np.max(np.hypot(d[:, 0], d[:, 1])))
