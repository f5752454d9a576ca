"""Canonical harmonic map on a periodic grid and field diagnostics.

The map H(x; a, q) is unimodular with current

    j(H) = J (q - sum_j d_j grad F(x - a_j)),

which is divergence free, has curl 2 pi sum_j d_j delta_{a_j} and mean J q
(the momentum Q = J q pairing of the initial data).  Near a vortex
-J grad F(x - a) = grad theta(x - a) + smooth, so each grid edge's phase
increment is the exact angle swept around every vortex plus a midpoint
rule for the smooth remainder.  Phases are then summed along a spanning
tree (row 0 in x, then every column in y).
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import EtaSpecInvalid, GridTooCoarse
from .green import canonical, default_evaluator, wrap
from .renorm import VortexConfig, check_momentum, jrot, min_separation, renorm_grad


@dataclass
class GridField:
    """Complex samples values[i, j] at the node (i/n, j/n)."""

    values: np.ndarray
    shift: np.ndarray = field(default_factory=lambda: np.zeros(2))
    cfg: VortexConfig = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.ndim != 2 or self.values.shape[0] != self.values.shape[1]:
            raise ValueError("grid field must be square")

    @property
    def n(self):
        return self.values.shape[0]

    @property
    def h(self):
        return 1.0 / self.n

    def __getitem__(self, idx):
        i, j = idx
        return self.values[i % self.n, j % self.n]

    def nodes(self):
        s = np.arange(self.n) / self.n
        x, y = np.meshgrid(s, s, indexing="ij")
        return np.stack([x, y], axis=-1)


@dataclass
class FieldDiagnostics:
    energy_density: np.ndarray
    current: np.ndarray
    jacobian: np.ndarray
    total_energy: float
    total_momentum: np.ndarray


def grid_nodes(n):
    s = np.arange(n) / n
    x, y = np.meshgrid(s, s, indexing="ij")
    return np.stack([x, y], axis=-1)


# -- construction -----------------------------------------------------------

def _edge_clearance(positions, n):
    """Distance of each vortex to the nearest node, in units of h."""
    p = positions * n
    return np.hypot(*np.moveaxis(p - np.round(p), -1, 0))


def _choose_shift(positions, n, min_clearance=0.25):
    """Smallest joint translation (|c| <= h/2) keeping vortices off nodes and edges.

    Joint translations leave W, grad W and the admissible momenta unchanged
    because the degrees sum to zero.
    """
    h = 1.0 / n
    candidates = [np.zeros(2)]
    for k in range(1, 9):
        for ang in np.linspace(0.0, 2 * math.pi, 8, endpoint=False) + 0.3:
            candidates.append(k / 16.0 * h * np.array([math.cos(ang), math.sin(ang)]))
    for c in candidates:
        p = canonical(positions + c)
        frac = p * n - np.floor(p * n)
        off_lines = np.min(np.minimum(frac, 1.0 - frac)) > 1e-3
        if off_lines and np.all(_edge_clearance(p, n) >= min_clearance):
            return c
    return candidates[-1]


def _smooth_part(points, evaluator):
    """grad F(p) - p/|p|^2 for planar points p (not wrapped)."""
    pts = points.reshape(-1, 2)
    r2 = np.sum(pts * pts, axis=-1)
    out = np.empty_like(pts)
    near = r2 < 0.45**2
    if np.any(near):
        out[near] = evaluator.regular_grad(pts[near])
    far = ~near
    if np.any(far):
        pf = pts[far]
        out[far] = evaluator.grad(pf) - pf / r2[far][:, None]
    return out.reshape(points.shape)


def edge_increments(n, cfg, q, evaluator=None):
    """Phase increments along the x-edges and y-edges leaving every node.

    dx[i, j] goes from node (i, j) to (i+1, j); dy[i, j] from (i, j) to (i, j+1).
    """
    ev = evaluator or default_evaluator()
    h = 1.0 / n
    nodes = grid_nodes(n)
    jq = jrot(q)
    dx = np.full((n, n), jq[0] * h)
    dy = np.full((n, n), jq[1] * h)
    for a, d in zip(cfg.positions, cfg.degrees):
        w = wrap(nodes - a)
        for out, e in ((dx, np.array([h, 0.0])), (dy, np.array([0.0, h]))):
            w1 = w + e
            # exact angle swept around the vortex, principal value
            cross = w[..., 0] * w1[..., 1] - w[..., 1] * w1[..., 0]
            dot = np.sum(w * w1, axis=-1)
            out += d * np.arctan2(cross, dot)
            smooth = _smooth_part(w + 0.5 * e, ev)
            out -= d * (jrot(smooth) @ e)
    return dx, dy


def build_harmonic_map(n, cfg, q, evaluator=None, check=True):
    """Canonical harmonic map sampled on the n x n grid.

    If a vortex sits on or next to a node the whole configuration is
    translated by at most h/2; the translation is kept in ``field.shift``
    and the translated configuration in ``field.cfg``.
    """
    n = int(n)
    if n < 16 * max(len(cfg), 1):
        raise GridTooCoarse(f"n={n} is below 16 nodes per vortex")
    q = np.asarray(q, dtype=float)
    if check:
        check_momentum(cfg, q)
    shift = _choose_shift(cfg.positions, n) if len(cfg) else np.zeros(2)
    cfg_used = cfg.translated(shift) if np.any(shift) else cfg
    dx, dy = edge_increments(n, cfg_used, q, evaluator)
    phase = np.empty((n, n))
    phase[0, 0] = 0.0
    phase[1:, 0] = np.cumsum(dx[:-1, 0])
    phase[:, 1:] = phase[:, :1] + np.cumsum(dy[:, :-1], axis=1)
    return GridField(np.exp(1j * phase), shift=shift, cfg=cfg_used)


# -- diagnostics ------------------------------------------------------------

def central_gradient(v):
    """Second-order periodic central differences along x (axis 0) and y (axis 1)."""
    n = v.shape[0]
    dvx = (np.roll(v, -1, axis=0) - np.roll(v, 1, axis=0)) * (0.5 * n)
    dvy = (np.roll(v, -1, axis=1) - np.roll(v, 1, axis=1)) * (0.5 * n)
    return dvx, dvy


def field_diagnostics(f, eps):
    v = f.values if isinstance(f, GridField) else np.asarray(f, dtype=complex)
    n = v.shape[0]
    dvx, dvy = central_gradient(v)
    cv = np.conj(v)
    current = np.stack([np.imag(cv * dvx), np.imag(cv * dvy)], axis=-1)
    grad2 = np.abs(dvx) ** 2 + np.abs(dvy) ** 2
    dens = 0.5 * grad2 + (1.0 - np.abs(v) ** 2) ** 2 / (4.0 * eps * eps)
    jac = np.imag(np.conj(dvx) * dvy)
    h2 = 1.0 / (n * n)
    return FieldDiagnostics(dens, current, jac, float(h2 * dens.sum()),
                            h2 * current.reshape(-1, 2).sum(axis=0))


def _phase_differences(v):
    ax = np.angle(np.roll(v, -1, axis=0) * np.conj(v))
    ay = np.angle(np.roll(v, -1, axis=1) * np.conj(v))
    return ax, ay


def plaquette_windings(f):
    """Integer winding of every plaquette; entry [i, j] has lower-left node (i, j)."""
    v = f.values if isinstance(f, GridField) else np.asarray(f, dtype=complex)
    ax, ay = _phase_differences(v)
    circ = ax + np.roll(ay, -1, axis=0) - np.roll(ax, -1, axis=1) - ay
    return np.rint(circ / (2.0 * math.pi)).astype(int)


def current_divergence(f):
    """Central-difference divergence of the central-difference current."""
    v = f.values if isinstance(f, GridField) else np.asarray(f, dtype=complex)
    cur = field_diagnostics(v, 1.0).current
    n = v.shape[0]
    return ((np.roll(cur[..., 0], -1, axis=0) - np.roll(cur[..., 0], 1, axis=0))
            + (np.roll(cur[..., 1], -1, axis=1) - np.roll(cur[..., 1], 1, axis=1))) * (0.5 * n)


def core_distance(n, positions):
    """Distance from each node to the nearest vortex (inf without vortices)."""
    nodes = grid_nodes(n)
    dist = np.full((n, n), np.inf)
    for a in np.asarray(positions).reshape(-1, 2):
        w = wrap(nodes - a)
        dist = np.minimum(dist, np.hypot(w[..., 0], w[..., 1]))
    return dist


@dataclass
class CanonicalReport:
    unimodularity: float
    divergence: float
    divergence_bound: float
    divergence_far: float
    windings: list
    expected_windings: list
    stray_windings: int
    momentum_error: float
    momentum_tol: float
    worst_node: tuple = None

    @property
    def unimodular_ok(self):
        return self.unimodularity <= 1e-12

    @property
    def divergence_ok(self):
        return self.divergence <= self.divergence_bound

    @property
    def windings_ok(self):
        return self.windings == self.expected_windings and self.stray_windings == 0

    @property
    def momentum_ok(self):
        return self.momentum_error <= self.momentum_tol

    @property
    def passed(self):
        return self.unimodular_ok and self.divergence_ok and self.windings_ok and self.momentum_ok

    def lines(self):
        tag = lambda ok: "ok" if ok else "FAIL"
        return [
            f"unimodularity max||H|-1| = {self.unimodularity:.3e} [{tag(self.unimodular_ok)}]",
            f"divergence residual (> 4h from cores) = {self.divergence:.3e} "
            f"(bound {self.divergence_bound:.3e}) [{tag(self.divergence_ok)}]; "
            f"beyond r(a)/2: {self.divergence_far:.3e}",
            f"windings {self.windings} expected {self.expected_windings}, "
            f"stray plaquettes {self.stray_windings} [{tag(self.windings_ok)}]",
            f"|int j - Jq| = {self.momentum_error:.3e} (tol {self.momentum_tol:.1e}) "
            f"[{tag(self.momentum_ok)}]",
        ]


def verify_canonical(f, cfg, q, eps=None, momentum_tol=5e-3, divergence_const=10.0):
    """Check unimodularity, divergence, windings and momentum of a grid map.

    The divergence residual is taken over nodes more than 4h from every
    vortex and must be at most ``divergence_const * h``.  The residual
    beyond r(a)/2 is reported alongside for reference.
    """
    v = f.values
    n = f.n
    h = 1.0 / n
    used = f.cfg if f.cfg is not None else cfg
    pos = used.positions
    q = np.asarray(q, dtype=float)
    unimod = float(np.max(np.abs(np.abs(v) - 1.0)))
    div = np.abs(current_divergence(f))
    dist = core_distance(n, pos)
    mask = dist > 4.0 * h
    div_near = float(div[mask].max()) if mask.any() else 0.0
    far = dist > 0.5 * min_separation(used) if len(used) else mask
    div_far = float(div[far].max()) if far.any() else 0.0
    worst = np.unravel_index(np.argmax(np.where(mask, div, -1.0)), div.shape)
    wind = plaquette_windings(f)
    found = []
    seen = np.zeros(wind.shape, dtype=bool)
    for a in pos:
        i, j = np.floor(a * n).astype(int) % n
        found.append(int(wind[i, j]))
        seen[i, j] = True
    stray = int(np.count_nonzero(wind[~seen]))
    diag = field_diagnostics(f, 1.0 if eps is None else eps)
    mom_err = float(np.linalg.norm(diag.total_momentum - jrot(q)))
    return CanonicalReport(unimod, div_near, divergence_const * h, div_far, found,
                           [int(d) for d in cfg.degrees], stray, mom_err, momentum_tol,
                           tuple(int(k) for k in worst))


# -- Hessian pairing --------------------------------------------------------

def _profile(kind):
    """Smoothstep s -> [0, 1] with vanishing derivatives at both ends."""
    if kind == "quintic":  # C^2
        return (lambda s: s**3 * (10 - 15 * s + 6 * s * s),
                lambda s: 30 * s * s * (1 - s) ** 2,
                lambda s: 60 * s * (1 - s) * (1 - 2 * s))
    if kind == "septic":  # C^3
        return (lambda s: s**4 * (35 - 84 * s + 70 * s * s - 20 * s**3),
                lambda s: 140 * s**3 * (1 - s) ** 3,
                lambda s: 420 * s * s * (1 - s) ** 2 * (1 - 2 * s))
    raise EtaSpecInvalid(f"unknown profile {kind!r}")


@dataclass(frozen=True)
class EtaSpec:
    """eta(x) = nu . (x - a_j) chi(|x - a_j|) with chi = 1 on [0, r_lin], 0 past r_sup."""

    direction: tuple = (1.0, 0.0)
    r_lin: float = 0.025
    r_sup: float = 0.1
    profile: str = "quintic"

    def validate(self, cfg, j_index):
        if not 0.0 < self.r_lin < self.r_sup:
            raise EtaSpecInvalid("need 0 < r_lin < r_sup")
        _profile(self.profile)
        if not 0 <= j_index < len(cfg):
            raise EtaSpecInvalid(f"no vortex with index {j_index}")
        r_a = min_separation(cfg)
        if self.r_sup > r_a * (1.0 + 1e-12):
            raise EtaSpecInvalid(f"support radius {self.r_sup} exceeds r(a) = {r_a:.6g}")
        others = np.delete(cfg.positions, j_index, axis=0)
        if len(others):
            d = wrap(others - cfg.positions[j_index])
            if np.min(np.hypot(d[:, 0], d[:, 1])) <= self.r_sup:
                raise EtaSpecInvalid("support of eta contains another vortex")

    def hessian(self, y):
        """Hessian of eta at offsets y = x - a_j, shape (..., 2, 2)."""
        nu = np.asarray(self.direction, dtype=float)
        g, g1, g2 = _profile(self.profile)
        width = self.r_sup - self.r_lin
        rho = np.hypot(y[..., 0], y[..., 1])
        s = np.clip((rho - self.r_lin) / width, 0.0, 1.0)
        band = (rho > self.r_lin) & (rho < self.r_sup)
        chi1 = np.where(band, -g1(s) / width, 0.0)
        chi2 = np.where(band, -g2(s) / width**2, 0.0)
        safe = np.where(rho > 0, rho, 1.0)
        e = y / safe[..., None]
        lin = y @ nu
        eye = np.eye(2)
        ee = e[..., :, None] * e[..., None, :]
        term1 = chi1[..., None, None] * (nu[:, None] * e[..., None, :] + e[..., :, None] * nu[None, :])
        term2 = (lin * chi2)[..., None, None] * ee
        term3 = (lin * chi1 / safe)[..., None, None] * (eye - ee)
        return term1 + term2 + term3


def hessian_pairing_check(cfg, q, j_index, eta_spec=None, n=512, evaluator=None):
    """Both sides of  int <Hess(eta) j(H), J j(H)> dx = -grad eta(a_j) . (J grad_{a_j} W).

    The left side uses the central-difference current of the grid map;
    the right side comes from renorm_grad.  Returns (lhs, rhs, |lhs - rhs|).
    """
    spec = eta_spec or EtaSpec()
    spec.validate(cfg, j_index)
    h = 1.0 / n
    if 4.0 * h >= spec.r_lin:
        raise GridTooCoarse("core exclusion disk 4h reaches the linearity ball of eta")
    f = build_harmonic_map(n, cfg, q, evaluator)
    used = f.cfg
    a = used.positions[j_index]
    cur = field_diagnostics(f, 1.0).current
    y = wrap(grid_nodes(n) - a)
    rho = np.hypot(y[..., 0], y[..., 1])
    sel = (rho < spec.r_sup) & (rho > 4.0 * h)
    hess = spec.hessian(y[sel])
    jv = cur[sel]
    hj = np.einsum("mik,mk->mi", hess, jv)
    lhs = float(h * h * np.sum(hj * jrot(jv)))
    grad = renorm_grad(used, q, evaluator, check=False)[j_index]
    rhs = float(-np.asarray(spec.direction, dtype=float) @ jrot(grad))
    return lhs, rhs, abs(lhs - rhs)
