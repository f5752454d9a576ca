"""Vortex configurations, renormalized energy W(a; q) and its gradient."""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateConfig, InvalidConfig, LatticeViolation
from .green import canonical, default_evaluator, wrap

DEGENERATE_SEPARATION = 1e-9
LATTICE_TOL = 1e-9

# symplectic matrix, J^2 = -I
JMAT = np.array([[0.0, 1.0], [-1.0, 0.0]])


def jrot(v):
    """Apply J = [[0, 1], [-1, 0]] to the trailing axis of ``v``."""
    v = np.asarray(v, dtype=float)
    return np.stack([v[..., 1], -v[..., 0]], axis=-1)


@dataclass(frozen=True)
class VortexConfig:
    """Vortex centres on the torus with degrees +-1 summing to zero."""

    positions: np.ndarray
    degrees: np.ndarray

    def __post_init__(self):
        pos = canonical(np.asarray(self.positions, dtype=float).reshape(-1, 2))
        deg = np.asarray(self.degrees, dtype=int).reshape(-1)
        if pos.shape[0] != deg.shape[0]:
            raise InvalidConfig("positions and degrees differ in length")
        if np.any(np.abs(deg) != 1):
            raise InvalidConfig("degrees must be +1 or -1")
        if deg.sum() != 0:
            raise InvalidConfig("degrees must sum to zero on the torus")
        pos.setflags(write=False)
        deg.setflags(write=False)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "degrees", deg)

    @classmethod
    def dipole(cls, plus=(0.3, 0.5), minus=(0.7, 0.5)):
        return cls(np.array([plus, minus]), np.array([1, -1]))

    def __len__(self):
        return len(self.degrees)

    def translated(self, c):
        return VortexConfig(self.positions + np.asarray(c, dtype=float), self.degrees)

    def anchor(self):
        """2 pi sum_j d_j a_j for the canonical representatives."""
        return 2.0 * math.pi * (self.degrees[:, None] * self.positions).sum(axis=0)

    def default_momentum(self):
        return self.anchor()


def pair_separations(positions):
    pos = np.asarray(positions, dtype=float)
    n = len(pos)
    if n < 2:
        return np.array([])
    i, j = np.triu_indices(n, 1)
    d = wrap(pos[i] - pos[j])
    return np.hypot(d[:, 0], d[:, 1])


def min_separation(cfg):
    """r(a): a quarter of the minimal pairwise wrap distance."""
    seps = pair_separations(cfg.positions)
    if seps.size == 0:
        return math.inf
    return 0.25 * float(seps.min())


def lattice_offset(cfg, q):
    """(q - 2 pi sum d_j a_j) / (2 pi) and its distance to Z^2."""
    off = (np.asarray(q, dtype=float) - cfg.anchor()) / (2.0 * math.pi)
    return off, float(np.max(np.abs(off - np.round(off))))


def check_momentum(cfg, q, tol=LATTICE_TOL):
    _, err = lattice_offset(cfg, q)
    if err * 2.0 * math.pi > tol:
        raise LatticeViolation(
            f"q is not in 2 pi sum d_j a_j + 2 pi Z^2 (off by {2 * math.pi * err:.3e})")


def _guard(cfg):
    seps = pair_separations(cfg.positions)
    if seps.size and seps.min() < DEGENERATE_SEPARATION:
        raise DegenerateConfig(f"vortices closer than {DEGENERATE_SEPARATION}")


def renormalized_energy(cfg, q, evaluator=None, check=True):
    """W(a; q) = -pi sum_{k != l} d_k d_l F(a_k - a_l) + |q|^2 / 2."""
    ev = evaluator or default_evaluator()
    if check:
        check_momentum(cfg, q)
    _guard(cfg)
    q = np.asarray(q, dtype=float)
    n = len(cfg)
    interaction = 0.0
    if n > 1:
        i, j = np.triu_indices(n, 1)
        vals = ev.value(cfg.positions[i] - cfg.positions[j])
        # F is even: each unordered pair appears twice in the k != l sum
        interaction = -2.0 * math.pi * float(np.sum(cfg.degrees[i] * cfg.degrees[j] * vals))
    return interaction + 0.5 * float(q @ q)


def interaction_gradient(positions, degrees, evaluator=None):
    """-2 pi d_j sum_{l != j} d_l grad F(a_j - a_l) for every j."""
    ev = evaluator or default_evaluator()
    pos = np.asarray(positions, dtype=float)
    deg = np.asarray(degrees, dtype=float)
    n = len(pos)
    out = np.zeros((n, 2))
    if n < 2:
        return out
    i, j = np.triu_indices(n, 1)
    g = ev.grad(pos[i] - pos[j])
    w = (deg[i] * deg[j])[:, None] * g
    np.add.at(out, i, w)
    np.add.at(out, j, -w)
    return -2.0 * math.pi * out


def renorm_grad(cfg, q, evaluator=None, check=True):
    """Gradients of W with respect to each a_j, q following the lift.

    Moving a_j by delta moves the lifted momentum by 2 pi d_j delta, so the
    |q|^2/2 term contributes 2 pi d_j q.
    """
    if check:
        check_momentum(cfg, q)
    _guard(cfg)
    q = np.asarray(q, dtype=float)
    grad = interaction_gradient(cfg.positions, cfg.degrees, evaluator)
    return grad + 2.0 * math.pi * cfg.degrees[:, None] * q[None, :]


def w_eps(cfg, q, eps, gamma, evaluator=None):
    """W_eps = 2N (pi log(1/eps) + gamma) + W(a; q); 2N is the vortex count."""
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1)")
    g = getattr(gamma, "gamma", gamma)
    return len(cfg) * (math.pi * math.log(1.0 / eps) + g) + renormalized_energy(cfg, q, evaluator)
