"""Independent reference computations used only by the tests.

Nothing here imports the Ewald evaluator: the Green's function oracle is a
plain Gaussian-damped Fourier sum with the damping removed by Richardson
extrapolation.
"""

import math

import numpy as np

EULER_GAMMA = 0.5772156649015329


class DampedFourierOracle:
    """-(1/2pi) sum_{0<|k|<=K} exp(-sigma |k|^2) exp(2 pi i k.p) / |k|^2.

    Damping by sigma equals heat flow for time t = sigma/(4 pi^2), which
    shifts F by exactly -2 pi t away from the singularity (up to terms of
    size exp(-pi^2 |p|^2 / sigma)).  Two damping levels therefore
    extrapolate linearly to sigma = 0.
    """

    def __init__(self, K=400, sigmas=(3e-4, 6e-4)):
        k = np.arange(-K, K + 1, dtype=float)
        kx, ky = np.meshgrid(k, k, indexing="ij")
        k2 = kx**2 + ky**2
        mask = (k2 > 0) & (k2 <= K * K)
        self.kx = kx[mask]
        self.ky = ky[mask]
        self.k2 = k2[mask]
        self.sigmas = sigmas
        self.weights = [np.exp(-s * self.k2) / self.k2 for s in sigmas]

    def damped(self, p, which):
        phase = 2.0 * math.pi * (self.kx * p[0] + self.ky * p[1])
        return -np.dot(self.weights[which], np.cos(phase)) / (2.0 * math.pi)

    def value(self, p):
        s1, s2 = self.sigmas
        f1 = self.damped(p, 0)
        f2 = self.damped(p, 1)
        return (s2 * f1 - s1 * f2) / (s2 - s1)

    def robin(self):
        """lim_{p->0} F(p) - log|p| from the damped sums at p = 0."""
        vals = []
        for i, s in enumerate(self.sigmas):
            t = s / (4.0 * math.pi**2)
            f0 = -np.sum(self.weights[i]) / (2.0 * math.pi)
            vals.append(f0 - 0.5 * (math.log(4.0 * t) - EULER_GAMMA) + 2.0 * math.pi * t)
        return vals
