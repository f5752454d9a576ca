"""Green's function of the Laplacian on the unit square torus.

F solves  Laplacian F = 2*pi*(delta - 1)  with zero mean, i.e.

    F(x) = -(1/2pi) * sum_{k != 0} exp(2 pi i k.x) / |k|^2 .

The series is evaluated by an Ewald split of the heat-kernel representation
at diffusion time ``tau``:

    F(x) = 2 pi tau - 1/2 sum_n E1(|x+n|^2 / (4 tau))
           - (1/2pi) sum_{k != 0} exp(-4 pi^2 tau |k|^2) cos(2 pi k.x) / |k|^2

The real-space image sum carries the log singularity (E1(z) ~ -log z), the
reciprocal sum is Gaussian damped.  With tau = 1/(4 pi) both decay like
exp(-pi m^2), so a handful of shells reach double precision.
"""

import math

import numpy as np
from scipy.special import exp1

from .errors import OutOfRange, ParameterError, SingularPoint

EULER_GAMMA = 0.5772156649015329
DEFAULT_SPLITTING = 1.0 / (4.0 * math.pi)
SINGULAR_RADIUS = 1e-12
# points per vectorized batch; bounds the (points x images) temporaries
CHUNK = 8192


def wrap(p):
    """Representative of ``p`` in [-1/2, 1/2)^2 (componentwise)."""
    p = np.asarray(p, dtype=float)
    return p - np.floor(p + 0.5)


def canonical(p):
    """Representative of ``p`` in [0, 1)^2."""
    p = np.asarray(p, dtype=float)
    out = p - np.floor(p)
    # tiny negative inputs round up to exactly 1.0
    return np.where(out >= 1.0, 0.0, out)[()]


def wrap_distance(p, q):
    d = wrap(np.asarray(p, dtype=float) - np.asarray(q, dtype=float))
    return np.hypot(d[..., 0], d[..., 1])


def _ein(z):
    """Entire exponential integral Ein(z) = int_0^z (1 - e^-t)/t dt, z >= 0."""
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    small = z < 1.0
    zs = z[small]
    term = zs.copy()
    acc = zs.copy()
    for k in range(2, 30):
        term = -term * zs / k
        acc = acc + term / k
    out[small] = acc
    zl = z[~small]
    out[~small] = exp1(zl) + np.log(zl) + EULER_GAMMA
    return out


def _one_minus_exp_over(z):
    """(1 - exp(-z)) / z, continuous at z = 0."""
    z = np.asarray(z, dtype=float)
    out = np.ones_like(z)
    nz = z > 1e-300
    out[nz] = -np.expm1(-z[nz]) / z[nz]
    return out


class GreenEvaluator:
    """Immutable evaluator for F, grad F and the regular part F - log|x|.

    Cutoffs left as ``None`` are chosen as the smallest shell counts whose
    tail bound meets ``target_abs_error``; explicit cutoffs are checked
    against the same bound.
    """

    def __init__(self, splitting=DEFAULT_SPLITTING, fourier_cutoff=None,
                 realspace_cutoff=None, target_abs_error=1e-10, max_cutoff=15):
        if splitting <= 0:
            raise ParameterError("splitting parameter must be positive")
        if target_abs_error <= 0:
            raise ParameterError("target_abs_error must be positive")
        self.splitting = float(splitting)
        self.target_abs_error = float(target_abs_error)
        half = 0.5 * self.target_abs_error

        if realspace_cutoff is None:
            realspace_cutoff = self._smallest(self._real_tail, half, max_cutoff)
        if fourier_cutoff is None:
            fourier_cutoff = self._smallest(self._fourier_tail, half, max_cutoff)
        self.realspace_cutoff = int(realspace_cutoff)
        self.fourier_cutoff = int(fourier_cutoff)
        self.error_bound = (self._real_tail(self.realspace_cutoff)
                            + self._fourier_tail(self.fourier_cutoff))
        if self.error_bound > self.target_abs_error:
            raise ParameterError(
                f"cutoffs (real={self.realspace_cutoff}, fourier={self.fourier_cutoff}) "
                f"give error bound {self.error_bound:.3e} > target {self.target_abs_error:.3e}")

        R = self.realspace_cutoff
        m = np.arange(-R, R + 1, dtype=float)
        nx, ny = np.meshgrid(m, m, indexing="ij")
        images = np.stack([nx.ravel(), ny.ravel()], axis=-1)
        keep = np.any(images != 0.0, axis=1)
        self._images = images[keep]

        K = self.fourier_cutoff
        self._k = np.arange(-K, K + 1, dtype=float)
        kx, ky = np.meshgrid(self._k, self._k, indexing="ij")
        k2 = kx**2 + ky**2
        k2[K, K] = 1.0
        w = np.exp(-4.0 * math.pi**2 * self.splitting * k2) / k2
        w[K, K] = 0.0
        self._w = w
        self._wkx = w * kx
        self._wky = w * ky

        tau = self.splitting
        self._const = 2.0 * math.pi * tau
        self._reg0 = (self._const + 0.5 * EULER_GAMMA - 0.5 * math.log(4.0 * tau))
        for arr in (self._images, self._k, self._w, self._wkx, self._wky):
            arr.setflags(write=False)

    # -- truncation bounds -------------------------------------------------
    def _real_tail(self, R):
        # shell |n|_inf = m holds 8m images at distance >= m - 1/2 from x in the unit cell;
        # the bound covers both |value| and |gradient| contributions
        m = np.arange(R + 1, R + 80, dtype=float)
        r = m - 0.5
        z = r**2 / (4.0 * self.splitting)
        per = np.maximum(0.5 * exp1(z), np.exp(-z) / r)
        return float(np.sum(8.0 * m * per))

    def _fourier_tail(self, K):
        m = np.arange(K + 1, K + 80, dtype=float)
        damp = np.exp(-4.0 * math.pi**2 * self.splitting * m**2)
        per = np.maximum(damp / (2.0 * math.pi * m**2), damp / m)
        return float(np.sum(8.0 * m * per))

    @staticmethod
    def _smallest(tail, target, cap):
        for c in range(1, cap + 1):
            if tail(c) <= target:
                return c
        raise ParameterError(f"no cutoff <= {cap} meets the requested error")

    # -- pieces ------------------------------------------------------------
    def _prepare(self, p):
        x = wrap(p)
        if x.shape[-1] != 2:
            raise ValueError("points must have a trailing dimension of size 2")
        return x.reshape(-1, 2), x.shape[:-1]

    def _fourier(self, x, grad):
        ex = np.exp(2j * math.pi * x[:, 0:1] * self._k)
        ey = np.exp(2j * math.pi * x[:, 1:2] * self._k)
        if not grad:
            s = np.einsum("mi,ij,mj->m", ex, self._w, ey)
            return -s.real / (2.0 * math.pi)
        gx = np.einsum("mi,ij,mj->m", ex, self._wkx, ey).imag
        gy = np.einsum("mi,ij,mj->m", ex, self._wky, ey).imag
        return np.stack([gx, gy], axis=-1)

    def _images_value(self, x):
        out = np.empty(len(x))
        for s in range(0, len(x), CHUNK):
            y = x[s:s + CHUNK, None, :] + self._images[None, :, :]
            z = np.sum(y * y, axis=-1) / (4.0 * self.splitting)
            out[s:s + CHUNK] = -0.5 * np.sum(exp1(z), axis=1)
        return out

    def _images_grad(self, x):
        out = np.empty((len(x), 2))
        for s in range(0, len(x), CHUNK):
            y = x[s:s + CHUNK, None, :] + self._images[None, :, :]
            r2 = np.sum(y * y, axis=-1)
            f = np.exp(-r2 / (4.0 * self.splitting)) / r2
            out[s:s + CHUNK] = np.einsum("mi,mik->mk", f, y)
        return out

    def _check_singular(self, x):
        r = np.hypot(x[:, 0], x[:, 1])
        if np.any(r < SINGULAR_RADIUS):
            raise SingularPoint("Green's function evaluated at a lattice point")
        return r

    # -- public ------------------------------------------------------------
    def value(self, p):
        """F(p); accepts a single point or an array of shape (..., 2)."""
        x, shape = self._prepare(p)
        r = self._check_singular(x)
        z0 = r**2 / (4.0 * self.splitting)
        out = (self._const - 0.5 * exp1(z0) + self._images_value(x)
               + self._fourier(x, grad=False))
        return out.reshape(shape)[()] if shape else float(out[0])

    def grad(self, p):
        """grad F(p), obtained by differentiating the split sums term by term."""
        x, shape = self._prepare(p)
        r = self._check_singular(x)
        r2 = r**2
        g0 = (np.exp(-r2 / (4.0 * self.splitting)) / r2)[:, None] * x
        out = g0 + self._images_grad(x) + self._fourier(x, grad=True)
        return out.reshape(shape + (2,))

    def regular(self, p):
        """(F(p) - log|p|, grad F(p) - p/|p|^2) for |wrap(p)| < 1/2.

        Both are smooth through p = 0 where the gradient vanishes.
        """
        x, shape = self._prepare(p)
        r2 = np.sum(x * x, axis=-1)
        if np.any(r2 >= 0.25):
            raise OutOfRange("regular part is only defined for wrap distance < 1/2")
        z0 = r2 / (4.0 * self.splitting)
        val = (self._reg0 - 0.5 * _ein(z0) + self._images_value(x)
               + self._fourier(x, grad=False))
        g0 = -(_one_minus_exp_over(z0) / (4.0 * self.splitting))[:, None] * x
        grad = g0 + self._images_grad(x) + self._fourier(x, grad=True)
        if shape:
            return val.reshape(shape), grad.reshape(shape + (2,))
        return float(val[0]), grad.reshape(2)

    def regular_grad(self, p):
        """grad F(p) - p/|p|^2 alone, for |wrap(p)| < 1/2."""
        x, shape = self._prepare(p)
        r2 = np.sum(x * x, axis=-1)
        if np.any(r2 >= 0.25):
            raise OutOfRange("regular part is only defined for wrap distance < 1/2")
        z0 = r2 / (4.0 * self.splitting)
        g0 = -(_one_minus_exp_over(z0) / (4.0 * self.splitting))[:, None] * x
        out = g0 + self._images_grad(x) + self._fourier(x, grad=True)
        return out.reshape(shape + (2,))

    def robin_constant(self):
        """Limit of F(p) - log|p| as p -> 0."""
        return self.regular(np.zeros(2))[0]

    def __repr__(self):
        return (f"GreenEvaluator(splitting={self.splitting:.6g}, "
                f"fourier_cutoff={self.fourier_cutoff}, realspace_cutoff={self.realspace_cutoff}, "
                f"error_bound={self.error_bound:.2e})")


_DEFAULT = None


def default_evaluator():
    global _DEFAULT
    if _DEFAULT is None:
        _DEFAULT = GreenEvaluator()
    return _DEFAULT


def green_eval(p, evaluator=None):
    return (evaluator or default_evaluator()).value(p)


def green_grad(p, evaluator=None):
    return (evaluator or default_evaluator()).grad(p)


def green_reg(p, evaluator=None):
    return (evaluator or default_evaluator()).regular(p)
