"""Seedable noise samplers and closed-form tail/quantile helpers.

Every sampler draws from an explicitly passed :class:`RandomStream`, so a
fixed ``(seed, stream_id)`` pair reproduces identical sequences and distinct
stream ids give statistically independent streams for parallel trials.  A
degenerate zero-noise stream is provided for deterministic testing: with it,
every sampler returns 0 (or the zero vector), so mechanisms built on top
become exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import lambertw

_UINT64_MAX = 2**64 - 1


class RandomStream:
    """Deterministic randomness source keyed by (seed, stream_id).

    Backed by a PCG64 generator seeded through :class:`numpy.random.SeedSequence`
    with ``stream_id`` as the spawn key, which makes streams with distinct ids
    statistically independent.  Pass ``zero_noise=True`` to get the degenerate
    test stream.
    """

    __slots__ = ("seed", "stream_id", "zero_noise", "_generator")

    def __init__(self, seed: int = 0, stream_id: int = 0, zero_noise: bool = False):
        for name, value in (("seed", seed), ("stream_id", stream_id)):
            if not 0 <= int(value) <= _UINT64_MAX:
                raise ValueError(f"{name} must fit in an unsigned 64-bit integer, got {value}")
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        self.zero_noise = bool(zero_noise)
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id,))
        self._generator = np.random.Generator(np.random.PCG64(ss))

    @property
    def generator(self) -> np.random.Generator:
        return self._generator

    def split(self, stream_id: int) -> "RandomStream":
        """Fresh stream with the same seed and a different stream id."""
        return RandomStream(self.seed, stream_id, self.zero_noise)

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        tag = ", zero_noise=True" if self.zero_noise else ""
        return f"RandomStream(seed={self.seed}, stream_id={self.stream_id}{tag})"


@dataclass(frozen=True)
class GenGammaParams:
    """Parameters of the generalized gamma distribution.

    The density is ``power / scale**shape / Gamma(shape/power) *
    r**(shape-1) * exp(-(r/scale)**power)`` on r > 0.
    """

    scale: float
    shape: float
    power: float

    def __post_init__(self):
        for name in ("scale", "shape", "power"):
            value = getattr(self, name)
            if not value > 0:
                raise ValueError(f"{name} must be positive, got {value}")


def sample_laplace(scale: float, rng: RandomStream, size: int | None = None):
    """Draw from Laplace(0, scale), pdf ``exp(-|y|/scale) / (2*scale)``."""
    if not scale > 0:
        raise ValueError(f"scale must be positive, got {scale}")
    if rng.zero_noise:
        return 0.0 if size is None else np.zeros(size)
    if size is None:
        return float(rng.generator.laplace(0.0, scale))
    return rng.generator.laplace(0.0, scale, size=size)


def sample_gaussian_vec(dim: int, sigma: float, rng: RandomStream, size: int | None = None):
    """Draw a vector of ``dim`` independent N(0, sigma^2) coordinates.

    With ``size`` given, returns a ``(size, dim)`` array of independent draws.
    """
    if int(dim) < 1:
        raise ValueError(f"dim must be at least 1, got {dim}")
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    dim = int(dim)
    if rng.zero_noise:
        return np.zeros(dim) if size is None else np.zeros((size, dim))
    if size is None:
        return sigma * rng.generator.standard_normal(dim)
    return sigma * rng.generator.standard_normal((size, dim))


def _gamma_unit(shape: float, gen: np.random.Generator, size: int) -> np.ndarray:
    """Gamma(shape) draws at unit scale via Marsaglia-Tsang rejection."""
    if shape < 1.0:
        # boost trick: Gamma(a) = Gamma(a+1) * U^(1/a)
        g = _gamma_unit(shape + 1.0, gen, size)
        u = gen.random(size)
        return g * u ** (1.0 / shape)
    d = shape - 1.0 / 3.0
    c = 1.0 / math.sqrt(9.0 * d)
    out = np.empty(size)
    todo = np.arange(size)
    while todo.size:
        x = gen.standard_normal(todo.size)
        v = (1.0 + c * x) ** 3
        u = gen.random(todo.size)
        pos = v > 0
        logv = np.log(np.where(pos, v, 1.0))
        accept = pos & (
            (u < 1.0 - 0.0331 * x**4)
            | (np.log(u) < 0.5 * x**2 + d * (1.0 - v + logv))
        )
        out[todo[accept]] = d * v[accept]
        todo = todo[~accept]
    return out


def sample_gen_gamma(params: GenGammaParams, rng: RandomStream, size: int | None = None):
    """Draw from the generalized gamma distribution given by ``params``.

    Uses the identity that ``(R/scale)**power`` is Gamma(shape/power)
    distributed, with the Gamma variate produced by Marsaglia-Tsang
    rejection sampling.
    """
    if not isinstance(params, GenGammaParams):
        params = GenGammaParams(*params)
    if rng.zero_noise:
        return 0.0 if size is None else np.zeros(size)
    n = 1 if size is None else int(size)
    t = _gamma_unit(params.shape / params.power, rng.generator, n)
    r = params.scale * t ** (1.0 / params.power)
    return float(r[0]) if size is None else r


def _unit_directions(dim: int, gen: np.random.Generator, size: int) -> np.ndarray:
    """Uniform directions on the unit sphere (normalized Gaussian vectors)."""
    v = gen.standard_normal((size, dim))
    norm = np.linalg.norm(v, axis=1)
    while np.any(norm < 1e-12):  # probability ~0, regenerate degenerate rows
        bad = norm < 1e-12
        v[bad] = gen.standard_normal((int(bad.sum()), dim))
        norm = np.linalg.norm(v, axis=1)
    return v / norm[:, None]


def sample_planar_laplace(dim: int, eps: float, rng: RandomStream, size: int | None = None):
    """Draw from the d-dimensional distribution with pdf proportional to
    ``exp(-eps * ||y||)``.

    The radius follows a generalized gamma law with scale 1/eps, shape d and
    power 1; the direction is uniform on the sphere.  This is the noise of
    the planar Laplace mechanism of Andres et al. (CCS 2013), generalized to
    d dimensions.
    """
    if int(dim) < 1:
        raise ValueError(f"dim must be at least 1, got {dim}")
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    dim = int(dim)
    if rng.zero_noise:
        return np.zeros(dim) if size is None else np.zeros((size, dim))
    n = 1 if size is None else int(size)
    radii = sample_gen_gamma(GenGammaParams(1.0 / eps, float(dim), 1.0), rng, size=n)
    dirs = _unit_directions(dim, rng.generator, n)
    out = radii[:, None] * dirs
    return out[0] if size is None else out


def gp_radius_quantile(beta: float, eps: float) -> float:
    """Radius r with Pr[||noise|| > r] <= beta for 2-D planar Laplace at rate eps.

    Returns the closed-form Lambert-W upper bound
    ``(sqrt(2*log(1/beta)) + log(1/beta)) / eps`` rather than the exact
    inverse of the tail ``(1 + r*eps) * exp(-r*eps)``; the bound is monotone,
    cheap and conservative.
    """
    if not 0 < beta < 1:
        raise ValueError(f"beta must be in (0, 1), got {beta}")
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    u = math.log(1.0 / beta)
    return (math.sqrt(2.0 * u) + u) / eps


def cgp_radius_quantile(beta: float, rho: float) -> float:
    """Exact radius r with Pr[||noise|| > r] = beta for the 2-D Gaussian
    mechanism at rate rho, whose radial survival is ``exp(-rho * r**2)``."""
    if not 0 < beta < 1:
        raise ValueError(f"beta must be in (0, 1), got {beta}")
    if not rho > 0:
        raise ValueError(f"rho must be positive, got {rho}")
    return math.sqrt(math.log(1.0 / beta) / rho)


def laplace_sum_pdf(y, scale: float):
    """Density of the sum of two iid Laplace(scale) variables:
    ``(scale + |y|) * exp(-|y|/scale) / (4 * scale**2)``."""
    if not scale > 0:
        raise ValueError(f"scale must be positive, got {scale}")
    a = np.abs(np.asarray(y, dtype=np.float64))
    out = (scale + a) * np.exp(-a / scale) / (4.0 * scale**2)
    return float(out) if np.isscalar(y) or out.ndim == 0 else out


def laplace_sum_quantile(beta: float, scale: float) -> float:
    """Bound t with Pr[|Z + W| > t] <= beta for Z, W iid Laplace(scale):
    ``scale * (sqrt(2*log(1/beta)) + log(1/beta))``."""
    if not 0 < beta < 1:
        raise ValueError(f"beta must be in (0, 1), got {beta}")
    if not scale > 0:
        raise ValueError(f"scale must be positive, got {scale}")
    u = math.log(1.0 / beta)
    return scale * (math.sqrt(2.0 * u) + u)


def lambert_w_exp_inverse(u: float) -> float:
    """Lower-branch solution w of ``w * exp(w) = -exp(-u - 1)`` for u > 0.

    This is the inverse used to derive the closed-form radius quantiles; it
    lies strictly between ``-1 - sqrt(2u) - u`` and ``-1 - sqrt(2u) - 2u/3``.
    """
    if not u > 0:
        raise ValueError(f"u must be positive, got {u}")
    return float(lambertw(-math.exp(-u - 1.0), k=-1).real)
