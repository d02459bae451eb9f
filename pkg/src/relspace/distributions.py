"""Densities, samplers and Chinese-restaurant bookkeeping for the learner.

The directional part of a spatial concept is a von Mises distribution on
``[0, 2*pi)`` and the distance part is a shared Gaussian.  Observations
not tied to the reference object fall under a uniform background over a
disc of radius ``e``.  Everything here is written against plain numpy so
the Gibbs sweeps can evaluate whole scenes at once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields

import numpy as np
from scipy import special

LOG_TWO_PI = math.log(2.0 * math.pi)


def log_i0(kappa):
    """``log I0(kappa)``, stable for large concentrations.

    Uses the exponentially scaled Bessel function, so ``kappa`` around
    1e6 (an effectively deterministic direction) stays finite.
    """
    kappa = np.asarray(kappa, dtype=float)
    return kappa + np.log(special.i0e(kappa))


@dataclass(frozen=True)
class VonMises:
    """Mean direction ``nu`` and concentration ``kappa >= 0``.

    ``kappa == 0`` is the explicit uniform limit, density ``1/(2*pi)``
    everywhere.
    """

    nu: float
    kappa: float

    def __post_init__(self):
        if not (math.isfinite(self.nu) and math.isfinite(self.kappa)):
            raise ValueError("von Mises parameters must be finite")
        if self.kappa < 0.0:
            raise ValueError("concentration must be non-negative")


def vm_logpdf_arr(theta, nu, kappa, log_i0_kappa=None):
    """Elementwise von Mises log density with numpy broadcasting.

    ``log_i0_kappa`` can be passed to reuse a cached normalizer when the
    same concentrations are scored against many angles.
    """
    if log_i0_kappa is None:
        log_i0_kappa = log_i0(kappa)
    return np.asarray(kappa) * np.cos(np.asarray(theta) - np.asarray(nu)) - (
        LOG_TWO_PI + log_i0_kappa
    )


def vm_logpdf(theta, p: VonMises):
    """Log density of ``theta`` under ``p``."""
    return vm_logpdf_arr(theta, p.nu, p.kappa)


def vm_sample(p: VonMises, rng: np.random.Generator, size=None):
    """Draw directions from ``p``, wrapped into ``[0, 2*pi)``."""
    draws = rng.vonmises(p.nu, p.kappa, size=size)
    return np.mod(draws, 2.0 * math.pi)


@dataclass(frozen=True)
class DistanceModel:
    """Gaussian over distances, parameterized by mean and precision."""

    mu: float
    lam: float

    def __post_init__(self):
        if not (math.isfinite(self.mu) and math.isfinite(self.lam)):
            raise ValueError("distance parameters must be finite")
        if self.lam <= 0.0:
            raise ValueError("precision must be positive")

    def logpdf(self, l):
        l = np.asarray(l, dtype=float)
        return 0.5 * (math.log(self.lam) - LOG_TWO_PI) - 0.5 * self.lam * (
            l - self.mu
        ) ** 2

    def sample(self, rng: np.random.Generator, size=None):
        return self.mu + rng.normal(size=size) / math.sqrt(self.lam)


def background_logpdf(l, theta, e: float):
    """Log density of the uniform background over the radius-``e`` disc.

    Positions beyond ``e`` have zero density, which is what forces far
    away observations to be explained by a reference object instead.
    """
    l = np.asarray(l, dtype=float)
    out = np.full(l.shape, -math.log(e) - LOG_TWO_PI)
    out = np.where(l <= e, out, -np.inf)
    if out.ndim == 0:
        return float(out)
    return out


def normal_logpdf(x, mean: float, precision: float):
    x = np.asarray(x, dtype=float)
    return 0.5 * (math.log(precision) - LOG_TWO_PI) - 0.5 * precision * (
        x - mean
    ) ** 2


def gamma_logpdf(x, shape: float, rate: float):
    x = np.asarray(x, dtype=float)
    return (
        shape * math.log(rate)
        - special.gammaln(shape)
        + (shape - 1.0) * np.log(x)
        - rate * x
    )


def lognormal_logpdf(x, m: float, s: float):
    x = np.asarray(x, dtype=float)
    logx = np.log(x)
    return -logx - math.log(s) - 0.5 * LOG_TWO_PI - 0.5 * ((logx - m) / s) ** 2


def dirichlet_logpdf(p, alpha):
    """Log density of a probability vector under a Dirichlet.

    Zero entries are clipped to the smallest positive float; with sparse
    concentrations a sampled vector can underflow to exact zeros.
    """
    p = np.maximum(np.asarray(p, dtype=float), np.finfo(float).tiny)
    alpha = np.broadcast_to(np.asarray(alpha, dtype=float), p.shape)
    return float(
        np.sum((alpha - 1.0) * np.log(p))
        + special.gammaln(alpha.sum())
        - special.gammaln(alpha).sum()
    )


class CrpState:
    """Seating counts for a Chinese restaurant process."""

    def __init__(self, alpha: float, counts=()):
        if alpha <= 0.0:
            raise ValueError("concentration must be positive")
        if any(c <= 0 for c in counts):
            raise ValueError("table counts must be positive")
        self.alpha = float(alpha)
        self.counts = list(counts)

    @property
    def n(self) -> int:
        return sum(self.counts)

    @property
    def n_tables(self) -> int:
        return len(self.counts)

    def predictive(self) -> np.ndarray:
        """Probabilities of each existing table plus a new one."""
        weights = np.array(self.counts + [self.alpha], dtype=float)
        return weights / (self.n + self.alpha)

    def seat(self, table: int):
        """Seat a customer; ``table == n_tables`` opens a new table."""
        if table == len(self.counts):
            self.counts.append(1)
        else:
            self.counts[table] += 1

    def unseat(self, table: int):
        """Remove a customer, dropping the table once it empties."""
        self.counts[table] -= 1
        if self.counts[table] == 0:
            del self.counts[table]


@dataclass(frozen=True)
class Hyperparams:
    """Prior hyperparameters for the concept learner.

    ``gamma_pi`` and ``gamma_z`` are uniform, so only their existence
    matters; symmetric Dirichlet concentrations are stored as scalars.
    """

    mu0: float = 0.0
    lambda0: float = 1.0
    a0: float = 1.0
    b0: float = 1.0
    nu0: float = 0.0
    kappa0: float = 1.0
    m0: float = 3.0
    sigma0: float = 0.3
    e: float = 5.0
    alpha_r: float = 1.0
    beta_r: float = 0.1
    beta_psi: float = 0.1
    alpha_o: float = 1.0
    beta_o: float = 0.1

    def __post_init__(self):
        positive = (
            "lambda0", "a0", "b0", "kappa0", "sigma0", "e",
            "alpha_r", "beta_r", "beta_psi", "alpha_o", "beta_o",
        )
        for f in fields(self):
            v = getattr(self, f.name)
            if not math.isfinite(v):
                raise ValueError(f"{f.name} must be finite")
            if f.name in positive and v <= 0.0:
                raise ValueError(f"{f.name} must be positive, got {v}")


@dataclass
class ConceptParams:
    """One concept's directional parameters plus its word distribution."""

    nu: float
    kappa: float
    phi: np.ndarray


def draw_concept_params(h: Hyperparams, n_words: int, rng: np.random.Generator,
                        size: int = 1):
    """Draw ``size`` independent concept parameter triples from the prior.

    Returns arrays ``(nu, kappa, phi)`` with shapes ``(size,)``,
    ``(size,)`` and ``(size, n_words)``.
    """
    nu = vm_sample(VonMises(h.nu0, h.kappa0), rng, size=size)
    kappa = rng.lognormal(h.m0, h.sigma0, size=size)
    gam = rng.gamma(h.beta_r, size=(size, n_words))
    phi = gam / gam.sum(axis=1, keepdims=True)
    return nu, kappa, phi


def draw_distance_params(h: Hyperparams, rng: np.random.Generator):
    """Draw the shared distance mean and precision from the prior."""
    mu = rng.normal(h.mu0, 1.0 / math.sqrt(h.lambda0))
    lam = rng.gamma(h.a0, 1.0 / h.b0)
    return mu, lam
