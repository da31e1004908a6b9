"""Offspring-count distributions on {1, 2, ...} with closed-form z-fold sums.

Every family assigns zero mass to 0 children, so populations never shrink.
Each family also knows the exact distribution of the sum of z independent
copies of itself, which lets a whole generation be advanced with a single
draw instead of z draws.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy import stats as _stats

__all__ = [
    "CapExceededError",
    "GeometricOnOne",
    "OffspringLaw",
    "OracleInfeasibleError",
    "ParameterError",
    "ShiftedPoisson",
    "TwoPoint",
    "law_from_config",
    "sum_pmf_oracle",
]


class ParameterError(ValueError):
    """A distribution parameter is outside its domain."""


class CapExceededError(RuntimeError):
    """The closed-form sum sampler cannot safely handle this population size."""


class OracleInfeasibleError(RuntimeError):
    """The brute-force convolution cannot reach its truncation target."""


# Keep the sum's mean (plus any realistic tail) comfortably inside int64.
_SUM_LIMIT = 2**62

# Truncation target for the convolution oracle; far below all test tolerances.
_ORACLE_TAIL = 1e-12
_ORACLE_MAX_SUPPORT = 100_000


def _check_count(k: int) -> int:
    k = int(k)
    if k < 1:
        raise ParameterError(f"support starts at 1, got k={k}")
    return k


def _check_population(z) -> None:
    if np.min(z) < 1:
        raise ParameterError(f"population must be >= 1, got {np.min(z)}")


@dataclass(frozen=True)
class ShiftedPoisson:
    """1 + Poisson(lam) children per individual; lam=0 is the degenerate single-child law."""

    lam: float

    family = "shifted_poisson"

    def __post_init__(self):
        if not (self.lam >= 0.0 and math.isfinite(self.lam)):
            raise ParameterError(f"lam must be >= 0 and finite, got {self.lam}")

    def mean(self) -> float:
        return 1.0 + self.lam

    def variance(self) -> float:
        return self.lam

    def log_mean(self) -> float:
        return math.log1p(self.lam)

    def pmf(self, k: int) -> float:
        k = _check_count(k)
        return float(_stats.poisson.pmf(k - 1, self.lam))

    def max_exact_population(self) -> int:
        # Keep the sum's mean z*(1+lam) below _SUM_LIMIT; the Poisson tail
        # cannot realistically double a mean this large.
        return max(1, int(_SUM_LIMIT / (1.0 + self.lam)))

    def sample_sum(self, z, rng: np.random.Generator):
        """Sum of z iid copies: z + Poisson(z*lam)."""
        _check_population(z)
        if np.max(z) > self.max_exact_population():
            raise CapExceededError(f"z={np.max(z)} overflows Poisson sampler for lam={self.lam}")
        draw = rng.poisson(np.multiply(z, self.lam))
        return z + draw

    def sum_pmf(self, z: int, k: int) -> float:
        if k < z:
            return 0.0
        return float(_stats.poisson.pmf(k - z, z * self.lam))

    def params(self) -> dict:
        return {"lam": self.lam}


@dataclass(frozen=True)
class GeometricOnOne:
    """Geometric on {1, 2, ...} with success probability p; mean 1/p."""

    p: float

    family = "geometric_on_one"

    def __post_init__(self):
        if not (0.0 < self.p <= 1.0):
            raise ParameterError(f"p must be in (0, 1], got {self.p}")

    def mean(self) -> float:
        return 1.0 / self.p

    def variance(self) -> float:
        return (1.0 - self.p) / self.p**2

    def log_mean(self) -> float:
        return -math.log(self.p)

    def pmf(self, k: int) -> float:
        k = _check_count(k)
        return self.p * (1.0 - self.p) ** (k - 1)

    def max_exact_population(self) -> int:
        # Sum's mean is z/p.
        return max(1, int(_SUM_LIMIT * self.p))

    def sample_sum(self, z, rng: np.random.Generator):
        """Sum of z iid copies: z + NegativeBinomial(z, p) failures."""
        _check_population(z)
        if np.max(z) > self.max_exact_population():
            raise CapExceededError(f"z={np.max(z)} overflows NegativeBinomial sampler for p={self.p}")
        draw = rng.negative_binomial(z, self.p)
        return z + draw

    def sum_pmf(self, z: int, k: int) -> float:
        if k < z:
            return 0.0
        return float(_stats.nbinom.pmf(k - z, z, self.p))

    def params(self) -> dict:
        return {"p": self.p}


@dataclass(frozen=True)
class TwoPoint:
    """Either 1 or b children, with P(b) = q; mean 1 + (b-1)q."""

    b: int
    q: float

    family = "two_point"

    def __post_init__(self):
        if int(self.b) != self.b or self.b < 2:
            raise ParameterError(f"b must be an integer >= 2, got {self.b}")
        object.__setattr__(self, "b", int(self.b))
        if not (0.0 <= self.q <= 1.0):
            raise ParameterError(f"q must be in [0, 1], got {self.q}")

    def mean(self) -> float:
        return 1.0 + (self.b - 1) * self.q

    def variance(self) -> float:
        return (self.b - 1) ** 2 * self.q * (1.0 - self.q)

    def log_mean(self) -> float:
        return math.log(self.mean())

    def pmf(self, k: int) -> float:
        k = _check_count(k)
        if k == 1:
            return 1.0 - self.q
        if k == self.b:
            return self.q
        return 0.0

    def max_exact_population(self) -> int:
        # Worst case every individual has b children.
        return max(1, _SUM_LIMIT // self.b)

    def sample_sum(self, z, rng: np.random.Generator):
        """Sum of z iid copies: z + (b-1) * Binomial(z, q)."""
        _check_population(z)
        if np.max(z) > self.max_exact_population():
            raise CapExceededError(f"z={np.max(z)} overflows Binomial sampler for b={self.b}")
        draw = rng.binomial(z, self.q)
        return z + (self.b - 1) * draw

    def sum_pmf(self, z: int, k: int) -> float:
        if k < z:
            return 0.0
        j, r = divmod(k - z, self.b - 1)
        if r != 0:
            return 0.0
        return float(_stats.binom.pmf(j, z, self.q))

    def params(self) -> dict:
        return {"b": self.b, "q": self.q}


OffspringLaw = ShiftedPoisson | GeometricOnOne | TwoPoint

_FAMILIES = {cls.family: cls for cls in (ShiftedPoisson, GeometricOnOne, TwoPoint)}


def law_from_config(cfg: dict) -> OffspringLaw:
    """Build a law from ``{"family": ..., "params": {...}}``."""
    try:
        cls = _FAMILIES[cfg["family"]]
    except KeyError:
        raise ParameterError(f"unknown offspring family {cfg.get('family')!r}") from None
    return cls(**cfg.get("params", {}))


def law_to_config(law: OffspringLaw) -> dict:
    return {"family": law.family, "params": law.params()}


@functools.lru_cache(maxsize=128)
def _single_pmf_vector(law: OffspringLaw) -> np.ndarray:
    """pmf on k = 1..K with total mass within _ORACLE_TAIL of 1."""
    if isinstance(law, TwoPoint):
        out = np.zeros(law.b)
        out[0] = 1.0 - law.q
        out[law.b - 1] = law.q
        return out
    size = 64
    while size <= _ORACLE_MAX_SUPPORT:
        counts = np.arange(1, size + 1)
        if isinstance(law, ShiftedPoisson):
            vec = _stats.poisson.pmf(counts - 1, law.lam)
        else:
            vec = law.p * (1.0 - law.p) ** (counts - 1)
        if 1.0 - vec.sum() < _ORACLE_TAIL:
            return vec
        size *= 2
    raise OracleInfeasibleError(
        f"cannot truncate {law} to tail mass < {_ORACLE_TAIL} within {_ORACLE_MAX_SUPPORT} points"
    )


@functools.lru_cache(maxsize=256)
def _convolved_pmf(law: OffspringLaw, z: int) -> np.ndarray:
    vec = _single_pmf_vector(law)
    out = vec
    for _ in range(z - 1):
        out = np.convolve(out, vec)
    return out


def sum_pmf_oracle(law: OffspringLaw, z: int, k: int) -> float:
    """Brute-force z-fold convolution pmf of the sum, for validating closed forms.

    Only intended for z <= 8; the closed-form ``law.sum_pmf`` is the production path.
    """
    z = int(z)
    if not 1 <= z <= 8:
        raise ParameterError(f"oracle supports z in [1, 8], got {z}")
    table = _convolved_pmf(law, z)
    idx = int(k) - z
    if idx < 0 or idx >= len(table):
        return 0.0
    return float(table[idx])
