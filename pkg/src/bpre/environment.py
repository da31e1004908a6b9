"""iid random environments: a fresh offspring law drawn each generation.

A finite-support environment is a list of (law, probability) atoms; the one
continuous family draws the rate of a ShiftedPoisson law log-uniformly.
The mean and variance of the per-generation log mean X = ln(mean offspring)
are exact for finite support and Monte Carlo estimates otherwise.

Moment conditions the process may satisfy (an exponential moment of X, a
sub-exponential moment, or a (2+rho)-th absolute moment) are declared by the
model author via capability tags ("A1", "A2", "A3"); they are metadata, not
mechanically verified. Bounded X -- any finite-support environment -- makes
all three true by inspection.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass

import numpy as np

from .offspring import OffspringLaw, ParameterError, ShiftedPoisson, law_from_config, law_to_config
from .rng import ROLE_MOMENTS, stream

__all__ = [
    "DegenerateEnvironmentError",
    "EnvMoments",
    "EnvironmentModel",
    "FiniteEnvironment",
    "LogUniformShiftedPoissonEnvironment",
    "environment_from_config",
    "three_atom_env",
    "two_atom_env",
]

_PROB_TOL = 1e-12


class DegenerateEnvironmentError(ValueError):
    """The environment's log mean has zero variance."""


@dataclass(frozen=True)
class EnvMoments:
    """Mean and variance of X = ln(mean offspring) per generation, in nats."""

    mu: float
    sigma2: float
    source: str  # "analytic" or "monte_carlo"
    n_draws: int | None = None
    se_mu: float | None = None

    @property
    def sigma(self) -> float:
        return math.sqrt(self.sigma2)


@dataclass(frozen=True)
class FiniteEnvironment:
    """Finite-support environment: (law, prob) atoms with probs summing to 1."""

    atoms: tuple[tuple[OffspringLaw, float], ...]
    capabilities: tuple[str, ...] = ("A1",)

    kind = "finite"

    def __post_init__(self):
        object.__setattr__(self, "atoms", tuple((law, float(p)) for law, p in self.atoms))
        object.__setattr__(self, "capabilities", tuple(self.capabilities))
        if not self.atoms:
            raise ParameterError("environment needs at least one atom")
        probs = [p for _, p in self.atoms]
        if min(probs) <= 0.0:
            raise ParameterError("atom probabilities must be positive")
        if abs(sum(probs) - 1.0) > _PROB_TOL:
            raise ParameterError(f"atom probabilities sum to {sum(probs)}, not 1")

    @property
    def probs(self) -> np.ndarray:
        return np.array([p for _, p in self.atoms])

    @property
    def laws(self) -> tuple[OffspringLaw, ...]:
        return tuple(law for law, _ in self.atoms)

    def log_means(self) -> np.ndarray:
        return np.array([law.log_mean() for law, _ in self.atoms])

    def draw_law(self, rng: np.random.Generator) -> OffspringLaw:
        idx = self.draw_indices(rng, 1)[0]
        return self.atoms[idx][0]

    def draw_indices(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Atom indices via inverse-CDF on uniforms (stable consumption: one draw each)."""
        edges = np.cumsum(self.probs)
        u = rng.random(size)
        return np.minimum(np.searchsorted(edges, u, side="right"), len(self.atoms) - 1)

    def moments(self) -> EnvMoments:
        lnm = self.log_means()
        p = self.probs
        mu = float(p @ lnm)
        sigma2 = float(p @ (lnm - mu) ** 2)
        if sigma2 <= 0.0:
            raise DegenerateEnvironmentError("all atoms share one log mean; sigma^2 = 0")
        return EnvMoments(mu=mu, sigma2=sigma2, source="analytic")

    def to_config(self) -> dict:
        return {
            "atoms": [{"law": law_to_config(law), "prob": p} for law, p in self.atoms],
            "capabilities": list(self.capabilities),
        }

    def digest(self) -> str:
        return _digest(self.to_config())


@dataclass(frozen=True)
class LogUniformShiftedPoissonEnvironment:
    """ShiftedPoisson(lam) with ln(lam) uniform on [ln lam_lo, ln lam_hi]."""

    lam_lo: float
    lam_hi: float
    capabilities: tuple[str, ...] = ("A1",)
    moment_draws: int = 1_000_000

    kind = "log_uniform_shifted_poisson"

    def __post_init__(self):
        object.__setattr__(self, "capabilities", tuple(self.capabilities))
        if not (0.0 < self.lam_lo <= self.lam_hi) or not math.isfinite(self.lam_hi):
            raise ParameterError(f"need 0 < lam_lo <= lam_hi, got ({self.lam_lo}, {self.lam_hi})")

    def draw_law(self, rng: np.random.Generator) -> ShiftedPoisson:
        return ShiftedPoisson(float(self.draw_rates(rng, 1)[0]))

    def draw_rates(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return np.exp(rng.uniform(math.log(self.lam_lo), math.log(self.lam_hi), size))

    def moments(self, rng: np.random.Generator | None = None) -> EnvMoments:
        """Monte Carlo moments of X = ln(1 + lam); deterministic default stream."""
        if self.lam_lo == self.lam_hi:
            raise DegenerateEnvironmentError("lam_lo == lam_hi; sigma^2 = 0")
        if rng is None:
            rng = stream(int(self.digest()[:15], 16), ROLE_MOMENTS)
        x = np.log1p(self.draw_rates(rng, self.moment_draws))
        mu = float(x.mean())
        sigma2 = float(x.var())
        se_mu = float(x.std(ddof=1) / math.sqrt(self.moment_draws))
        return EnvMoments(mu=mu, sigma2=sigma2, source="monte_carlo",
                          n_draws=self.moment_draws, se_mu=se_mu)

    def to_config(self) -> dict:
        return {
            "continuous": {
                "family": self.kind,
                "params": {"lam_lo": self.lam_lo, "lam_hi": self.lam_hi},
            },
            "capabilities": list(self.capabilities),
        }

    def digest(self) -> str:
        return _digest(self.to_config())


EnvironmentModel = FiniteEnvironment | LogUniformShiftedPoissonEnvironment


def _digest(cfg: dict) -> str:
    blob = json.dumps(cfg, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def environment_from_config(cfg: dict) -> EnvironmentModel:
    """Build an environment from the ``environment:`` config mapping."""
    if "environment" in cfg:
        cfg = cfg["environment"]
    caps = tuple(cfg.get("capabilities", ("A1",)))
    if "atoms" in cfg:
        atoms = tuple((law_from_config(a["law"]), a["prob"]) for a in cfg["atoms"])
        return FiniteEnvironment(atoms=atoms, capabilities=caps)
    if "continuous" in cfg:
        cont = cfg["continuous"]
        if cont.get("family") != LogUniformShiftedPoissonEnvironment.kind:
            raise ParameterError(f"unknown continuous family {cont.get('family')!r}")
        return LogUniformShiftedPoissonEnvironment(capabilities=caps, **cont.get("params", {}))
    raise ParameterError("environment config needs 'atoms' or 'continuous'")


def two_atom_env() -> FiniteEnvironment:
    """Workhorse environment: mean offspring 2 or 4 with equal probability.

    X takes the two values ln 2 and ln 4, so mu = 1.5 ln 2 and sigma = ln(2)/2.
    Bounded X means every declared moment condition holds by inspection.
    """
    from .offspring import TwoPoint

    return FiniteEnvironment(
        atoms=(
            (TwoPoint(b=3, q=0.5), 0.5),
            (ShiftedPoisson(lam=3.0), 0.5),
        ),
        capabilities=("A1", "A2", "A3"),
    )


def three_atom_env() -> FiniteEnvironment:
    """Three-atom environment whose log means share no common lattice.

    With only two atoms, X - mu lives on an arithmetic grid and the running
    sum keeps a fixed standardized spacing of 2/sqrt(n); three incommensurable
    log means break that grid, which matters when comparing distribution
    distances across restart generations.
    """
    from .offspring import TwoPoint

    return FiniteEnvironment(
        atoms=(
            (TwoPoint(b=2, q=0.9), 0.5),
            (TwoPoint(b=3, q=0.8), 0.3),
            (ShiftedPoisson(lam=2.5), 0.2),
        ),
        capabilities=("A1", "A2", "A3"),
    )
