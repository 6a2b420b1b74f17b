"""Stepsizes and epoch plans for the accelerated extragradient solvers.

Schedules are pure functions of the iteration counter and a parameter pack,
so they are freely shareable.  Every theorem setting gets its own factory:

* ``accel_schedule``: averaging weight 2/(t+1) with the noise-aware stepsize
  eta_t = t / (max((2/r) L_str, box) + sqrt((1+beta)/r) L_bil t)
  where box = sigma [T (T+1)^2]^(1/2) / (C sqrt(D0)).  The noiseless limit
  r -> 1, beta -> 0 recovers eta_t = t / (2 L_str + L_bil t).
* ``bilinear_schedule``: constant eta = 1/L_bil = sqrt(R / lam_max(B'B)).
* ``direct_schedule``: constant averaging weight alpha with eta = alpha/mu.

The four stepsize properties asserted by the certification harness live here
as :func:`lemma3_margins`:

  (i)   eta_t <= t / box,
  (ii)  t/eta_t is a nondecreasing arithmetic sequence with common
        difference sqrt((1+beta)/r) L_bil,
  (iii) L_bil eta_t <= 1,
  (iv)  r - (2 L_str/(t+1)) eta_t - (1+beta) L_bil^2 eta_t^2 >= 0.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConfigError, DegenerateProblemError, InvalidRegimeError
from .problems import RescaledConstants, SpectralBounds

__all__ = [
    "ScheduleParams",
    "Schedule",
    "combined_sigma",
    "alpha_accel",
    "eta_bar",
    "eta_bilinear",
    "alpha_bar_direct",
    "alpha_direct_optimized",
    "prefactor_A",
    "epoch_plan_strongly_convex",
    "BilinearRestartPlan",
    "epoch_plan_bilinear",
    "accel_schedule",
    "bilinear_schedule",
    "direct_schedule",
    "lemma3_margins",
]

log = logging.getLogger("ageg.schedules")

DEFAULT_R = 0.5
DEFAULT_BETA = 1.0
DEFAULT_C_EPOCH = 4.0
DEFAULT_C_FLOOR = 1.0


def combined_sigma(sigma_str: float, sigma_bil: float, r: float, beta: float) -> float:
    """Pooled noise level (1/sqrt 3) sqrt(sigma_str^2/(1-r) + (2 + 1/beta) sigma_bil^2).

    Terms with a zero budget drop out, so r = 1 (resp. beta = 0) is allowed
    exactly when the corresponding budget vanishes.
    """
    total = 0.0
    if sigma_str > 0:
        if not 0 < r < 1:
            raise ConfigError("sigma_str > 0 requires r in (0, 1)")
        total += sigma_str**2 / (1.0 - r)
    if sigma_bil > 0:
        if beta <= 0:
            raise ConfigError("sigma_bil > 0 requires beta > 0")
        total += (2.0 + 1.0 / beta) * sigma_bil**2
    return math.sqrt(total / 3.0)


@dataclass(frozen=True)
class ScheduleParams:
    """Parameter pack for one epoch of the accelerated schedule.

    D0 is the expected initial reweighted squared distance (or its upper
    estimate when the saddle is unknown); C trades the two noise terms in the
    single-epoch bound and defaults to 1, the optimal choice under exact D0.
    The defaults r = 1/2, beta = 1 are the coarse choices that suffice when
    rate constants are not a concern.
    """

    T: int
    r: float = DEFAULT_R
    beta: float = DEFAULT_BETA
    C: float = 1.0
    sigma_str: float = 0.0
    sigma_bil: float = 0.0
    D0: float = 0.0

    def __post_init__(self):
        if self.T < 1:
            raise ConfigError("epoch length T must be >= 1")
        if not 0 < self.r <= 1:
            raise ConfigError("r must lie in (0, 1]")
        if self.beta < 0:
            raise ConfigError("beta must be nonnegative")
        if self.C <= 0:
            raise ConfigError("C must be positive")
        if self.sigma_str < 0 or self.sigma_bil < 0 or self.D0 < 0:
            raise ConfigError("sigma budgets and D0 must be nonnegative")
        # validates the r / beta pairing against the budgets
        combined_sigma(self.sigma_str, self.sigma_bil, self.r, self.beta)

    @property
    def sigma(self) -> float:
        return combined_sigma(self.sigma_str, self.sigma_bil, self.r, self.beta)


def alpha_accel(t: int) -> float:
    """Averaging weight 2/(t+1); alpha_1 = 1 erases the warm-start average."""
    if t < 1:
        raise ConfigError(f"iteration index must be >= 1, got {t}")
    return 2.0 / (t + 1)


def _noise_box(p: ScheduleParams) -> float:
    sigma = p.sigma
    if sigma == 0:
        return 0.0
    if p.D0 <= 0:
        raise ConfigError("stepsize with noise needs a positive D0 estimate")
    return sigma * math.sqrt(p.T * (p.T + 1) ** 2) / (p.C * math.sqrt(p.D0))


def eta_bar(t: int, consts: RescaledConstants, p: ScheduleParams) -> float:
    """Noise-aware stepsize for iteration t of a length-T epoch."""
    if t < 1:
        raise ConfigError(f"iteration index must be >= 1, got {t}")
    base = max((2.0 / p.r) * consts.L_str, _noise_box(p))
    denom = base + math.sqrt((1.0 + p.beta) / p.r) * consts.L_bil * t
    if denom <= 0:
        raise ConfigError("degenerate schedule: L_str = L_bil = sigma = 0")
    return t / denom


def eta_bilinear(consts: RescaledConstants) -> float:
    """Constant stepsize 1/L_bil = sqrt(R/lam_max(B'B)), maximal and noise-free."""
    if consts.L_bil <= 0:
        raise DegenerateProblemError("bilinear stepsize undefined for lam_max = 0")
    return 1.0 / consts.L_bil


def alpha_bar_direct(consts: RescaledConstants, r: float = 1.0, beta: float = 0.0) -> float:
    """Admissible upper limit for the direct solver's constant averaging weight.

    alpha_bar = r / (1 + sqrt(1 + r (L_str/mu + (1+beta) L_bil^2/mu^2)))
    with the grouped constants; always lies in (0, r/2].
    """
    if consts.variant != "grouped":
        raise ConfigError("the direct stepsize limit takes grouped constants")
    if consts.mu_str <= 0:
        raise InvalidRegimeError("direct schedule needs mu > 0")
    if not 0 < r <= 1 or beta < 0:
        raise ConfigError("need r in (0, 1] and beta >= 0")
    mu = consts.mu_str
    cond = consts.L_str / mu + (1.0 + beta) * consts.L_bil**2 / mu**2
    return r / (1.0 + math.sqrt(1.0 + r * cond))


def alpha_direct_optimized(
    consts: RescaledConstants, p: ScheduleParams, D0: float
) -> float:
    """Horizon-optimized constant weight for the direct solver.

    min( (1/T) (1 + log(D0 (L_str/mu + 1) mu^2 T / (3 sigma^2))), alpha_bar )
    for sigma > 0; exactly alpha_bar when sigma = 0.  A nonpositive log
    argument (or a nonpositive candidate) clamps to the alpha_bar branch.
    """
    abar = alpha_bar_direct(consts, p.r, p.beta)
    sigma = p.sigma
    if sigma == 0:
        return abar
    mu = consts.mu_str
    arg = D0 * (consts.L_str / mu + 1.0) * mu**2 * p.T / (3.0 * sigma**2)
    if arg <= 0:
        log.warning("optimized alpha: nonpositive log argument, using alpha_bar")
        return abar
    cand = (1.0 + math.log(arg)) / p.T
    if cand <= 0:
        log.warning("optimized alpha: noise dominates the horizon, using alpha_bar")
        return abar
    return min(cand, abar)


def prefactor_A(consts: RescaledConstants, p: ScheduleParams) -> float:
    """Single-epoch bound prefactor; lies in [1, 1 + C^2], equals 1 when sigma = 0.

    Evaluated after the stepsize denominator is fixed: the 1/eta_1 it divides
    by is the eta_1 of this very schedule.
    """
    sigma = p.sigma
    if sigma == 0:
        return 1.0
    inv_eta1 = 1.0 / eta_bar(1, consts, p)
    return 1.0 + p.C * sigma * math.sqrt(p.T * (p.T + 1) ** 2) / (
        inv_eta1 * math.sqrt(p.D0)
    )


def epoch_plan_strongly_convex(
    consts: RescaledConstants,
    sigma: float,
    gamma0_sq: float,
    target_eps: float,
    c_epoch: float = DEFAULT_C_EPOCH,
) -> list[int]:
    """Restart schedule for the strongly convex regime.

    Epoch s of S = ceil(log(gamma0_sq / eps^2)) runs for
    ceil(c_epoch (sqrt(L_str/mu) + L_bil/mu + sigma^2/(mu^2 gamma0_sq e^(1-s))))
    iterations; with noise the lengths grow geometrically so each epoch still
    halves the distance bound e-fold.
    """
    if gamma0_sq <= 0 or target_eps <= 0 or c_epoch <= 0:
        raise ConfigError("need gamma0_sq, target_eps, c_epoch > 0")
    if consts.mu_str <= 0:
        raise InvalidRegimeError("restart planning needs mu > 0")
    mu = consts.mu_str
    n_epochs = max(1, math.ceil(math.log(gamma0_sq / target_eps**2)))
    base = math.sqrt(consts.L_str / mu) + consts.L_bil / mu
    plan = []
    for s in range(1, n_epochs + 1):
        noise_term = sigma**2 / (mu**2 * gamma0_sq * math.exp(1 - s))
        plan.append(max(1, math.ceil(c_epoch * (base + noise_term))))
    return plan


@dataclass(frozen=True)
class BilinearRestartPlan:
    """Constant-length restart schedule for bilinear games.

    Epochs of ``epoch_length`` repeat until either the tracked distance
    estimate reaches ``target_eps^2``, or it falls below ``stop_threshold``
    (the stationary noise level, at which point restarting stops and one
    final averaging epoch of ``final_epoch_length`` iterations runs), or
    ``max_epochs`` epochs have elapsed.
    """

    epoch_length: int
    stop_threshold: float
    final_epoch_length: int
    target_eps: float
    max_epochs: int


def epoch_plan_bilinear(
    bounds: SpectralBounds,
    sigma_bil: float,
    D0: float,
    target_eps: float,
    c_epoch: float = DEFAULT_C_EPOCH,
    c_floor: float = DEFAULT_C_FLOOR,
) -> BilinearRestartPlan:
    """Restart schedule for bilinear games: epochs of ceil(c_epoch kappa) steps.

    kappa = sqrt(lam_max(B'B)/lam_min(BB')).  With noise, restarting stops
    once the distance estimate hits c_floor sigma^2 / sqrt(lam_min lam_max)
    and a final averaging epoch of ceil(sigma^2/(lam_min eps^2)) steps runs;
    with sigma = 0 the stop rule never triggers and decay stays geometric.
    """
    if bounds.lam_min_bbt <= 0:
        raise DegenerateProblemError(
            "bilinear restart plan needs lam_min(BB') > 0 (square nonsingular B)"
        )
    if D0 <= 0 or target_eps <= 0 or c_epoch <= 0 or c_floor <= 0:
        raise ConfigError("need D0, target_eps, c_epoch, c_floor > 0")
    kappa = math.sqrt(bounds.lam_max / bounds.lam_min_bbt)
    epoch_length = max(1, math.ceil(c_epoch * kappa))
    if sigma_bil > 0:
        stop_threshold = c_floor * sigma_bil**2 / math.sqrt(
            bounds.lam_min_bbt * bounds.lam_max
        )
        final_epoch_length = max(
            1, math.ceil(sigma_bil**2 / (bounds.lam_min_bbt * target_eps**2))
        )
    else:
        stop_threshold = 0.0
        final_epoch_length = 0
    bias_epochs = max(1, math.ceil(math.log(max(D0 / target_eps**2, math.e))))
    return BilinearRestartPlan(
        epoch_length=epoch_length,
        stop_threshold=stop_threshold,
        final_epoch_length=final_epoch_length,
        target_eps=float(target_eps),
        max_epochs=4 * bias_epochs + 8,
    )


@dataclass(frozen=True)
class Schedule:
    """Per-iteration stepsizes: averaging weight alpha(t) and step eta(t)."""

    kind: str
    alpha: Callable[[int], float]
    eta: Callable[[int], float]


def accel_schedule(consts: RescaledConstants, p: ScheduleParams) -> Schedule:
    eta_bar(1, consts, p)  # fail fast on degenerate parameter packs
    return Schedule("accelerated_nesterov", alpha_accel, lambda t: eta_bar(t, consts, p))


def bilinear_schedule(consts: RescaledConstants) -> Schedule:
    eta = eta_bilinear(consts)
    return Schedule("bilinear_constant", alpha_accel, lambda t: eta)


def direct_schedule(alpha: float, mu_star: float) -> Schedule:
    if not 0 < alpha <= 1:
        raise ConfigError("alpha must lie in (0, 1]")
    if mu_star <= 0:
        raise InvalidRegimeError("direct schedule needs mu > 0")
    eta = alpha / mu_star
    return Schedule("direct_constant", lambda t: alpha, lambda t: eta)


def lemma3_margins(
    consts: RescaledConstants, p: ScheduleParams, t_max: int
) -> dict[str, float]:
    """Worst-case margins of the four stepsize properties over t = 1..t_max.

    Returns minima that must be >= 0 (properties i, iii, iv) and the largest
    relative deviation of t/eta_t from an exact arithmetic progression
    (property ii), which must vanish to roundoff.
    """
    ts = np.arange(1, t_max + 1, dtype=np.float64)
    box = _noise_box(p)
    base = max((2.0 / p.r) * consts.L_str, box)
    slope = math.sqrt((1.0 + p.beta) / p.r) * consts.L_bil
    denom = base + slope * ts
    if denom[0] <= 0:
        raise ConfigError("degenerate schedule: L_str = L_bil = sigma = 0")
    eta = ts / denom
    out: dict[str, float] = {}
    out["i_min_margin"] = (
        float(np.min(ts / box - eta)) if box > 0 else math.inf
    )
    inv = ts / eta
    if t_max >= 2:
        dev = np.abs(np.diff(inv) - slope) / np.maximum(1.0, inv[1:])
        out["ii_max_rel_dev"] = float(dev.max())
    else:
        out["ii_max_rel_dev"] = 0.0
    out["iii_min_margin"] = float(np.min(1.0 - consts.L_bil * eta))
    out["iv_min_margin"] = float(
        np.min(p.r - (2.0 * consts.L_str / (ts + 1.0)) * eta - (1.0 + p.beta) * consts.L_bil**2 * eta**2)
    )
    return out
