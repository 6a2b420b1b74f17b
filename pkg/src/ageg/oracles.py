"""Stochastic first-order oracles with reweighted variance budgets.

The oracles return unbiased gradients of F, G and the coupling H.  Gaussian
noise is additive, isotropic per block, and state-independent; the per-block
scales are chosen so that the reweighted sums

    E[||df||^2 + (1/R) ||dg||^2]  =  sigma_str^2
    E[||dh_x||^2 + (1/R) ||dh_y||^2]  =  sigma_bil^2

are met with equality (the budget splits evenly between the x block and the
R-weighted y block), which keeps variance assertions in the tests sharp.

Randomness comes from one counter-based generator per run, split into three
substreams: one for the shared per-iteration sample feeding F and G, and two
for the independent coupling samples of the extrapolation and update steps.
Reordering draws inside an iteration therefore never changes sample values.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .problems import SaddleProblem

__all__ = ["NoiseModel", "Token", "SampleDraw", "OracleBundle", "make_oracles"]


@dataclass(frozen=True)
class NoiseModel:
    """Noise configuration: 'deterministic' (exact gradients) or 'gaussian'."""

    kind: str = "deterministic"
    sigma_str: float = 0.0
    sigma_bil: float = 0.0

    def __post_init__(self):
        if self.kind not in ("deterministic", "gaussian"):
            raise ConfigError(f"unknown noise kind {self.kind!r}")
        if self.sigma_str < 0 or self.sigma_bil < 0:
            raise ConfigError("noise budgets must be nonnegative")
        if self.kind == "deterministic" and (self.sigma_str or self.sigma_bil):
            raise ConfigError("deterministic noise requires zero sigma budgets")


@dataclass(frozen=True)
class Token:
    """One sample realization: the additive perturbation per gradient block.

    ``index`` identifies the draw it came from and ``slot`` which of the
    three per-iteration samples it is, so call logs can show which calls
    shared a sample.
    """

    index: int
    slot: str  # 'xi' | 'zeta_half' | 'zeta_full'
    dx: np.ndarray
    dy: np.ndarray


@dataclass(frozen=True)
class SampleDraw:
    """One iteration's worth of tokens.

    ``xi_half`` feeds both the extrapolation and the update evaluations of
    grad f and grad g within the iteration (one shared sample); ``zeta_half``
    and ``zeta_full`` are the two independent coupling samples.
    """

    xi_half: Token
    zeta_half: Token
    zeta_full: Token


class OracleBundle:
    """Gradient oracles for one solver run, with query accounting.

    Query counting follows the joint-oracle convention: one (f, g) query per
    shared sample and one coupling query per (h_x, h_y) pair, so a solver
    iteration that draws one xi and two zeta tokens costs 3 queries.
    ``grad_f`` and ``grad_h_x`` anchor the counters; ``grad_g`` / ``grad_h_y``
    ride along.  A bundle is owned by exactly one run; concurrent runs build
    their own bundles from independent seeds.
    """

    def __init__(self, problem: SaddleProblem, noise: NoiseModel, ratio: float, seed: int):
        if ratio <= 0:
            raise ConfigError("ratio must be positive")
        self.problem = problem
        self.noise = noise
        self.R = float(ratio)
        self.seed = int(seed)
        self.sigma_str = float(noise.sigma_str)
        self.sigma_bil = float(noise.sigma_bil)
        n, m = problem.n, problem.m
        self._n, self._m = n, m
        # equal split of each budget across the x block and R-weighted y block
        self._scale_f = self.sigma_str * np.sqrt(0.5 / n)
        self._scale_g = self.sigma_str * np.sqrt(0.5 * self.R / m)
        self._scale_hx = self.sigma_bil * np.sqrt(0.5 / n)
        self._scale_hy = self.sigma_bil * np.sqrt(0.5 * self.R / m)
        root = np.random.SeedSequence(self.seed)
        self._gen = [
            np.random.Generator(np.random.Philox(child)) for child in root.spawn(3)
        ]
        self.xi_draws = 0
        self.zeta_draws = 0
        self.fg_queries = 0
        self.h_queries = 0
        self._next_index = 0
        self.log: list[tuple[str, int, str]] | None = None

    # -- sampling -----------------------------------------------------------

    def draw(self, size: int | None = None) -> SampleDraw:
        """Advance all three substreams and return fresh tokens.

        ``size`` stacks that many independent draws along a leading axis
        (used by the statistical diagnostics; solvers always draw singly).
        """
        k = 1 if size is None else int(size)
        shape_n = (self._n,) if size is None else (k, self._n)
        shape_m = (self._m,) if size is None else (k, self._m)
        noisy = self.noise.kind == "gaussian"
        parts = []
        for gen, sx, sy in (
            (self._gen[0], self._scale_f, self._scale_g),
            (self._gen[1], self._scale_hx, self._scale_hy),
            (self._gen[2], self._scale_hx, self._scale_hy),
        ):
            if noisy:
                parts.append(
                    (sx * gen.standard_normal(shape_n), sy * gen.standard_normal(shape_m))
                )
            else:
                parts.append((np.zeros(shape_n), np.zeros(shape_m)))
        idx = self._next_index
        self._next_index += k
        self.xi_draws += k
        self.zeta_draws += 2 * k
        return SampleDraw(
            xi_half=Token(idx, "xi", *parts[0]),
            zeta_half=Token(idx, "zeta_half", *parts[1]),
            zeta_full=Token(idx, "zeta_full", *parts[2]),
        )

    # -- gradients ----------------------------------------------------------

    def grad_f(self, x, xi: Token):
        self.fg_queries += 1
        self._log("f", xi)
        return self.problem.F.grad(np.asarray(x)) + xi.dx

    def grad_g(self, y, xi: Token):
        self._log("g", xi)
        return self.problem.G.grad(np.asarray(y)) + xi.dy

    def grad_h_x(self, x, y, zeta: Token):
        self.h_queries += 1
        self._log("hx", zeta)
        return self.problem.H.grad_x(np.asarray(y)) + zeta.dx

    def grad_h_y(self, x, y, zeta: Token):
        self._log("hy", zeta)
        return self.problem.H.grad_y(np.asarray(x)) + zeta.dy

    # -- accounting ---------------------------------------------------------

    @property
    def oracle_queries(self) -> int:
        """Total queries in the joint-oracle convention (3 per solver iteration)."""
        return self.fg_queries + self.h_queries

    def enable_log(self):
        self.log = []

    def _log(self, fn: str, tok: Token):
        if self.log is not None:
            self.log.append((fn, tok.index, tok.slot))


def make_oracles(
    problem: SaddleProblem, noise: NoiseModel, ratio: float, seed: int
) -> OracleBundle:
    """Construct the oracle bundle for one run; deterministic given the seed."""
    return OracleBundle(problem, noise, ratio, seed)
