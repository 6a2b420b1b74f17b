"""Problem representation for bilinearly-coupled convex-concave saddle problems.

A problem instance is

    min_x max_y  F(x) + H(x, y) - G(y),

with quadratic F, G and coupling H(x, y) = x'By - x'u_x + u_y'y.  Restricting
F and G to quadratics keeps the exact saddle computable by one linear solve,
which is what every certification in :mod:`ageg.verify` leans on.  The solvers
themselves only ever see gradient oracles, so nothing downstream depends on
the quadratic structure.

All values in this module are immutable after construction and safe to share
across concurrent runs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ConfigError, InvalidRegimeError, NoUniqueSaddleError

__all__ = [
    "QuadraticFn",
    "BilinearCoupling",
    "SaddleProblem",
    "SaddlePoint",
    "RescaledConstants",
    "SpectralBounds",
    "spectral_bounds",
    "rescale",
    "exact_saddle",
    "weighted_sq_distance",
    "rescale_problem",
    "resolve_ratio",
    "problem_to_json",
    "problem_from_json",
]

SYMMETRY_RTOL = 1e-12
SADDLE_RESIDUAL_RTOL = 1e-9
SPECTRUM_RTOL = 1e-9


def _frozen_array(x, ndim):
    arr = np.array(x, dtype=np.float64)
    if arr.ndim != ndim:
        raise ConfigError(f"expected a {ndim}-d array, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class QuadraticFn:
    """q(z) = 1/2 z'Mz - v'z + c with symmetric M."""

    M: np.ndarray
    v: np.ndarray
    c: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "M", _frozen_array(self.M, 2))
        object.__setattr__(self, "v", _frozen_array(self.v, 1))
        object.__setattr__(self, "c", float(self.c))
        n = self.M.shape[0]
        if self.M.shape != (n, n):
            raise ConfigError(f"M must be square, got {self.M.shape}")
        if self.v.shape != (n,):
            raise ConfigError(f"v has shape {self.v.shape}, expected ({n},)")
        scale = max(1.0, float(np.abs(self.M).max()))
        if np.abs(self.M - self.M.T).max() > SYMMETRY_RTOL * scale:
            raise ConfigError("M is not symmetric to within 1e-12 relative")

    @classmethod
    def zero(cls, dim: int) -> "QuadraticFn":
        return cls(np.zeros((dim, dim)), np.zeros(dim), 0.0)

    @property
    def dim(self) -> int:
        return self.M.shape[0]

    @property
    def is_zero(self) -> bool:
        return not (self.M.any() or self.v.any() or self.c != 0.0)

    def value(self, z) -> float:
        z = np.asarray(z, dtype=np.float64)
        return float(0.5 * z @ self.M @ z - self.v @ z + self.c)

    def grad(self, z):
        return self.M @ z - self.v

    def value_diff(self, z, ref) -> float:
        """q(z) - q(ref), evaluated as <grad(ref), d> + 1/2 d'Md with d = z - ref.

        Exact for quadratics and numerically stable: no cancellation between
        two large function values.
        """
        d = np.asarray(z, dtype=np.float64) - np.asarray(ref, dtype=np.float64)
        return float(self.grad(ref) @ d + 0.5 * d @ self.M @ d)


@dataclass(frozen=True)
class BilinearCoupling:
    """H(x, y) = x'By - x'u_x + u_y'y with a tall coupling matrix (n >= m).

    Wide matrices are rejected here; :meth:`SaddleProblem.make` symmetrizes
    the whole problem (swapping the player roles) before reaching this point
    and records the swap so results map back.
    """

    B: np.ndarray
    u_x: np.ndarray
    u_y: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "B", _frozen_array(self.B, 2))
        object.__setattr__(self, "u_x", _frozen_array(self.u_x, 1))
        object.__setattr__(self, "u_y", _frozen_array(self.u_y, 1))
        n, m = self.B.shape
        if n < m:
            raise ConfigError(
                f"coupling matrix is wide ({n}x{m}); build the problem through "
                "SaddleProblem.make, which symmetrizes and records the swap"
            )
        if self.u_x.shape != (n,) or self.u_y.shape != (m,):
            raise ConfigError("u_x / u_y dimensions do not match B")

    @property
    def n(self) -> int:
        return self.B.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]

    def value(self, x, y) -> float:
        return float(x @ self.B @ y - x @ self.u_x + self.u_y @ y)

    def grad_x(self, y):
        return self.B @ y - self.u_x

    def grad_y(self, x):
        return self.B.T @ x + self.u_y


@dataclass(frozen=True)
class SaddlePoint:
    x_star: np.ndarray
    y_star: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x_star", _frozen_array(self.x_star, 1))
        object.__setattr__(self, "y_star", _frozen_array(self.y_star, 1))


@dataclass(frozen=True)
class RescaledConstants:
    """Smoothness/curvature constants after reweighting the y block.

    variant 'standard' keeps the plain split; variant 'grouped' moves the
    isotropic mu-part of F and G into the coupling term, which is what the
    direct solver iterates on.
    """

    L_str: float
    L_bil: float
    mu_str: float
    R: float
    variant: str = "standard"

    def __post_init__(self):
        if self.variant not in ("standard", "grouped"):
            raise ConfigError(f"unknown rescaling variant {self.variant!r}")
        if min(self.L_str, self.L_bil, self.mu_str) < 0 or self.R <= 0:
            raise ConfigError("rescaled constants must be nonnegative with R > 0")


@dataclass(frozen=True)
class SaddleProblem:
    """A bilinearly-coupled saddle problem with declared curvature constants.

    Two admissible regimes:

    * strongly convex-concave: mu_F > 0 and mu_G > 0;
    * pure bilinear: F and G identically zero, square nonsingular B.

    Declared constants must bracket the actual spectra of F.M and G.M; a
    mismatch is a construction error, never a warning, because every
    certification downstream depends on honest constants.
    """

    F: QuadraticFn
    G: QuadraticFn
    H: BilinearCoupling
    L_F: float
    mu_F: float
    L_G: float
    mu_G: float
    swapped: bool = False

    def __post_init__(self):
        for name in ("L_F", "mu_F", "L_G", "mu_G"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if self.F.dim != self.H.n or self.G.dim != self.H.m:
            raise ConfigError("F/G dimensions do not match the coupling")
        if min(self.L_F, self.mu_F, self.L_G, self.mu_G) < 0:
            raise ConfigError("curvature constants must be nonnegative")
        if self.mu_F > self.L_F or self.mu_G > self.L_G:
            raise ConfigError("mu must not exceed L")
        self._check_regime()
        self._check_spectrum(self.F, self.mu_F, self.L_F, "F")
        self._check_spectrum(self.G, self.mu_G, self.L_G, "G")

    def _check_regime(self):
        if self.mu_F > 0 and self.mu_G > 0:
            return
        if not (self.F.is_zero and self.G.is_zero):
            raise InvalidRegimeError(
                "without strong convexity on both sides, F and G must be zero"
            )
        if self.n != self.m:
            raise InvalidRegimeError("pure bilinear problems need a square B")
        sv = np.linalg.svd(self.H.B, compute_uv=False)
        if sv.size == 0 or sv.min() <= 1e-12 * max(sv.max(), 1.0):
            raise InvalidRegimeError("pure bilinear problems need nonsingular B")

    @staticmethod
    def _check_spectrum(q: QuadraticFn, mu: float, L: float, label: str):
        ev = np.linalg.eigvalsh(np.asarray(q.M))
        tol = SPECTRUM_RTOL * max(1.0, L)
        if ev.min() < mu - tol or ev.max() > L + tol:
            raise ConfigError(
                f"declared constants for {label} do not bracket its spectrum: "
                f"eigenvalues in [{ev.min():.6g}, {ev.max():.6g}], "
                f"declared [{mu:.6g}, {L:.6g}]"
            )

    @classmethod
    def make(cls, F, G, B, u_x, u_y, L_F, mu_F, L_G, mu_G) -> "SaddleProblem":
        """Build a problem, symmetrizing min/max roles when B is wide.

        For a wide B the equivalent problem min_y max_x -objective is stored
        instead (F and G trade places, the coupling becomes -B'), and
        ``swapped`` records the exchange so :meth:`map_back` can restore the
        original variable order.
        """
        B = np.asarray(B, dtype=np.float64)
        if B.shape[0] >= B.shape[1]:
            return cls(F, G, BilinearCoupling(B, u_x, u_y), L_F, mu_F, L_G, mu_G)
        H_swapped = BilinearCoupling(-B.T, u_y, u_x)
        return cls(G, F, H_swapped, L_G, mu_G, L_F, mu_F, swapped=True)

    @property
    def n(self) -> int:
        return self.H.n

    @property
    def m(self) -> int:
        return self.H.m

    @property
    def is_bilinear(self) -> bool:
        return self.mu_F == 0 and self.mu_G == 0

    def map_back(self, x, y):
        """Restore a (x, y) pair to the variable order of the original input."""
        return (y, x) if self.swapped else (x, y)

    def objective(self, x, y) -> float:
        return self.F.value(x) + self.H.value(x, y) - self.G.value(y)


class SpectralBounds(NamedTuple):
    lam_max: float  # lam_max(B'B) = lam_max(BB')
    lam_min_bbt: float  # lam_min(BB'); exactly 0 when B is strictly tall
    lam_min_btb: float  # lam_min(B'B)


def spectral_bounds(B) -> SpectralBounds:
    """Extreme eigenvalues of B'B and BB' via dense symmetric eigensolves.

    Desk-scale only (dimensions up to a few hundred); no iterative methods.
    """
    B = np.asarray(B, dtype=np.float64)
    if B.size == 0:
        raise ConfigError("coupling matrix is empty")
    n, m = B.shape
    ev_btb = np.linalg.eigvalsh(B.T @ B)
    lam_max = float(max(ev_btb.max(), 0.0))
    lam_min_btb = float(max(ev_btb.min(), 0.0))
    if n > m:
        lam_min_bbt = 0.0  # BB' is rank-deficient by shape
    elif n < m:
        lam_min_bbt = float(max(np.linalg.eigvalsh(B @ B.T).min(), 0.0))
    else:
        lam_min_bbt = lam_min_btb
    return SpectralBounds(lam_max, lam_min_bbt, lam_min_btb)


def resolve_ratio(problem: SaddleProblem, override: float | None = None) -> float:
    """Curvature ratio mu_G/mu_F, or the caller's choice for bilinear games.

    For pure bilinear problems the ratio is a free parameter (a 0/0 form);
    the default is 1.0 and any positive override is honored.
    """
    if override is not None:
        if override <= 0:
            raise ConfigError("ratio override must be positive")
        return float(override)
    if problem.is_bilinear:
        return 1.0
    return problem.mu_G / problem.mu_F


def rescale(
    problem: SaddleProblem,
    variant: str = "standard",
    ratio: float | None = None,
) -> RescaledConstants:
    """Reduce the declared constants to the reweighted-metric parameters.

    standard:  L_str = max(L_F, (mu_F/mu_G) L_G),
               L_bil = sqrt(lam_max(B'B) mu_F/mu_G),
               mu_str = mu_F.
    grouped:   L_str loses the isotropic mu_F part and L_bil absorbs it:
               L_str = max(L_F, (mu_F/mu_G) L_G) - mu_F,
               L_bil = sqrt(lam_max(B'B) mu_F/mu_G + mu_F^2),
               mu_star = mu_F.

    Pure bilinear problems only support the standard variant, take the ratio
    from the caller (default 1.0), and get L_str = mu_str = 0 with
    L_bil = sqrt(lam_max/R).
    """
    lam_max = spectral_bounds(problem.H.B).lam_max
    if problem.is_bilinear:
        if variant == "grouped":
            raise InvalidRegimeError("grouped rescaling needs strong convexity")
        R = resolve_ratio(problem, ratio)
        return RescaledConstants(0.0, float(np.sqrt(lam_max / R)), 0.0, R, "standard")
    if problem.mu_F <= 0 or problem.mu_G <= 0:
        raise InvalidRegimeError("rescaling needs mu_F > 0 and mu_G > 0")
    R = resolve_ratio(problem, ratio)
    inv = problem.mu_F / problem.mu_G
    L_str = max(problem.L_F, inv * problem.L_G)
    if variant == "standard":
        return RescaledConstants(
            L_str, float(np.sqrt(lam_max * inv)), problem.mu_F, R, "standard"
        )
    return RescaledConstants(
        L_str - problem.mu_F,
        float(np.sqrt(lam_max * inv + problem.mu_F**2)),
        problem.mu_F,
        R,
        "grouped",
    )


def exact_saddle(problem: SaddleProblem) -> SaddlePoint:
    """Unique saddle point from the first-order stationarity system.

    Solves the block-linear system

        [ M_F   B  ] [x*]   [ v_x + u_x ]
        [ B'   -M_G] [y*] = [ -v_y - u_y ]

    which for the pure bilinear case reduces to x* = -(B')^{-1} u_y,
    y* = B^{-1} u_x.
    """
    n = problem.n
    K = np.block(
        [
            [np.asarray(problem.F.M), np.asarray(problem.H.B)],
            [np.asarray(problem.H.B).T, -np.asarray(problem.G.M)],
        ]
    )
    rhs = np.concatenate([problem.F.v + problem.H.u_x, -problem.G.v - problem.H.u_y])
    try:
        z = np.linalg.solve(K, rhs)
    except np.linalg.LinAlgError as exc:
        raise NoUniqueSaddleError("stationarity system is singular") from exc
    resid = np.linalg.norm(K @ z - rhs)
    scale = max(np.linalg.norm(rhs), np.linalg.norm(z), 1.0)
    if not np.isfinite(z).all() or resid > SADDLE_RESIDUAL_RTOL * scale:
        raise NoUniqueSaddleError(
            f"stationarity residual {resid:.3g} exceeds tolerance (near-singular system)"
        )
    return SaddlePoint(z[:n], z[n:])


def weighted_sq_distance(x, y, saddle: SaddlePoint, ratio: float) -> float:
    """||x - x*||^2 + R ||y - y*||^2, the convergence metric used throughout."""
    if ratio <= 0:
        raise ConfigError("ratio must be positive")
    dx = np.asarray(x, dtype=np.float64) - saddle.x_star
    dy = np.asarray(y, dtype=np.float64) - saddle.y_star
    return float(dx @ dx + ratio * (dy @ dy))


def rescale_problem(problem: SaddleProblem) -> tuple[SaddleProblem, float]:
    """Reparametrize y by y_map = sqrt(mu_G/mu_F) to equalize strong convexity.

    Returns the transformed problem (whose mu_G equals mu_F) and the map, so
    that objective values agree under y -> y_map * y, and the saddle of the
    transformed problem sits at y_map times the original saddle's y block.
    """
    if problem.mu_F <= 0 or problem.mu_G <= 0:
        raise InvalidRegimeError("scaling reduction needs mu_F > 0 and mu_G > 0")
    y_map = float(np.sqrt(problem.mu_G / problem.mu_F))
    s = 1.0 / y_map
    G_hat = QuadraticFn(s * s * np.asarray(problem.G.M), s * problem.G.v, problem.G.c)
    H_hat = BilinearCoupling(
        s * np.asarray(problem.H.B), problem.H.u_x, s * problem.H.u_y
    )
    return (
        SaddleProblem(
            problem.F,
            G_hat,
            H_hat,
            problem.L_F,
            problem.mu_F,
            s * s * problem.L_G,
            problem.mu_F,
            swapped=problem.swapped,
        ),
        y_map,
    )


def problem_to_json(problem: SaddleProblem) -> str:
    """Serialize to the canonical JSON schema (row-major nested float arrays)."""
    doc = {
        "n": problem.n,
        "m": problem.m,
        "F": {"M": problem.F.M.tolist(), "v": problem.F.v.tolist(), "c": problem.F.c},
        "G": {"M": problem.G.M.tolist(), "v": problem.G.v.tolist(), "c": problem.G.c},
        "B": problem.H.B.tolist(),
        "u_x": problem.H.u_x.tolist(),
        "u_y": problem.H.u_y.tolist(),
        "L_F": problem.L_F,
        "mu_F": problem.mu_F,
        "L_G": problem.L_G,
        "mu_G": problem.mu_G,
    }
    return json.dumps(doc, sort_keys=True)


def problem_from_json(text: str) -> SaddleProblem:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"problem JSON is malformed: {exc}") from exc
    try:
        F = QuadraticFn(doc["F"]["M"], doc["F"]["v"], doc["F"].get("c", 0.0))
        G = QuadraticFn(doc["G"]["M"], doc["G"]["v"], doc["G"].get("c", 0.0))
        problem = SaddleProblem.make(
            F, G, doc["B"], doc["u_x"], doc["u_y"],
            doc["L_F"], doc["mu_F"], doc["L_G"], doc["mu_G"],
        )
    except KeyError as exc:
        raise ConfigError(f"problem JSON is missing key {exc}") from exc
    if (doc["n"], doc["m"]) not in ((problem.n, problem.m), (problem.m, problem.n)):
        raise ConfigError("problem JSON n/m fields disagree with array shapes")
    return problem
