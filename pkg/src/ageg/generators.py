"""Reproducible problem-instance factories.

Spectra are built by explicit eigenvalue/singular-value placement (log-spaced
between the requested endpoints, attained exactly) on random orthogonal
bases, so condition numbers come out exact rather than approximate; the rate
experiments sweep conditioning and need it controlled.  Everything is a pure
function of its arguments and the seed.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, InvalidRegimeError
from .problems import BilinearCoupling, QuadraticFn, SaddleProblem

__all__ = [
    "MdpTuples",
    "GeneratorSpec",
    "gen_bilinear",
    "gen_quadratic",
    "gen_mspbe",
    "gen_ridge_erm",
    "synth_chain_mdp",
    "load_tuples_csv",
    "make_problem",
]


def _rng(seed):
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def _orthogonal(rng, d):
    Q, R = np.linalg.qr(rng.standard_normal((d, d)))
    return Q * np.sign(np.diag(R))  # sign-fixed so the factorization is unique


def _spd_with_spectrum(rng, d, lo, hi):
    """Random symmetric matrix with log-spaced eigenvalues on [lo, hi]."""
    if d == 1:
        ev = np.array([hi])
    else:
        ev = np.geomspace(lo, hi, d) if lo > 0 else np.linspace(lo, hi, d)
    Q = _orthogonal(rng, d)
    M = (Q * ev) @ Q.T
    return (M + M.T) / 2.0


@dataclass(frozen=True)
class GeneratorSpec:
    """Declarative recipe for one instance; resolved by :func:`make_problem`."""

    kind: str  # bilinear | quadratic | mspbe | ridge_erm
    seed: int = 0
    n: int = 5
    m: int = 5
    kappa: float = 10.0
    L_F: float = 10.0
    mu_F: float = 1.0
    L_G: float = 10.0
    mu_G: float = 1.0
    b_max: float = 1.0
    gamma: float = 0.9
    rho: float = 1.0
    n_states: int = 8
    n_tuples: int = 200
    n_samples: int = 5
    ridge: float = 1.0

    def __post_init__(self):
        if self.kind not in ("bilinear", "quadratic", "mspbe", "ridge_erm"):
            raise ConfigError(f"unknown generator kind {self.kind!r}")
        if self.kappa < 1:
            raise ConfigError("condition targets need kappa >= 1")


def gen_bilinear(n: int, kappa: float, seed: int) -> SaddleProblem:
    """Square nonsingular bilinear game with exact condition number kappa.

    Singular values are log-spaced on [1/kappa, 1], so
    sqrt(lam_max(B'B)/lam_min(BB')) = kappa exactly.  The linear terms are
    chosen so the saddle point has unit norm per block, which pins the
    initial distance from the origin at 1 + R for any ratio R.
    """
    if n < 1:
        raise ConfigError("n must be >= 1")
    if kappa < 1:
        raise ConfigError("kappa must be >= 1")
    if n == 1 and kappa != 1:
        raise ConfigError("a 1x1 coupling can only realize kappa = 1")
    rng = _rng(seed)
    sv = np.geomspace(1.0 / kappa, 1.0, n) if n > 1 else np.array([1.0])
    B = (_orthogonal(rng, n) * sv) @ _orthogonal(rng, n).T
    x_star = rng.standard_normal(n)
    x_star /= np.linalg.norm(x_star)
    y_star = rng.standard_normal(n)
    y_star /= np.linalg.norm(y_star)
    u_x = B @ y_star
    u_y = -B.T @ x_star
    return SaddleProblem(
        QuadraticFn.zero(n),
        QuadraticFn.zero(n),
        BilinearCoupling(B, u_x, u_y),
        0.0,
        0.0,
        0.0,
        0.0,
    )


def gen_quadratic(
    n: int,
    m: int,
    L_F: float,
    mu_F: float,
    L_G: float,
    mu_G: float,
    b_max: float,
    seed: int,
) -> SaddleProblem:
    """Strongly convex-concave quadratic game with exact declared constants.

    The quadratic blocks attain both spectrum endpoints; the coupling's
    spectral norm equals b_max (singular values log-spaced on [b_max/2,
    b_max]).
    """
    if not (0 < mu_F <= L_F and 0 < mu_G <= L_G):
        raise ConfigError("need 0 < mu <= L on both sides")
    if b_max < 0:
        raise ConfigError("b_max must be nonnegative")
    if (n == 1 and L_F != mu_F) or (m == 1 and L_G != mu_G):
        raise ConfigError("a 1-d block cannot attain two distinct spectrum endpoints")
    rng = _rng(seed)
    M_F = _spd_with_spectrum(rng, n, mu_F, L_F)
    M_G = _spd_with_spectrum(rng, m, mu_G, L_G)
    k = min(n, m)
    if b_max > 0:
        sv = np.geomspace(b_max / 2.0, b_max, k) if k > 1 else np.array([b_max])
        B = (_orthogonal(rng, n)[:, :k] * sv) @ _orthogonal(rng, m)[:, :k].T
    else:
        B = np.zeros((n, m))
    v_x = rng.standard_normal(n)
    v_y = rng.standard_normal(m)
    return SaddleProblem.make(
        QuadraticFn(M_F, v_x),
        QuadraticFn(M_G, v_y),
        B,
        np.zeros(n),
        np.zeros(m),
        L_F,
        mu_F,
        L_G,
        mu_G,
    )


@dataclass(frozen=True)
class MdpTuples:
    """Transition samples for policy evaluation with linear features.

    Rows of ``phi`` / ``phi_next`` are the feature vectors of the visited and
    successor states; ``actions`` is an optional per-sample tag that the
    reduction itself never consumes.
    """

    phi: np.ndarray
    rewards: np.ndarray
    phi_next: np.ndarray
    gamma: float
    rho: float
    actions: np.ndarray | None = None

    def __post_init__(self):
        phi = np.asarray(self.phi, dtype=np.float64)
        phi_next = np.asarray(self.phi_next, dtype=np.float64)
        rewards = np.asarray(self.rewards, dtype=np.float64)
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "phi_next", phi_next)
        object.__setattr__(self, "rewards", rewards)
        if phi.ndim != 2 or phi.shape[0] < 1:
            raise ConfigError("need at least one tuple with 2-d features")
        if phi_next.shape != phi.shape or rewards.shape != (phi.shape[0],):
            raise ConfigError("tuple arrays have inconsistent shapes")
        if not 0 <= self.gamma < 1:
            raise ConfigError("discount gamma must lie in [0, 1)")
        if self.rho <= 0:
            raise ConfigError("ridge rho must be positive")


def gen_mspbe(tuples: MdpTuples) -> SaddleProblem:
    """Projected-Bellman-error minimization as a saddle problem.

    With A = mean phi (phi - gamma phi')' , b = mean r phi and feature
    second moment C = mean phi phi', the value-estimation objective becomes

        min_theta max_w  rho/2 ||theta||^2 - w'A theta - 1/2 ||w||_C^2 + w'b,

    i.e. F = rho/2 ||.||^2, G = 1/2 w'Cw, coupling B = -A', u_x = 0, u_y = b.
    C must be positive definite for the max player to be strongly concave.
    """
    phi, phi_next, r = tuples.phi, tuples.phi_next, tuples.rewards
    n = phi.shape[0]
    A = phi.T @ (phi - tuples.gamma * phi_next) / n
    b = phi.T @ r / n
    C = phi.T @ phi / n
    C = (C + C.T) / 2.0
    ev = np.linalg.eigvalsh(C)
    if ev.min() <= 0:
        raise InvalidRegimeError(
            "feature second-moment matrix is singular; the reduction needs it "
            "positive definite"
        )
    d = phi.shape[1]
    F = QuadraticFn(tuples.rho * np.eye(d), np.zeros(d))
    G = QuadraticFn(C, np.zeros(d))
    return SaddleProblem.make(
        F,
        G,
        -A.T,
        np.zeros(d),
        b,
        tuples.rho,
        tuples.rho,
        float(ev.max()),
        float(ev.min()),
    )


def synth_chain_mdp(
    n_states: int, d: int, n_tuples: int, gamma: float, rho: float, seed: int
) -> MdpTuples:
    """Sample transitions from a small random chain with random features."""
    if n_states < 2 or d < 1 or n_tuples < 1:
        raise ConfigError("need n_states >= 2, d >= 1, n_tuples >= 1")
    rng = _rng(seed)
    features = rng.standard_normal((n_states, d))
    # random walk biased to the right, wrapping at the ends
    states = np.empty(n_tuples + 1, dtype=np.int64)
    states[0] = 0
    steps = rng.choice([-1, 1], size=n_tuples, p=[0.4, 0.6])
    for i in range(n_tuples):
        states[i + 1] = (states[i] + steps[i]) % n_states
    rewards = rng.standard_normal(n_tuples) + 0.1 * states[:-1]
    return MdpTuples(
        phi=features[states[:-1]],
        rewards=rewards,
        phi_next=features[states[1:]],
        gamma=gamma,
        rho=rho,
        actions=steps,
    )


def load_tuples_csv(path, gamma: float, rho: float) -> MdpTuples:
    """Read tuples from CSV with columns phi_s_0..phi_s_{d-1},reward,phi_sp_0..phi_sp_{d-1}."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ConfigError("tuple CSV is empty")
        names = [h.strip() for h in header]
        d = sum(1 for h in names if h.startswith("phi_s_"))
        expected = [f"phi_s_{i}" for i in range(d)] + ["reward"] + [
            f"phi_sp_{i}" for i in range(d)
        ]
        if d == 0 or names != expected:
            raise ConfigError(f"tuple CSV header must be {','.join(expected) if d else 'phi_s_*,reward,phi_sp_*'}")
        rows = [[float(v) for v in row] for row in reader if row]
    if not rows:
        raise ConfigError("tuple CSV has no data rows")
    data = np.asarray(rows, dtype=np.float64)
    return MdpTuples(
        phi=data[:, :d],
        rewards=data[:, d],
        phi_next=data[:, d + 1 :],
        gamma=gamma,
        rho=rho,
    )


def gen_ridge_erm(n_samples: int, d: int, ridge: float, seed: int) -> SaddleProblem:
    """Ridge regression in saddle form through the squared-loss dual.

    The primal 1/(2 n) ||A x - b||^2 + ridge/2 ||x||^2 becomes

        min_x max_y  ridge/2 ||x||^2 + 1/n x'A'y - 1/n (1/2 ||y||^2 + b'y),

    whose saddle's x block equals the primal ridge solution.  When the dual
    dimension exceeds d the stored problem is the symmetrized one; use
    map_back to recover the original ordering.
    """
    if n_samples < 1 or d < 1:
        raise ConfigError("need n_samples >= 1 and d >= 1")
    if ridge <= 0:
        raise ConfigError("ridge must be positive")
    rng = _rng(seed)
    A = rng.standard_normal((n_samples, d))
    b = rng.standard_normal(n_samples)
    F = QuadraticFn(ridge * np.eye(d), np.zeros(d))
    G = QuadraticFn(np.eye(n_samples) / n_samples, -b / n_samples)
    return SaddleProblem.make(
        F,
        G,
        A.T / n_samples,
        np.zeros(d),
        np.zeros(n_samples),
        ridge,
        ridge,
        1.0 / n_samples,
        1.0 / n_samples,
    )


def make_problem(spec: GeneratorSpec) -> SaddleProblem:
    """Resolve a generator spec into a problem instance."""
    if spec.kind == "bilinear":
        return gen_bilinear(spec.n, spec.kappa, spec.seed)
    if spec.kind == "quadratic":
        return gen_quadratic(
            spec.n, spec.m, spec.L_F, spec.mu_F, spec.L_G, spec.mu_G, spec.b_max, spec.seed
        )
    if spec.kind == "mspbe":
        tuples = synth_chain_mdp(
            spec.n_states, spec.n, spec.n_tuples, spec.gamma, spec.rho, spec.seed
        )
        return gen_mspbe(tuples)
    return gen_ridge_erm(spec.n_samples, spec.n, spec.ridge, spec.seed)
