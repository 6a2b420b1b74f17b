"""Iteration engines: accelerated extragradient descent-ascent and baselines.

The main engine interleaves three sequences per player: the iterate, a
half-shift running average, and an extrapolation point.  One iteration of
:func:`ageg_epoch` performs, with stepsizes (alpha_t, eta_t) and ratio R:

    draw one shared sample xi and two independent coupling samples
    x_half = x - eta_t (grad f(x_md; xi) + grad_x h(x, y; zeta_half))
    y_half = y - eta_t/R (-grad_y h(x, y; zeta_half) + grad g(y_md; xi))
    x_avg  = (1 - alpha_t) x_avg + alpha_t x_half        (same for y)
    x      = x - eta_t (grad f(x_md; xi) + grad_x h(x_half, y_half; zeta_full))
    y      = y - eta_t/R (-grad_y h(x_half, y_half; zeta_full) + grad g(y_md; xi))
    x_md   = (1 - alpha_{t+1}) x_avg + alpha_{t+1} x     (same for y)

and the epoch's output is the averaged pair (x_avg, y_avg).  grad f and
grad g are evaluated once per iteration (at the extrapolation points, with
the shared sample) and reused by both update lines.

:func:`ageg_direct` runs the same skeleton on the regrouped objective, which
adds the correction terms -mu_F (x_md - x) / -mu_G (y_md - y) to the half
step and -mu_F (x_md - x_half) / -mu_G (y_md - y_half) to the full step, and
returns the last iterate instead of the average.

A solver run is single-threaded and owns its iterate state and oracle
bundle; run many instances concurrently by giving each its own bundle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .errors import ConfigError, DivergedError, ScheduleViolationError
from .oracles import OracleBundle
from .problems import (
    SaddleProblem,
    exact_saddle,
    rescale,
    weighted_sq_distance,
)
from .schedules import BilinearRestartPlan, Schedule, alpha_bar_direct

__all__ = [
    "IterateState",
    "TraceRecord",
    "RunTrace",
    "SolverOutput",
    "TRACE_CSV_HEADER",
    "ageg_epoch",
    "ageg_restarted",
    "ageg_direct",
    "baseline_eg",
    "baseline_gda",
]

TRACE_CSV_HEADER = "epoch,t,oracle_calls,weighted_sq_dist,bound_rhs"


@dataclass
class IterateState:
    """The six live vectors of one accelerated extragradient epoch."""

    x: np.ndarray
    y: np.ndarray
    x_avg: np.ndarray
    y_avg: np.ndarray
    x_md: np.ndarray
    y_md: np.ndarray
    t: int = 0

    @classmethod
    def at(cls, x0, y0) -> "IterateState":
        x0 = np.array(x0, dtype=np.float64)
        y0 = np.array(y0, dtype=np.float64)
        return cls(x0.copy(), y0.copy(), x0.copy(), y0.copy(), x0.copy(), y0.copy())


class TraceRecord(NamedTuple):
    epoch: int
    t: int
    oracle_calls: int
    weighted_sq_dist: float
    bound_rhs: float | None


def _fmt(x: float) -> str:
    return "%.17g" % x


@dataclass
class RunTrace:
    """Per-iteration metric records plus run metadata, serializable to CSV."""

    seed: int | None = None
    config: dict = field(default_factory=dict)
    records: list[TraceRecord] = field(default_factory=list)
    final_point: tuple[np.ndarray, np.ndarray] | None = None

    def add(self, epoch, t, oracle_calls, dist, bound):
        if self.records and oracle_calls < self.records[-1].oracle_calls:
            raise ConfigError("oracle call counter went backwards")
        self.records.append(TraceRecord(epoch, t, oracle_calls, dist, bound))

    def write_csv(self, fh):
        fh.write(TRACE_CSV_HEADER + "\n")
        for rec in self.records:
            bound = "" if rec.bound_rhs is None else _fmt(rec.bound_rhs)
            fh.write(
                f"{rec.epoch},{rec.t},{rec.oracle_calls},"
                f"{_fmt(rec.weighted_sq_dist)},{bound}\n"
            )


@dataclass
class SolverOutput:
    """Final point, its output convention, and the full run trace."""

    point: tuple[np.ndarray, np.ndarray]
    trace: RunTrace
    convention: str  # 'half_shift_average' | 'last_iterate'


def _check_finite(x, y, trace, seed, where):
    if not (np.isfinite(x).all() and np.isfinite(y).all()):
        raise DivergedError(f"iterates diverged at {where}", trace=trace, seed=seed)


def _record(trace, record, epoch, t, oracles, metric, bound_fn, px, py, is_last):
    if record == "none" or (record == "final" and not is_last):
        return
    dist = metric(px, py) if metric is not None else math.nan
    bound = bound_fn(t) if bound_fn is not None else None
    trace.add(epoch, t, oracles.oracle_queries, dist, bound)


def ageg_epoch(
    start,
    T: int,
    schedule: Schedule,
    oracles: OracleBundle,
    ratio: float,
    *,
    metric: Callable | None = None,
    bound_fn: Callable | None = None,
    record: str = "full",
    trace: RunTrace | None = None,
    epoch_index: int = 1,
) -> SolverOutput:
    """One epoch of accelerated extragradient descent-ascent.

    ``start`` is an (x0, y0) pair; all six state vectors begin there.  The
    trace records the reweighted squared distance of the averaged pair (the
    point the epoch would output if stopped at t), via ``metric`` when given.
    """
    if T < 1:
        raise ConfigError("epoch length T must be >= 1")
    if schedule.kind not in ("accelerated_nesterov", "bilinear_constant"):
        raise ConfigError(f"unsupported schedule kind {schedule.kind!r} for this solver")
    if ratio <= 0:
        raise ConfigError("ratio must be positive")
    st = IterateState.at(*start)
    if st.x.shape[0] != oracles.problem.n or st.y.shape[0] != oracles.problem.m:
        raise ConfigError("start point dimensions do not match the problem")
    tr = trace if trace is not None else RunTrace(seed=oracles.seed)
    for t in range(1, T + 1):
        tok = oracles.draw()
        a_t = schedule.alpha(t)
        eta = schedule.eta(t)
        gf = oracles.grad_f(st.x_md, tok.xi_half)
        gg = oracles.grad_g(st.y_md, tok.xi_half)
        x_half = st.x - eta * (gf + oracles.grad_h_x(st.x, st.y, tok.zeta_half))
        y_half = st.y - (eta / ratio) * (
            -oracles.grad_h_y(st.x, st.y, tok.zeta_half) + gg
        )
        st.x_avg = (1.0 - a_t) * st.x_avg + a_t * x_half
        st.y_avg = (1.0 - a_t) * st.y_avg + a_t * y_half
        st.x = st.x - eta * (gf + oracles.grad_h_x(x_half, y_half, tok.zeta_full))
        st.y = st.y - (eta / ratio) * (
            -oracles.grad_h_y(x_half, y_half, tok.zeta_full) + gg
        )
        a_next = schedule.alpha(t + 1)
        st.x_md = (1.0 - a_next) * st.x_avg + a_next * st.x
        st.y_md = (1.0 - a_next) * st.y_avg + a_next * st.y
        st.t = t
        _check_finite(st.x, st.y, tr, oracles.seed, f"epoch {epoch_index}, t={t}")
        _record(
            tr, record, epoch_index, t, oracles, metric, bound_fn,
            st.x_avg, st.y_avg, t == T,
        )
    out = (st.x_avg.copy(), st.y_avg.copy())
    tr.final_point = out
    return SolverOutput(out, tr, "half_shift_average")


def ageg_restarted(
    problem: SaddleProblem,
    plan,
    schedule_factory: Callable[[int, int, float], Schedule],
    oracles: OracleBundle,
    ratio: float,
    *,
    start=None,
    d0_mode: str = "exact",
    gamma0_sq: float | None = None,
    record: str = "full",
) -> SolverOutput:
    """Scheduled restarting: each epoch warm-starts from the previous average.

    ``plan`` is either a list of epoch lengths (strongly convex regime) or a
    :class:`BilinearRestartPlan`.  ``schedule_factory(s, T_s, D0_s)`` builds
    epoch s's schedule from its length and distance estimate.

    D0 per epoch: in 'exact' mode the true reweighted distance at the epoch
    start (the saddle is computed once); in 'estimate' mode the carried bound
    gamma0_sq e^(1-s), which is also what the bilinear stop rule tracks
    (decayed e-fold per epoch, floored at the stationary level).
    """
    if d0_mode not in ("exact", "estimate"):
        raise ConfigError(f"unknown d0_mode {d0_mode!r}")
    if d0_mode == "estimate" and (gamma0_sq is None or gamma0_sq <= 0):
        raise ConfigError("estimate mode needs a positive gamma0_sq")
    if start is None:
        start = (np.zeros(problem.n), np.zeros(problem.m))
    metric = None
    if d0_mode == "exact":
        saddle = exact_saddle(problem)
        metric = lambda x, y: weighted_sq_distance(x, y, saddle, ratio)
    trace = RunTrace(seed=oracles.seed)
    current = (np.array(start[0], dtype=np.float64), np.array(start[1], dtype=np.float64))
    est = gamma0_sq if gamma0_sq is not None else math.nan

    if isinstance(plan, BilinearRestartPlan):
        s = 0
        while s < plan.max_epochs:
            s += 1
            d0 = metric(*current) if d0_mode == "exact" else est
            schedule = schedule_factory(s, plan.epoch_length, d0)
            out = ageg_epoch(
                current, plan.epoch_length, schedule, oracles, ratio,
                metric=metric, record=record, trace=trace, epoch_index=s,
            )
            current = out.point
            if d0_mode == "exact":
                est = metric(*current)
            else:
                est = max(est / math.e, plan.stop_threshold)
            if est <= plan.target_eps**2:
                break
            if plan.stop_threshold > 0 and est <= plan.stop_threshold:
                schedule = schedule_factory(s + 1, plan.final_epoch_length, est)
                out = ageg_epoch(
                    current, plan.final_epoch_length, schedule, oracles, ratio,
                    metric=metric, record=record, trace=trace, epoch_index=s + 1,
                )
                current = out.point
                break
        trace.final_point = current
        return SolverOutput(current, trace, "half_shift_average")

    epoch_lengths = list(plan)
    if not epoch_lengths:
        raise ConfigError("empty epoch plan")
    for s, T_s in enumerate(epoch_lengths, start=1):
        if d0_mode == "exact":
            d0 = metric(*current)
        else:
            d0 = gamma0_sq * math.exp(1 - s)
        schedule = schedule_factory(s, T_s, d0)
        out = ageg_epoch(
            current, T_s, schedule, oracles, ratio,
            metric=metric, record=record, trace=trace, epoch_index=s,
        )
        current = out.point
    trace.final_point = current
    return SolverOutput(current, trace, "half_shift_average")


def ageg_direct(
    problem: SaddleProblem,
    T: int,
    alpha: float,
    oracles: OracleBundle,
    ratio: float,
    *,
    r: float = 1.0,
    beta: float = 0.0,
    start=None,
    metric: Callable | None = None,
    bound_fn: Callable | None = None,
    record: str = "full",
) -> SolverOutput:
    """Direct variant for strongly convex problems: last-iterate output.

    Runs the regrouped iteration with constant averaging weight ``alpha``
    (validated against the admissible limit for the given r, beta) and step
    eta = alpha/mu_F.  The trace records the distance of the last iterate
    pair, matching the output convention.
    """
    if T < 1:
        raise ConfigError("T must be >= 1")
    if problem.mu_F <= 0 or problem.mu_G <= 0:
        raise ConfigError("the direct solver needs strong convexity on both sides")
    consts = rescale(problem, "grouped")
    abar = alpha_bar_direct(consts, r, beta)
    if not 0 < alpha <= abar * (1 + 1e-12):
        raise ScheduleViolationError(
            f"alpha = {alpha:.6g} outside (0, {abar:.6g}] for r={r}, beta={beta}"
        )
    mu_f, mu_g = problem.mu_F, problem.mu_G
    eta = alpha / consts.mu_str
    if start is None:
        start = (np.zeros(problem.n), np.zeros(problem.m))
    st = IterateState.at(*start)
    tr = RunTrace(seed=oracles.seed)
    for t in range(1, T + 1):
        tok = oracles.draw()
        gf = oracles.grad_f(st.x_md, tok.xi_half)
        gg = oracles.grad_g(st.y_md, tok.xi_half)
        x_half = st.x - eta * (
            gf + oracles.grad_h_x(st.x, st.y, tok.zeta_half) - mu_f * (st.x_md - st.x)
        )
        y_half = st.y - (eta / ratio) * (
            -oracles.grad_h_y(st.x, st.y, tok.zeta_half)
            + gg
            - mu_g * (st.y_md - st.y)
        )
        st.x_avg = (1.0 - alpha) * st.x_avg + alpha * x_half
        st.y_avg = (1.0 - alpha) * st.y_avg + alpha * y_half
        st.x = st.x - eta * (
            gf
            + oracles.grad_h_x(x_half, y_half, tok.zeta_full)
            - mu_f * (st.x_md - x_half)
        )
        st.y = st.y - (eta / ratio) * (
            -oracles.grad_h_y(x_half, y_half, tok.zeta_full)
            + gg
            - mu_g * (st.y_md - y_half)
        )
        st.x_md = (1.0 - alpha) * st.x_avg + alpha * st.x
        st.y_md = (1.0 - alpha) * st.y_avg + alpha * st.y
        st.t = t
        _check_finite(st.x, st.y, tr, oracles.seed, f"direct t={t}")
        _record(tr, record, 1, t, oracles, metric, bound_fn, st.x, st.y, t == T)
    out = (st.x.copy(), st.y.copy())
    tr.final_point = out
    return SolverOutput(out, tr, "last_iterate")


def baseline_eg(
    problem: SaddleProblem,
    T: int,
    eta: float,
    oracles: OracleBundle,
    ratio: float,
    *,
    start=None,
    metric: Callable | None = None,
    record: str = "full",
    target_sq: float | None = None,
) -> SolverOutput:
    """Plain two-call extragradient on the full vector field; last iterate.

    The shared per-iteration sample feeds both f/g evaluations, and the two
    coupling samples feed the extrapolation and update steps, mirroring the
    main solver's per-iteration sample budget.  With ``metric`` and
    ``target_sq`` given, the loop stops at the first iterate whose reweighted
    squared distance reaches the target.
    """
    if T < 1:
        raise ConfigError("T must be >= 1")
    if eta <= 0:
        raise ConfigError("eta must be positive")
    if target_sq is not None and metric is None:
        raise ConfigError("early stopping needs a metric")
    if start is None:
        start = (np.zeros(problem.n), np.zeros(problem.m))
    x = np.array(start[0], dtype=np.float64)
    y = np.array(start[1], dtype=np.float64)
    tr = RunTrace(seed=oracles.seed)
    for t in range(1, T + 1):
        tok = oracles.draw()
        x_half = x - eta * (
            oracles.grad_f(x, tok.xi_half) + oracles.grad_h_x(x, y, tok.zeta_half)
        )
        y_half = y - (eta / ratio) * (
            -oracles.grad_h_y(x, y, tok.zeta_half) + oracles.grad_g(y, tok.xi_half)
        )
        x = x - eta * (
            oracles.grad_f(x_half, tok.xi_half)
            + oracles.grad_h_x(x_half, y_half, tok.zeta_full)
        )
        y = y - (eta / ratio) * (
            -oracles.grad_h_y(x_half, y_half, tok.zeta_full)
            + oracles.grad_g(y_half, tok.xi_half)
        )
        _check_finite(x, y, tr, oracles.seed, f"eg t={t}")
        done = t == T
        if target_sq is not None and metric(x, y) <= target_sq:
            done = True
        _record(tr, record, 1, t, oracles, metric, None, x, y, done)
        if done:
            break
    tr.final_point = (x.copy(), y.copy())
    return SolverOutput((x, y), tr, "last_iterate")


def baseline_gda(
    problem: SaddleProblem,
    T: int,
    eta: float,
    oracles: OracleBundle,
    ratio: float,
    *,
    start=None,
    metric: Callable | None = None,
    record: str = "full",
) -> SolverOutput:
    """Simultaneous gradient descent-ascent; diverges on pure bilinear games."""
    if T < 1:
        raise ConfigError("T must be >= 1")
    if eta <= 0:
        raise ConfigError("eta must be positive")
    if start is None:
        start = (np.zeros(problem.n), np.zeros(problem.m))
    x = np.array(start[0], dtype=np.float64)
    y = np.array(start[1], dtype=np.float64)
    tr = RunTrace(seed=oracles.seed)
    for t in range(1, T + 1):
        tok = oracles.draw()
        gx = oracles.grad_f(x, tok.xi_half) + oracles.grad_h_x(x, y, tok.zeta_half)
        gy = -oracles.grad_h_y(x, y, tok.zeta_half) + oracles.grad_g(y, tok.xi_half)
        x = x - eta * gx
        y = y - (eta / ratio) * gy
        _check_finite(x, y, tr, oracles.seed, f"gda t={t}")
        _record(tr, record, 1, t, oracles, metric, None, x, y, t == T)
    tr.final_point = (x.copy(), y.copy())
    return SolverOutput((x, y), tr, "last_iterate")
