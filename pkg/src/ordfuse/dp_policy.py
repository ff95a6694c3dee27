"""Belief-grid backward induction for the sequential fusion policy.

Solves the finite-horizon optimal-stopping problem over the posterior
probability that the channel is free. Stage k's continuation expectation
integrates the next stage's value against the rank-(k+1) marginal mixture,
the reduced-complexity recursion that drops conditioning on the previous
report. The exact conditional recursion is kept alongside for validation.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .bs_thresholds import DecisionOutcome, _ordered_values
from .numerics import panels_from_edges
from .order_stats import SensorEnsemble, conditional_pdf, ranked_pdf
from .sensing_model import Hypothesis, ScenarioConfig

_TIE_TOL = 1e-11  # stop-vs-continue ties within quadrature noise resolve to continuing


class SolverError(RuntimeError):
    """Backward induction could not certify its quadrature."""


class PosteriorUndefined(ValueError):
    """Belief update at a point where the predictive density vanishes."""


class CostMode(enum.Enum):
    ERROR_MIN = "error-min"
    WEIGHTED_THROUGHPUT = "weighted-throughput"


class Action(enum.IntEnum):
    DECLARE_H0 = 0
    DECLARE_H1 = 1
    CONTINUE = 2


@dataclass(frozen=True)
class CostModel:
    """Stage decision costs: either 0/1 error counting or the throughput ledger.

    Throughput terms are rates weighted by omega (primary) and 1 - omega
    (secondary); transmission costs, collision penalty and lost-opportunity
    costs are expressed in the same rate units. `c` is the cost of soliciting
    one more report.
    """

    mode: CostMode
    omega: float = 0.5
    R_p: float = 1.0
    R_s: float = 1.0
    eta_p: float = 1.0
    eta_s: float = 1.0
    delta_p: float = 0.0
    delta_s: float = 0.0
    e_pt: float = 0.0
    e_st: float = 0.0
    P_col: float = 0.0
    L_f: float = 0.0
    L_b: float = 0.0
    c: float = 0.0

    def __post_init__(self):
        for name in ("omega", "eta_p", "eta_s", "delta_p", "delta_s"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        for name in ("R_p", "R_s", "e_pt", "e_st", "P_col", "L_f", "L_b", "c"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValueError(f"{name} must be finite")
        if self.c < 0:
            raise ValueError("continuation cost c must be >= 0")

    @classmethod
    def error_min(cls, c: float = 0.0001) -> "CostModel":
        return cls(mode=CostMode.ERROR_MIN, c=c)

    @classmethod
    def throughput(cls, omega: float = 0.5, c: float = 0.0001, **kwargs) -> "CostModel":
        return cls(mode=CostMode.WEIGHTED_THROUGHPUT, omega=omega, c=c, **kwargs)


def decision_cost(
    k: int, decided: Hypothesis, truth: Hypothesis, cost_model: CostModel, config: ScenarioConfig
) -> float:
    """Cost of declaring `decided` at stage k when `truth` holds."""
    if not 1 <= k <= config.K:
        raise ValueError("stage k must satisfy 1 <= k <= K")
    if cost_model.mode is CostMode.ERROR_MIN:
        return 0.0 if decided == truth else 1.0
    cm = cost_model
    remaining = (config.tau_s - config.tau_N - k * config.tau) / config.tau_s
    if decided == Hypothesis.H0:
        if truth == Hypothesis.H0:
            return (-(1.0 - cm.omega) * cm.R_s * cm.eta_s + cm.e_st) * remaining
        return (
            -cm.omega * cm.R_p * cm.delta_p
            - (1.0 - cm.omega) * cm.R_s * cm.delta_s * remaining
            + cm.e_pt
            + cm.e_st * remaining
            + cm.P_col
        )
    if truth == Hypothesis.H0:
        return cm.L_f
    return -cm.omega * cm.R_p * cm.eta_p + cm.e_pt + cm.L_b


@dataclass
class PolicyTable:
    """Per-stage value function, grid actions and extracted belief thresholds.

    Beliefs are the posterior probability the channel is free, so the
    declare-busy region sits below pi_low and declare-free above pi_high.
    """

    grid: np.ndarray
    values: np.ndarray  # (K, G)
    actions: np.ndarray  # (K, G)
    pi_low: np.ndarray  # (K,)
    pi_high: np.ndarray  # (K,)
    cost_model: CostModel
    k_max: int
    tau_s: float
    tau_N: float
    tau: float
    kind: str = "two-threshold"
    diagnostics: dict = field(default_factory=dict)

    def sensing_time(self, stage: int) -> float:
        return self.tau_N + stage * self.tau

    def save(self, path) -> None:
        payload = {
            "format": "ordfuse-policy",
            "version": 1,
            "kind": self.kind,
            "k_max": self.k_max,
            "timing": [self.tau_s, self.tau_N, self.tau],
            "grid": self.grid.tolist(),
            "values": self.values.tolist(),
            "actions": self.actions.astype(int).tolist(),
            "pi_low": self.pi_low.tolist(),
            "pi_high": self.pi_high.tolist(),
            "cost_model": {
                "mode": self.cost_model.mode.value,
                **{
                    name: getattr(self.cost_model, name)
                    for name in (
                        "omega", "R_p", "R_s", "eta_p", "eta_s", "delta_p", "delta_s",
                        "e_pt", "e_st", "P_col", "L_f", "L_b", "c",
                    )
                },
            },
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh)

    @classmethod
    def load(cls, path) -> "PolicyTable":
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
        if payload.get("format") != "ordfuse-policy" or payload.get("version") != 1:
            raise ValueError("not a recognized policy file")
        cm = dict(payload["cost_model"])
        cost_model = CostModel(mode=CostMode(cm.pop("mode")), **cm)
        tau_s, tau_n, tau = payload["timing"]
        return cls(
            grid=np.asarray(payload["grid"], dtype=float),
            values=np.asarray(payload["values"], dtype=float),
            actions=np.asarray(payload["actions"], dtype=np.int8),
            pi_low=np.asarray(payload["pi_low"], dtype=float),
            pi_high=np.asarray(payload["pi_high"], dtype=float),
            cost_model=cost_model,
            k_max=int(payload["k_max"]),
            tau_s=float(tau_s),
            tau_N=float(tau_n),
            tau=float(tau),
            kind=payload["kind"],
        )


def accumulated_llr_equivalent(pi_threshold: float, pi0: float) -> float:
    """Running-LLR-sum value whose plain Bayes posterior from prior pi0 equals
    the belief threshold; +-inf at the degenerate ends."""
    if pi_threshold <= 0.0:
        return math.inf
    if pi_threshold >= 1.0:
        return -math.inf
    return math.log(pi0 / (1.0 - pi0)) + math.log((1.0 - pi_threshold) / pi_threshold)


def posterior_update(pi_k: float, y: float, k: int, ensemble: SensorEnsemble) -> float:
    """Belief update with the rank-(k+1) marginal densities (k reports absorbed)."""
    rank = k + 1
    f0 = float(ranked_pdf(rank, y, Hypothesis.H0, ensemble))
    f1 = float(ranked_pdf(rank, y, Hypothesis.H1, ensemble))
    den = pi_k * f0 + (1.0 - pi_k) * f1
    if den <= 0.0:
        raise PosteriorUndefined(f"predictive density vanishes at rank {rank}, y={y}")
    return pi_k * f0 / den


def posterior_update_exact(
    pi_k: float, y_prev: float | None, y: float, k: int, ensemble: SensorEnsemble
) -> float:
    """Belief update with the exact conditional rank densities.

    k indexes the incoming observation (1-based); the first stage has nothing
    to condition on and reduces to the marginal update.
    """
    if k == 1:
        return posterior_update(pi_k, y, 0, ensemble)
    if y_prev is None:
        raise ValueError("conditioning value required for k >= 2")
    f0 = conditional_pdf(k, y, y_prev, Hypothesis.H0, ensemble)
    f1 = conditional_pdf(k, y, y_prev, Hypothesis.H1, ensemble)
    den = pi_k * f0 + (1.0 - pi_k) * f1
    if den <= 0.0:
        raise PosteriorUndefined(f"conditional predictive density vanishes at stage {k}")
    return pi_k * f0 / den


def _quadrature_edges(ensemble: SensorEnsemble, per_segment: int) -> np.ndarray:
    """Panel edges over the ensemble's effective support.

    Panels never straddle the laws' breakpoints (zero, where the magnitude
    ordering kinks the densities, and the support reflections at +-shift),
    and the left edge gets geometric refinement for the integrable endpoint
    singularity of low-dof chi-square laws.
    """
    ranges = [law.effective_range(1e-12) for law in ensemble.laws]
    lo = min(r[0] for r in ranges)
    hi = max(r[1] for r in ranges)
    mid = min(max(law.effective_range(1e-6)[1] for law in ensemble.laws), hi)
    breakpoints = {0.0, mid}
    for law in ensemble.laws:
        breakpoints.update((-law.shift, law.shift))
    pts = [lo] + sorted(p for p in breakpoints if lo < p < hi) + [hi]
    pieces = []
    for i, (p, q) in enumerate(zip(pts[:-1], pts[1:])):
        if i == 0:
            width = q - p
            pieces.append(p + width * 0.5 ** np.arange(40, 0, -1))
            pieces.append(np.linspace(p + 0.5 * width, q, per_segment))
        elif q >= mid:
            pieces.append(p + (q - p) * np.expm1(np.linspace(0.0, 1.0, per_segment) * math.log(8.0)) / 7.0)
        else:
            pieces.append(np.linspace(p, q, per_segment))
    return np.unique(np.concatenate([[lo], *pieces, [hi]]))


def _quadrature_rank_densities(config: ScenarioConfig, ensemble: SensorEnsemble):
    """Nodes, weights and normalized rank densities for ranks 1..K.

    Node masses are forced to one per (rank, hypothesis); a mass off by more
    than the tolerance even after panel doubling raises SolverError.
    """
    for per_segment in (24, 48):
        nodes, weights = panels_from_edges(_quadrature_edges(ensemble, per_segment), order=16)
        f0 = np.stack([
            np.asarray(ranked_pdf(r, nodes, Hypothesis.H0, ensemble), dtype=float)
            for r in range(1, config.K + 1)
        ])
        f1 = np.stack([
            np.asarray(ranked_pdf(r, nodes, Hypothesis.H1, ensemble), dtype=float)
            for r in range(1, config.K + 1)
        ])
        mass0 = f0 @ weights
        mass1 = f1 @ weights
        err = max(np.abs(mass0 - 1.0).max(), np.abs(mass1 - 1.0).max())
        if err <= 1e-6:
            return nodes, weights, f0 / mass0[:, None], f1 / mass1[:, None], err
    raise SolverError(
        "rank-density quadrature did not converge: "
        f"node masses H0={mass0.tolist()}, H1={mass1.tolist()}"
    )


def _stage_stop_costs(k: int, grid: np.ndarray, cost_model: CostModel, config: ScenarioConfig):
    l00 = decision_cost(k, Hypothesis.H0, Hypothesis.H0, cost_model, config)
    l01 = decision_cost(k, Hypothesis.H0, Hypothesis.H1, cost_model, config)
    l10 = decision_cost(k, Hypothesis.H1, Hypothesis.H0, cost_model, config)
    l11 = decision_cost(k, Hypothesis.H1, Hypothesis.H1, cost_model, config)
    stop0 = l00 * grid + l01 * (1.0 - grid)
    stop1 = l10 * grid + l11 * (1.0 - grid)
    return stop0, stop1


def _continuation(grid, j_next, f0, f1, weights):
    mix = grid[:, None] * f0[None, :] + (1.0 - grid)[:, None] * f1[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        post = grid[:, None] * f0[None, :] / mix
    post = np.where(mix > 0.0, post, grid[:, None])
    j_interp = np.interp(post.ravel(), grid, j_next).reshape(post.shape)
    return (mix * j_interp) @ weights


def _belief_grid(grid_size: int, log_odds_span: float = 16.0) -> np.ndarray:
    """Belief grid with log-odds spacing plus exact endpoints.

    The optimal stop thresholds sit within O(c) of certainty, far inside the
    first uniform cell of any practical grid; spacing the points evenly in
    log-odds resolves those neighborhoods while keeping the grid small.
    """
    z = np.linspace(-log_odds_span, log_odds_span, grid_size - 2)
    interior = 1.0 / (1.0 + np.exp(-z))
    return np.concatenate([[0.0], interior, [1.0]])


def _extract_thresholds(actions_row: np.ndarray, grid: np.ndarray) -> tuple[float, float]:
    h1_idx = np.flatnonzero(actions_row == Action.DECLARE_H1)
    h0_idx = np.flatnonzero(actions_row == Action.DECLARE_H0)
    pi_low = float(grid[h1_idx[-1]]) if h1_idx.size else 0.0
    pi_high = float(grid[h0_idx[0]]) if h0_idx.size else 1.0
    return pi_low, pi_high


def _solve(
    config: ScenarioConfig,
    cost_model: CostModel,
    ensemble: SensorEnsemble,
    grid_size: int,
    one_threshold: bool,
) -> PolicyTable:
    if grid_size < 101:
        raise ValueError("grid_size must be >= 101")
    if ensemble.m != config.M:
        raise ValueError("ensemble size must match the configured sensor count")
    k_max = config.K
    grid = _belief_grid(grid_size)
    nodes, weights, f0, f1, quad_err = _quadrature_rank_densities(config, ensemble)

    values = np.zeros((k_max, grid_size))
    actions = np.zeros((k_max, grid_size), dtype=np.int8)
    pi_low = np.zeros(k_max)
    pi_high = np.zeros(k_max)

    stop0, stop1 = _stage_stop_costs(k_max, grid, cost_model, config)
    values[-1] = np.minimum(stop0, stop1)
    actions[-1] = np.where(stop0 <= stop1, Action.DECLARE_H0, Action.DECLARE_H1)
    pi_low[-1], pi_high[-1] = _extract_thresholds(actions[-1], grid)

    for k in range(k_max - 1, 0, -1):
        stop0, stop1 = _stage_stop_costs(k, grid, cost_model, config)
        cont = cost_model.c + _continuation(grid, values[k], f0[k], f1[k], weights)
        if one_threshold:
            stop_best = stop0
            act_stop = np.full(grid_size, Action.DECLARE_H0, dtype=np.int8)
        else:
            stop_best = np.minimum(stop0, stop1)
            act_stop = np.where(stop0 <= stop1, Action.DECLARE_H0, Action.DECLARE_H1)
        values[k - 1] = np.minimum(stop_best, cont)
        # stopping must win strictly: where continuing merely ties (the
        # zero-cost regimes), one more report is never worse than stopping
        actions[k - 1] = np.where(stop_best < cont - _TIE_TOL, act_stop, Action.CONTINUE)
        pi_low[k - 1], pi_high[k - 1] = _extract_thresholds(actions[k - 1], grid)

    return PolicyTable(
        grid=grid,
        values=values,
        actions=actions,
        pi_low=pi_low,
        pi_high=pi_high,
        cost_model=cost_model,
        k_max=k_max,
        tau_s=config.tau_s,
        tau_N=config.tau_N,
        tau=config.tau,
        kind="one-threshold" if one_threshold else "two-threshold",
        diagnostics={"quadrature_mass_error": quad_err, "nodes": len(nodes)},
    )


def solve_backward(
    config: ScenarioConfig,
    cost_model: CostModel,
    ensemble: SensorEnsemble,
    grid_size: int = 1001,
) -> PolicyTable:
    """Two-threshold backward induction over the belief grid."""
    return _solve(config, cost_model, ensemble, grid_size, one_threshold=False)


def solve_one_threshold(
    config: ScenarioConfig,
    cost_model: CostModel,
    ensemble: SensorEnsemble,
    grid_size: int = 1001,
) -> PolicyTable:
    """Throughput special case: before the last stage the only stop is declare-free.

    Requires the pure-throughput cost model (c = 0 and every auxiliary cost
    zero); anything else is a contract violation.
    """
    cm = cost_model
    if cm.mode is not CostMode.WEIGHTED_THROUGHPUT or cm.c != 0.0 or any(
        getattr(cm, name) != 0.0 for name in ("e_pt", "e_st", "P_col", "L_f", "L_b")
    ):
        raise ValueError("one-threshold solve requires c = 0 and zero auxiliary costs")
    return _solve(config, cost_model, ensemble, grid_size, one_threshold=True)


def run_policy(ordered, policy: PolicyTable, ensemble: SensorEnsemble, pi0: float):
    """Walk one slot's ordered reports through the solved policy."""
    values = _ordered_values(ordered)
    if values.size < policy.k_max:
        raise ValueError(f"need at least K={policy.k_max} ordered values")
    pi = float(pi0)
    for k in range(1, policy.k_max + 1):
        pi = posterior_update(pi, float(values[k - 1]), k - 1, ensemble)
        if k == policy.k_max:
            declared = Hypothesis.H0 if pi >= policy.pi_high[k - 1] else Hypothesis.H1
            return DecisionOutcome(declared, k, policy.sensing_time(k))
        if pi >= policy.pi_high[k - 1]:
            return DecisionOutcome(Hypothesis.H0, k, policy.sensing_time(k))
        if pi <= policy.pi_low[k - 1]:
            return DecisionOutcome(Hypothesis.H1, k, policy.sensing_time(k))
    raise AssertionError("unreachable")


def run_policy_batch(
    ordered_values: np.ndarray, policy: PolicyTable, ensemble: SensorEnsemble, pi0: float
):
    """Vectorized policy execution over slots.

    Returns (declared, stage) arrays; declared in {0, 1}, stage in 1..K.
    """
    y = np.asarray(ordered_values, dtype=float)
    if y.ndim != 2 or y.shape[1] < policy.k_max:
        raise ValueError(f"need at least K={policy.k_max} ordered values per slot")
    n = y.shape[0]
    pi = np.full(n, float(pi0))
    declared = np.full(n, -1, dtype=np.int8)
    stage = np.zeros(n, dtype=np.int64)
    active = np.ones(n, dtype=bool)
    for k in range(1, policy.k_max + 1):
        yk = y[:, k - 1]
        f0 = np.asarray(ranked_pdf(k, yk, Hypothesis.H0, ensemble), dtype=float)
        f1 = np.asarray(ranked_pdf(k, yk, Hypothesis.H1, ensemble), dtype=float)
        den = pi * f0 + (1.0 - pi) * f1
        bad = active & (den <= 0.0)
        if np.any(bad):
            raise PosteriorUndefined(
                f"predictive density vanishes at stage {k} for {int(bad.sum())} slot(s)"
            )
        pi = np.where(active, np.where(den > 0.0, pi * f0 / np.where(den > 0, den, 1.0), pi), pi)
        if k == policy.k_max:
            free = pi >= policy.pi_high[k - 1]
            declared[active] = np.where(free[active], 0, 1)
            stage[active] = k
            active[:] = False
        else:
            stop_h0 = active & (pi >= policy.pi_high[k - 1])
            stop_h1 = active & ~stop_h0 & (pi <= policy.pi_low[k - 1])
            declared[stop_h0] = 0
            declared[stop_h1] = 1
            stage[stop_h0 | stop_h1] = k
            active &= ~(stop_h0 | stop_h1)
    return declared, stage


def concavity_check(policy: PolicyTable) -> bool:
    """Chord concavity of every stage's value function on the belief grid:
    each interior point must sit on or above the chord of its neighbors."""
    x = policy.grid
    w_left = x[2:] - x[1:-1]
    w_right = x[1:-1] - x[:-2]
    w_full = x[2:] - x[:-2]
    for row in policy.values:
        span = float(row.max() - row.min())
        tol = 1e-9 * max(span, 1.0)
        chord = (row[:-2] * w_left + row[2:] * w_right) / w_full
        if np.any(chord - row[1:-1] > tol):
            return False
    return True
