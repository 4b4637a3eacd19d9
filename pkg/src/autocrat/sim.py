"""Exact and Monte Carlo evaluation of repeated play, and payoff-region sampling.

Two backends.  The exact backend evolves the strategy's mixed-action chain
against opponents that never see the player's realized actions (fixed
sequences, round-by-round randomizers, adversaries reacting to the current
mixed action); expectations are linear, so no sampling of the player's own
actions is needed and the telescoped residual identity holds to float
precision.  The sampling backend draws realized actions on both sides and
is required for memory-one opponents, which react to realizations.

Randomness is counter-based: each trial owns a Philox stream keyed by
(master seed, substream, trial index), so trials are order-independent and
identical seeds reproduce traces bit for bit.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .errors import InputError
from .game import MixedAction, ObjectiveMatrix, StageGame, mixed_row
from .synth import TwoPointStrategy

TAIL_EPS = 1e-6
HORIZON_CAP = 10**6
# Chunk trials so pre-drawn uniforms stay within ~400 MB.
_CHUNK_BUDGET = 25_000_000


def stream(seed: int, a: int = 0, b: int = 0, c: int = 0) -> np.random.Generator:
    key = np.array([np.uint64(seed & 0xFFFFFFFFFFFFFFFF), np.uint64(a)], dtype=np.uint64)
    counter = np.array([0, 0, b, c], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(counter=counter, key=key))


def truncation_horizon(lam: float, psi_span: float) -> int:
    """Smallest T with lam^T * max(1, psi_span) below the tail budget."""
    if lam <= 0.0:
        return 1
    if lam >= 1.0:
        return HORIZON_CAP
    t = int(np.ceil(np.log(TAIL_EPS / max(1.0, psi_span)) / np.log(lam)))
    return min(max(t, 1), HORIZON_CAP)


# ---------------------------------------------------------------------------
# Opponents


@dataclass(frozen=True)
class Exogenous:
    """A fixed action sequence, cycled when shorter than the game."""

    actions: tuple[int, ...]
    cycle: bool = True

    def __post_init__(self):
        if not self.actions:
            raise InputError("exogenous sequence must be nonempty")

    def action(self, t: int) -> int:
        if self.cycle:
            return self.actions[t % len(self.actions)]
        if t >= len(self.actions):
            raise InputError(f"exogenous sequence exhausted at round {t}")
        return self.actions[t]

    @staticmethod
    def constant(i: int) -> "Exogenous":
        return Exogenous((i,))

    @staticmethod
    def alternating(i: int = 0, j: int = 1) -> "Exogenous":
        return Exogenous((i, j))


@dataclass(frozen=True)
class UniformRandom:
    """Independent uniform action each round."""


@dataclass(frozen=True)
class Adversarial:
    """Best/worst response to the current mixed action's objective row."""

    kind: str  # "max" or "min"

    def __post_init__(self):
        if self.kind not in ("max", "min"):
            raise InputError(f"adversarial kind must be 'max' or 'min', got {self.kind!r}")


@dataclass(frozen=True)
class MemoryOne:
    """Initial mixed action plus a response table over the previous
    realized action pair; only usable with the sampling backend."""

    initial: MixedAction
    table: np.ndarray  # shape (m, n, n): row distributions over the opponent's actions

    def __post_init__(self):
        t = np.asarray(self.table, dtype=float)
        if t.ndim != 3 or t.shape[1] != t.shape[2]:
            raise InputError("memory-one table must have shape (m, n, n)")
        if np.any(t < 0) or np.max(np.abs(t.sum(axis=2) - 1.0)) > 1e-9:
            raise InputError("memory-one table rows must be distributions")
        t = t / t.sum(axis=2, keepdims=True)
        t.setflags(write=False)
        object.__setattr__(self, "table", t)


OpponentModel = Union[Exogenous, UniformRandom, Adversarial, MemoryOne]


def adversarial_step(opponent: Adversarial, phi: ObjectiveMatrix, tau: MixedAction) -> int:
    """Action extremizing the objective against the given mixed action;
    ties resolve to the lowest index."""
    row = mixed_row(phi, tau)
    return int(np.argmax(row)) if opponent.kind == "max" else int(np.argmin(row))


def sample_memory_one(game_shape: tuple[int, int], rng: np.random.Generator) -> MemoryOne:
    """Random memory-one opponent with rows drawn uniformly on the simplex."""
    m, n = game_shape
    initial = MixedAction(rng.dirichlet(np.ones(n)))
    table = rng.dirichlet(np.ones(n), size=(m, n))
    return MemoryOne(initial, table)


# ---------------------------------------------------------------------------
# Exact backend


@dataclass(frozen=True)
class Trace:
    """Per-round record of the chain: weight, opponent action, objective value."""

    p: np.ndarray
    s_y: np.ndarray
    phi: np.ndarray
    lam: float
    horizon: int
    labels: Optional[tuple[str, ...]] = None

    def write_csv(self, path: str) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "p", "s_y", "phi"])
            for t in range(self.horizon):
                s = self.labels[self.s_y[t]] if self.labels else str(int(self.s_y[t]))
                w.writerow([t, f"{self.p[t]:.12g}", s, f"{self.phi[t]:.12g}"])


@dataclass(frozen=True)
class ExactSum:
    partial_sum: float
    predicted_residual: float
    trace: Trace


def _exact_opponent_action(opponent, t, row, rng):
    if isinstance(opponent, Exogenous):
        return opponent.action(t)
    if isinstance(opponent, UniformRandom):
        if rng is None:
            raise InputError("a seeded generator is required for a random opponent")
        return int(rng.integers(len(row)))
    if isinstance(opponent, Adversarial):
        return int(np.argmax(row)) if opponent.kind == "max" else int(np.argmin(row))
    raise InputError("the exact backend cannot drive a memory-one opponent; it reacts to realized actions")


def _exact_chain(strategy: TwoPointStrategy, opponent, T: int, rng):
    p = strategy.p0
    ps = np.empty(T)
    ss = np.empty(T, dtype=int)
    vals = np.empty(T)
    for t in range(T):
        row = p * strategy.row_plus + (1.0 - p) * strategy.row_minus
        s = _exact_opponent_action(opponent, t, row, rng)
        ps[t], ss[t], vals[t] = p, s, row[s]
        p = strategy.respond(p, s)
    return ps, ss, vals, p


def exact_discounted_sum(
    strategy: TwoPointStrategy,
    opponent: OpponentModel,
    T: int,
    rng: Optional[np.random.Generator] = None,
    labels: Optional[tuple[str, ...]] = None,
) -> ExactSum:
    """Partial discounted sum of (phi - K) along the exact chain, plus the
    residual the telescoped correction identity predicts for it:

        sum_{t<T} lam^t (phi_t - K)  ==  lam^T (p0 - p_T) (psi_plus - psi_minus).
    """
    if strategy.mode != "discounted":
        raise InputError("use cesaro_check for undiscounted strategies")
    lam = strategy.lam
    if not 0.0 <= lam < 1.0:
        raise InputError("exact discounted evaluation needs lambda in [0, 1)")
    ps, ss, vals, p_T = _exact_chain(strategy, opponent, T, rng)
    discounts = lam ** np.arange(T) if T else np.empty(0)
    partial = float(np.sum(discounts * (vals - strategy.K)))
    residual = lam**T * (strategy.p0 - p_T) * strategy.gap
    trace = Trace(ps, ss, vals, lam, T, labels)
    return ExactSum(partial, float(residual), trace)


def cesaro_check(
    strategy: TwoPointStrategy,
    opponent: OpponentModel,
    T: int,
    rng: Optional[np.random.Generator] = None,
) -> float:
    """Running average (1/(T+1)) sum_{t<=T} phi(tau_t, s_t) for an
    undiscounted strategy; bounded by (psi_plus - psi_minus)/(T+1) against
    any opponent the exact backend supports."""
    if strategy.mode != "undiscounted":
        raise InputError("cesaro_check applies to undiscounted strategies")
    _, _, vals, _ = _exact_chain(strategy, opponent, T + 1, rng)
    return float(vals.mean())


# ---------------------------------------------------------------------------
# Sampling backend


@dataclass(frozen=True)
class PayoffPair:
    pi_y: float
    pi_x: float


@dataclass(frozen=True)
class MonteCarloResult:
    payoffs: Optional[PayoffPair]
    payoff_se: Optional[PayoffPair]
    phi_mean: Optional[float]
    phi_se: Optional[float]
    trials: int
    horizon: int


def _categorical(probs: np.ndarray, u: np.ndarray) -> np.ndarray:
    cum = np.cumsum(probs, axis=1)
    return np.minimum((u[:, None] > cum).sum(axis=1), probs.shape[1] - 1)


def monte_carlo_payoffs(
    strategy: TwoPointStrategy,
    opponent: OpponentModel,
    lam: float,
    trials: int,
    seed: int,
    game: Optional[StageGame] = None,
    phi: Optional[ObjectiveMatrix] = None,
    geometric: bool = False,
    horizon: Optional[int] = None,
    substream: int = 0,
) -> MonteCarloResult:
    """Sample realized play and average normalized payoffs and objective sums.

    Per trial the game either runs to a truncation horizon with explicit
    discounting (default; lower variance) or to a geometrically sampled
    length with unweighted stage values (the literal stopping model).
    """
    if trials < 1:
        raise InputError("trials must be at least 1")
    if not 0.0 <= lam < 1.0:
        raise InputError("Monte Carlo evaluation needs lambda in [0, 1)")
    if game is None and phi is None:
        raise InputError("provide a stage game, an objective, or both")

    T = horizon if horizon is not None else truncation_horizon(lam, strategy.gap)
    m = len(strategy.tau_plus)
    n = strategy.n_opponent_actions
    wp, wm = strategy.tau_plus.weights, strategy.tau_minus.weights

    adversary_rows = None
    if isinstance(opponent, Adversarial):
        if phi is not None:
            adversary_rows = (mixed_row(phi, strategy.tau_plus), mixed_row(phi, strategy.tau_minus))
        else:
            adversary_rows = (strategy.row_plus, strategy.row_minus)

    ux_tot = np.empty(trials)
    uy_tot = np.empty(trials)
    phi_tot = np.empty(trials)
    chunk = max(1, min(trials, _CHUNK_BUDGET // max(T, 1)))
    for start in range(0, trials, chunk):
        stop = min(trials, start + chunk)
        size = stop - start
        ux_c, uy_c, phi_c = _run_chunk(
            strategy, opponent, lam, seed, substream, start, size, T,
            geometric, game, phi, adversary_rows, wp, wm, n,
        )
        ux_tot[start:stop] = ux_c
        uy_tot[start:stop] = uy_c
        phi_tot[start:stop] = phi_c

    def stats(v):
        mean = float(np.sum(v) / trials)
        if trials > 1:
            se = float(np.std(v, ddof=1) / np.sqrt(trials))
        else:
            se = float("nan")
        return mean, se

    if game is not None:
        mx, sx = stats(ux_tot)
        my, sy = stats(uy_tot)
        payoffs, payoff_se = PayoffPair(my, mx), PayoffPair(sy, sx)
    else:
        payoffs = payoff_se = None
    if phi is not None:
        pm, psd = stats(phi_tot)
    else:
        pm = psd = None
    return MonteCarloResult(payoffs, payoff_se, pm, psd, trials, T)


def _run_chunk(
    strategy, opponent, lam, seed, substream, first, size, T,
    geometric, game, phi, adversary_rows, wp, wm, n,
):
    # Pre-draw each trial's uniforms from its own stream so results do not
    # depend on chunking or execution order.
    ux_u = np.empty((size, T))
    oy_u = np.empty((size, T))
    lengths = np.full(size, T, dtype=int)
    for i in range(size):
        g = stream(seed, substream, first + i, 0)
        if geometric:
            lengths[i] = min(int(g.geometric(1.0 - lam)), T)
        ux_u[i] = g.random(T)
        oy_u[i] = g.random(T)

    p = np.full(size, strategy.p0)
    sx_prev = np.zeros(size, dtype=int)
    sy_prev = np.zeros(size, dtype=int)
    ux_sum = np.zeros(size)
    uy_sum = np.zeros(size)
    phi_sum = np.zeros(size)
    u_x = game.u_x if game is not None else None
    u_y = game.u_y if game is not None else None
    phi_m = phi.phi if phi is not None else None

    for t in range(int(lengths.max()) if geometric else T):
        tau = np.outer(p, wp) + np.outer(1.0 - p, wm)
        sx = _categorical(tau, ux_u[:, t])
        if isinstance(opponent, Exogenous):
            sy = np.full(size, opponent.action(t), dtype=int)
        elif isinstance(opponent, UniformRandom):
            sy = np.minimum((oy_u[:, t] * n).astype(int), n - 1)
        elif isinstance(opponent, Adversarial):
            rows = np.outer(p, adversary_rows[0]) + np.outer(1.0 - p, adversary_rows[1])
            sy = np.argmax(rows, axis=1) if opponent.kind == "max" else np.argmin(rows, axis=1)
        elif isinstance(opponent, MemoryOne):
            if t == 0:
                probs = np.broadcast_to(opponent.initial.weights, (size, n))
            else:
                probs = opponent.table[sx_prev, sy_prev]
            sy = _categorical(probs, oy_u[:, t])
        else:
            raise InputError(f"unsupported opponent {opponent!r}")

        if geometric:
            w = (t < lengths).astype(float)
        else:
            w = lam**t
        if u_x is not None:
            ux_sum += w * u_x[sx, sy]
            uy_sum += w * u_y[sx, sy]
        if phi_m is not None:
            phi_sum += w * (phi_m[sx, sy] - strategy.K)
        sx_prev, sy_prev = sx, sy
        p = np.clip(
            _respond_vec(strategy, p, sy),
            0.0,
            1.0,
        )
    if phi_m is not None and not geometric:
        # Analytic truncation tail: the correction identity pins the
        # expected remainder to lam^T (p_T - p0) (psi_plus - psi_minus)
        # given the reached state, making the estimator unbiased.
        phi_sum += lam**T * (p - strategy.p0) * strategy.gap
    if geometric:
        u_norm = 1.0 - lam
    else:
        # Normalize payoffs by the truncated discount mass so constant
        # streams come out exact instead of off by lam^T.
        u_norm = (1.0 - lam) / (1.0 - lam**T) if lam > 0.0 else 1.0
    return u_norm * ux_sum, u_norm * uy_sum, (1.0 - lam) * phi_sum


def _respond_vec(strategy: TwoPointStrategy, p: np.ndarray, sy: np.ndarray) -> np.ndarray:
    if strategy.unconditional:
        return p
    value = p * strategy.row_plus[sy] + (1.0 - p) * strategy.row_minus[sy]
    if strategy.mode == "undiscounted":
        return (strategy.K - value) / strategy.gap + p
    lam = strategy.lam
    if lam == 0.0:
        return p
    return (strategy.K - value) / (lam * strategy.gap) + (p - (1.0 - lam) * strategy.p0) / lam


def payoff_region(
    strategy: TwoPointStrategy,
    n_opponents: int,
    lam: float,
    seed: int,
    game: StageGame,
    phi: Optional[ObjectiveMatrix] = None,
    trials_per_opponent: int = 100,
    geometric: bool = False,
) -> list[PayoffPair]:
    """Payoff cloud against randomly drawn memory-one opponents, in the
    plotting order (opponent payoff, own payoff)."""
    if n_opponents < 1:
        raise InputError("n_opponents must be at least 1")
    points = []
    for k in range(n_opponents):
        sampler = stream(seed, k, 0, 1)
        opp = sample_memory_one(game.shape, sampler)
        res = monte_carlo_payoffs(
            strategy, opp, lam, trials_per_opponent, seed,
            game=game, phi=phi, geometric=geometric, substream=k + 1,
        )
        points.append(res.payoffs)
    return points


def write_region_csv(points: Sequence[PayoffPair], path: str) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["pi_y", "pi_x"])
        for pt in points:
            w.writerow([f"{pt.pi_y:.12g}", f"{pt.pi_x:.12g}"])
