"""Built-in games, closed-form thresholds for the prisoner's dilemma, and
application-level analyses (equalizers, zero-sum pairs, symmetric dichotomy,
heatmap sweeps over the (kappa, chi) family of linear relations)."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import csv

import numpy as np

from . import enforce
from .errors import InputError, NotEnforceableError
from .game import (
    ActionSet,
    LinearRelationSpec,
    MixedAction,
    ObjectiveMatrix,
    StageGame,
    build_linear_phi,
)

CHI_OVERFLOW = 1e6
BUILTIN_GAMES = ("pd", "donation", "nonlinear_donation", "asym_donation", "hawk_dove")


def _require(cond: bool, constraint: str) -> None:
    if not cond:
        raise InputError(f"game parameter constraint violated: {constraint}")


def make_game(name: str, **params: float) -> StageGame:
    """Instantiate a builtin game; raises with the violated constraint named."""
    builders = {
        "pd": _pd,
        "donation": _donation,
        "nonlinear_donation": _nonlinear_donation,
        "asym_donation": _asym_donation,
        "hawk_dove": _hawk_dove,
    }
    if name not in builders:
        raise InputError(f"unknown game {name!r}; builtins: {', '.join(BUILTIN_GAMES)}")
    try:
        return builders[name](**params)
    except TypeError as e:
        raise InputError(f"bad parameters for {name}: {e}") from None


def _symmetric_2x2(R, S, T, P, labels=("C", "D")) -> StageGame:
    acts = ActionSet(labels)
    u_x = np.array([[R, S], [T, P]], dtype=float)
    return StageGame(acts, acts, u_x, u_x.T)


def _pd(R: float, S: float, T: float, P: float) -> StageGame:
    _require(T > R, "T > R")
    _require(R > P, "R > P")
    _require(P > S, "P > S")
    return _symmetric_2x2(R, S, T, P)


def _donation(b: float, c: float) -> StageGame:
    _require(b > c, "b > c")
    _require(c > 0, "c > 0")
    return _symmetric_2x2(b - c, -c, b, 0.0)


def _nonlinear_donation(b1: float, c1: float, b2: float, c2: float) -> StageGame:
    _require(0 < c1, "c1 > 0")
    _require(c1 < c2, "c1 < c2")
    _require(0 < b1, "b1 > 0")
    _require(b1 < b2, "b1 < b2")
    _require(c1 < b1, "c1 < b1")
    _require(c2 < b2, "c2 < b2")
    _require(b2 - c2 < b1 - c1, "b2 - c2 < b1 - c1")
    acts = ActionSet(("C1", "C2", "D"))
    benefit = np.array([b1, b2, 0.0])
    cost = np.array([c1, c2, 0.0])
    # u_X(s_X, s_Y) = benefit(s_Y) - cost(s_X); u_Y mirrors it.
    u_x = benefit[None, :] - cost[:, None]
    return StageGame(acts, acts, u_x, u_x.T)


def _asym_donation(bx: float, cx: float, by: float, cy: float) -> StageGame:
    _require(bx > cx, "b_X > c_X")
    _require(cx > 0, "c_X > 0")
    _require(by > cy, "b_Y > c_Y")
    _require(cy > 0, "c_Y > 0")
    acts = ActionSet(("C", "D"))
    u_x = np.array([[by - cx, -cx], [by, 0.0]])
    u_y = np.array([[bx - cy, bx], [-cy, 0.0]])
    return StageGame(acts, acts, u_x, u_y)


def _hawk_dove(V: float, C: float) -> StageGame:
    _require(V > 0, "V > 0")
    _require(C > V, "C > V")
    return _symmetric_2x2((V - C) / 2.0, V, 0.0, V / 2.0, labels=("Hawk", "Dove"))


# ---------------------------------------------------------------------------
# Prisoner's-dilemma closed forms


def _pd_chi_lower_bound(R, S, T, P) -> float:
    return min(-(R - S) / (T - R), -(T - P) / (P - S))


def pd_lambda_min_closed_form(
    R: float, S: float, T: float, P: float, kappa: float, chi: float
) -> Optional[float]:
    """Threshold for the relation kappa - u_X = chi (kappa - u_Y) in a
    prisoner's dilemma, where pure anchor pairs are optimal.

    Covers slope chi >= 1 (with kappa in [P, R]) and the steep negative
    regime chi <= min{-(R-S)/(T-R), -(T-P)/(P-S)}; in between, optimal
    anchors can be mixed and the threshold needs the general computation.
    Returns None outside the covered regimes or when not enforceable.
    """
    if not (T > R > P > S):
        raise InputError("payoffs must be ordered T > R > P > S")
    if chi == 1.0:
        return 1.0
    if not P <= kappa <= R:
        return None
    # In both covered regimes the anchor pair is pure (cooperate/defect,
    # one on each side of zero) and kappa cancels; the denominator is the
    # larger of the two envelope differences, which selects the S+T vs R+P
    # case automatically.
    if chi > 1.0:
        den = max(-S + chi * T - (chi - 1.0) * P, (chi - 1.0) * R - chi * S + T)
        return 1.0 - (chi - 1.0) * (R - P) / den
    if chi <= _pd_chi_lower_bound(R, S, T, P):
        den = max(S - chi * T - (1.0 - chi) * P, (1.0 - chi) * R - T + chi * S)
        return 1.0 - (1.0 - chi) * (R - P) / den
    return None


def pd_trivial_params(
    R: float, S: float, T: float, P: float, p: float
) -> tuple[float, float]:
    """The (kappa, chi) pair for which unconditionally cooperating with
    probability p is an enforcing strategy at every discount factor."""
    if not (T > R > P > S):
        raise InputError("payoffs must be ordered T > R > P > S")
    if not 0.0 <= p <= 1.0:
        raise InputError(f"probability {p} outside [0, 1]")
    quad = R - S - T + P
    den = S - P + p * quad
    if abs(den) < 1e-12:
        raise InputError(f"degenerate cooperation level p={p}: chi is undefined there")
    kappa = P + p * (S + T - 2.0 * P) + p * p * quad
    chi = (T - P + p * quad) / den
    return kappa, chi


# ---------------------------------------------------------------------------
# Equalizers, zero-sum pairs, symmetric dichotomy


def equalizer_interval(game: StageGame, target: str) -> Optional[tuple[float, float]]:
    """Range of constants the row player can pin a payoff to.

    target "self" uses the player's own payoff matrix, "opponent" the
    co-player's; empty (None) when the min-max exceeds the max-min.
    """
    if target not in ("self", "opponent"):
        raise InputError(f"target must be 'self' or 'opponent', got {target!r}")
    u = game.u_x if target == "self" else game.u_y
    return enforce.enforce_interval(ObjectiveMatrix(u))


@dataclass(frozen=True)
class ZeroSumResult:
    enforceable: bool
    tau_plus: Optional[MixedAction]
    tau_minus: Optional[MixedAction]


def zero_sum_enforceable(game: StageGame) -> ZeroSumResult:
    """Whether the row player can force the payoffs to sum to zero in
    expectation, with the witnessing pair when it exists."""
    phi = ObjectiveMatrix(game.u_x + game.u_y)
    tau_plus, tau_minus = enforce.separation_witnesses(phi)
    return ZeroSumResult(tau_plus is not None and tau_minus is not None, tau_plus, tau_minus)


def symmetric_dichotomy(game: StageGame, phi: ObjectiveMatrix) -> str:
    """Classify a symmetric or skew-symmetric objective on a symmetric
    action space: 'trivial', 'undiscounted_only', or 'not_enforceable'.

    Such constraints are never enforceable at an interior discount factor:
    either an unconditional enforcer exists, or the enforceability interval
    collapses to {0} and only the infinite-horizon limit works.
    """
    if game.actions_x.labels != game.actions_y.labels:
        raise InputError("symmetric classification needs identical action sets")
    m = phi.phi
    if m.shape[0] != m.shape[1]:
        raise InputError("objective must be square")
    sym = np.max(np.abs(m - m.T)) <= 1e-9
    skew = np.max(np.abs(m + m.T)) <= 1e-9
    if not (sym or skew):
        raise InputError("objective is neither symmetric nor skew-symmetric")
    if enforce.find_trivial(phi) is not None:
        return "trivial"
    interval = enforce.enforce_interval(phi)
    if interval is not None and abs(interval[0]) <= 1e-9 and abs(interval[1]) <= 1e-9:
        return "undiscounted_only"
    return "not_enforceable"


# ---------------------------------------------------------------------------
# Heatmap sweeps


@dataclass(frozen=True)
class HeatmapRecord:
    r: float
    theta: float
    kappa: float
    chi: float
    enforceable: bool
    lambda_min: Optional[float]
    mixed_optimizer: bool
    chi_overflow: bool = False


DEFAULT_R_RANGE = (-0.25, 1.25)
DEFAULT_THETA_RANGE = (-math.pi / 4 + 0.01, math.pi / 2 - 0.01)


def _thread_cap() -> int:
    env = os.environ.get("AUTOCRAT_THREADS")
    if env:
        try:
            cap = int(env)
        except ValueError:
            raise InputError(f"AUTOCRAT_THREADS must be an integer, got {env!r}")
        if cap < 1:
            raise InputError("AUTOCRAT_THREADS must be positive")
        return cap
    return os.cpu_count() or 1


def _heatmap_cell(game: StageGame, R: float, P: float, r: float, theta: float) -> HeatmapRecord:
    chi = math.tan(theta + math.pi / 4)
    if not math.isfinite(chi) or abs(chi) > CHI_OVERFLOW:
        return HeatmapRecord(r, theta, P + r * (R - P), chi, False, None, False, True)
    kappa = P + r * (R - P)
    phi = build_linear_phi(game, LinearRelationSpec.from_kappa_chi(kappa, chi))
    try:
        lam, _ = enforce.lambda_min(phi)
    except NotEnforceableError:
        return HeatmapRecord(r, theta, kappa, chi, False, None, False)
    pure = enforce.lambda_min_pure(phi)
    mixed = pure is None or (pure - lam) > 1e-6
    return HeatmapRecord(r, theta, kappa, chi, True, lam, mixed)


def heatmap(
    game: StageGame,
    r_range: tuple[float, float] = DEFAULT_R_RANGE,
    theta_range: tuple[float, float] = DEFAULT_THETA_RANGE,
    grid_n: int = 201,
) -> list[HeatmapRecord]:
    """Enforceability and threshold over an (r, theta) grid, where
    kappa = P + r (R - P) and chi = tan(theta + pi/4) relative to the
    game's mutual-cooperation and mutual-defection payoffs (the first and
    last diagonal entries; for the three-action donation game these are
    b1 - c1 and 0).

    Cells are independent; evaluation is parallel (capped by the
    AUTOCRAT_THREADS environment variable) with output in (row, column)
    order regardless of schedule.
    """
    if game.shape[0] != game.shape[1]:
        raise InputError("heatmap sweeps need a square game")
    if grid_n < 2:
        raise InputError("grid_n must be at least 2")
    R = float(game.u_x[0, 0])
    P = float(game.u_x[-1, -1])
    rs = np.linspace(r_range[0], r_range[1], grid_n)
    thetas = np.linspace(theta_range[0], theta_range[1], grid_n)
    cells = [(r, th) for r in rs for th in thetas]
    workers = min(_thread_cap(), len(cells))
    if workers <= 1:
        return [_heatmap_cell(game, R, P, r, th) for r, th in cells]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda cell: _heatmap_cell(game, R, P, *cell), cells))


def dump_heatmap_csv(records: list[HeatmapRecord], fh) -> None:
    w = csv.writer(fh)
    w.writerow(["r", "theta", "kappa", "chi", "enforceable", "lambda_min", "mixed_optimizer"])
    for rec in records:
        lam = -1.0 if rec.lambda_min is None else rec.lambda_min
        w.writerow(
            [
                f"{rec.r:.12g}",
                f"{rec.theta:.12g}",
                f"{rec.kappa:.12g}",
                f"{rec.chi:.12g}",
                str(rec.enforceable).lower(),
                f"{lam:.12g}",
                str(rec.mixed_optimizer).lower(),
            ]
        )


def write_heatmap_csv(records: list[HeatmapRecord], path: str) -> None:
    """CSV columns r,theta,kappa,chi,enforceable,lambda_min,mixed_optimizer;
    non-enforceable cells carry the sentinel lambda_min = -1."""
    with open(path, "w", newline="") as fh:
        dump_heatmap_csv(records, fh)
