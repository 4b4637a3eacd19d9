"""Construction of enforcing strategies.

A two-point strategy mixes between two fixed mixed actions; its whole
state is the current weight p on the upper action.  Given a qualifying
pair, the enforcement potential takes just two values,

    psi_plus  = min_s phi(tau_plus, s)  / (1 - lambda)
    psi_minus = max_s phi(tau_minus, s) / (1 - lambda),

the initial weight is pinned to p0 = (K - max_minus)/(min_plus - max_minus),
and the response to opponent action s is

    p' = (K - phi(tau_p, s)) / (lambda (psi_plus - psi_minus))
         + (p - (1 - lambda) p0) / lambda,

affine in p and valid (in [0, 1]) exactly when the pair inequalities hold
at lambda.  Additive objectives admit reactive strategies whose response
ignores p entirely, with the potential taken to be the own-action part of
the split; the undiscounted variant drops the initial-action term and uses
one-step potential differences.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import InputError, SynthesisError
from .game import MixedAction, ObjectiveMatrix, mix, mixed_row

# Below this potential spread a strategy is unconditional; avoids dividing
# by a vanishing gap in the response function.
DEGENERATE_GAP = 1e-12
_P_TOL = 1e-12


def _scaled_tol(*values: float) -> float:
    return 1e-9 * max(1.0, max(abs(v) for v in values))


@dataclass(frozen=True)
class TwoPointStrategy:
    """An executable enforcing strategy on the segment [tau_minus, tau_plus].

    ``row_plus`` and ``row_minus`` cache the objective values of the two
    anchor actions against every opponent action; the response function
    needs them and a strategy is meaningless without its objective.
    """

    tau_plus: MixedAction
    tau_minus: MixedAction
    psi_plus: float
    psi_minus: float
    p0: float
    lam: float
    K: float
    mode: str
    row_plus: np.ndarray = field(repr=False)
    row_minus: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.mode not in ("discounted", "undiscounted"):
            raise InputError(f"unknown mode {self.mode!r}")
        if not 0.0 <= self.p0 <= 1.0:
            raise SynthesisError(f"initial weight {self.p0} outside [0, 1]")
        if self.psi_plus < self.psi_minus - _scaled_tol(self.psi_plus, self.psi_minus):
            raise SynthesisError("potential values out of order (psi_plus < psi_minus)")
        rp = np.asarray(self.row_plus, dtype=float)
        rm = np.asarray(self.row_minus, dtype=float)
        rp.setflags(write=False)
        rm.setflags(write=False)
        object.__setattr__(self, "row_plus", rp)
        object.__setattr__(self, "row_minus", rm)

    @property
    def gap(self) -> float:
        return self.psi_plus - self.psi_minus

    @property
    def unconditional(self) -> bool:
        return self.gap < DEGENERATE_GAP

    @property
    def n_opponent_actions(self) -> int:
        return len(self.row_plus)

    def action_at(self, p: float) -> MixedAction:
        return mix(p, self.tau_plus, self.tau_minus)

    def initial_action(self) -> MixedAction:
        return self.action_at(self.p0)

    def potential(self, p: float) -> float:
        return p * self.psi_plus + (1.0 - p) * self.psi_minus

    def respond_raw(self, p: float, s_y: int) -> float:
        """Next weight on tau_plus before clipping; affine in p."""
        if not -_P_TOL <= p <= 1.0 + _P_TOL:
            raise InputError(f"mixing weight {p} outside [0, 1]")
        if not 0 <= s_y < self.n_opponent_actions:
            raise InputError(f"opponent action index {s_y} out of range")
        if self.unconditional:
            return p
        value = p * self.row_plus[s_y] + (1.0 - p) * self.row_minus[s_y]
        if self.mode == "undiscounted":
            return (self.K - value) / self.gap + p
        if self.lam == 0.0:
            # One-shot game: there is no next round to condition.
            return p
        return (self.K - value) / (self.lam * self.gap) + (p - (1.0 - self.lam) * self.p0) / self.lam

    def respond(self, p: float, s_y: int) -> float:
        return min(1.0, max(0.0, self.respond_raw(p, s_y)))

    def to_json_dict(self) -> dict:
        d = {
            "tau_plus": self.tau_plus.tolist(),
            "tau_minus": self.tau_minus.tolist(),
            "psi_plus": self.psi_plus,
            "psi_minus": self.psi_minus,
            "p0": self.p0,
            "lambda": self.lam,
            "K": self.K,
            "mode": self.mode,
        }
        d["base"] = {
            "respond_at_0": [self.respond(0.0, s) for s in range(self.n_opponent_actions)],
            "respond_at_1": [self.respond(1.0, s) for s in range(self.n_opponent_actions)],
        }
        return d


def respond(strategy: TwoPointStrategy, p: float, s_y: int) -> float:
    """Next weight on tau_plus after seeing opponent action s_y at state p."""
    return strategy.respond(p, s_y)


def _pair_rows(phi: ObjectiveMatrix, tau_plus: MixedAction, tau_minus: MixedAction):
    return mixed_row(phi, tau_plus), mixed_row(phi, tau_minus)


def _require_pair_inequalities(row_plus, row_minus, lam):
    min_p, max_p = row_plus.min(), row_plus.max()
    min_m, max_m = row_minus.min(), row_minus.max()
    tol = _scaled_tol(min_p, max_p, min_m, max_m)
    a = min_p - ((1.0 - lam) * max_p + lam * max_m)
    b = (lam * min_p + (1.0 - lam) * min_m) - max_m
    if a < -tol or b < -tol:
        raise SynthesisError(
            f"pair inequalities fail at lambda={lam}: margins ({a}, {b})"
        )


def synthesize_two_point(
    phi: ObjectiveMatrix,
    lam: float,
    tau_plus: MixedAction,
    tau_minus: MixedAction,
    K: float = 0.0,
) -> TwoPointStrategy:
    """Build the enforcing strategy for phi == K from a qualifying pair."""
    if not 0.0 <= lam < 1.0:
        raise InputError(f"discount factor {lam} outside [0, 1)")
    row_p, row_m = _pair_rows(phi, tau_plus, tau_minus)
    _require_pair_inequalities(row_p, row_m, lam)
    min_p, max_m = float(row_p.min()), float(row_m.max())
    tol = _scaled_tol(min_p, max_m, float(row_p.max()), float(row_m.min()))
    if not (max_m - tol <= K <= min_p + tol):
        raise SynthesisError(f"target constant {K} outside [{max_m}, {min_p}]")
    psi_plus = min_p / (1.0 - lam)
    psi_minus = max_m / (1.0 - lam)
    span = min_p - max_m
    if span <= DEGENERATE_GAP:
        # Both anchor rows are flat at K: unconditional play of tau_plus.
        p0 = 1.0
    else:
        p0 = min(1.0, max(0.0, (K - max_m) / span))
    return TwoPointStrategy(
        tau_plus, tau_minus, psi_plus, psi_minus, p0, lam, K, "discounted", row_p, row_m
    )


def synthesize_undiscounted(
    phi: ObjectiveMatrix,
    tau_plus: MixedAction,
    tau_minus: MixedAction,
    K: float = 0.0,
    p0: float = 0.5,
) -> TwoPointStrategy:
    """Infinite-horizon variant: potentials are one-step differences and the
    initial weight is free (an interior default keeps the chain ergodic)."""
    row_p, row_m = _pair_rows(phi, tau_plus, tau_minus)
    min_p, max_p = float(row_p.min()), float(row_p.max())
    min_m, max_m = float(row_m.min()), float(row_m.max())
    tol = _scaled_tol(min_p, max_p, min_m, max_m)
    if min_p < K - tol:
        raise SynthesisError(f"tau_plus worst case {min_p} below target {K}")
    if max_m > K + tol:
        raise SynthesisError(f"tau_minus best case {max_m} above target {K}")
    if not 0.0 <= p0 <= 1.0:
        raise InputError(f"initial weight {p0} outside [0, 1]")
    # Tightest valid upper potential; the lower one is pinned at zero.
    psi_plus = max(max_p - K, K - min_m, 0.0)
    return TwoPointStrategy(
        tau_plus, tau_minus, psi_plus, 0.0, p0, 1.0, K, "undiscounted", row_p, row_m
    )


@dataclass(frozen=True)
class ReactiveStrategy:
    """Responds to the opponent's last action only (valid for additive
    objectives); the mixing weight never depends on the player's own state."""

    tau_plus: MixedAction
    tau_minus: MixedAction
    p_star: np.ndarray
    p0: float
    lam: float
    K: float
    row_plus: np.ndarray = field(repr=False)
    row_minus: np.ndarray = field(repr=False)
    phi_x_plus: float = 0.0
    phi_x_minus: float = 0.0

    def __post_init__(self):
        ps = np.asarray(self.p_star, dtype=float)
        if np.any(ps < -1e-9) or np.any(ps > 1.0 + 1e-9):
            raise SynthesisError(f"reactive weights outside [0, 1]: {ps}")
        ps = np.clip(ps, 0.0, 1.0)
        ps.setflags(write=False)
        object.__setattr__(self, "p_star", ps)

    @property
    def sigma0(self) -> MixedAction:
        return mix(self.p0, self.tau_plus, self.tau_minus)

    def respond(self, s_y: int) -> float:
        return float(self.p_star[s_y])

    def as_two_point(self) -> TwoPointStrategy:
        """Equivalent two-point representation; its potential is the
        own-action part of the additive split, so the response stays
        constant in p."""
        return TwoPointStrategy(
            self.tau_plus,
            self.tau_minus,
            self.phi_x_plus,
            self.phi_x_minus,
            self.p0,
            self.lam,
            self.K,
            "discounted",
            self.row_plus,
            self.row_minus,
        )

    def to_json_dict(self) -> dict:
        return {
            "tau_plus": self.tau_plus.tolist(),
            "tau_minus": self.tau_minus.tolist(),
            "sigma0": self.sigma0.tolist(),
            "p_star": [float(v) for v in self.p_star],
            "p0": self.p0,
            "lambda": self.lam,
            "K": self.K,
        }


def synthesize_reactive(
    phi: ObjectiveMatrix,
    lam: float,
    tau_plus: MixedAction,
    tau_minus: MixedAction,
    K: float = 0.0,
) -> ReactiveStrategy:
    """Reactive construction for an additive objective.

    The admissible initial weights form an interval (empty exactly when the
    discount factor is below the pair's threshold); the midpoint is chosen
    for numerical margin.
    """
    if phi.additive is None:
        raise SynthesisError("objective carries no additive decomposition")
    if not 0.0 <= lam < 1.0:
        raise InputError(f"discount factor {lam} outside [0, 1)")
    phi_x, phi_y = phi.additive
    row_p, row_m = _pair_rows(phi, tau_plus, tau_minus)
    _require_pair_inequalities(row_p, row_m, lam)
    fxp = float(tau_plus.weights @ phi_x)
    fxm = float(tau_minus.weights @ phi_x)
    ymin, ymax = float(phi_y.min()), float(phi_y.max())
    tol = _scaled_tol(fxp, fxm, ymin, ymax)
    if not (fxm + ymax - tol <= K <= fxp + ymin + tol):
        raise SynthesisError(f"target constant {K} outside [{fxm + ymax}, {fxp + ymin}]")
    D = fxp - fxm
    if D <= DEGENERATE_GAP:
        # Own-action part is flat: enforcement must already be unconditional.
        p_star = np.full(len(phi_y), 0.5)
        return ReactiveStrategy(tau_plus, tau_minus, p_star, 0.5, lam, K, row_p, row_m, fxp, fxm)
    lo = max((K - fxm - ymin) / ((1.0 - lam) * D) - lam / (1.0 - lam), 0.0)
    hi = min((K - fxm - ymax) / ((1.0 - lam) * D), 1.0)
    if lo > hi + 1e-9:
        raise SynthesisError(
            f"empty initial-weight interval [{lo}, {hi}]: discount factor below threshold"
        )
    p0 = min(1.0, max(0.0, 0.5 * (lo + hi)))
    if lam == 0.0:
        p_star = np.full(len(phi_y), p0)
    else:
        p_star = (K - fxm - phi_y) / (lam * D) - (1.0 - lam) * p0 / lam
    p_star = np.clip(p_star, 0.0, 1.0)
    return ReactiveStrategy(tau_plus, tau_minus, p_star, p0, lam, K, row_p, row_m, fxp, fxm)


@dataclass(frozen=True)
class CorrectionCheck:
    """Outcome of auditing the next-round correction condition."""

    ok: bool
    worst_violation: float
    worst_case: Optional[tuple[float, int]]

    def __bool__(self) -> bool:
        return self.ok


def verify_correction_condition(
    strategy: TwoPointStrategy, phi: ObjectiveMatrix, lam: float
) -> CorrectionCheck:
    """Check that the strategy enforces phi == K at discount lam.

    Evaluates the correction identity and the response range at the segment
    endpoints p in {0, 1} for every opponent action; affinity in p then
    covers the whole reachable set.
    """
    row_p, row_m = _pair_rows(phi, strategy.tau_plus, strategy.tau_minus)
    scale = _scaled_tol(
        float(row_p.min()), float(row_p.max()), float(row_m.min()), float(row_m.max())
    )
    worst = 0.0
    worst_case = None
    for p in (0.0, 1.0):
        for s in range(phi.shape[1]):
            nxt = strategy.respond_raw(p, s)
            violation = max(0.0, -nxt, nxt - 1.0)
            value = p * row_p[s] + (1.0 - p) * row_m[s]
            nxt_clipped = min(1.0, max(0.0, nxt))
            if lam >= 1.0:
                rhs = strategy.potential(p) - strategy.potential(nxt_clipped)
            else:
                rhs = (
                    strategy.potential(p)
                    - lam * strategy.potential(nxt_clipped)
                    - (1.0 - lam) * strategy.potential(strategy.p0)
                )
            violation = max(violation, abs((value - strategy.K) - rhs))
            if violation > worst:
                worst, worst_case = violation, (p, s)
    return CorrectionCheck(bool(worst <= scale), float(worst), worst_case)


def reconstruct_potential(
    strategy: TwoPointStrategy,
    phi: ObjectiveMatrix,
    lam: float,
    history: Sequence[int],
) -> float:
    """Potential of the mixed action reached after an opponent history,
    recovered from played objective values alone:

        theta(h) = -lam^{-T} * sum_{t<T} lam^t phi(tau_t, s_t),

    which equals the strategy's potential at the reached state up to the
    constant fixed by theta(empty) = 0.
    """
    if not 0.0 < lam <= 1.0:
        raise InputError(f"discount factor {lam} must lie in (0, 1]")
    p = strategy.p0
    total = 0.0
    for t, s in enumerate(history):
        row = mixed_row(phi, strategy.action_at(p))
        total += lam**t * float(row[s])
        p = strategy.respond(p, s)
    return -(lam ** -len(history)) * total


def combine_convex(s1: TwoPointStrategy, s2: TwoPointStrategy, q: float) -> TwoPointStrategy:
    """Mix two strategies sharing anchors, discount, and potential spread:
    the result enforces q*phi1 + (1-q)*phi2 == q*K1 + (1-q)*K2 with initial
    weight and response mixed the same way."""
    if not 0.0 <= q <= 1.0:
        raise InputError(f"mixing weight {q} outside [0, 1]")
    if s1.mode != s2.mode or s1.lam != s2.lam:
        raise SynthesisError("strategies must share mode and discount factor")
    if not (
        np.allclose(s1.tau_plus.weights, s2.tau_plus.weights, atol=1e-12)
        and np.allclose(s1.tau_minus.weights, s2.tau_minus.weights, atol=1e-12)
    ):
        raise SynthesisError("strategies must share their anchor actions")
    if abs(s1.gap - s2.gap) > _scaled_tol(s1.gap, s2.gap):
        raise SynthesisError(
            f"potential spreads differ ({s1.gap} vs {s2.gap}); combination is invalid"
        )
    w = 1.0 - q
    return TwoPointStrategy(
        s1.tau_plus,
        s1.tau_minus,
        q * s1.psi_plus + w * s2.psi_plus,
        q * s1.psi_minus + w * s2.psi_minus,
        q * s1.p0 + w * s2.p0,
        s1.lam,
        q * s1.K + w * s2.K,
        s1.mode,
        q * s1.row_plus + w * s2.row_plus,
        q * s1.row_minus + w * s2.row_minus,
    )
