"""Enforceability analysis for a payoff constraint phi == 0.

The constraint is enforceable iff there exist mixed actions whose
objective values against every opponent action sandwich zero: a tau_plus
with min_s phi(tau_plus, s) >= 0 and a tau_minus with
max_s phi(tau_minus, s) <= 0.  Equivalently, 0 lies in the interval
[min-max, max-min] of the associated matrix game.  When enforceable, the
minimum discount factor is

    lambda_min = 1 - sup over qualifying pairs of
        (min_plus - max_minus) / max(max_plus - max_minus,
                                     min_plus - min_minus)

which we compute by a trivial-strategy check, a pure-pair fast path for
dominant 2x2 objectives, and otherwise by the fractional program's two
linear-program split.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InputError, NotEnforceableError, SolverFailure
from .game import MixedAction, ObjectiveMatrix, mixed_row
from .lp import EQ, LE, LinearProgram, LpStatus, solve_lp

SIGN_TOL = 1e-9
_GAP_TOL = 1e-12


@dataclass(frozen=True)
class SeparationWitness:
    """A qualifying pair with its four objective envelopes."""

    tau_plus: MixedAction
    tau_minus: MixedAction
    min_plus: float
    max_plus: float
    min_minus: float
    max_minus: float

    def __post_init__(self):
        if self.min_plus < -SIGN_TOL:
            raise InputError(f"tau_plus has worst-case value {self.min_plus} < 0")
        if self.max_minus > SIGN_TOL:
            raise InputError(f"tau_minus has best-case value {self.max_minus} > 0")

    @staticmethod
    def from_pair(phi: ObjectiveMatrix, tau_plus: MixedAction, tau_minus: MixedAction) -> "SeparationWitness":
        lo_p, hi_p = _envelope(phi, tau_plus)
        lo_m, hi_m = _envelope(phi, tau_minus)
        return SeparationWitness(tau_plus, tau_minus, lo_p, hi_p, lo_m, hi_m)

    def pair_inequality_margins(self, lam: float) -> tuple[float, float]:
        """Slack of the two enforcement inequalities at discount lam
        (nonnegative means satisfied)."""
        a = self.min_plus - ((1.0 - lam) * self.max_plus + lam * self.max_minus)
        b = (lam * self.min_plus + (1.0 - lam) * self.min_minus) - self.max_minus
        return a, b

    def satisfies_pair_inequalities(self, lam: float, tol: float = SIGN_TOL) -> bool:
        a, b = self.pair_inequality_margins(lam)
        return a >= -tol and b >= -tol

    def lambda_bound(self) -> float:
        """Smallest discount factor at which this pair supports enforcement."""
        gap = self.min_plus - self.max_minus
        if gap <= _GAP_TOL:
            flat_plus = self.max_plus - self.min_plus <= _GAP_TOL
            flat_minus = self.max_minus - self.min_minus <= _GAP_TOL
            return 0.0 if (flat_plus and flat_minus) else 1.0
        den = max(self.max_plus - self.max_minus, self.min_plus - self.min_minus)
        return min(1.0, max(0.0, 1.0 - gap / den))

    def to_json_dict(self) -> dict:
        return {
            "tau_plus": self.tau_plus.tolist(),
            "tau_minus": self.tau_minus.tolist(),
            "envelopes": {
                "min_plus": self.min_plus,
                "max_plus": self.max_plus,
                "min_minus": self.min_minus,
                "max_minus": self.max_minus,
            },
        }


@dataclass(frozen=True)
class EnforceabilityReport:
    phi_plus_nonempty: bool
    phi_minus_nonempty: bool
    trivial_action: Optional[MixedAction]
    interval_J: Optional[tuple[float, float]]
    lambda_min: Optional[float]
    optimizer: Optional[SeparationWitness]
    pure_restricted_lambda_min: Optional[float]
    undiscounted_only: bool
    optimizer_attains: Optional[bool]

    @property
    def enforceable(self) -> bool:
        return self.phi_plus_nonempty and self.phi_minus_nonempty

    def to_json_dict(self) -> dict:
        wit = self.optimizer
        return {
            "enforceable": self.enforceable,
            "lambda_min": self.lambda_min,
            "undiscounted_only": self.undiscounted_only,
            "trivial_action": None if self.trivial_action is None else self.trivial_action.tolist(),
            "interval": None if self.interval_J is None else list(self.interval_J),
            "tau_plus": None if wit is None else wit.tau_plus.tolist(),
            "tau_minus": None if wit is None else wit.tau_minus.tolist(),
            "envelopes": None if wit is None else wit.to_json_dict()["envelopes"],
            "lambda_min_pure": self.pure_restricted_lambda_min,
            "optimizer_attains": self.optimizer_attains,
        }


def _envelope(phi: ObjectiveMatrix, tau: MixedAction) -> tuple[float, float]:
    row = mixed_row(phi, tau)
    return float(row.min()), float(row.max())


def _maximin(phi: np.ndarray) -> tuple[float, np.ndarray]:
    """max over the simplex of the row player's worst column value."""
    m, n = phi.shape
    # variables: x (m), z
    c = np.zeros(m + 1)
    c[m] = 1.0
    A = np.zeros((n + 1, m + 1))
    b = np.zeros(n + 1)
    senses = []
    for j in range(n):
        A[j, :m] = -phi[:, j]
        A[j, m] = 1.0
        senses.append(LE)
    A[n, :m] = 1.0
    b[n] = 1.0
    senses.append(EQ)
    bounds = [(0.0, None)] * m + [(None, None)]
    sol = solve_lp(LinearProgram(c, A, b, senses, bounds))
    assert sol.status == LpStatus.OPTIMAL
    return float(sol.objective_value), sol.x[:m]


def _minimax(phi: np.ndarray) -> tuple[float, np.ndarray]:
    """min over the simplex of the row player's best column value."""
    value, x = _maximin(-phi)
    return -value, x


def separation_witnesses(phi: ObjectiveMatrix) -> tuple[Optional[MixedAction], Optional[MixedAction]]:
    """Extremal members of the two sandwich sets, or None where empty.

    The returned tau_plus maximizes its worst-case value and tau_minus
    minimizes its best-case value, so they double as the endpoints of the
    interval of enforceability.
    """
    upper, x_up = _maximin(phi.phi)
    lower, x_lo = _minimax(phi.phi)
    tau_plus = MixedAction(x_up) if upper >= -SIGN_TOL else None
    tau_minus = MixedAction(x_lo) if lower <= SIGN_TOL else None
    return tau_plus, tau_minus


def enforce_interval(phi: ObjectiveMatrix) -> Optional[tuple[float, float]]:
    """[min-max, max-min] of the objective's matrix game; None when empty."""
    upper, _ = _maximin(phi.phi)
    lower, _ = _minimax(phi.phi)
    if lower > upper + SIGN_TOL:
        return None
    return (lower, upper)


def find_trivial(phi: ObjectiveMatrix) -> Optional[MixedAction]:
    """A mixed action whose objective value is zero against every opponent
    action, i.e. an unconditional enforcer, or None."""
    m, n = phi.shape
    # variables: x (m), w; minimize w subject to |phi^T x|_j <= w
    c = np.zeros(m + 1)
    c[m] = -1.0
    rows, rhs, senses = [], [], []
    for j in range(n):
        r = np.zeros(m + 1)
        r[:m] = phi.phi[:, j]
        r[m] = -1.0
        rows.append(r)
        rhs.append(0.0)
        senses.append(LE)
        r2 = np.zeros(m + 1)
        r2[:m] = -phi.phi[:, j]
        r2[m] = -1.0
        rows.append(r2)
        rhs.append(0.0)
        senses.append(LE)
    r3 = np.zeros(m + 1)
    r3[:m] = 1.0
    rows.append(r3)
    rhs.append(1.0)
    senses.append(EQ)
    bounds = [(0.0, None)] * m + [(0.0, None)]
    sol = solve_lp(LinearProgram(c, np.array(rows), np.array(rhs), senses, bounds))
    assert sol.status == LpStatus.OPTIMAL
    if sol.x[m] > SIGN_TOL:
        return None
    return MixedAction(sol.x[:m])


def _pure_qualifiers(phi: np.ndarray) -> tuple[list[int], list[int]]:
    plus = [i for i in range(phi.shape[0]) if phi[i].min() >= -SIGN_TOL]
    minus = [i for i in range(phi.shape[0]) if phi[i].max() <= SIGN_TOL]
    return plus, minus


def lambda_min_pure(phi: ObjectiveMatrix) -> Optional[float]:
    """Best discount threshold over pure qualifying pairs, or None."""
    best = _best_pure_pair(phi)
    return None if best is None else best[0]


def _best_pure_pair(phi: ObjectiveMatrix) -> Optional[tuple[float, SeparationWitness]]:
    m = phi.shape[0]
    plus, minus = _pure_qualifiers(phi.phi)
    best = None
    for ip in plus:
        for im in minus:
            wit = SeparationWitness.from_pair(
                phi, MixedAction.dirac(m, ip), MixedAction.dirac(m, im)
            )
            cand = (wit.lambda_bound(), tuple(wit.tau_plus.weights), tuple(wit.tau_minus.weights), wit)
            if best is None or cand[:3] < best[:3]:
                best = cand
    if best is None:
        return None
    return best[0], best[3]


def _column_dominant_2x2(phi: np.ndarray) -> bool:
    if phi.shape != (2, 2):
        return False
    col0_ge = np.all(phi[:, 0] >= phi[:, 1] - 1e-12)
    col1_ge = np.all(phi[:, 1] >= phi[:, 0] - 1e-12)
    return bool(col0_ge or col1_ge)


def _fractional_lp(phi: np.ndarray, which: int, t_floor: float = 0.0):
    """One of the two linear programs the threshold's fractional program
    splits into; ``which`` selects the denominator branch (1 or 2).

    Variables: x_plus (m), x_minus (m), z_plus, w_plus, z_minus, w_minus, t.
    Scale is fixed by pinning the active denominator term to 1.
    """
    m, n = phi.shape
    zp, wp, zm, wm, t = 2 * m, 2 * m + 1, 2 * m + 2, 2 * m + 3, 2 * m + 4
    nv = 2 * m + 5
    rows, rhs, senses = [], [], []

    def row(vals: dict, b: float, sense: str):
        r = np.zeros(nv)
        for k, v in vals.items():
            r[k] = v
        rows.append(r)
        rhs.append(b)
        senses.append(sense)

    for j in range(n):
        row({zp: 1.0, **{i: -phi[i, j] for i in range(m)}}, 0.0, LE)
        row({wp: -1.0, **{i: phi[i, j] for i in range(m)}}, 0.0, LE)
        row({zm: 1.0, **{m + i: -phi[i, j] for i in range(m)}}, 0.0, LE)
        row({wm: -1.0, **{m + i: phi[i, j] for i in range(m)}}, 0.0, LE)
    row({**{i: 1.0 for i in range(m)}, t: -1.0}, 0.0, EQ)
    row({**{m + i: 1.0 for i in range(m)}, t: -1.0}, 0.0, EQ)
    if which == 1:
        row({wp: 1.0, wm: -1.0}, 1.0, EQ)
        row({zp: 1.0, zm: -1.0}, 1.0, LE)
    else:
        row({wp: 1.0, wm: -1.0}, 1.0, LE)
        row({zp: 1.0, zm: -1.0}, 1.0, EQ)

    c = np.zeros(nv)
    c[zp] = 1.0
    c[wm] = -1.0
    bounds = [(0.0, None)] * (2 * m) + [(0.0, None), (None, None), (None, None), (None, 0.0), (t_floor, None)]
    return LinearProgram(c, np.array(rows), np.array(rhs), senses, bounds)


def _solve_fractional(phi: np.ndarray, which: int):
    m = phi.shape[0]
    sol = solve_lp(_fractional_lp(phi, which))
    if sol.status != LpStatus.OPTIMAL:
        return None
    t = sol.x[2 * m + 4]
    if t < 1e-6:
        # Degenerate scale: an optimum with positive t always exists when
        # the constraint is enforceable, so pin t away from zero and redo.
        sol2 = solve_lp(_fractional_lp(phi, which, t_floor=1e-6))
        if sol2.status == LpStatus.OPTIMAL and sol2.objective_value >= sol.objective_value - SIGN_TOL:
            sol = sol2
            t = sol.x[2 * m + 4]
        else:
            return None
    xp = sol.x[:m] / t
    xm = sol.x[m:2 * m] / t
    return float(sol.objective_value), np.clip(xp, 0.0, None), np.clip(xm, 0.0, None)


@dataclass(frozen=True)
class _LambdaMinDetails:
    value: float
    witness: SeparationWitness
    undiscounted_only: bool
    attained: bool


def _lambda_min_details(phi: ObjectiveMatrix, endpoints=None) -> _LambdaMinDetails:
    if endpoints is None:
        upper, x_up = _maximin(phi.phi)
        lower, x_lo = _minimax(phi.phi)
    else:
        lower, x_lo, upper, x_up = endpoints
    if upper < -SIGN_TOL or lower > SIGN_TOL:
        raise NotEnforceableError("the constraint cannot be enforced at any discount factor")

    trivial = find_trivial(phi)
    if trivial is not None:
        wit = SeparationWitness.from_pair(phi, trivial, trivial)
        return _LambdaMinDetails(0.0, wit, False, True)

    if abs(upper) <= SIGN_TOL and abs(lower) <= SIGN_TOL:
        # The interval of enforceability is the single point 0: enforceable
        # only in the undiscounted limit.
        wit = SeparationWitness.from_pair(phi, MixedAction(x_up), MixedAction(x_lo))
        return _LambdaMinDetails(1.0, wit, True, True)

    if _column_dominant_2x2(phi.phi):
        best = _best_pure_pair(phi)
        if best is not None:
            lam, wit = best
            return _LambdaMinDetails(lam, wit, False, True)

    candidates = []
    for which in (1, 2):
        res = _solve_fractional(phi.phi, which)
        if res is not None:
            value, xp, xm = res
            candidates.append((-value, tuple(xp), tuple(xm), MixedAction(xp), MixedAction(xm)))
    if not candidates:
        # Both programs are feasible whenever the sandwich sets are
        # nonempty, so reaching this means the solver failed.
        raise SolverFailure("threshold programs did not solve")
    # Largest value wins; ties break toward the lexicographically smallest
    # weight vectors for determinism.
    candidates.sort(key=lambda cand: cand[:3])
    neg_value, _, _, tp, tm = candidates[0]
    lam = min(1.0, max(0.0, 1.0 + neg_value))
    wit = SeparationWitness.from_pair(phi, tp, tm)
    attained = wit.satisfies_pair_inequalities(lam, SIGN_TOL)
    undisc = lam >= 1.0 - SIGN_TOL
    return _LambdaMinDetails(lam, wit, undisc, attained)


def lambda_min(phi: ObjectiveMatrix) -> tuple[float, SeparationWitness]:
    """Smallest discount factor at which phi == 0 is enforceable, with a
    qualifying pair attaining it.  Raises NotEnforceableError otherwise."""
    d = _lambda_min_details(phi)
    return d.value, d.witness


def is_enforceable(phi: ObjectiveMatrix, lam: float) -> bool:
    """Whether phi == 0 can be enforced at discount factor lam."""
    if not 0.0 <= lam <= 1.0:
        raise InputError(f"discount factor {lam} outside [0, 1]")
    try:
        d = _lambda_min_details(phi)
    except NotEnforceableError:
        return False
    return lam >= d.value - SIGN_TOL


def analyze(phi: ObjectiveMatrix) -> EnforceabilityReport:
    """Full enforceability report: sandwich sets, interval, trivial
    strategy, threshold, optimizer pair, and the pure-pair restriction."""
    upper, x_up = _maximin(phi.phi)
    lower, x_lo = _minimax(phi.phi)
    plus_nonempty = upper >= -SIGN_TOL
    minus_nonempty = lower <= SIGN_TOL
    interval = (lower, upper) if lower <= upper + SIGN_TOL else None
    pure = lambda_min_pure(phi)

    if not (plus_nonempty and minus_nonempty):
        return EnforceabilityReport(
            plus_nonempty, minus_nonempty, None, interval, None, None, pure, False, None
        )
    d = _lambda_min_details(phi, endpoints=(lower, x_lo, upper, x_up))
    # lambda_min == 0 exactly when a trivial action exists, and the
    # optimizer pair is then (trivial, trivial).
    trivial = d.witness.tau_plus if d.value == 0.0 else None
    return EnforceabilityReport(
        plus_nonempty,
        minus_nonempty,
        trivial,
        interval,
        d.value,
        d.witness,
        pure,
        d.undiscounted_only,
        d.attained,
    )
