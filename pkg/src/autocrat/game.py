"""Stage games, mixed actions, and objective functions.

A stage game carries two payoff matrices over finite action sets.  An
objective is an m-by-n matrix giving the target value of every joint
action; linear payoff relationships (alpha*u_X + beta*u_Y + gamma, or the
(kappa, chi) family kappa - u_X - chi*(kappa - u_Y)) are built from a
game.  Everything here is immutable and purely functional.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import InputError

# Simplex weights must sum to 1 this tightly after construction.
SUM_TOL = 1e-12
# Constructors silently renormalize sums off by at most this much and
# reject anything worse: separates float noise from genuine mistakes.
RENORM_TOL = 1e-9
ADDITIVE_TOL = 1e-9


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class ActionSet:
    """Ordered, distinct action labels; order fixes matrix row/column order."""

    labels: tuple[str, ...]

    def __init__(self, labels: Sequence[str]):
        labels = tuple(str(x) for x in labels)
        if not labels:
            raise InputError("action set must be nonempty")
        if len(set(labels)) != len(labels):
            raise InputError(f"action labels must be distinct: {labels}")
        object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise InputError(f"unknown action {label!r}; have {self.labels}") from None


@dataclass(frozen=True)
class StageGame:
    """Two payoff matrices over finite action sets (rows: X, columns: Y)."""

    actions_x: ActionSet
    actions_y: ActionSet
    u_x: np.ndarray
    u_y: np.ndarray

    def __post_init__(self):
        shape = (len(self.actions_x), len(self.actions_y))
        u_x = _freeze(self.u_x)
        u_y = _freeze(self.u_y)
        for name, m in (("u_x", u_x), ("u_y", u_y)):
            if m.shape != shape:
                raise InputError(f"{name} has shape {m.shape}, expected {shape}")
            if not np.all(np.isfinite(m)):
                raise InputError(f"{name} contains non-finite entries")
        object.__setattr__(self, "u_x", u_x)
        object.__setattr__(self, "u_y", u_y)

    @property
    def shape(self) -> tuple[int, int]:
        return (len(self.actions_x), len(self.actions_y))

    def to_json_dict(self) -> dict:
        return {
            "actions_x": list(self.actions_x.labels),
            "actions_y": list(self.actions_y.labels),
            "u_x": self.u_x.tolist(),
            "u_y": self.u_y.tolist(),
        }

    @staticmethod
    def from_json_dict(d: dict) -> "StageGame":
        try:
            return StageGame(
                ActionSet(d["actions_x"]),
                ActionSet(d["actions_y"]),
                np.asarray(d["u_x"], dtype=float),
                np.asarray(d["u_y"], dtype=float),
            )
        except KeyError as e:
            raise InputError(f"stage-game JSON missing key {e}") from None

    @staticmethod
    def from_json_file(path: str) -> "StageGame":
        with open(path) as fh:
            try:
                d = json.load(fh)
            except json.JSONDecodeError as e:
                raise InputError(f"malformed JSON in {path}: {e}") from None
        return StageGame.from_json_dict(d)


@dataclass(frozen=True)
class MixedAction:
    """A probability vector over one player's actions."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise InputError("mixed action must be a nonempty 1-d vector")
        if np.any(w < -SUM_TOL) or np.any(w > 1.0 + RENORM_TOL):
            raise InputError(f"mixed-action weights outside [0,1]: {w}")
        w = np.clip(w, 0.0, None)
        s = w.sum()
        if abs(s - 1.0) > RENORM_TOL:
            raise InputError(f"mixed-action weights sum to {s}, not 1")
        if abs(s - 1.0) > SUM_TOL:
            w = w / s
        object.__setattr__(self, "weights", _freeze(w))

    def __len__(self) -> int:
        return len(self.weights)

    def __getitem__(self, i: int) -> float:
        return float(self.weights[i])

    @staticmethod
    def dirac(n: int, i: int) -> "MixedAction":
        w = np.zeros(n)
        w[i] = 1.0
        return MixedAction(w)

    @staticmethod
    def uniform(n: int) -> "MixedAction":
        return MixedAction(np.full(n, 1.0 / n))

    def tolist(self) -> list[float]:
        return [float(x) for x in self.weights]


def mix(p: float, plus: MixedAction, minus: MixedAction) -> MixedAction:
    """Point p*plus + (1-p)*minus on the segment between two mixed actions."""
    return MixedAction(p * plus.weights + (1.0 - p) * minus.weights)


@dataclass(frozen=True)
class ObjectiveMatrix:
    """The target function over joint actions, optionally with an additive split.

    When ``additive`` is present it is a pair (phi_x, phi_y) of vectors with
    phi[i, j] == phi_x[i] + phi_y[j] (checked to 1e-9) and phi_x[0] == 0.
    """

    phi: np.ndarray
    additive: Optional[tuple[np.ndarray, np.ndarray]] = field(default=None)

    def __post_init__(self):
        phi = _freeze(self.phi)
        if phi.ndim != 2 or 0 in phi.shape:
            raise InputError("objective must be a nonempty 2-d matrix")
        if not np.all(np.isfinite(phi)):
            raise InputError("objective contains non-finite entries")
        object.__setattr__(self, "phi", phi)
        if self.additive is not None:
            px, py = self.additive
            px, py = _freeze(px), _freeze(py)
            if px.shape != (phi.shape[0],) or py.shape != (phi.shape[1],):
                raise InputError("additive parts have wrong shape")
            err = np.max(np.abs(phi - (px[:, None] + py[None, :])))
            if err > ADDITIVE_TOL:
                raise InputError(f"additive decomposition off by {err}")
            object.__setattr__(self, "additive", (px, py))

    @property
    def shape(self) -> tuple[int, int]:
        return self.phi.shape

    def scaled(self, s: float) -> "ObjectiveMatrix":
        add = None
        if self.additive is not None:
            add = (s * self.additive[0], s * self.additive[1])
        return ObjectiveMatrix(s * self.phi, add)


@dataclass(frozen=True)
class LinearRelationSpec:
    """Coefficients of a linear payoff relationship.

    Either the general form alpha*u_X + beta*u_Y + gamma with
    (alpha, beta) != (0, 0), or the (kappa, chi) family, which expands to
    alpha=-1, beta=chi, gamma=kappa*(1-chi).
    """

    alpha: float
    beta: float
    gamma: float
    kappa: Optional[float] = None
    chi: Optional[float] = None

    def __post_init__(self):
        if self.alpha == 0.0 and self.beta == 0.0 and self.gamma != 0.0:
            # The all-zero relation is allowed (phi identically zero).
            raise InputError("(alpha, beta) = (0, 0) with gamma != 0 is vacuous")

    @staticmethod
    def from_coefficients(alpha: float, beta: float, gamma: float) -> "LinearRelationSpec":
        return LinearRelationSpec(float(alpha), float(beta), float(gamma))

    @staticmethod
    def from_kappa_chi(kappa: float, chi: float) -> "LinearRelationSpec":
        kappa, chi = float(kappa), float(chi)
        return LinearRelationSpec(-1.0, chi, kappa * (1.0 - chi), kappa=kappa, chi=chi)

    @staticmethod
    def from_json_dict(d: dict) -> "LinearRelationSpec":
        if "kappa" in d and "chi" in d:
            return LinearRelationSpec.from_kappa_chi(d["kappa"], d["chi"])
        if {"alpha", "beta", "gamma"} <= d.keys():
            return LinearRelationSpec.from_coefficients(d["alpha"], d["beta"], d["gamma"])
        raise InputError(f"objective JSON needs kappa/chi or alpha/beta/gamma, got {sorted(d)}")


def objective_from_json_dict(d: dict, game: Optional[StageGame]) -> ObjectiveMatrix:
    """Build an objective from one of the accepted JSON forms.

    Accepts {"phi": [[...]]}, {"alpha":a, "beta":b, "gamma":g}, or
    {"kappa":k, "chi":c}; the latter two require a game.
    """
    if "phi" in d:
        phi = ObjectiveMatrix(np.asarray(d["phi"], dtype=float))
        dec = decompose_additive(phi, ADDITIVE_TOL)
        return ObjectiveMatrix(phi.phi, dec)
    rel = LinearRelationSpec.from_json_dict(d)
    if game is None:
        raise InputError("a stage game is required to expand a linear relation")
    return build_linear_phi(game, rel)


def build_linear_phi(game: StageGame, rel: LinearRelationSpec) -> ObjectiveMatrix:
    """Evaluate alpha*u_X + beta*u_Y + gamma entrywise, attaching an additive
    decomposition whenever one exists."""
    phi = rel.alpha * game.u_x + rel.beta * game.u_y + rel.gamma
    dec = decompose_additive(ObjectiveMatrix(phi), ADDITIVE_TOL)
    return ObjectiveMatrix(phi, dec)


def eval_mixed(phi: ObjectiveMatrix, tau: MixedAction, s_y: int) -> float:
    """Linear extension of the objective to mixed actions in the row slot."""
    n = phi.shape[1]
    if not 0 <= s_y < n:
        raise InputError(f"opponent action index {s_y} out of range [0, {n})")
    if len(tau) != phi.shape[0]:
        raise InputError("mixed action length does not match objective rows")
    return float(tau.weights @ phi.phi[:, s_y])


def mixed_row(phi: ObjectiveMatrix, tau: MixedAction) -> np.ndarray:
    """Vector of phi(tau, s_y) over all opponent actions."""
    if len(tau) != phi.shape[0]:
        raise InputError("mixed action length does not match objective rows")
    return tau.weights @ phi.phi


def row_envelope(phi: ObjectiveMatrix, tau: MixedAction) -> tuple[float, float]:
    """Worst and best objective value over the opponent's actions at tau."""
    row = mixed_row(phi, tau)
    return float(row.min()), float(row.max())


def decompose_additive(
    phi: ObjectiveMatrix, tol: float = ADDITIVE_TOL
) -> Optional[tuple[np.ndarray, np.ndarray]]:
    """Split phi into phi_x(s_X) + phi_y(s_Y) when possible.

    Returns the pair normalized so phi_x[0] == 0 (the split is only unique
    up to a constant shift), or None when any second difference
    phi[i,j] - phi[i,0] - phi[0,j] + phi[0,0] exceeds ``tol``.
    """
    if tol <= 0:
        raise InputError("tolerance must be positive")
    m = phi.phi
    second = m - m[:, :1] - m[:1, :] + m[0, 0]
    if np.max(np.abs(second)) > tol:
        return None
    phi_x = m[:, 0] - m[0, 0]
    phi_y = m[0, :].copy()
    return _freeze(phi_x), _freeze(phi_y)


def with_additive(phi: ObjectiveMatrix, tol: float = ADDITIVE_TOL) -> ObjectiveMatrix:
    """Return phi with its additive decomposition attached if one exists."""
    if phi.additive is not None:
        return phi
    dec = decompose_additive(phi, tol)
    return ObjectiveMatrix(phi.phi, dec) if dec is not None else phi
