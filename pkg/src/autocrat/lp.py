"""Dense linear-program solver for the small programs used by the analysis.

Two-phase tableau simplex, Bland's anti-cycling rule throughout.  Every
program here is tiny (tens of variables at most), so the implementation
favors robustness and determinism over speed: identical inputs pivot
identically and yield bit-identical solutions, and scaling the objective
by a positive constant leaves the returned vertex unchanged.

Equality rows are handled as two inequalities internally (one code path);
general variable bounds are reduced to shifted/split nonnegative variables.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .errors import InputError, SolverFailure

FEAS_TOL = 1e-9
PIVOT_TOL = 1e-10

LE, EQ, GE = "<=", "=", ">="


class LpStatus(Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LinearProgram:
    """maximize c @ x subject to row senses and per-variable bounds.

    ``senses`` holds one of "<=", "=", ">=" per row of A; ``bounds`` holds a
    (lower, upper) pair per variable with None meaning unbounded.  Omitted
    bounds default to (0, None).
    """

    c: np.ndarray
    A: np.ndarray
    b: np.ndarray
    senses: tuple[str, ...]
    bounds: tuple[tuple[Optional[float], Optional[float]], ...]

    def __init__(self, c, A, b, senses, bounds=None):
        c = np.asarray(c, dtype=float)
        A = np.asarray(A, dtype=float)
        b = np.asarray(b, dtype=float)
        if A.ndim != 2:
            A = A.reshape(len(b), -1)
        k, n = A.shape
        if c.shape != (n,) or b.shape != (k,):
            raise InputError(f"inconsistent LP dimensions: A {A.shape}, c {c.shape}, b {b.shape}")
        if not (np.all(np.isfinite(c)) and np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
            raise InputError("LP coefficients must be finite")
        senses = tuple(senses)
        if len(senses) != k or any(s not in (LE, EQ, GE) for s in senses):
            raise InputError(f"senses must be one of {LE}, {EQ}, {GE} per row")
        if bounds is None:
            bounds = tuple((0.0, None) for _ in range(n))
        else:
            bounds = tuple((lo, hi) for lo, hi in bounds)
            if len(bounds) != n:
                raise InputError("one bound pair per variable required")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "senses", senses)
        object.__setattr__(self, "bounds", bounds)


@dataclass(frozen=True)
class LpSolution:
    status: LpStatus
    x: Optional[np.ndarray]
    objective_value: Optional[float]


def solve_lp(lp: LinearProgram) -> LpSolution:
    """Solve the program; raises SolverFailure only on iteration blowup."""
    std = _Standardized(lp)
    if std.trivially_infeasible:
        return LpSolution(LpStatus.INFEASIBLE, None, None)
    tab = _Tableau(std.A, std.b)
    if not tab.phase1():
        return LpSolution(LpStatus.INFEASIBLE, None, None)
    bounded = tab.phase2(std.c)
    if not bounded:
        return LpSolution(LpStatus.UNBOUNDED, None, None)
    x = std.recover(tab.solution())
    _check_feasibility(lp, x)
    return LpSolution(LpStatus.OPTIMAL, x, float(lp.c @ x))


def feasible(lp: LinearProgram) -> bool:
    """Phase-1 result only: does any point satisfy all constraints and bounds?"""
    std = _Standardized(lp)
    if std.trivially_infeasible:
        return False
    tab = _Tableau(std.A, std.b)
    return tab.phase1()


def _check_feasibility(lp: LinearProgram, x: np.ndarray) -> None:
    lhs = lp.A @ x
    for i, s in enumerate(lp.senses):
        r = lhs[i] - lp.b[i]
        bad = (s == LE and r > FEAS_TOL) or (s == GE and r < -FEAS_TOL) or (s == EQ and abs(r) > FEAS_TOL)
        if bad:
            raise SolverFailure(f"solution violates row {i} by {r}")
    for j, (lo, hi) in enumerate(lp.bounds):
        if lo is not None and x[j] < lo - FEAS_TOL:
            raise SolverFailure(f"solution violates lower bound on x[{j}]")
        if hi is not None and x[j] > hi + FEAS_TOL:
            raise SolverFailure(f"solution violates upper bound on x[{j}]")


class _Standardized:
    """Rewrite an LP as: maximize c @ y with A y <= b, y >= 0.

    Variables with a finite lower bound are shifted; upper-only variables
    are flipped; free variables are split into a positive difference.
    Equalities become a <=/>= pair, and >= rows are negated.
    """

    def __init__(self, lp: LinearProgram):
        self.trivially_infeasible = False
        n = lp.A.shape[1]
        cols = []          # one (coef_vector_over_y_cols,) per original var
        self._recover_ops = []  # (kind, y_indices, constant)
        shift = np.zeros(lp.A.shape[0])
        extra_rows = []    # rows for finite upper bounds, in y space
        extra_rhs = []
        y_count = 0
        col_of_var = []
        for j, (lo, hi) in enumerate(lp.bounds):
            if lo is not None and hi is not None and lo > hi:
                self.trivially_infeasible = True
            if lo is not None:
                # x = lo + y
                col_of_var.append((("shift", y_count, lo), +1.0))
                if hi is not None:
                    extra_rows.append((y_count, 1.0))
                    extra_rhs.append(hi - lo)
                y_count += 1
            elif hi is not None:
                # x = hi - y
                col_of_var.append((("flip", y_count, hi), -1.0))
                y_count += 1
            else:
                # x = y+ - y-
                col_of_var.append((("free", y_count, 0.0), None))
                y_count += 2

        A_rows = []
        b_rows = []
        for i in range(lp.A.shape[0]):
            s = lp.senses[i]
            if s in (LE, EQ):
                A_rows.append((lp.A[i], lp.b[i], +1.0))
            if s in (GE, EQ):
                A_rows.append((lp.A[i], lp.b[i], -1.0))

        m = len(A_rows) + len(extra_rows)
        A = np.zeros((m, y_count))
        b = np.zeros(m)
        for r, (row, rhs, sgn) in enumerate(A_rows):
            rhs_adj = rhs
            for j in range(n):
                (kind, y0, const), _ = col_of_var[j]
                if kind == "shift":
                    A[r, y0] += sgn * row[j]
                    rhs_adj -= row[j] * const
                elif kind == "flip":
                    A[r, y0] -= sgn * row[j]
                    rhs_adj -= row[j] * const
                else:
                    A[r, y0] += sgn * row[j]
                    A[r, y0 + 1] -= sgn * row[j]
            b[r] = sgn * rhs_adj
        base = len(A_rows)
        for r, (y0, coef) in enumerate(extra_rows):
            A[base + r, y0] = coef
            b[base + r] = extra_rhs[r]

        c = np.zeros(y_count)
        for j in range(n):
            (kind, y0, const), _ = col_of_var[j]
            if kind == "shift":
                c[y0] += lp.c[j]
            elif kind == "flip":
                c[y0] -= lp.c[j]
            else:
                c[y0] += lp.c[j]
                c[y0 + 1] -= lp.c[j]
        self.A, self.b, self.c = A, b, c
        self._col_of_var = col_of_var
        self._n = n

    def recover(self, y: np.ndarray) -> np.ndarray:
        x = np.zeros(self._n)
        for j in range(self._n):
            (kind, y0, const), _ = self._col_of_var[j]
            if kind == "shift":
                x[j] = const + y[y0]
            elif kind == "flip":
                x[j] = const - y[y0]
            else:
                x[j] = y[y0] - y[y0 + 1]
        return x


class _Tableau:
    """Two-phase simplex over A y <= b, y >= 0 with Bland's rule."""

    def __init__(self, A: np.ndarray, b: np.ndarray):
        self.m, self.n = A.shape
        self.A0, self.b0 = A, b
        self.M = None
        self.basis = None
        self.ncols = None
        self.max_iter = 10 * (self.m + self.n) ** 2 + 100

    def phase1(self) -> bool:
        m, n = self.m, self.n
        neg = self.b0 < 0
        n_art = int(neg.sum())
        # columns: structural | slacks | artificials | rhs
        ncols = n + m + n_art
        M = np.zeros((m + 1, ncols + 1))
        M[:m, :n] = self.A0
        M[:m, n:n + m] = np.eye(m)
        M[:m, ncols] = self.b0
        art = 0
        basis = []
        for i in range(m):
            if neg[i]:
                M[i, :] *= -1.0
                M[i, n + m + art] = 1.0
                basis.append(n + m + art)
                art += 1
            else:
                basis.append(n + i)
        # maximize -(sum of artificials): objective row holds reduced costs
        c1 = np.zeros(ncols)
        c1[n + m:] = -1.0
        M[m, :ncols] = -c1
        for r, col in enumerate(basis):
            if M[m, col] != 0.0:
                M[m, :] -= M[m, col] * M[r, :]
        self.M, self.basis, self.ncols = M, basis, ncols
        self._iterate()
        if M[m, ncols] < -FEAS_TOL:
            return False
        self._purge_artificials(n_art)
        return True

    def _purge_artificials(self, n_art: int) -> None:
        # Pivot any artificial still basic (at level ~0) onto a real column,
        # or drop its row as redundant.
        if n_art == 0:
            self._drop_artificial_columns(0)
            return
        m, n = self.m, self.n
        first_art = n + m
        for r in range(m):
            if self.basis[r] >= first_art:
                row = self.M[r, :first_art]
                cand = np.nonzero(np.abs(row) > PIVOT_TOL)[0]
                if cand.size:
                    self._pivot(r, int(cand[0]))
                else:
                    self.M[r, :] = 0.0
                    self.basis[r] = -1
        self._drop_artificial_columns(n_art)

    def _drop_artificial_columns(self, n_art: int) -> None:
        if n_art:
            keep = list(range(self.n + self.m)) + [self.ncols]
            self.M = self.M[:, keep]
            self.ncols = self.n + self.m

    def phase2(self, c: np.ndarray) -> bool:
        m, n = self.m, self.n
        M = self.M
        M[m, :] = 0.0
        M[m, :n] = -c
        for r, col in enumerate(self.basis):
            if col >= 0 and M[m, col] != 0.0:
                M[m, :] -= M[m, col] * M[r, :]
        return self._iterate()

    def _iterate(self) -> bool:
        M, basis, ncols, m = self.M, self.basis, self.ncols, self.m
        for _ in range(self.max_iter):
            obj = M[m, :ncols]
            enter = -1
            for j in range(ncols):
                if obj[j] < -PIVOT_TOL:
                    enter = j
                    break
            if enter < 0:
                return True
            col = M[:m, enter]
            best_r, best_ratio, best_var = -1, np.inf, np.inf
            for r in range(m):
                if basis[r] < 0 or col[r] <= PIVOT_TOL:
                    continue
                ratio = M[r, ncols] / col[r]
                # Bland: smallest ratio, ties broken by smallest basic index
                if ratio < best_ratio - 1e-15 or (abs(ratio - best_ratio) <= 1e-15 and basis[r] < best_var):
                    best_r, best_ratio, best_var = r, ratio, basis[r]
            if best_r < 0:
                return False
            self._pivot(best_r, enter)
        raise SolverFailure(f"simplex exceeded {self.max_iter} iterations")

    def _pivot(self, r: int, c: int) -> None:
        M = self.M
        M[r, :] /= M[r, c]
        for i in range(M.shape[0]):
            if i != r and M[i, c] != 0.0:
                M[i, :] -= M[i, c] * M[r, :]
        self.basis[r] = c

    def solution(self) -> np.ndarray:
        y = np.zeros(self.n + self.m)
        for r, col in enumerate(self.basis):
            if 0 <= col < self.n + self.m:
                y[col] = self.M[r, self.ncols]
        return y[:self.n]
