"""
Dense tableau simplex with Bland's anti-cycling rule

Solves min c·x subject to A x <= b, x >= 0. Slack columns are appended to A,
so the slack basis is the starting basis. Works on float arrays or, in exact
mode, on object arrays of Fractions.
"""
import logging
from fractions import Fraction
from typing import List, Optional, Sequence

import numpy as np

from . import config
from .exceptions import RidgeProxError, UnboundedProblemError

logger = logging.getLogger(__name__)


class Tableau:
    """
    Simplex tableau with one row per constraint plus a reduced-cost row

    Layout: rows 0..m-1 hold [A | I | b]; row m holds the reduced costs and,
    in its last cell, minus the current objective value.
    """

    def __init__(self, c: Sequence, A: Sequence[Sequence], b: Sequence, exact: bool = False, eps: Optional[float] = None):
        """
        Args:
            c: Cost vector of length n
            A: m x n constraint matrix
            b: Right-hand sides of length m
            exact: Use Fraction arithmetic (eps is then 0)
            eps: Pivot tolerance in float mode (default: configured PIVOT_TOL)
        """
        self.exact = exact
        self.eps = 0 if exact else (config.PIVOT_TOL if eps is None else eps)
        dtype = object if exact else float
        A = np.array(A, dtype=dtype)
        self.m, self.n = A.shape

        zero = Fraction(0) if exact else 0.0
        one = Fraction(1) if exact else 1.0
        self.tableau = np.full((self.m + 1, self.n + self.m + 1), zero, dtype=dtype)
        self.tableau[:self.m, :self.n] = A
        for i in range(self.m):
            self.tableau[i, self.n + i] = one
        self.tableau[:self.m, -1] = np.array(b, dtype=dtype)
        self.tableau[self.m, :self.n] = np.array(c, dtype=dtype)
        self.basis: List[int] = list(range(self.n, self.n + self.m))
        self.pivots = 0

    @property
    def rhs(self) -> np.ndarray:
        return self.tableau[:self.m, -1]

    @property
    def objective(self):
        return -self.tableau[self.m, -1]

    def pivot(self, pivot_row: int, pivot_col: int):
        """Make column pivot_col basic in row pivot_row"""
        self.basis[pivot_row] = pivot_col
        self.tableau[pivot_row, :] = self.tableau[pivot_row, :] / self.tableau[pivot_row, pivot_col]
        for i in range(self.m + 1):
            if i == pivot_row:
                continue
            factor = self.tableau[i, pivot_col]
            if factor != 0:
                self.tableau[i, :] = self.tableau[i, :] - factor * self.tableau[pivot_row, :]
        self.pivots += 1

    def restore_feasibility(self, col: int):
        """
        Pivot `col` into the row with the most negative right-hand side

        Restores a feasible basis when every row carries coefficient -1 in
        `col` (an error variable shared by all constraints).
        """
        rhs = self.rhs
        row = min(range(self.m), key=lambda i: (rhs[i], i))
        if rhs[row] >= 0:
            return
        self.pivot(row, col)
        if any(v < -self.eps for v in self.rhs):
            raise RidgeProxError(f"Column {col} does not restore a feasible basis")
        logger.debug(f"Feasible start after pivoting column {col} into row {row}")

    def entering_column(self) -> Optional[int]:
        """Smallest column index with negative reduced cost (Bland)"""
        costs = self.tableau[self.m, :-1]
        for j in range(self.n + self.m):
            if costs[j] < -self.eps:
                return j
        return None

    def leaving_row(self, col: int) -> Optional[int]:
        """Minimum ratio test; ties go to the row whose basic variable has the smallest index"""
        best_row, best_ratio = None, None
        for i in range(self.m):
            a = self.tableau[i, col]
            if a <= self.eps:
                continue
            ratio = self.tableau[i, -1] / a
            if best_row is None or ratio < best_ratio - self.eps:
                best_row, best_ratio = i, ratio
            elif abs(ratio - best_ratio) <= self.eps and self.basis[i] < self.basis[best_row]:
                best_row, best_ratio = i, ratio
        return best_row

    def solve(self, max_pivots: Optional[int] = None):
        """
        Run phase-two pivots until no reduced cost is negative

        Returns:
            The optimal objective value

        Raises:
            UnboundedProblemError: entering column with no positive entry
        """
        limit = max_pivots if max_pivots is not None else 50 * (self.m + self.n + 1)
        while True:
            col = self.entering_column()
            if col is None:
                break
            row = self.leaving_row(col)
            if row is None:
                raise UnboundedProblemError(f"Objective unbounded along column {col}")
            self.pivot(row, col)
            if self.pivots > limit:
                raise RidgeProxError(f"Simplex exceeded {limit} pivots")
        logger.debug(f"Simplex optimal after {self.pivots} pivots, objective {self.objective}")
        return self.objective

    def solution(self) -> np.ndarray:
        """Values of the n structural variables"""
        zero = Fraction(0) if self.exact else 0.0
        x = np.full(self.n + self.m, zero, dtype=self.tableau.dtype)
        for i, j in enumerate(self.basis):
            x[j] = self.tableau[i, -1]
        return x[:self.n]
