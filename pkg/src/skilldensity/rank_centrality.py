"""Spectral skill estimation: empirical transition matrix and its stationary law.

Observed win fractions are scaled into a row-stochastic matrix whose
stationary distribution estimates the canonically scaled skills. The exact
transition matrix built from true skills satisfies detailed balance with
respect to the canonical scaling, which gives an analytic correctness oracle.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.sparse as sparse

from .model import ComparisonGraph, ObservationMatrix, SkillVector

KIND_EMPIRICAL = "empirical"
KIND_ORACLE = "oracle"

# dense rows up to this dimension, sparse edge-list rows beyond
DENSE_LIMIT = 10_000


class RowStochasticityFailure(Exception):
    """Some diagonal entry of the empirical matrix went negative.

    Happens when a player has far more observed games than 2*n*p; the caller
    decides whether to retry with a larger p or smooth the data first.
    """

    def __init__(self, row: int, deficit: float):
        self.row = row
        self.deficit = deficit
        super().__init__(f"row {row} diagonal is negative by {deficit:.6g}")


class DisconnectedGraphError(Exception):
    """Estimation refused: players in different components cannot be compared."""

    def __init__(self, components: int):
        self.components = components
        super().__init__(f"comparison graph has {components} components")


@dataclass(frozen=True)
class TransitionMatrix:
    """Row-stochastic n x n matrix, dense ndarray or CSR for large n."""

    n: int
    rows: object
    kind: str

    def __post_init__(self) -> None:
        sums = self.row_sums()
        if np.abs(sums - 1.0).max() > 1e-12:
            raise ValueError("rows must sum to 1 within 1e-12")
        if self.is_dense:
            if float(self.rows.min()) < 0.0:
                raise ValueError("entries must be non-negative")
        elif self.rows.nnz and float(self.rows.data.min()) < 0.0:
            raise ValueError("entries must be non-negative")

    @property
    def is_dense(self) -> bool:
        return isinstance(self.rows, np.ndarray)

    def row_sums(self) -> np.ndarray:
        if self.is_dense:
            return self.rows.sum(axis=1)
        return np.asarray(self.rows.sum(axis=1)).ravel()

    def max_offdiagonal(self) -> float:
        if self.is_dense:
            off = self.rows - np.diag(np.diag(self.rows))
            return float(off.max()) if self.n > 1 else 0.0
        coo = self.rows.tocoo()
        mask = coo.row != coo.col
        return float(coo.data[mask].max()) if mask.any() else 0.0

    def left_multiply(self, v: np.ndarray) -> np.ndarray:
        """Distribution update v -> v @ rows."""
        if self.is_dense:
            return v @ self.rows
        return np.asarray(v @ self.rows).ravel()

    def dense(self) -> np.ndarray:
        return self.rows if self.is_dense else self.rows.toarray()


def build_transition(obs: ObservationMatrix, p: float, *, force_sparse: bool = False) -> TransitionMatrix:
    """Scale win fractions by 1/(2np) off the diagonal and complete each row to 1.

    Raises RowStochasticityFailure instead of silently substituting an
    arbitrary distribution when a diagonal would go negative.
    """
    if not 0.0 < p <= 1.0:
        raise ValueError(f"p must be in (0,1], got {p}")
    graph = obs.graph
    n = graph.n
    scale = 1.0 / (2.0 * n * p)
    frac_b, frac_a = obs.win_fraction_arrays()
    a, b = graph.edge_a, graph.edge_b

    off_row_sum = np.zeros(n)
    np.add.at(off_row_sum, a, frac_b * scale)
    np.add.at(off_row_sum, b, frac_a * scale)
    diag = 1.0 - off_row_sum
    worst = int(np.argmin(diag))
    if diag[worst] < 0.0:
        raise RowStochasticityFailure(row=worst, deficit=float(-diag[worst]))

    if n <= DENSE_LIMIT and not force_sparse:
        rows = np.zeros((n, n))
        rows[a, b] = frac_b * scale
        rows[b, a] = frac_a * scale
        rows[np.arange(n), np.arange(n)] = diag
        return TransitionMatrix(n=n, rows=rows, kind=KIND_EMPIRICAL)

    idx = np.arange(n, dtype=np.int64)
    coo_rows = np.concatenate([a.astype(np.int64), b.astype(np.int64), idx])
    coo_cols = np.concatenate([b.astype(np.int64), a.astype(np.int64), idx])
    coo_vals = np.concatenate([frac_b * scale, frac_a * scale, diag])
    rows = sparse.coo_matrix((coo_vals, (coo_rows, coo_cols)), shape=(n, n)).tocsr()
    return TransitionMatrix(n=n, rows=rows, kind=KIND_EMPIRICAL)


def oracle_transition(skills: SkillVector) -> TransitionMatrix:
    """Exact chain for known skills: off-diagonals alpha_j/(alpha_i+alpha_j)/(2n).

    Its stationary distribution is exactly the canonical scaling of the
    skills (detailed balance), so it serves as a correctness oracle for the
    whole estimation path.
    """
    values = skills.values
    n = skills.n
    pair = values[None, :] / (values[:, None] + values[None, :])
    rows = pair / (2.0 * n)
    np.fill_diagonal(rows, 0.0)
    np.fill_diagonal(rows, 1.0 - rows.sum(axis=1))
    return TransitionMatrix(n=n, rows=rows, kind=KIND_ORACLE)


@dataclass(frozen=True)
class StationaryResult:
    """Outcome of the power iteration; residual is the last L1 change per sweep."""

    pi_hat: np.ndarray
    iterations: int
    residual: float
    converged: bool


def power_iterate(matrix: TransitionMatrix, tol: float | None = None, max_iter: int = 100_000) -> StationaryResult:
    """Left power iteration from the uniform distribution.

    Stops when the L1 change per sweep drops to tol (default 1e-12 * n); the
    iterate is renormalized to the simplex every sweep to stop drift. A run
    that exhausts max_iter reports converged=False rather than guessing.
    """
    n = matrix.n
    if tol is None:
        tol = 1e-12 * n
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    v = np.full(n, 1.0 / n)
    residual = np.inf
    iterations = 0
    for iterations in range(1, max_iter + 1):
        w = matrix.left_multiply(v)
        w = w / w.sum()
        residual = float(np.abs(w - v).sum())
        v = w
        if residual <= tol:
            return StationaryResult(pi_hat=v, iterations=iterations, residual=residual, converged=True)
    return StationaryResult(pi_hat=v, iterations=iterations, residual=residual, converged=False)


def estimate_skills(pi_hat: np.ndarray) -> np.ndarray:
    """Normalize a stationary distribution so the best player's skill is 1."""
    pi_hat = np.asarray(pi_hat, dtype=float)
    if pi_hat.ndim != 1 or pi_hat.size == 0:
        raise ValueError("pi_hat must be a non-empty vector")
    if float(pi_hat.min()) < -1e-12:
        raise ValueError("pi_hat entries must be non-negative")
    top = float(pi_hat.max())
    if top <= 0.0:
        raise ValueError("cannot normalize an all-zero distribution")
    return np.clip(pi_hat, 0.0, None) / top


class Connectivity(NamedTuple):
    connected: bool
    components: int


def check_connected(graph: ComparisonGraph) -> Connectivity:
    """Union-find over the edge list; complete graphs short-circuit."""
    n = graph.n
    if graph.is_complete:
        return Connectivity(True, 1)
    parent = list(range(n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    components = n
    for i, j in zip(graph.edge_a.tolist(), graph.edge_b.tolist()):
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[ri] = rj
            components -= 1
    return Connectivity(components == 1, components)
