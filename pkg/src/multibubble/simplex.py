"""Linear algebra on the tangent space E of the probability simplex.

E = {x in R^q : sum(x) = 0} is always stored in ambient R^q coordinates
(mean-zero vectors), and operators on E are q x q symmetric matrices that
annihilate the all-ones vector.  No explicit (q-1)-dimensional basis is
used except where a computation needs one internally (`e_basis`).

Cell indices are 0-based throughout the library.
"""

from __future__ import annotations

from itertools import combinations
from typing import NamedTuple

import numpy as np

from .errors import DomainError, InvalidDimensionError

SUM_TOL = 1e-12
TIE_TOL = 1e-12
RANK_RTOL = 1e-10


def project_to_E(w) -> np.ndarray:
    """Orthogonal projection of ``w`` onto E (subtract the coordinate mean)."""
    w = np.asarray(w, dtype=float)
    if w.ndim != 1 or w.size < 2:
        raise InvalidDimensionError(f"need a vector with q >= 2 entries, got shape {w.shape}")
    return w - w.mean()


def as_shift(x, tol: float = SUM_TOL) -> np.ndarray:
    """Validate a point of E; returns a float copy."""
    x = np.array(x, dtype=float)
    if x.ndim != 1 or x.size < 2:
        raise InvalidDimensionError(f"shift must be a vector with q >= 2 entries, got shape {x.shape}")
    if abs(x.sum()) > tol * max(1.0, np.abs(x).max()):
        raise DomainError(f"shift coordinates must sum to 0 (sum = {x.sum():.3e})")
    return x


def as_measure(v, tol: float = SUM_TOL, interior: bool = False) -> np.ndarray:
    """Validate a point of the probability simplex.

    With ``interior=True`` every coordinate must be strictly positive.
    """
    v = np.array(v, dtype=float)
    if v.ndim != 1 or v.size < 2:
        raise InvalidDimensionError(f"measure vector must have q >= 2 entries, got shape {v.shape}")
    if np.any(v < 0) or np.any(v > 1) or abs(v.sum() - 1.0) > tol:
        raise DomainError(f"not a probability vector: {v}")
    if interior and v.min() <= 0:
        raise DomainError(f"measure vector is not interior: {v}")
    return v


def check_area_table(A) -> np.ndarray:
    A = np.array(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 2:
        raise InvalidDimensionError(f"area table must be q x q with q >= 2, got {A.shape}")
    if not np.allclose(A, A.T, rtol=0, atol=1e-14):
        raise DomainError("area table must be symmetric")
    if np.any(np.diag(A) != 0):
        raise DomainError("area table must have zero diagonal")
    if np.any(A < 0):
        raise DomainError("areas must be nonnegative")
    return A


def edge_graph_connected(A) -> bool:
    """True if the graph with edges {A_ij > 0} is connected."""
    A = np.asarray(A)
    q = A.shape[0]
    seen = {0}
    stack = [0]
    while stack:
        i = stack.pop()
        for j in np.flatnonzero(A[i] > 0):
            if j not in seen:
                seen.add(int(j))
                stack.append(int(j))
    return len(seen) == q


def build_LA(A) -> np.ndarray:
    """L_A = sum_{i<j} A_ij (e_i - e_j)(e_i - e_j)^T, i.e. the weighted graph Laplacian."""
    A = check_area_table(A)
    return np.diag(A.sum(axis=1)) - A


def e_basis(q: int) -> np.ndarray:
    """An orthonormal basis of E as the columns of a q x (q-1) matrix."""
    if q < 2:
        raise InvalidDimensionError("q must be >= 2")
    # Helmert-type basis: column k is (1,...,1,-k,0,...)/sqrt(k(k+1)).
    U = np.zeros((q, q - 1))
    for k in range(1, q):
        U[:k, k - 1] = 1.0
        U[k, k - 1] = -k
        U[:, k - 1] /= np.sqrt(k * (k + 1))
    return U


def restrict_to_E(L) -> np.ndarray:
    """Matrix of ``L`` in the orthonormal basis `e_basis(q)`."""
    L = np.asarray(L, dtype=float)
    U = e_basis(L.shape[0])
    return U.T @ L @ U


class PinvResult(NamedTuple):
    pinv: np.ndarray
    rank: int
    degenerate: bool


def pinv_on_E(L) -> PinvResult:
    """Moore-Penrose inverse of an operator on E.

    ``degenerate`` is set when the operator is not invertible on E, i.e. its
    rank is below q-1.  Rank uses a singular-value cutoff of 1e-10 relative
    to the largest singular value.
    """
    L = np.asarray(L, dtype=float)
    q = L.shape[0]
    U = e_basis(q)
    Lr = U.T @ L @ U
    Lr = 0.5 * (Lr + Lr.T)
    w, V = np.linalg.eigh(Lr)
    scale = np.abs(w).max() if w.size else 0.0
    keep = np.abs(w) > RANK_RTOL * scale if scale > 0 else np.zeros_like(w, dtype=bool)
    inv_w = np.zeros_like(w)
    inv_w[keep] = 1.0 / w[keep]
    P = U @ (V * inv_w) @ V.T @ U.T
    rank = int(keep.sum())
    return PinvResult(0.5 * (P + P.T), rank, rank < q - 1)


def trace_on_E(L) -> float:
    return float(np.trace(restrict_to_E(L)))


def equidistant_points(q: int, n: int) -> np.ndarray:
    """q points in R^n with pairwise distances sqrt(2), centred at the origin.

    Returned as a q x n array; the points span a (q-1)-dimensional subspace.
    """
    if q < 2:
        raise InvalidDimensionError("q must be >= 2")
    if n < q - 1:
        raise InvalidDimensionError(f"need n >= q-1 (q={q}, n={n})")
    # Rows of e_basis are the projections e_i - ones/q written in an
    # orthonormal basis of E, so the isometry preserves |e_i - e_j| = sqrt(2).
    P = np.zeros((q, n))
    P[:, : q - 1] = e_basis(q)
    return P


class ConeFrame(NamedTuple):
    vectors: np.ndarray
    gram: np.ndarray


def cone_frame(kind: str) -> ConeFrame:
    """Unit directions of the model cones Y (three half-lines at 120 degrees)
    and T (four half-lines in E^(3) at arccos(-1/3))."""
    if kind == "Y":
        q = 3
    elif kind == "T":
        q = 4
    else:
        raise ValueError(f"unknown cone kind {kind!r}; expected 'Y' or 'T'")
    V = np.eye(q) - 1.0 / q
    V /= np.linalg.norm(V, axis=1, keepdims=True)
    return ConeFrame(V, V @ V.T)


class Membership(NamedTuple):
    cell: int | None
    tied: tuple[int, ...]


def model_cell_membership(z, x, tol: float = TIE_TOL) -> Membership:
    """Which cell of the shifted model cluster x + Omega^m contains z.

    Returns ``Membership(i, (i,))`` for an interior point of cell ``i`` and
    ``Membership(None, tied)`` on a boundary, listing the tied cells.
    """
    z = as_shift(z)
    x = as_shift(x)
    if z.size != x.size:
        raise InvalidDimensionError("z and x must have the same q")
    s = z - x
    top = s.max()
    tied = tuple(int(i) for i in np.flatnonzero(s >= top - tol))
    if len(tied) == 1:
        return Membership(tied[0], tied)
    return Membership(None, tied)


def pairs(q: int):
    """Unordered pairs (i, j), i < j, in lexicographic order."""
    return combinations(range(q), 2)
