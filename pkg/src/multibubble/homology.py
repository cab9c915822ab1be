"""Incidence complex of a cluster and its homology.

Vertices are nonempty cells, edges are interfaces of positive area and
triangles are nonempty triple junctions.  Betti numbers are computed from
exact rational ranks of the boundary matrices.  `recover_B` reconstructs a
linear map B with n_ij = B(e_j - e_i) from edge normals, which is possible
precisely when the normals sum to zero around every cycle of the edge graph.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import NamedTuple

import numpy as np

from .errors import ClosureError, InconsistencyError, InvalidDimensionError, UnderdeterminedError
from .gauss import McSpec
from .pullback import EDGE_TOL, PullbackCluster, cell_measures, interface_areas, triple_junction_nonempty
from .simplex import pinv_on_E

CYCLE_TOL = 1e-6
CYCLE_REJECT = 1e-3


def _edge(i, j):
    return (i, j) if i < j else (j, i)


@dataclass(frozen=True)
class IncidenceComplex:
    vertices: frozenset
    edges: frozenset
    triangles: frozenset

    def __post_init__(self):
        V = frozenset(int(v) for v in self.vertices)
        E = frozenset(_edge(int(i), int(j)) for i, j in self.edges)
        T = frozenset(tuple(sorted(int(a) for a in t)) for t in self.triangles)
        for i, j in E:
            if i == j:
                raise ClosureError(f"edge ({i}, {j}) is a loop")
            if i not in V or j not in V:
                raise ClosureError(f"edge ({i}, {j}) has an endpoint that is not a vertex")
        for t in T:
            if len(set(t)) != 3:
                raise ClosureError(f"triangle {t} needs three distinct vertices")
            for e in combinations(t, 2):
                if e not in E:
                    raise ClosureError(f"triangle {t} is missing its edge {e}")
        object.__setattr__(self, "vertices", V)
        object.__setattr__(self, "edges", E)
        object.__setattr__(self, "triangles", T)

    @classmethod
    def from_json(cls, data: dict) -> "IncidenceComplex":
        """Parse ``{"q": int, "edges": [[i, j], ...], "triangles": [[i, j, k], ...]}``.

        Cells are numbered 1..q in the JSON form and all q cells are vertices.
        """
        try:
            q = int(data["q"])
            edges = [tuple(int(a) - 1 for a in e) for e in data.get("edges", [])]
            tris = [tuple(int(a) - 1 for a in t) for t in data.get("triangles", [])]
        except (KeyError, TypeError, ValueError) as exc:
            raise ClosureError(f"malformed complex: {exc}") from exc
        if q < 1:
            raise ClosureError("q must be positive")
        if any(len(e) != 2 for e in edges) or any(len(t) != 3 for t in tris):
            raise ClosureError("edges need two entries and triangles three")
        return cls(frozenset(range(q)), frozenset(edges), frozenset(tris))

    def to_json(self) -> dict:
        return {
            "q": max(self.vertices) + 1 if self.vertices else 0,
            "vertices": [v + 1 for v in sorted(self.vertices)],
            "edges": [[i + 1, j + 1] for i, j in sorted(self.edges)],
            "triangles": [[a + 1 for a in t] for t in sorted(self.triangles)],
        }

    def boundary_matrices(self):
        """(d1, d2) as integer arrays with rows/columns in sorted order."""
        V = sorted(self.vertices)
        E = sorted(self.edges)
        T = sorted(self.triangles)
        vi = {v: k for k, v in enumerate(V)}
        ei = {e: k for k, e in enumerate(E)}
        d1 = np.zeros((len(V), len(E)), dtype=int)
        for k, (i, j) in enumerate(E):
            d1[vi[i], k] = -1
            d1[vi[j], k] = 1
        d2 = np.zeros((len(E), len(T)), dtype=int)
        for k, (a, b, c) in enumerate(T):
            d2[ei[(b, c)], k] += 1
            d2[ei[(a, c)], k] -= 1
            d2[ei[(a, b)], k] += 1
        return d1, d2


def rank_rational(M) -> int:
    """Exact rank over Q by fraction-valued Gaussian elimination."""
    rows = [[Fraction(int(x)) for x in r] for r in np.asarray(M)]
    if not rows or not rows[0]:
        return 0
    ncol = len(rows[0])
    rank = 0
    for c in range(ncol):
        piv = next((r for r in range(rank, len(rows)) if rows[r][c] != 0), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        p = rows[rank]
        for r in range(len(rows)):
            if r != rank and rows[r][c] != 0:
                f = rows[r][c] / p[c]
                rows[r] = [a - f * b for a, b in zip(rows[r], p)]
        rank += 1
        if rank == len(rows):
            break
    return rank


def homology_ranks(S: IncidenceComplex) -> tuple[int, int]:
    """(b0, b1) over the rationals."""
    d1, d2 = S.boundary_matrices()
    r1 = rank_rational(d1) if d1.size else 0
    r2 = rank_rational(d2) if d2.size else 0
    b0 = len(S.vertices) - r1
    b1 = len(S.edges) - r1 - r2
    return b0, b1


def build_complex(C: PullbackCluster, method: str = "auto", mc: McSpec = McSpec(),
                  measure_tol: float = 1e-9, area_tol: float = 1e-9) -> IncidenceComplex:
    """Incidence complex of a pull-back cluster.

    Edges need area above max(area_tol, 3 standard errors); triangles are
    LP-feasible triple junctions whose three edges are present.  These are
    fixed thresholds: a triple junction of size near the LP slack can flip
    between runs with different MC noise.
    """
    meas, _ = cell_measures(C, method, mc)
    table = interface_areas(C, method, mc)
    V = {i for i in range(C.q) if meas[i] > measure_tol}
    E = set()
    for i, j in combinations(sorted(V), 2):
        if table.degenerate[i, j] or C.edge_length(i, j) <= EDGE_TOL:
            continue
        if table.areas[i, j] > max(area_tol, 3 * table.stderr[i, j]):
            E.add((i, j))
    T = set()
    for t in combinations(sorted(V), 3):
        if all(e in E for e in combinations(t, 2)) and triple_junction_nonempty(C, *t):
            T.add(t)
    return IncidenceComplex(frozenset(V), frozenset(E), frozenset(T))


class EdgeNormalAssignment:
    """Unit normals on directed edges with n_ji = -n_ij.

    Built from a mapping {(i, j): vector}; each unordered edge may be given
    in either orientation (or both, if they are exact negatives).
    """

    def __init__(self, normals: dict, tol: float = 1e-10):
        self._n: dict = {}
        for (i, j), vec in normals.items():
            vec = np.asarray(vec, dtype=float)
            if abs(np.linalg.norm(vec) - 1.0) > tol:
                raise ValueError(f"normal on ({i}, {j}) is not a unit vector")
            key, sign = ((i, j), 1.0) if i < j else ((j, i), -1.0)
            val = sign * vec
            if key in self._n and not np.array_equal(self._n[key], val):
                raise ValueError(f"normals on ({i}, {j}) are not antisymmetric")
            self._n[key] = val

    def __getitem__(self, ij) -> np.ndarray:
        i, j = ij
        return self._n[(i, j)] if i < j else -self._n[(j, i)]

    def edges(self):
        return sorted(self._n)

    @classmethod
    def from_cluster(cls, C: PullbackCluster, edges) -> "EdgeNormalAssignment":
        return cls({(i, j): C.normal(i, j) for i, j in edges})


class RecoveredMap(NamedTuple):
    B: np.ndarray
    residual: float
    cycle_violation: float


def fundamental_cycle_violation(q: int, normals: EdgeNormalAssignment) -> float:
    """Largest |sum of normals| over the fundamental cycles of a BFS spanning tree.

    Raises `UnderdeterminedError` if the edges do not connect all q cells.
    """
    adj = {v: [] for v in range(q)}
    for i, j in normals.edges():
        adj[i].append(j)
        adj[j].append(i)
    dim = len(normals[normals.edges()[0]]) if normals.edges() else 0
    pos = {0: np.zeros(dim)}
    queue = deque([0])
    tree = set()
    while queue:
        u = queue.popleft()
        for w in sorted(adj[u]):
            if w not in pos:
                pos[w] = pos[u] + normals[(u, w)]
                tree.add(_edge(u, w))
                queue.append(w)
    if len(pos) != q:
        raise UnderdeterminedError("edge graph does not connect all cells")
    worst = 0.0
    for i, j in normals.edges():
        if (i, j) in tree:
            continue
        worst = max(worst, float(np.linalg.norm(pos[i] + normals[(i, j)] - pos[j])))
    return worst


def recover_B(S, normals: EdgeNormalAssignment) -> RecoveredMap:
    """Least-squares B (B @ ones = 0) minimising sum ||n_ij - B(e_j - e_i)||^2 over edges.

    ``S`` is the incidence complex the normals live on, or just the number of
    cells q.
    """
    if isinstance(S, IncidenceComplex):
        q = max(S.vertices) + 1
        extra = set(normals.edges()) - set(S.edges)
        if extra:
            raise ClosureError(f"normals given on edges outside the complex: {sorted(extra)}")
    else:
        q = int(S)
    if q < 2:
        raise InvalidDimensionError("q must be >= 2")
    viol = fundamental_cycle_violation(q, normals)
    if viol > CYCLE_REJECT:
        raise InconsistencyError(f"normals violate the cycle condition by {viol:.3g}")
    edges = normals.edges()
    D = np.zeros((q, len(edges)))
    Nm = np.column_stack([normals[e] for e in edges])
    for k, (i, j) in enumerate(edges):
        D[j, k], D[i, k] = 1.0, -1.0
    B = Nm @ D.T @ pinv_on_E(D @ D.T).pinv
    resid = float(np.linalg.norm(Nm - B @ D))
    return RecoveredMap(B, resid, viol)
