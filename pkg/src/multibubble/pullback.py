"""Flat polyhedral clusters obtained by pulling back the model cluster.

A cluster is given by a linear map B: E -> R^n (stored as an n x q matrix
with B @ ones = 0) and an offset lam in E:

    Omega_i = {y in R^n : <e_j - e_i, B^T y - lam> < 0 for all j != i}.

With G standard Gaussian on R^n, Y = B^T G ~ N(0, S), S = B^T B, so every
Gaussian quantity of the cluster depends on (S, lam) only.  Cell measures
are orthant probabilities of the differences (Y_k - lam_k) - (Y_i - lam_i);
the interface Sigma_ij lies in the hyperplane <n_ij, y> = c_ij and its
Gaussian area is phi(c_ij) times the conditional probability of the other
constraints given <n_ij, G> = c_ij.

Two evaluation routes are provided: ``"exact"`` (deterministic orthant
integrals, available for q <= 5) and ``"mc"`` (seeded Monte Carlo).  MC
streams are keyed by (seed, stream_id, purpose) and not by the cluster, so
evaluations at nearby clusters share random numbers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.optimize import linprog

from .errors import DegenerateClusterError, InvalidDimensionError
from .gauss import (DEFAULT_QUAD, Estimate, McSpec, QuadratureSpec, chunked, model_area_table,
                    model_cell_measures, orthant_probability, phi, rng_stream)
from .simplex import RANK_RTOL, as_shift, build_LA, e_basis, equidistant_points, pinv_on_E

EDGE_TOL = 1e-12
LP_SLACK = 1e-9
EXACT_MAX_Q = 5


@dataclass(frozen=True, eq=False)
class PullbackCluster:
    B: np.ndarray
    lam: np.ndarray

    def __post_init__(self):
        B = np.array(self.B, dtype=float)
        if B.ndim != 2 or B.shape[1] < 2:
            raise InvalidDimensionError(f"B must be an n x q matrix with q >= 2, got shape {B.shape}")
        lam = as_shift(self.lam, tol=1e-10)
        if lam.size != B.shape[1]:
            raise InvalidDimensionError("lam must have q entries")
        if np.linalg.norm(B.sum(axis=1)) > 1e-10 * max(1.0, np.abs(B).max()):
            raise DegenerateClusterError("B must annihilate the all-ones vector")
        if np.linalg.matrix_rank(B) == 0:
            raise DegenerateClusterError("B has rank 0")
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "lam", lam)

    @classmethod
    def from_params(cls, B, lam) -> "PullbackCluster":
        """Build from unconstrained parameters by projecting onto the ones-kernel / E."""
        B = np.asarray(B, dtype=float)
        lam = np.asarray(lam, dtype=float)
        return cls(B - B.mean(axis=1, keepdims=True), lam - lam.mean())

    @property
    def n(self) -> int:
        return self.B.shape[0]

    @property
    def q(self) -> int:
        return self.B.shape[1]

    @property
    def S(self) -> np.ndarray:
        return self.B.T @ self.B

    def edge_vector(self, i: int, j: int) -> np.ndarray:
        """B(e_j - e_i)."""
        return self.B[:, j] - self.B[:, i]

    def edge_length(self, i: int, j: int) -> float:
        return float(np.linalg.norm(self.edge_vector(i, j)))

    def _checked_length(self, i, j) -> float:
        ell = self.edge_length(i, j)
        if ell <= EDGE_TOL:
            raise DegenerateClusterError(f"edge ({i}, {j}) is degenerate: |B(e_j - e_i)| = {ell:.3g}")
        return ell

    def normal(self, i: int, j: int) -> np.ndarray:
        """Unit normal of Sigma_ij pointing from cell i into cell j."""
        return self.edge_vector(i, j) / self._checked_length(i, j)

    def offset(self, i: int, j: int) -> float:
        """c_ij with Sigma_ij contained in {<n_ij, y> = c_ij}."""
        return float((self.lam[j] - self.lam[i]) / self._checked_length(i, j))

    def cell_of(self, y) -> np.ndarray:
        """Cell index of each row of ``y`` (ties broken towards the lower index)."""
        y = np.atleast_2d(y)
        return np.argmax(y @ self.B - self.lam, axis=1)

    def isotropy(self, tol: float = 1e-10) -> float | None:
        """sigma^2 if B^T B = sigma^2 Id on E (within ``tol``), else None."""
        U = e_basis(self.q)
        Sr = U.T @ self.S @ U
        s2 = float(np.trace(Sr) / (self.q - 1))
        if np.abs(Sr - s2 * np.eye(self.q - 1)).max() <= tol * max(1.0, s2):
            return s2
        return None

    def isometry_defect(self) -> float:
        """Operator norm on E of 2 B^T B - Id."""
        U = e_basis(self.q)
        D = 2.0 * (U.T @ self.S @ U) - np.eye(self.q - 1)
        return float(np.abs(np.linalg.eigvalsh(D)).max())

    def normalized(self) -> "PullbackCluster":
        """Same cells, with (B, lam) rescaled so the mean squared edge length is 1.

        Rescaling B and lam by a common positive factor does not move any
        cell; this fixes that gauge so that simplicial clusters have
        2 B^T B = Id on E.
        """
        q = self.q
        sq = [self.edge_length(i, j) ** 2 for i in range(q) for j in range(i + 1, q)]
        s = np.sqrt(np.mean(sq))
        return PullbackCluster(self.B / s, self.lam / s)


def simplicial_cluster(q: int, n: int, lam=None, scale: float = 1.0 / np.sqrt(2.0), rotation=None) -> PullbackCluster:
    """Pull-back cluster with B^T B = scale^2 Id on E (Voronoi cells of equidistant points).

    The default scale gives unit edge lengths.  ``rotation`` is an optional
    n x n orthogonal matrix applied on the left of B.
    """
    P = equidistant_points(q, n)
    B = scale * P.T
    if rotation is not None:
        B = np.asarray(rotation, dtype=float) @ B
    lam = np.zeros(q) if lam is None else lam
    return PullbackCluster(B, lam)


def _resolve(method: str, q: int) -> str:
    if method == "auto":
        return "exact" if q <= EXACT_MAX_Q else "mc"
    if method not in ("exact", "mc"):
        raise ValueError(f"unknown method {method!r}")
    if method == "exact" and q > EXACT_MAX_Q:
        raise InvalidDimensionError(f"exact evaluation supports q <= {EXACT_MAX_Q}")
    return method


# ---------------------------------------------------------------- cell measures


def _cell_orthant(S, lam, i):
    q = lam.size
    D = np.delete(np.eye(q), i, axis=0)
    D[:, i] -= 1.0
    return -(D @ lam), D @ S @ D.T


def cell_measures(C: PullbackCluster, method: str = "auto", mc: McSpec = McSpec()) -> tuple[np.ndarray, np.ndarray]:
    """Gaussian measures of all cells and their standard errors."""
    method = _resolve(method, C.q)
    if method == "exact":
        S = C.S
        vals = np.array([orthant_probability(*_cell_orthant(S, C.lam, i)) for i in range(C.q)])
        return vals, np.zeros(C.q)
    rng = rng_stream(mc.seed, mc.stream_id, 10)
    counts = np.zeros(C.q)
    for m in chunked(mc.sample_count):
        G = rng.standard_normal((m, C.n))
        counts += np.bincount(C.cell_of(G), minlength=C.q)
    p = counts / mc.sample_count
    return p, np.sqrt(p * (1 - p) / mc.sample_count)


def pb_cell_measure(C: PullbackCluster, i: int, method: str = "auto", mc: McSpec = McSpec()) -> Estimate:
    vals, se = cell_measures(C, method, mc)
    return Estimate(float(vals[i]), float(se[i]))


def isotropic_reduction(C: PullbackCluster, spec: QuadratureSpec = DEFAULT_QUAD):
    """Model-cluster values for an isotropic cluster (B^T B = sigma^2 Id on E).

    Then Y = sigma Z with Z standard on E and the cells are those of the model
    cluster shifted by lam/sigma; returns (cell measures, area table).
    """
    s2 = C.isotropy()
    if s2 is None:
        raise ValueError("cluster is not isotropic")
    x = C.lam / np.sqrt(s2)
    return model_cell_measures(x, spec), model_area_table(x, spec)


# ---------------------------------------------------------------- interfaces


def interface_nonempty(C: PullbackCluster, i: int, j: int, slack: float = LP_SLACK) -> bool:
    """LP test that Sigma_ij has nonempty relative interior."""
    return _strata_feasible(C, i, (j,), slack)


def triple_junction_nonempty(C: PullbackCluster, i: int, j: int, k: int, slack: float = LP_SLACK) -> bool:
    """LP test that the codimension-2 stratum Sigma_ijk is nonempty."""
    V = np.column_stack([C.edge_vector(i, j), C.edge_vector(i, k)])
    if np.linalg.matrix_rank(V, tol=1e-10 * max(1.0, np.abs(V).max())) < 2:
        return False
    return _strata_feasible(C, i, (j, k), slack)


def _strata_feasible(C, i, equal, slack):
    # Variables (y, s): maximise s subject to
    #   <B(e_k - e_i), y> + s <= lam_k - lam_i   for k not in {i} u equal
    #   <B(e_j - e_i), y>      = lam_j - lam_i   for j in equal
    others = [k for k in range(C.q) if k != i and k not in equal]
    n = C.n
    A_ub = np.array([np.append(C.edge_vector(i, k), 1.0) for k in others]).reshape(-1, n + 1)
    b_ub = np.array([C.lam[k] - C.lam[i] for k in others])
    A_eq = np.array([np.append(C.edge_vector(i, j), 0.0) for j in equal])
    b_eq = np.array([C.lam[j] - C.lam[i] for j in equal])
    c = np.zeros(n + 1)
    c[-1] = -1.0
    bounds = [(None, None)] * n + [(None, 1.0)]
    res = linprog(c, A_ub=A_ub if others else None, b_ub=b_ub if others else None,
                  A_eq=A_eq, b_eq=b_eq, bounds=bounds, method="highs")
    if res.status != 0:
        return False
    return -res.fun > slack


def _interface_orthant(S, lam, i, j, ell):
    q = lam.size
    d = np.zeros(q)
    d[j], d[i] = 1.0, -1.0
    Sd = S @ d
    c = (lam[j] - lam[i]) / ell
    mu = c * Sd / ell
    cov = S - np.outer(Sd, Sd) / ell**2
    others = [k for k in range(q) if k not in (i, j)]
    D = np.zeros((len(others), q))
    for r, k in enumerate(others):
        D[r, k], D[r, i] = 1.0, -1.0
    return c, D @ mu - D @ lam, D @ cov @ D.T


def pb_interface_area(C: PullbackCluster, i: int, j: int, method: str = "auto", mc: McSpec = McSpec()) -> Estimate:
    """Gaussian (n-1)-measure of Sigma_ij."""
    if i == j:
        raise ValueError("interface needs distinct cells")
    i, j = min(i, j), max(i, j)
    ell = C._checked_length(i, j)
    method = _resolve(method, C.q)
    c, mean, cov = _interface_orthant(C.S, C.lam, i, j, ell)
    dens = float(phi(c))
    if C.q == 2:
        return Estimate(dens, 0.0)
    if method == "exact":
        return Estimate(dens * orthant_probability(mean, cov), 0.0)
    n_ij = C.edge_vector(i, j) / ell
    rng = rng_stream(mc.seed, mc.stream_id, 20, i, j)
    others = [k for k in range(C.q) if k not in (i, j)]
    hits = 0
    for m in chunked(mc.sample_count):
        G = rng.standard_normal((m, C.n))
        G += np.outer(c - G @ n_ij, n_ij)
        Y = G @ C.B - C.lam
        hits += int(np.count_nonzero(np.all(Y[:, others] < Y[:, [i]], axis=1)))
    p = hits / mc.sample_count
    return Estimate(dens * p, dens * np.sqrt(p * (1 - p) / mc.sample_count))


class AreaTable(NamedTuple):
    areas: np.ndarray
    stderr: np.ndarray
    degenerate: np.ndarray


def interface_areas(C: PullbackCluster, method: str = "auto", mc: McSpec = McSpec()) -> AreaTable:
    """Symmetric table of interface areas.  Degenerate edges (B(e_j - e_i) = 0) get area 0."""
    q = C.q
    A = np.zeros((q, q))
    E = np.zeros((q, q))
    deg = np.zeros((q, q), dtype=bool)
    for i in range(q):
        for j in range(i + 1, q):
            if C.edge_length(i, j) <= EDGE_TOL:
                deg[i, j] = deg[j, i] = True
                continue
            a, se = pb_interface_area(C, i, j, method, mc)
            A[i, j] = A[j, i] = a
            E[i, j] = E[j, i] = se
    return AreaTable(A, E, deg)


def pb_perimeter(C: PullbackCluster, method: str = "auto", mc: McSpec = McSpec()) -> Estimate:
    """Sum of interface areas over unordered pairs, with combined standard error."""
    t = interface_areas(C, method, mc)
    iu = np.triu_indices(C.q, 1)
    return Estimate(float(t.areas[iu].sum()), float(np.sqrt(np.sum(t.stderr[iu] ** 2))))


# ---------------------------------------------------------------- first and second variation


def stationarity_residual(C: PullbackCluster, edges=None) -> tuple[float, np.ndarray]:
    """Least-squares fit of H_ij = lam'_i - lam'_j over the nonempty interfaces.

    For a flat interface in {<n, y> = c} the weighted mean curvature is -c.
    ``edges`` defaults to the LP-nonempty interfaces.  Returns the residual
    norm and the fitted lam' (normalised to sum to zero).
    """
    q = C.q
    if edges is None:
        edges = [(i, j) for i in range(q) for j in range(i + 1, q)
                 if C.edge_length(i, j) > EDGE_TOL and interface_nonempty(C, i, j)]
    edges = list(edges)
    if not edges:
        raise DegenerateClusterError("no nonempty interfaces")
    D = np.zeros((len(edges), q))
    H = np.zeros(len(edges))
    for r, (i, j) in enumerate(edges):
        D[r, i], D[r, j] = 1.0, -1.0
        H[r] = -C.offset(i, j)
    lam_fit, *_ = np.linalg.lstsq(D, H, rcond=None)
    lam_fit -= lam_fit.mean()
    return float(np.linalg.norm(D @ lam_fit - H)), lam_fit


@dataclass
class VariationReport:
    A: np.ndarray
    L: np.ndarray
    M: np.ndarray
    N: np.ndarray
    cs_gap: np.ndarray
    effective_dimension: int
    stationarity_residual: float
    lambda_fit: np.ndarray
    area_stderr: np.ndarray

    @property
    def cs_gap_norm(self) -> float:
        return float(np.linalg.norm(self.cs_gap, 2))

    @property
    def cs_gap_min_eig(self) -> float:
        return float(np.linalg.eigvalsh(0.5 * (self.cs_gap + self.cs_gap.T)).min())


def variation_matrices(C: PullbackCluster, A) -> tuple[np.ndarray, np.ndarray]:
    """M = sum A_ij (e_i - e_j) n_ij^T (q x n) and N = sum A_ij n_ij n_ij^T (n x n)."""
    q, n = C.q, C.n
    M = np.zeros((q, n))
    N = np.zeros((n, n))
    for i in range(q):
        for j in range(i + 1, q):
            if A[i, j] <= 0:
                continue
            nij = C.normal(i, j)
            M[i] += A[i, j] * nij
            M[j] -= A[i, j] * nij
            N += A[i, j] * np.outer(nij, nij)
    return M, N


def variation_report(C: PullbackCluster, method: str = "auto", mc: McSpec = McSpec(), areas=None) -> VariationReport:
    """First-variation matrix M, translation index matrix N and the Cauchy-Schwarz gap.

    ``cs_gap = N - M^T L_A^+ M`` is positive semi-definite and vanishes
    exactly when the normals are a single linear image of the edge vectors
    e_j - e_i.
    """
    if areas is None:
        table = interface_areas(C, method, mc)
        A, se = table.areas, table.stderr
    else:
        A = np.asarray(areas, dtype=float)
        se = np.zeros_like(A)
    L = build_LA(A)
    M, N = variation_matrices(C, A)
    gap = N - M.T @ pinv_on_E(L).pinv @ M
    gap = 0.5 * (gap + gap.T)
    s = np.linalg.svd(M, compute_uv=False)
    rank = int(np.sum(s > RANK_RTOL * s.max())) if s.size and s.max() > 0 else 0
    edges = [(i, j) for i in range(C.q) for j in range(i + 1, C.q) if A[i, j] > 0]
    resid, lam_fit = stationarity_residual(C, edges) if edges else (np.nan, np.full(C.q, np.nan))
    return VariationReport(A, L, M, N, gap, rank, resid, lam_fit, se)


def q_translation(N, w) -> float:
    """Index form -w^T N w of the constant field w (N from `variation_report`)."""
    if isinstance(N, VariationReport):
        N = N.N
    w = np.asarray(w, dtype=float)
    return float(-w @ N @ w)


def q_inward(A, a) -> tuple[float, np.ndarray]:
    """Index form -a^T L_A a of the inward-field combination with coefficients a,
    and the induced first variation of volume delta_V = -L_A a."""
    L = build_LA(A)
    a = np.asarray(a, dtype=float)
    return float(-a @ L @ a), -L @ a


def translation_fd(C: PullbackCluster, w, t: float = 1e-3, mc: McSpec = McSpec()) -> tuple[np.ndarray, np.ndarray]:
    """Central difference of the cell-measure vector under y -> y + t w.

    Both sides use the same Gaussian samples, so the estimate and its
    standard error come from the paired per-sample differences.
    """
    w = np.asarray(w, dtype=float)
    shift = C.B.T @ w
    plus = PullbackCluster(C.B, C.lam + t * shift)
    minus = PullbackCluster(C.B, C.lam - t * shift)
    rng = rng_stream(mc.seed, mc.stream_id, 30)
    s1 = np.zeros(C.q)
    s2 = np.zeros(C.q)
    eye = np.eye(C.q)
    for m in chunked(mc.sample_count):
        G = rng.standard_normal((m, C.n))
        d = eye[plus.cell_of(G)] - eye[minus.cell_of(G)]
        s1 += d.sum(axis=0)
        s2 += (d * d).sum(axis=0)
    N = mc.sample_count
    mean = s1 / N
    var = s2 / N - mean**2
    return mean / (2 * t), np.sqrt(var / N) / (2 * t)
