"""Penalty-method minimisation of Gaussian perimeter over pull-back clusters.

The search space is all (B, lam) with B an n x q matrix (ones-kernel
enforced by projection) and lam in E.  For each penalty weight rho the
objective

    P(B, lam) + rho * |gamma(Omega(B, lam)) - v|^2

is minimised by BFGS with central finite-difference gradients, warm-started
from the previous weight.  Several starts are run and the best feasible
result is returned.  Orthogonal transformations of R^n are a gauge of the
parametrisation and are left free; the common scaling of (B, lam) is fixed
after every outer step (see `PullbackCluster.normalized`).
"""

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .errors import ConvergenceError, DomainError, InvalidDimensionError, MultibubbleError
from .gauss import McSpec
from .profile import model_profile
from .pullback import PullbackCluster, cell_measures, interface_areas, simplicial_cluster
from .simplex import as_measure

logger = logging.getLogger(__name__)


@dataclass
class OptProblem:
    q: int
    n: int
    v: np.ndarray
    penalties: tuple = (1e2, 1e3, 1e4)
    method: str = "auto"
    mc: McSpec = field(default_factory=lambda: McSpec(sample_count=200_000))
    n_starts: int = 5
    max_inner_iter: int = 300
    tol_v: float = 1e-4
    stall_tol: float = 1e-6
    fd_step: float = 1e-3
    profile_floor: float = 5e-3

    def __post_init__(self):
        self.v = as_measure(self.v, interior=True)
        if self.v.size != self.q:
            raise InvalidDimensionError("v must have q entries")
        if not 2 <= self.q <= self.n + 1:
            raise InvalidDimensionError(f"need 2 <= q <= n + 1 (q={self.q}, n={self.n})")

    def seed(self) -> int:
        key = f"{self.q}|{self.n}|" + ",".join(f"{x:.12g}" for x in self.v)
        return int.from_bytes(hashlib.sha256(key.encode()).digest()[:8], "little")


@dataclass
class HistoryEntry:
    start: int
    penalty: float
    iteration: int
    objective: float
    perimeter: float
    measure_error: float


@dataclass
class OptResult:
    cluster: PullbackCluster
    perimeter: float
    measures: np.ndarray
    measure_error: float
    isometry_defect: float
    profile_value: float
    areas: np.ndarray
    target: np.ndarray
    history: list = field(default_factory=list)  # every start; entries carry the start index
    start: int = 0
    starts: list = field(default_factory=list)

    @property
    def B(self) -> np.ndarray:
        return self.cluster.B

    @property
    def lam(self) -> np.ndarray:
        return self.cluster.lam

    @property
    def profile_gap(self) -> float:
        return self.perimeter - self.profile_value


class _Objective:
    def __init__(self, prob: OptProblem):
        self.prob = prob
        self.shape = (prob.n, prob.q)
        self.nB = prob.n * prob.q

    def pack(self, C: PullbackCluster) -> np.ndarray:
        return np.concatenate([C.B.ravel(), C.lam])

    def unpack(self, theta) -> PullbackCluster:
        return PullbackCluster.from_params(theta[: self.nB].reshape(self.shape), theta[self.nB:])

    def evaluate(self, theta):
        """(perimeter, measures) at theta."""
        C = self.unpack(theta)
        p = self.prob
        meas, _ = cell_measures(C, p.method, p.mc)
        areas = interface_areas(C, p.method, p.mc).areas
        return float(np.triu(areas, 1).sum()), meas

    def __call__(self, theta, rho):
        try:
            per, meas = self.evaluate(theta)
        except MultibubbleError:
            return 1e6
        return per + rho * float(np.sum((meas - self.prob.v) ** 2))

    def grad(self, theta, rho):
        h = self.prob.fd_step
        g = np.empty_like(theta)
        for k in range(theta.size):
            e = np.zeros_like(theta)
            e[k] = h
            g[k] = (self(theta + e, rho) - self(theta - e, rho)) / (2 * h)
        return g


class _Stall(Exception):
    pass


def _run_start(obj: _Objective, C0: PullbackCluster, start: int, history: list, sweeps=None):
    prob = obj.prob
    C = C0.normalized()
    penalties = prob.penalties if sweeps is None else prob.penalties[:sweeps]
    it_global = 0
    for rho in penalties:
        theta = obj.pack(C)
        recent = []
        best = {"theta": theta}

        def callback(xk):
            nonlocal it_global
            it_global += 1
            best["theta"] = xk.copy()
            per, meas = obj.evaluate(xk)
            f = per + rho * float(np.sum((meas - prob.v) ** 2))
            history.append(HistoryEntry(start, rho, it_global, f, per, float(np.abs(meas - prob.v).max())))
            recent.append(f)
            if len(recent) > 5 and recent[-6] - recent[-1] < prob.stall_tol:
                raise _Stall

        try:
            res = minimize(obj, theta, args=(rho,), jac=obj.grad, method="BFGS", callback=callback,
                           options={"maxiter": prob.max_inner_iter, "gtol": 1e-7})
            theta = res.x
        except _Stall:
            theta = best["theta"]
        C = obj.unpack(theta).normalized()
    return C


def _starts(prob: OptProblem):
    rng = np.random.default_rng(prob.seed())
    yield simplicial_cluster(prob.q, prob.n)
    for _ in range(prob.n_starts - 1):
        B = rng.standard_normal((prob.n, prob.q))
        lam = 0.3 * rng.standard_normal(prob.q)
        yield PullbackCluster.from_params(B, lam)


def _finish(obj: _Objective, C: PullbackCluster, profile_value: float, start: int, history: list) -> OptResult:
    per, meas = obj.evaluate(obj.pack(C))
    areas = interface_areas(C, obj.prob.method, obj.prob.mc).areas
    return OptResult(C, per, meas, float(np.abs(meas - obj.prob.v).max()), C.isometry_defect(),
                     profile_value, areas, obj.prob.v, history, start)


def minimize_perimeter(prob: OptProblem, initial: PullbackCluster | None = None, sweeps: int | None = None) -> OptResult:
    """Minimise Gaussian perimeter at prescribed cell measures ``prob.v``.

    With ``initial`` only that start is run (useful for fixed-point checks);
    ``sweeps`` limits the number of penalty weights used.  Raises
    `ConvergenceError` if no start reaches measure error ``tol_v``.
    """
    obj = _Objective(prob)
    target = model_profile(prob.v).value
    starts = [initial] if initial is not None else list(_starts(prob))
    results = []
    history: list = []
    for k, C0 in enumerate(starts):
        C = _run_start(obj, C0, k, history, sweeps)
        r = _finish(obj, C, target, k, history)
        logger.info("start %d: perimeter %.6f, measure error %.2e, isometry defect %.2e",
                    k, r.perimeter, r.measure_error, r.isometry_defect)
        results.append(r)
    feasible = [r for r in results if r.measure_error <= prob.tol_v]
    pool = feasible or results
    best = min(pool, key=lambda r: r.perimeter)
    best.starts = [(r.start, r.perimeter, r.measure_error, r.isometry_defect) for r in results]
    if not feasible:
        raise ConvergenceError(f"no start reached measure error {prob.tol_v:g}",
                               residual=best.measure_error, best=best)
    if best.profile_gap < -prob.profile_floor:
        logger.warning("perimeter %.6f is below the model profile %.6f", best.perimeter, target)
    return best


@dataclass
class ModelComparison:
    deviations: np.ndarray
    max_deviation: float
    all_positive: bool
    model_areas: np.ndarray


def compare_to_model(r: OptResult) -> ModelComparison:
    """Per-interface comparison against the model cluster at the target measures."""
    v = as_measure(r.target)
    if v.min() <= 0:
        raise DomainError("comparison needs interior target measures")
    model = model_profile(v).areas
    dev = np.abs(r.areas - model)
    iu = np.triu_indices(r.cluster.q, 1)
    return ModelComparison(dev, float(dev[iu].max()), bool(np.all(r.areas[iu] > 0)), model)
