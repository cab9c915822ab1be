"""The measure map Psi, its inverse, and the model multi-bubble profile I_m.

Psi sends a shift x in E to the Gaussian measures of the cells of
x + Omega^m.  Its differential is -L_{A(x)}/sqrt(2) where A(x) are the model
interface areas, so Newton's method inverts it with a graph-Laplacian solve.
I_m(v) is the total interface area of the model cluster with measures v;
its gradient is Psi^{-1}(v)/sqrt(2) and its Hessian is -L_A^{-1}.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import ConvergenceError
from .gauss import DEFAULT_QUAD, SQRT2, QuadratureSpec, model_area_table, model_cell_measures
from .simplex import as_measure, as_shift, build_LA, pinv_on_E, trace_on_E


def psi(x, spec: QuadratureSpec = DEFAULT_QUAD) -> np.ndarray:
    return model_cell_measures(x, spec)


def dpsi(x, spec: QuadratureSpec = DEFAULT_QUAD) -> np.ndarray:
    """Differential of Psi at x as a q x q operator on E."""
    return -build_LA(model_area_table(x, spec)) / SQRT2


class NewtonInfo(NamedTuple):
    x: np.ndarray
    iterations: int
    residual: float


def invert_psi(v, tol: float = 1e-10, max_iter: int = 100, spec: QuadratureSpec = DEFAULT_QUAD,
               return_info: bool = False):
    """Solve Psi(x) = v for x in E by damped Newton iteration from x = 0.

    The step x <- x + sqrt(2) L^+ (Psi(x) - v) is halved (at most 30 times)
    until the residual norm decreases.  Stops when the sup-norm residual is
    at most ``tol``.
    """
    v = as_measure(v, interior=True)
    q = v.size
    x = np.zeros(q)
    r = psi(x, spec) - v
    rnorm = np.linalg.norm(r)
    it = 0
    while np.abs(r).max() > tol:
        if it >= max_iter:
            raise ConvergenceError(f"Newton inversion did not converge in {max_iter} iterations",
                                   residual=float(np.abs(r).max()), best=x)
        Lp = pinv_on_E(build_LA(model_area_table(x, spec))).pinv
        step = SQRT2 * (Lp @ r)
        t = 1.0
        for _ in range(31):
            x_new = x + t * step
            x_new -= x_new.mean()
            r_new = psi(x_new, spec) - v
            n_new = np.linalg.norm(r_new)
            if n_new < rnorm:
                break
            t *= 0.5
        else:
            raise ConvergenceError("damped Newton step failed to decrease the residual",
                                   residual=float(np.abs(r).max()), best=x)
        x, r, rnorm = x_new, r_new, n_new
        it += 1
    if return_info:
        return NewtonInfo(x, it, float(np.abs(r).max()))
    return x


@dataclass
class ProfileReport:
    v: np.ndarray
    x: np.ndarray
    value: float
    gradient: np.ndarray
    hessian: np.ndarray
    areas: np.ndarray
    trace_residual: float
    newton_iterations: int = field(default=0)

    def to_dict(self) -> dict:
        return {
            "v": self.v.tolist(),
            "x": self.x.tolist(),
            "value": self.value,
            "gradient": self.gradient.tolist(),
            "hessian": self.hessian.tolist(),
            "areas": self.areas.tolist(),
            "trace_residual": self.trace_residual,
        }


def profile_at_shift(x, spec: QuadratureSpec = DEFAULT_QUAD) -> ProfileReport:
    """Profile quantities of the model cluster x + Omega^m (v = Psi(x))."""
    x = as_shift(x)
    A = model_area_table(x, spec)
    L = build_LA(A)
    H = -pinv_on_E(L).pinv
    value = float(A[np.triu_indices_from(A, 1)].sum())
    H_inv = pinv_on_E(H).pinv
    resid = abs(2.0 * value + trace_on_E(H_inv))
    return ProfileReport(psi(x, spec), x, value, x / SQRT2, H, A, resid)


def model_profile(v, tol: float = 1e-12, spec: QuadratureSpec = DEFAULT_QUAD) -> ProfileReport:
    """I_m(v) together with its gradient, Hessian and the trace identity residual.

    ``tol`` is the Newton tolerance for locating Psi^{-1}(v); the default is
    tighter than `invert_psi`'s so that finite differences of the value and
    gradient stay clean.
    """
    v = as_measure(v, interior=True)
    info = invert_psi(v, tol=tol, spec=spec, return_info=True)
    rep = profile_at_shift(info.x, spec)
    rep.v = v
    rep.newton_iterations = info.iterations
    return rep


def model_profile_value(v, tol: float = 1e-12, spec: QuadratureSpec = DEFAULT_QUAD) -> float:
    v = as_measure(v, interior=True)
    x = invert_psi(v, tol=tol, spec=spec)
    A = model_area_table(x, spec)
    return float(A[np.triu_indices_from(A, 1)].sum())


def model_profile_extended(v, spec: QuadratureSpec = DEFAULT_QUAD) -> float:
    """I_m extended continuously to the closed simplex.

    Zero coordinates are dropped and the profile of the lower-order model is
    used; a vertex of the simplex has profile 0.
    """
    v = as_measure(v)
    vj = v[v > 0]
    if vj.size <= 1:
        return 0.0
    return model_profile_value(vj / vj.sum(), spec=spec)


@dataclass
class FaceLimitReport:
    eps: list[float]
    values: list[float]
    target: float
    gaps: list[float]
    decreasing: bool
    final_ok: bool

    @property
    def passed(self) -> bool:
        return self.decreasing and self.final_ok


def face_limit_check(v_face, eps=(1e-2, 1e-3, 1e-4), position: int | None = None, threshold: float = 0.02,
                     spec: QuadratureSpec = DEFAULT_QUAD) -> FaceLimitReport:
    """Approach the face {v_k = 0} of the (q-1)-simplex from the interior.

    ``v_face`` is an interior point of the lower-order simplex; the interior
    points are v_eps = (1 - eps) v_face with eps inserted at ``position``
    (default: last).  Reports |I_m(v_eps) - I_m(v_face)| for each eps.
    """
    vj = as_measure(v_face, interior=True)
    pos = vj.size if position is None else position
    target = model_profile_value(vj, spec=spec)
    values, gaps = [], []
    for e in eps:
        v = np.insert((1.0 - e) * vj, pos, e)
        val = model_profile_value(v, spec=spec)
        values.append(val)
        gaps.append(abs(val - target))
    decreasing = all(b < a for a, b in zip(gaps, gaps[1:]))
    return FaceLimitReport(list(eps), values, target, gaps, decreasing, gaps[-1] <= threshold)
