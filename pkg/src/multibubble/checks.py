"""Numerical identity checks for the model profile.

Each check returns a `CheckResult` so the same code backs the ``check``
command and the test-suite.  Finite differences are taken along an
orthonormal basis of E, so every perturbed point stays on the simplex.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gauss import DEFAULT_QUAD, McSpec, Phi_inv, QuadratureSpec, mc_model_cell_measure, model_cell_measure, phi
from .profile import dpsi, face_limit_check, invert_psi, model_profile, model_profile_value, psi
from .simplex import e_basis


@dataclass
class CheckResult:
    name: str
    passed: bool
    value: float
    tol: float
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = f"  {self.detail}" if self.detail else ""
        return f"[{status}] {self.name}: {self.value:.3e} (tol {self.tol:.1e}){extra}"


def random_interior(q: int, rng: np.random.Generator, floor: float = 0.02, alpha: float = 2.0) -> np.ndarray:
    """Dirichlet(alpha) draw conditioned on every coordinate being >= floor."""
    while True:
        v = rng.dirichlet(np.full(q, alpha))
        if v.min() >= floor:
            return v


def random_shift(q: int, rng: np.random.Generator, scale: float = 0.7) -> np.ndarray:
    x = scale * rng.standard_normal(q)
    return x - x.mean()


def single_bubble_error(v1: float, spec: QuadratureSpec = DEFAULT_QUAD) -> float:
    """|I_m(v1, 1 - v1) - phi(Phi^{-1}(v1))|."""
    return abs(model_profile_value([v1, 1.0 - v1], spec=spec) - float(phi(Phi_inv(v1))))


def dpsi_fd_error(x, h: float = 1e-5, spec: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Max componentwise |central difference of Psi - DPsi u| over a basis of E."""
    x = np.asarray(x, dtype=float)
    J = dpsi(x, spec)
    U = e_basis(x.size)
    worst = 0.0
    for u in U.T:
        fd = (psi(x + h * u, spec) - psi(x - h * u, spec)) / (2 * h)
        worst = max(worst, float(np.abs(fd - J @ u).max()))
    return worst


def gradient_fd_error(v, h: float = 1e-4, spec: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Relative error of the finite-difference gradient of I_m against Psi^{-1}(v)/sqrt 2."""
    v = np.asarray(v, dtype=float)
    U = e_basis(v.size)
    g = model_profile(v, spec=spec).gradient
    fd = np.array([(model_profile_value(v + h * u, spec=spec) - model_profile_value(v - h * u, spec=spec)) / (2 * h)
                   for u in U.T])
    exact = U.T @ g
    return float(np.linalg.norm(fd - exact) / np.linalg.norm(exact))


def hessian_fd_error(v, h: float = 1e-3, spec: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Relative operator-norm error of the finite-difference Hessian against -L_A^+."""
    v = np.asarray(v, dtype=float)
    U = e_basis(v.size)
    H = U.T @ model_profile(v, spec=spec).hessian @ U
    cols = []
    for u in U.T:
        gp = invert_psi(v + h * u, tol=1e-12, spec=spec) / np.sqrt(2)
        gm = invert_psi(v - h * u, tol=1e-12, spec=spec) / np.sqrt(2)
        cols.append(U.T @ (gp - gm) / (2 * h))
    fd = np.column_stack(cols)
    return float(np.linalg.norm(fd - H, 2) / np.linalg.norm(H, 2))


def trace_relative_residual(v, spec: QuadratureSpec = DEFAULT_QUAD) -> float:
    rep = model_profile(v, spec=spec)
    return rep.trace_residual / rep.value


def roundtrip(v, spec: QuadratureSpec = DEFAULT_QUAD) -> tuple[float, int]:
    """(sup-norm of Psi(Psi^{-1}(v)) - v, Newton iterations)."""
    info = invert_psi(v, tol=1e-10, spec=spec, return_info=True)
    return float(np.abs(psi(info.x, spec) - v).max()), info.iterations


def mc_agreement(x, i: int, mc: McSpec, spec: QuadratureSpec = DEFAULT_QUAD) -> float:
    """|quadrature - MC| in units of the MC standard error."""
    est = mc_model_cell_measure(x, i, mc)
    return abs(model_cell_measure(x, i, spec) - est.value) / max(est.stderr, 1e-300)


def run_suite(q: int, seed: int = 42, mc_samples: int = 1_000_000, spec: QuadratureSpec = DEFAULT_QUAD,
              samples: int = 3) -> list[CheckResult]:
    """Identity suite for the q-cell model profile (used by the ``check`` command)."""
    rng = np.random.default_rng(seed)
    out: list[CheckResult] = []

    if q == 2:
        err = max(single_bubble_error(t, spec) for t in np.linspace(0.1, 0.9, 9))
        out.append(CheckResult("single-bubble closed form", err <= 1e-8, err, 1e-8))

    xs = [random_shift(q, rng) for _ in range(samples)]
    vs = [random_interior(q, rng) for _ in range(samples)]

    err = max(abs(psi(x, spec).sum() - 1.0) for x in xs)
    out.append(CheckResult("cell measures sum to one", err <= 1e-9, err, 1e-9))

    err = max(dpsi_fd_error(x, spec=spec) for x in xs)
    out.append(CheckResult("DPsi = -L_A/sqrt2 (finite differences)", err <= 1e-6, err, 1e-6))

    err = max(gradient_fd_error(v, spec=spec) for v in vs)
    out.append(CheckResult("grad I_m = Psi^-1/sqrt2 (finite differences)", err <= 1e-5, err, 1e-5))

    err = max(hessian_fd_error(v, spec=spec) for v in vs)
    out.append(CheckResult("Hess I_m = -L_A^-1 (finite differences)", err <= 1e-4, err, 1e-4))

    err = max(trace_relative_residual(v, spec) for v in vs)
    out.append(CheckResult("trace identity 2 I_m = -tr (Hess I_m)^-1", err <= 1e-6, err, 1e-6))

    rts = [roundtrip(v, spec) for v in vs]
    err = max(r for r, _ in rts)
    iters = max(k for _, k in rts)
    out.append(CheckResult("Newton round trip", err <= 1e-9 and iters <= 25, err, 1e-9, f"max iterations {iters}"))

    if q >= 3:
        rep = face_limit_check(np.full(q - 1, 1.0 / (q - 1)), spec=spec)
        out.append(CheckResult("face continuity", rep.passed, rep.gaps[-1], 0.02,
                               "gaps " + ", ".join(f"{g:.2e}" for g in rep.gaps)))

    mc = McSpec(mc_samples, seed, 0)
    z = max(mc_agreement(x, int(rng.integers(q)), mc, spec) for x in xs)
    out.append(CheckResult("quadrature vs Monte Carlo (standard errors)", z <= 4.0, z, 4.0))
    return out
