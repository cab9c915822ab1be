"""Gaussian building blocks.

Scalar density/cdf/quantile, the one-dimensional integral reductions for the
cells and interfaces of the shifted model cluster on E, deterministic
orthant probabilities for low-dimensional Gaussian vectors, and seeded
Monte-Carlo estimators used as independent cross-checks.

The reductions rest on one fact: if G is standard Gaussian in R^q then
G - mean(G) is standard Gaussian on E, and argmax_j (G_j - x_j) does not see
the mean.  Conditioning on G_i turns a cell measure into

    Psi_i(x) = int phi(t) prod_{k != i} Phi(t + x_k - x_i) dt,

and conditioning on G_i - G_j = x_i - x_j (with s = (G_i + G_j)/2 ~ N(0, 1/2)
independent of the rest) turns an interface area into

    A_ij(x) = phi((x_i - x_j)/sqrt 2) int phi_{1/2}(s) prod_{k != i,j} Phi(s + x_k - (x_i + x_j)/2) ds.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import integrate, special

from .errors import AccuracyError, DomainError, InvalidDimensionError
from .simplex import as_shift

SQRT2 = np.sqrt(2.0)
INV_SQRT_2PI = 1.0 / np.sqrt(2.0 * np.pi)


@dataclass(frozen=True)
class QuadratureSpec:
    abs_tol: float = 1e-11
    max_subdivisions: int = 200
    window: float = 10.0

    def __post_init__(self):
        if self.abs_tol <= 0:
            raise ValueError("abs_tol must be positive")
        if self.window < 8:
            raise ValueError("integration window must be at least 8 standard deviations")


@dataclass(frozen=True)
class McSpec:
    sample_count: int = 1_000_000
    seed: int = 42
    stream_id: int = 0

    def __post_init__(self):
        if self.sample_count < 1:
            raise ValueError("sample_count must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")


class Estimate(NamedTuple):
    value: float
    stderr: float


DEFAULT_QUAD = QuadratureSpec()

# ---------------------------------------------------------------- scalars


def phi(t):
    return INV_SQRT_2PI * np.exp(-0.5 * np.square(t))


def Phi(t):
    return special.ndtr(t)


def Phi_inv(p):
    p = np.asarray(p, dtype=float)
    if np.any((p <= 0) | (p >= 1)):
        raise DomainError("quantile argument must lie in (0, 1)")
    out = special.ndtri(p)
    return float(out) if out.ndim == 0 else out


def scalar_gaussian(t: float) -> tuple[float, float]:
    """(phi(t), Phi(t)); the quantile companion is `Phi_inv`."""
    return float(phi(t)), float(Phi(t))


# ---------------------------------------------------------------- model cluster on E


def _quad(f, lo, hi, spec: QuadratureSpec) -> float:
    val, err = integrate.quad(f, lo, hi, epsabs=spec.abs_tol, epsrel=0.0, limit=spec.max_subdivisions)
    if not np.isfinite(val) or err > 10 * spec.abs_tol:
        raise AccuracyError(f"quadrature did not reach abs_tol={spec.abs_tol:g} (estimated error {err:.2e})", err)
    return val


def model_cell_measure(x, i: int, spec: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Gaussian measure Psi_i(x) of cell ``i`` of the shifted model cluster x + Omega^m."""
    x = as_shift(x)
    q = x.size
    if not 0 <= i < q:
        raise InvalidDimensionError(f"cell index {i} out of range for q={q}")
    off = np.delete(x, i) - x[i]

    def f(t):
        return phi(t) * np.prod(special.ndtr(t + off))

    w = spec.window
    # Integrand vanishes to the left of about -w + min(off); keep the window
    # centred on where the product of cdfs switches on.
    lo = max(-w, -w - off.min()) if off.size else -w
    return _quad(f, lo, w, spec)


def model_cell_measures(x, spec: QuadratureSpec = DEFAULT_QUAD) -> np.ndarray:
    x = as_shift(x)
    return np.array([model_cell_measure(x, i, spec) for i in range(x.size)])


def model_interface_area(x, i: int, j: int, spec: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Weighted (q-2)-measure A^m_ij(x) of the interface between cells i and j.

    For q = 2 the interface is a single point and the value is the Gaussian
    density on E^(1) at that point.
    """
    x = as_shift(x)
    q = x.size
    if i == j:
        raise ValueError("interface needs distinct cells")
    if not (0 <= i < q and 0 <= j < q):
        raise InvalidDimensionError(f"cell index out of range for q={q}")
    i, j = min(i, j), max(i, j)
    c0 = abs(x[i] - x[j]) / SQRT2
    dens = float(phi(c0))
    if q == 2:
        return dens
    off = np.delete(x, [i, j]) - 0.5 * (x[i] + x[j])
    sd = 1.0 / SQRT2

    def f(s):
        return phi(s / sd) / sd * np.prod(special.ndtr(s + off))

    w = spec.window * sd
    return dens * _quad(f, -w, w, spec)


def model_area_table(x, spec: QuadratureSpec = DEFAULT_QUAD) -> np.ndarray:
    x = as_shift(x)
    q = x.size
    A = np.zeros((q, q))
    for i in range(q):
        for j in range(i + 1, q):
            A[i, j] = A[j, i] = model_interface_area(x, i, j, spec)
    return A


# ---------------------------------------------------------------- orthant probabilities

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(20)
_VAR_FLOOR = 1e-14
_RHO_ONE = 1.0 - 1e-12


def bvn_cdf(h, k, rho):
    """P(X <= h, Y <= k) for standard bivariate normal with correlation rho.

    Vectorised over ``h`` and ``k``; uses Owen's T function.
    """
    h, k = np.broadcast_arrays(np.asarray(h, dtype=float), np.asarray(k, dtype=float))
    if rho >= _RHO_ONE:
        return special.ndtr(np.minimum(h, k))
    if rho <= -_RHO_ONE:
        return np.maximum(0.0, special.ndtr(h) + special.ndtr(k) - 1.0)
    r = np.sqrt((1.0 - rho) * (1.0 + rho))
    # Owen's T reduction is singular at h = 0 or k = 0; nudge onto a side
    # where the limit is attained continuously.
    tiny = 1e-300
    hh = np.where(h == 0.0, tiny, h)
    kk = np.where(k == 0.0, tiny, k)
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        ah = (kk - rho * hh) / (hh * r)
        ak = (hh - rho * kk) / (kk * r)
    out = 0.5 * (special.ndtr(h) + special.ndtr(k)) - special.owens_t(hh, ah) - special.owens_t(kk, ak)
    beta = (hh * kk < 0) | ((hh * kk == 0) & (hh + kk < 0))
    out = out - 0.5 * beta
    return np.clip(out, 0.0, 1.0)


def _panels(lo: float, hi: float, width: float = 1.0, breaks=()):
    """Gauss-Legendre nodes on [lo, hi]: panels of at most ``width``, split at ``breaks``.

    ``breaks`` holds (t0, delta) pairs; around each t0 the panel edges are
    t0 +- delta * 2^k, so a transition of width delta is resolved.
    """
    pts = [lo, hi]
    for t0, delta in breaks:
        pts.append(t0)
        d = max(delta, 1e-8)
        while d < width:
            pts.extend((t0 - d, t0 + d))
            d *= 2.0
    pts = np.unique(np.clip(pts, lo, hi))
    edges = [pts[0]]
    for a, b in zip(pts[:-1], pts[1:]):
        k = max(1, int(np.ceil((b - a) / width)))
        edges.extend(np.linspace(a, b, k + 1)[1:])
    edges = np.asarray(edges)
    edges = edges[np.concatenate([[True], np.diff(edges) > 1e-14])]
    mid = 0.5 * (edges[1:] + edges[:-1])[:, None]
    half = 0.5 * (edges[1:] - edges[:-1])[:, None]
    t = (mid + half * _GL_NODES).ravel()
    w = (half * _GL_WEIGHTS).ravel()
    return t, w


def _kinks(u, r0, Rc):
    """Where the 3-D inner integrand P(Z1 <= u1 - r01 t, Z2 <= u2 - r02 t) bends sharply in t.

    A (near-)deterministic coordinate gives a step at u_k = r0k t; a
    conditional correlation near +-1 gives a corner where the two
    standardized thresholds meet (or cancel).  Returns (t0, width) pairs.
    """
    out = []
    cvar = np.clip(np.diag(Rc), 0.0, None)
    csd = np.sqrt(cvar)
    for k in range(2):
        if abs(r0[k]) > 1e-12:
            t0 = u[k] / r0[k]
            out.append((t0, csd[k] / abs(r0[k])))
    if csd.min() > np.sqrt(_VAR_FLOOR):
        rho = float(np.clip(Rc[0, 1] / (csd[0] * csd[1]), -1.0, 1.0))
        if abs(rho) > 0.5:
            sgn = 1.0 if rho > 0 else -1.0
            # a(t) - sgn * b(t) = 0 with a, b the standardized thresholds
            c0 = u[0] / csd[0] - sgn * u[1] / csd[1]
            c1 = -r0[0] / csd[0] + sgn * r0[1] / csd[1]
            if abs(c1) > 1e-12:
                out.append((-c0 / c1, np.sqrt(2.0 * (1.0 - abs(rho))) / abs(c1)))
    return [(t0, dl) for t0, dl in out if np.isfinite(t0) and abs(t0) < 20.0]


def orthant_probability(mean, cov, window: float = 10.0) -> float:
    """P(W <= 0 componentwise) for W ~ N(mean, cov).

    Deterministic: closed forms in dimensions 1 and 2 (the latter via Owen's
    T), and for higher dimension one coordinate is integrated out on a fixed
    composite Gauss-Legendre grid over [-window, window] standard deviations.
    The fixed grid makes the result a smooth function of its inputs, which the
    finite-difference optimizer relies on.  Coordinates with (numerically)
    zero variance are treated as deterministic.
    """
    m = np.asarray(mean, dtype=float).ravel()
    C = np.asarray(cov, dtype=float)
    d = m.size
    if d == 0:
        return 1.0
    C = C.reshape(d, d)
    var = np.diag(C).copy()
    scale = max(1.0, float(np.abs(var).max()))
    det = var <= _VAR_FLOOR * scale
    if det.any():
        if np.any(m[det] > 0):
            return 0.0
        keep = ~det
        return orthant_probability(m[keep], C[np.ix_(keep, keep)], window)
    sd = np.sqrt(var)
    u = -m / sd
    if d == 1:
        return float(special.ndtr(u[0]))
    R = C / np.outer(sd, sd)
    if d == 2:
        return float(bvn_cdf(u[0], u[1], float(np.clip(R[0, 1], -1.0, 1.0))))
    # Integrate out coordinate 0 in standardized form: Z0 = t, t <= u0.
    hi = min(u[0], window)
    if hi <= -window:
        return 0.0
    r0 = R[1:, 0]
    Rc = R[1:, 1:] - np.outer(r0, r0)
    t, w = _panels(-window, hi, breaks=_kinks(u[1:], r0, Rc) if d == 3 else ())
    # Remaining standardized coordinates satisfy Z_k <= u_k given Z0 = t,
    # with conditional mean r0 t and covariance Rc.
    if d == 3:
        cvar = np.diag(Rc)
        cfloor = _VAR_FLOOR
        dens = phi(t)
        thr = u[1:, None] - r0[:, None] * t[None, :]
        if cvar[0] <= cfloor and cvar[1] <= cfloor:
            inner = ((thr[0] >= 0) & (thr[1] >= 0)).astype(float)
        elif cvar[0] <= cfloor:
            inner = (thr[0] >= 0) * special.ndtr(thr[1] / np.sqrt(cvar[1]))
        elif cvar[1] <= cfloor:
            inner = (thr[1] >= 0) * special.ndtr(thr[0] / np.sqrt(cvar[0]))
        else:
            csd = np.sqrt(cvar)
            rho = float(np.clip(Rc[0, 1] / (csd[0] * csd[1]), -1.0, 1.0))
            inner = bvn_cdf(thr[0] / csd[0], thr[1] / csd[1], rho)
        return float(np.clip(np.sum(w * dens * inner), 0.0, 1.0))
    total = 0.0
    for tk, wk in zip(t, w):
        total += wk * phi(tk) * orthant_probability(r0 * tk - u[1:], Rc, window)
    return float(np.clip(total, 0.0, 1.0))


# ---------------------------------------------------------------- Monte Carlo


def rng_stream(seed: int, stream_id: int, *tags: int) -> np.random.Generator:
    """Counter-based (Philox) generator keyed by (seed, stream_id, *tags).

    Streams with different keys are statistically independent; the same key
    always reproduces the same draws regardless of evaluation order.
    """
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(stream_id), *map(int, tags)))
    return np.random.Generator(np.random.Philox(ss))


MC_CHUNK = 1 << 17


def chunked(total: int, chunk: int = MC_CHUNK):
    done = 0
    while done < total:
        m = min(chunk, total - done)
        yield m
        done += m


def _bernoulli_estimate(hits: int, n: int) -> Estimate:
    p = hits / n
    return Estimate(p, float(np.sqrt(p * (1.0 - p) / n)))


def mc_model_cell_measure(x, i: int, spec: McSpec = McSpec()) -> Estimate:
    """Frequency of argmax_j (G_j - x_j) = i over iid standard Gaussian q-vectors."""
    x = as_shift(x)
    q = x.size
    if not 0 <= i < q:
        raise InvalidDimensionError(f"cell index {i} out of range for q={q}")
    rng = rng_stream(spec.seed, spec.stream_id, 1)
    hits = 0
    for m in chunked(spec.sample_count):
        G = rng.standard_normal((m, q))
        hits += int(np.count_nonzero(np.argmax(G - x, axis=1) == i))
    return _bernoulli_estimate(hits, spec.sample_count)


def mc_model_interface_area(x, i: int, j: int, spec: McSpec = McSpec()) -> Estimate:
    """Conditional-sampling estimate of A^m_ij(x).

    Draws s ~ N(0, 1/2) and the remaining coordinates, averages the indicator
    of the other cells' constraints and multiplies by phi(c0).
    """
    x = as_shift(x)
    q = x.size
    if i == j:
        raise ValueError("interface needs distinct cells")
    i, j = min(i, j), max(i, j)
    dens = float(phi(abs(x[i] - x[j]) / SQRT2))
    if q == 2:
        return Estimate(dens, 0.0)
    off = np.delete(x, [i, j]) - 0.5 * (x[i] + x[j])
    rng = rng_stream(spec.seed, spec.stream_id, 2)
    hits = 0
    for m in chunked(spec.sample_count):
        s = rng.standard_normal(m) / SQRT2
        G = rng.standard_normal((m, q - 2))
        hits += int(np.count_nonzero(np.all(G < s[:, None] + off, axis=1)))
    p, se = _bernoulli_estimate(hits, spec.sample_count)
    return Estimate(dens * p, dens * se)
