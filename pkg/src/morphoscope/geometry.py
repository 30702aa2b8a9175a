"""Chart metrics on four-dimensional coordinate boxes and pointwise geometry.

A chart metric carries its own exact derivative data whenever the entries are
polynomial or in closed form; a generic callable metric falls back to finite
differences. Curvature uses the convention

    R(X, Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_[X,Y] Z,

so the unit round 2-sphere has <R(e1, e2)e2, e1> = +1 for an orthonormal
frame (e1, e2).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from ._linalg import check_spd
from .errors import DegenerateFrameError, DomainError
from .polynomials import Poly

DEFAULT_FD_STEP = 1e-5
FRAME_RANK_TOL = 1e-8
ORIENTATION_DET_TOL = 1e-12

_METRIC_FD_STEP = 1e-4
_METRIC_FD_STEP2 = 5e-4


@dataclass(frozen=True)
class Box:
    """Axis-aligned coordinate box, the domain of a chart."""

    lo: tuple
    hi: tuple

    @classmethod
    def cube(cls, half: float, center: Sequence[float] = (0.0, 0.0, 0.0, 0.0)) -> "Box":
        c = np.asarray(center, dtype=float)
        return cls(tuple(c - half), tuple(c + half))

    def contains(self, m: Sequence[float], margin: float = 0.0) -> bool:
        m = np.asarray(m, dtype=float)
        lo = np.asarray(self.lo)
        hi = np.asarray(self.hi)
        return bool(np.all(m >= lo + margin) and np.all(m <= hi - margin))

    def size(self) -> float:
        return float(np.min(np.asarray(self.hi) - np.asarray(self.lo)))

    def center(self) -> np.ndarray:
        return 0.5 * (np.asarray(self.lo) + np.asarray(self.hi))

    def boundary_distance(self, m: Sequence[float]) -> float:
        m = np.asarray(m, dtype=float)
        return float(min(np.min(m - np.asarray(self.lo)), np.min(np.asarray(self.hi) - m)))


class ChartMetric:
    """Base class: a metric tensor field over a coordinate box."""

    kind = "base"
    exact_derivatives = False

    def __init__(self, domain: Box):
        self.domain = domain

    def require_inside(self, m: Sequence[float], margin: float = 0.0) -> None:
        if not self.domain.contains(m, margin):
            raise DomainError(
                f"point {np.asarray(m).tolist()} leaves the chart domain "
                f"(margin {margin:g})")

    def matrix(self, m: Sequence[float]) -> np.ndarray:
        raise NotImplementedError

    def matrix_checked(self, m: Sequence[float]) -> np.ndarray:
        g = self.matrix(m)
        check_spd(g, "chart metric")
        return g

    # Finite-difference fallbacks; subclasses with closed forms override.

    def first_derivatives(self, m: Sequence[float]) -> np.ndarray:
        m = np.asarray(m, dtype=float)
        h = _METRIC_FD_STEP * max(1.0, float(np.max(np.abs(m))))
        out = np.zeros((4, 4, 4))
        for k in range(4):
            e = np.zeros(4)
            e[k] = 1.0
            d1 = (self.matrix(m + h * e) - self.matrix(m - h * e)) / (2 * h)
            d2 = (self.matrix(m + 0.5 * h * e) - self.matrix(m - 0.5 * h * e)) / h
            out[k] = (4.0 * d2 - d1) / 3.0
        return out

    def second_derivatives(self, m: Sequence[float]) -> np.ndarray:
        m = np.asarray(m, dtype=float)
        h = _METRIC_FD_STEP2 * max(1.0, float(np.max(np.abs(m))))
        out = np.zeros((4, 4, 4, 4))
        g0 = self.matrix(m)
        basis = np.eye(4)
        for k in range(4):
            ek = basis[k]
            out[k, k] = (self.matrix(m + h * ek) - 2.0 * g0 + self.matrix(m - h * ek)) / h ** 2
        for k in range(4):
            for l in range(k + 1, 4):
                ek, el = basis[k], basis[l]
                mixed = (self.matrix(m + h * (ek + el)) - self.matrix(m + h * (ek - el))
                         - self.matrix(m - h * (ek - el)) + self.matrix(m - h * (ek + el))
                         ) / (4 * h ** 2)
                out[k, l] = mixed
                out[l, k] = mixed
        return out


class FlatMetric(ChartMetric):
    """Identity metric on the box."""

    kind = "flat"
    exact_derivatives = True

    def matrix(self, m):
        return np.eye(4)

    def first_derivatives(self, m):
        return np.zeros((4, 4, 4))

    def second_derivatives(self, m):
        return np.zeros((4, 4, 4, 4))


class PolynomialMetric(ChartMetric):
    """Metric whose entries are exact polynomials in the chart coordinates."""

    kind = "polynomial"
    exact_derivatives = True

    def __init__(self, entries: Sequence[Sequence[Poly]], domain: Box):
        super().__init__(domain)
        self.entries = [[entries[i][j] for j in range(4)] for i in range(4)]
        self._d1 = [[[self.entries[i][j].diff(k) for j in range(4)] for i in range(4)]
                    for k in range(4)]
        self._d2 = [[[[self._d1[k][i][j].diff(l) for j in range(4)] for i in range(4)]
                     for l in range(4)] for k in range(4)]

    def matrix(self, m):
        g = np.empty((4, 4))
        for i in range(4):
            for j in range(i, 4):
                v = self.entries[i][j].eval_real(m)
                g[i, j] = v
                g[j, i] = v
        return g

    def first_derivatives(self, m):
        out = np.empty((4, 4, 4))
        for k in range(4):
            for i in range(4):
                for j in range(i, 4):
                    v = self._d1[k][i][j].eval_real(m)
                    out[k, i, j] = v
                    out[k, j, i] = v
        return out

    def second_derivatives(self, m):
        out = np.empty((4, 4, 4, 4))
        for k in range(4):
            for l in range(4):
                for i in range(4):
                    for j in range(i, 4):
                        v = self._d2[k][l][i][j].eval_real(m)
                        out[k, l, i, j] = v
                        out[k, l, j, i] = v
        return out


class ProductSphereMetric(ChartMetric):
    """Round sphere of the given radius times a flat plane.

    Coordinates (x1, x2) are polar/azimuthal angles on the sphere factor and
    (x3, x4) are Euclidean on the plane factor. The domain must stay away
    from the poles so the chart is nondegenerate.
    """

    kind = "product_sphere"
    exact_derivatives = True

    def __init__(self, radius: float, domain: Box):
        super().__init__(domain)
        if radius <= 0:
            raise ValueError("sphere radius must be positive")
        self.radius = float(radius)

    def matrix(self, m):
        r2 = self.radius ** 2
        return np.diag([r2, r2 * np.sin(m[0]) ** 2, 1.0, 1.0])

    def first_derivatives(self, m):
        out = np.zeros((4, 4, 4))
        out[0, 1, 1] = self.radius ** 2 * np.sin(2.0 * m[0])
        return out

    def second_derivatives(self, m):
        out = np.zeros((4, 4, 4, 4))
        out[0, 0, 1, 1] = 2.0 * self.radius ** 2 * np.cos(2.0 * m[0])
        return out


class CallableMetric(ChartMetric):
    """Metric given by an arbitrary callable; derivatives by differencing."""

    kind = "callable"
    exact_derivatives = False

    def __init__(self, fn: Callable[[np.ndarray], np.ndarray], domain: Box):
        super().__init__(domain)
        self._fn = fn

    def matrix(self, m):
        g = np.asarray(self._fn(np.asarray(m, dtype=float)), dtype=float)
        return 0.5 * (g + g.T)


def pullback_metric(base: ChartMetric, diffeo: Sequence[Poly], domain: Box) -> ChartMetric:
    """Metric of the chart obtained by precomposing with a polynomial map.

    diffeo lists the four components of the map Phi from the new chart into
    the base chart; the result is dPhi^T (g o Phi) dPhi. Polynomial bases
    stay exact; anything else falls back to a callable metric.
    """
    jac = [[diffeo[i].diff(a) for a in range(4)] for i in range(4)]
    if isinstance(base, FlatMetric):
        entries = [[Poly.zero() for _ in range(4)] for _ in range(4)]
        for a in range(4):
            for b in range(a, 4):
                s = Poly.zero()
                for i in range(4):
                    s = s + jac[i][a] * jac[i][b]
                s = s.real_poly()
                entries[a][b] = s
                entries[b][a] = s
        return PolynomialMetric(entries, domain)
    if isinstance(base, PolynomialMetric):
        comps = list(diffeo)
        pulled = [[base.entries[i][j].compose(comps) for j in range(4)] for i in range(4)]
        entries = [[Poly.zero() for _ in range(4)] for _ in range(4)]
        for a in range(4):
            for b in range(a, 4):
                s = Poly.zero()
                for i in range(4):
                    for j in range(4):
                        s = s + jac[i][a] * pulled[i][j] * jac[j][b]
                s = s.real_poly()
                entries[a][b] = s
                entries[b][a] = s
        return PolynomialMetric(entries, domain)

    def fn(x: np.ndarray) -> np.ndarray:
        J = np.array([[jac[i][a].eval_real(x) for a in range(4)] for i in range(4)])
        y = np.array([diffeo[i].eval_real(x) for i in range(4)])
        return J.T @ base.matrix(y) @ J

    return CallableMetric(fn, domain)


# --------------------------------------------------------------- curvature


def christoffel(metric: ChartMetric, m: Sequence[float]) -> np.ndarray:
    """Christoffel symbols Gamma[k, i, j] = Gamma^k_{ij} at m."""
    metric.require_inside(m)
    g = metric.matrix_checked(m)
    dg = metric.first_derivatives(m)
    ginv = np.linalg.inv(g)
    # S[m, i, j] = d_i g_{mj} + d_j g_{mi} - d_m g_{ij}
    S = (np.einsum("imj->mij", dg) + np.einsum("jmi->mij", dg)
         - np.einsum("mij->mij", dg))
    return 0.5 * np.einsum("km,mij->kij", ginv, S)


@dataclass
class CurvatureData:
    """Curvature tensor at a point, stored with all indices lowered."""

    point: np.ndarray
    metric_matrix: np.ndarray
    gamma: np.ndarray
    lowered: np.ndarray  # R[i, j, k, p] = <R(d_i, d_j) d_k, d_p>

    def pairing(self, X, Y, Z, W) -> float:
        return float(np.einsum("ijkp,i,j,k,p->", self.lowered, X, Y, Z, W))


def curvature_data(metric: ChartMetric, m: Sequence[float]) -> CurvatureData:
    """Assemble the curvature tensor at m from exact metric derivatives."""
    metric.require_inside(m)
    m = np.asarray(m, dtype=float)
    g = metric.matrix_checked(m)
    dg = metric.first_derivatives(m)
    d2g = metric.second_derivatives(m)
    ginv = np.linalg.inv(g)

    S = (np.einsum("imj->mij", dg) + np.einsum("jmi->mij", dg)
         - np.einsum("mij->mij", dg))
    gamma = 0.5 * np.einsum("km,mij->kij", ginv, S)
    # dS[i, m, j, k] = d_i S[m, j, k]
    dS = (np.einsum("ijmk->imjk", d2g) + np.einsum("ikmj->imjk", d2g)
          - np.einsum("imjk->imjk", d2g))
    dginv = -np.einsum("la,iab,bm->ilm", ginv, dg, ginv)
    dgamma = 0.5 * (np.einsum("ilm,mjk->iljk", dginv, S)
                    + np.einsum("lm,imjk->iljk", ginv, dS))
    # R^l_{ijk}: curvature of the stated sign convention
    upper = (np.einsum("iljk->lijk", dgamma) - np.einsum("jlik->lijk", dgamma)
             + np.einsum("lim,mjk->lijk", gamma, gamma)
             - np.einsum("ljm,mik->lijk", gamma, gamma))
    lowered = np.einsum("lijk,lp->ijkp", upper, g)
    return CurvatureData(point=m, metric_matrix=g, gamma=gamma, lowered=lowered)


def riemann_pairing(metric: ChartMetric, m, X, Y, Z, W) -> float:
    """<R(X, Y)Z, W> at m."""
    return curvature_data(metric, m).pairing(np.asarray(X, dtype=float),
                                             np.asarray(Y, dtype=float),
                                             np.asarray(Z, dtype=float),
                                             np.asarray(W, dtype=float))


# ------------------------------------------------------------------ frames


@dataclass
class Frame:
    """Ordered list of tangent vectors at a point, rows of `vectors`."""

    point: np.ndarray
    vectors: np.ndarray

    def basis_matrix(self) -> np.ndarray:
        """Matrix whose columns are the frame vectors."""
        return self.vectors.T


def metric_inner(g: np.ndarray, u: np.ndarray, v: np.ndarray) -> float:
    return float(u @ g @ v)


def metric_norm(g: np.ndarray, u: np.ndarray) -> float:
    return float(np.sqrt(max(0.0, u @ g @ u)))


def orthonormalize(metric: ChartMetric, m, seeds: Sequence[np.ndarray],
                   complete: bool = False) -> Frame:
    """Gram-Schmidt in the metric at m, processing seeds in order.

    A seed whose residual after projection has norm below FRAME_RANK_TOL is
    skipped. With complete=True the frame is extended to four vectors using
    coordinate basis vectors, in index order, under the same skip rule.
    """
    metric.require_inside(m)
    m = np.asarray(m, dtype=float)
    g = metric.matrix_checked(m)
    out: list[np.ndarray] = []

    def try_add(v: np.ndarray) -> None:
        w = np.asarray(v, dtype=float).copy()
        for u in out:
            w = w - (w @ g @ u) * u
        n = metric_norm(g, w)
        if n >= FRAME_RANK_TOL:
            out.append(w / n)

    for v in seeds:
        try_add(v)
    if complete:
        for k in range(4):
            if len(out) == 4:
                break
            e = np.zeros(4)
            e[k] = 1.0
            try_add(e)
        if len(out) < 4:
            raise DegenerateFrameError("could not complete an orthonormal frame")
    return Frame(point=m, vectors=np.array(out))


def orientation_sign(metric: ChartMetric, m, frame: Frame | np.ndarray,
                     reference: int = 1) -> int:
    """Sign of a 4-frame against the reference chart orientation."""
    metric.require_inside(m)
    vectors = frame.vectors if isinstance(frame, Frame) else np.asarray(frame, dtype=float)
    if vectors.shape != (4, 4):
        raise DegenerateFrameError("orientation needs exactly four vectors")
    det = float(np.linalg.det(vectors.T))
    if abs(det) < ORIENTATION_DET_TOL:
        raise DegenerateFrameError("frame determinant is numerically zero")
    return int(np.sign(det)) * int(reference)


def oriented_frame(metric: ChartMetric, m, orientation: int = 1) -> Frame:
    """Deterministic orthonormal frame at m with the requested orientation.

    Coordinate basis vectors are orthonormalized in index order; the last
    vector is flipped if needed. Reproducible across runs by construction.
    """
    fr = orthonormalize(metric, m, [], complete=True)
    if orientation_sign(metric, m, fr) != orientation:
        fr.vectors[3] = -fr.vectors[3]
    return fr


# ------------------------------------------------- covariant differentiation


def covariant_derivative(metric: ChartMetric, field: Callable[[np.ndarray], np.ndarray],
                         m, direction, step: float | None = None) -> np.ndarray:
    """Covariant derivative of a vector or (1,1)-tensor field along a vector.

    The field is sampled on a Richardson-extrapolated central stencil along
    the straight coordinate line through m; Christoffel corrections use exact
    metric derivatives when the metric provides them.
    """
    m = np.asarray(m, dtype=float)
    X = np.asarray(direction, dtype=float)
    h = step if step is not None else DEFAULT_FD_STEP * max(1.0, float(np.max(np.abs(m))))
    xn = float(np.linalg.norm(X))
    if xn == 0:
        raise ValueError("direction must be nonzero")
    t = h / max(1.0, xn)
    for s in (t, -t, 0.5 * t, -0.5 * t):
        metric.require_inside(m + s * X)
    f_p = np.asarray(field(m + t * X), dtype=float)
    f_m = np.asarray(field(m - t * X), dtype=float)
    f_hp = np.asarray(field(m + 0.5 * t * X), dtype=float)
    f_hm = np.asarray(field(m - 0.5 * t * X), dtype=float)
    d_full = (f_p - f_m) / (2.0 * t)
    d_half = (f_hp - f_hm) / t
    partial = (4.0 * d_half - d_full) / 3.0

    val = np.asarray(field(m), dtype=float)
    gamma = christoffel(metric, m)
    if val.ndim == 1:
        return partial + np.einsum("kij,i,j->k", gamma, X, val)
    if val.shape == (4, 4):
        corr = (np.einsum("ikm,k,mj->ij", gamma, X, val)
                - np.einsum("mkj,k,im->ij", gamma, X, val))
        return partial + corr
    raise ValueError("field must produce a vector or a (1,1) tensor")
