"""Chart geometry: orthonormal frames, connection and curvature coefficients.

Every manifold is presented on a single chart that carries a global orthonormal
frame {e_1, ..., e_n}.  Fields along curves are stored as frame components, so
downstream modules see a flat metric; position dependence enters only through
the three ingredients supplied here:

* ``h`` frame-to-chart matrix, column j holds the chart components of e_j;
* ``gamma[i, k, j]`` connection coefficients, the e_k-component of the
  covariant derivative of e_j along e_i (antisymmetric in (k, j) because the
  frame is orthonormal);
* ``r[i, j, k, l]`` curvature coefficients, the e_l-component of R(e_i, e_j) e_k
  with R(u, v) = [nabla_u, nabla_v] - nabla_[u,v].

Built-in models: Euclidean space, the flat unit torus, the hyperbolic upper
half-plane, the round unit sphere in a stereographic chart, and a generic
conformal metric exp(2*lam)*delta with ``lam`` given in closed form.  All
evaluators are analytic (sympy differentiates the conformal factor once at
construction time); nothing differentiates the metric numerically on the hot
path.  The test suite keeps an independent finite-difference oracle.

Evaluators are vectorised: coordinates of shape ``(..., n)`` yield outputs with
the same leading shape.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ChartDomainError

# Exact-identity tolerance for the frame algebra (antisymmetries hold by
# construction, so violations indicate a broken model implementation).
ANTISYMMETRY_TOL = 1e-12


@dataclass(frozen=True)
class ChartPoint:
    """A single point given by its chart coordinates."""

    coords: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coords", np.asarray(self.coords, dtype=float))


@dataclass(frozen=True)
class FrameMatrix:
    """Frame-to-chart matrix at one point (column j = chart components of e_j)."""

    h: np.ndarray


@dataclass(frozen=True)
class ChristoffelCoeffs:
    """Connection coefficients ``gamma[i, k, j]`` of the orthonormal frame."""

    gamma: np.ndarray


@dataclass(frozen=True)
class CurvatureCoeffs:
    """Curvature coefficients ``r[i, j, k, l]`` of the orthonormal frame."""

    r: np.ndarray


class ManifoldModel:
    """Base class for single-chart models with a global orthonormal frame.

    Subclasses implement the batched evaluators ``frame``, ``metric``,
    ``christoffel`` and ``curvature`` for coordinate arrays of shape
    ``(..., dim)``, plus the chart predicate ``contains``.
    """

    name = "abstract"
    is_flat = False

    def __init__(self, dim: int):
        self.dim = int(dim)
        if self.dim < 1:
            raise ValueError(f"manifold dimension must be >= 1, got {dim}")

    # -- chart bookkeeping -------------------------------------------------

    def contains(self, coords: np.ndarray) -> np.ndarray:
        """Boolean mask of points lying inside the chart domain."""
        c = np.asarray(coords, dtype=float)
        return np.all(np.isfinite(c), axis=-1)

    def displacement(self, start: np.ndarray, end: np.ndarray) -> np.ndarray:
        """Chart difference end - start (overridden where the chart wraps)."""
        return np.asarray(end, dtype=float) - np.asarray(start, dtype=float)

    # -- analytic evaluators ----------------------------------------------

    def frame(self, coords: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def metric(self, coords: np.ndarray) -> np.ndarray:
        """Chart components of the metric (used by tests to check h^T G h = I)."""
        raise NotImplementedError

    def christoffel(self, coords: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def curvature(self, coords: np.ndarray) -> np.ndarray:
        raise NotImplementedError


class EuclideanModel(ManifoldModel):
    """Flat R^n with the identity frame; all coefficients vanish."""

    name = "euclidean"
    is_flat = True

    def frame(self, coords):
        c = np.asarray(coords, dtype=float)
        return np.broadcast_to(np.eye(self.dim), c.shape[:-1] + (self.dim, self.dim)).copy()

    metric = frame

    def christoffel(self, coords):
        c = np.asarray(coords, dtype=float)
        return np.zeros(c.shape[:-1] + (self.dim,) * 3)

    def curvature(self, coords):
        c = np.asarray(coords, dtype=float)
        return np.zeros(c.shape[:-1] + (self.dim,) * 4)


class FlatTorusModel(EuclideanModel):
    """Unit torus R^n / Z^n: Euclidean geometry with wrap-around differences."""

    name = "flat-torus"

    def displacement(self, start, end):
        d = np.asarray(end, dtype=float) - np.asarray(start, dtype=float)
        return (d + 0.5) % 1.0 - 0.5


class _ConformalModel(ManifoldModel):
    """Metric exp(2*lam) * delta; subclasses provide lam and its derivatives.

    The orthonormal frame is e_j = exp(-lam) * d/dx^j.  Closed forms:

        gamma[i, k, j] = exp(-lam) * (delta_ik lam_j - delta_ij lam_k)
        r[i, j, k, l]  = exp(-2 lam) * (d_jl S_ik - d_il S_jk + d_ik S_jl
                          - d_jk S_il - (d_il d_jk - d_jl d_ik) |grad lam|^2)

    with S = hess(lam) - grad(lam) grad(lam)^T.  When the model declares a
    constant sectional curvature K the simpler tensor
    K * (d_jk d_il - d_ik d_jl) is used directly; the generic formula reduces
    to it (checked in the tests).
    """

    #: sectional curvature when constant, else None
    constant_curvature: float | None = None

    def _lam(self, coords: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _lam_grad(self, coords: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _lam_hess(self, coords: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def frame(self, coords):
        c = np.asarray(coords, dtype=float)
        scale = np.exp(-self._lam(c))
        return scale[..., None, None] * np.eye(self.dim)

    def metric(self, coords):
        c = np.asarray(coords, dtype=float)
        scale = np.exp(2.0 * self._lam(c))
        return scale[..., None, None] * np.eye(self.dim)

    def christoffel(self, coords):
        c = np.asarray(coords, dtype=float)
        n = self.dim
        grad = self._lam_grad(c)
        g = np.zeros(c.shape[:-1] + (n, n, n))
        for i in range(n):
            g[..., i, i, :] += grad
            g[..., i, :, i] -= grad
        return np.exp(-self._lam(c))[..., None, None, None] * g

    def curvature(self, coords):
        c = np.asarray(coords, dtype=float)
        n = self.dim
        eye = np.eye(n)
        if self.constant_curvature is not None:
            base = self.constant_curvature * (
                np.einsum("jk,il->ijkl", eye, eye) - np.einsum("ik,jl->ijkl", eye, eye)
            )
            return np.broadcast_to(base, c.shape[:-1] + (n,) * 4).copy()
        grad = self._lam_grad(c)
        s = self._lam_hess(c) - grad[..., :, None] * grad[..., None, :]
        q = np.sum(grad * grad, axis=-1)
        r = (
            np.einsum("jl,...ik->...ijkl", eye, s)
            - np.einsum("il,...jk->...ijkl", eye, s)
            + np.einsum("ik,...jl->...ijkl", eye, s)
            - np.einsum("jk,...il->...ijkl", eye, s)
        )
        skew = np.einsum("il,jk->ijkl", eye, eye) - np.einsum("jl,ik->ijkl", eye, eye)
        r = r - skew * q[..., None, None, None, None]
        return np.exp(-2.0 * self._lam(c))[..., None, None, None, None] * r


class HyperbolicHalfPlaneModel(_ConformalModel):
    """Upper half-plane y > 0 with metric (dx^2 + dy^2) / y^2 (curvature -1)."""

    name = "hyperbolic"
    constant_curvature = -1.0

    def __init__(self):
        super().__init__(2)

    def contains(self, coords):
        c = np.asarray(coords, dtype=float)
        return np.all(np.isfinite(c), axis=-1) & (c[..., 1] > 0.0)

    def _lam(self, coords):
        return -np.log(coords[..., 1])

    def _lam_grad(self, coords):
        g = np.zeros_like(coords)
        g[..., 1] = -1.0 / coords[..., 1]
        return g

    def _lam_hess(self, coords):
        c = coords
        h = np.zeros(c.shape[:-1] + (2, 2))
        h[..., 1, 1] = 1.0 / c[..., 1] ** 2
        return h


class SphereChartModel(_ConformalModel):
    """Round unit sphere minus a pole, in a stereographic chart (curvature +1).

    Metric 4 (1+|p|^2)^-2 delta; the chart origin is the point antipodal to
    the removed pole.
    """

    name = "sphere"
    constant_curvature = 1.0

    def __init__(self, dim: int = 2):
        super().__init__(dim)

    def _lam(self, coords):
        return math.log(2.0) - np.log1p(np.sum(coords * coords, axis=-1))

    def _lam_grad(self, coords):
        s = 1.0 + np.sum(coords * coords, axis=-1)
        return -2.0 * coords / s[..., None]

    def _lam_hess(self, coords):
        c = coords
        n = self.dim
        s = 1.0 + np.sum(c * c, axis=-1)
        outer = c[..., :, None] * c[..., None, :]
        return (-2.0 / s)[..., None, None] * np.eye(n) + (4.0 / s**2)[..., None, None] * outer


class ConformalModel(_ConformalModel):
    """User-supplied conformal factor exp(2*lam) on R^n.

    ``expression`` is a closed-form expression for lam in the coordinates
    ``x, y, z`` (dimensions <= 3) or ``x0, x1, ...``; it is differentiated
    symbolically once, then evaluated numerically.  ``domain`` optionally
    restricts the chart (a vectorised predicate on coordinate arrays).
    """

    name = "conformal"

    def __init__(self, dim: int, expression: str, domain=None):
        super().__init__(dim)
        import sympy

        if dim <= 3:
            names = ["x", "y", "z"][:dim]
        else:
            names = [f"x{i}" for i in range(dim)]
        syms = sympy.symbols(names)
        if dim == 1:
            syms = [syms]
        expr = sympy.sympify(expression, locals=dict(zip(names, syms)))
        extra = expr.free_symbols - set(syms)
        if extra:
            raise ValueError(
                f"conformal factor uses unknown symbols {sorted(map(str, extra))}; "
                f"coordinates are {names}"
            )
        self.expression = str(expr)
        self._domain = domain
        self._lam_fn = sympy.lambdify(syms, expr, "numpy")
        self._grad_fns = [sympy.lambdify(syms, expr.diff(s), "numpy") for s in syms]
        self._hess_fns = [
            [sympy.lambdify(syms, expr.diff(a, b), "numpy") for b in syms] for a in syms
        ]

    def contains(self, coords):
        base = super().contains(coords)
        if self._domain is None:
            return base
        return base & np.asarray(self._domain(np.asarray(coords, dtype=float)), bool)

    def _eval(self, fn, coords):
        args = [coords[..., i] for i in range(self.dim)]
        out = np.asarray(fn(*args), dtype=float)
        return np.broadcast_to(out, coords.shape[:-1]).copy()

    def _lam(self, coords):
        return self._eval(self._lam_fn, coords)

    def _lam_grad(self, coords):
        cols = [self._eval(fn, coords) for fn in self._grad_fns]
        return np.stack(cols, axis=-1)

    def _lam_hess(self, coords):
        rows = [
            np.stack([self._eval(fn, coords) for fn in row], axis=-1)
            for row in self._hess_fns
        ]
        return np.stack(rows, axis=-2)


_BUILTIN = {
    "euclidean": lambda dim, params: EuclideanModel(dim),
    "flat-torus": lambda dim, params: FlatTorusModel(dim),
    "hyperbolic": lambda dim, params: HyperbolicHalfPlaneModel(),
    "sphere": lambda dim, params: SphereChartModel(dim),
    "conformal": lambda dim, params: ConformalModel(
        dim, params["expression"], params.get("domain")
    ),
}


def make_manifold(name: str, dim: int = 2, **params) -> ManifoldModel:
    """Construct a built-in model by name."""
    try:
        factory = _BUILTIN[name]
    except KeyError:
        raise ValueError(
            f"unknown manifold {name!r}; choose from {sorted(_BUILTIN)}"
        ) from None
    return factory(dim, params)


# ---------------------------------------------------------------------------
# pointwise API


def _coords_of(point) -> np.ndarray:
    c = point.coords if isinstance(point, ChartPoint) else np.asarray(point, dtype=float)
    return np.asarray(c, dtype=float)


def _require_inside(model: ManifoldModel, coords: np.ndarray) -> None:
    if coords.shape != (model.dim,):
        raise ValueError(f"expected a point of dimension {model.dim}, got shape {coords.shape}")
    if not bool(model.contains(coords)):
        raise ChartDomainError(f"point {coords} is outside the chart of model {model.name!r}")


def frame_at(model: ManifoldModel, point) -> FrameMatrix:
    """Frame-to-chart matrix at one point; raises ChartDomainError outside the chart."""
    c = _coords_of(point)
    _require_inside(model, c)
    return FrameMatrix(h=model.frame(c))


def christoffel_at(model: ManifoldModel, point) -> ChristoffelCoeffs:
    """Connection coefficients at one point, validated for (k, j) antisymmetry."""
    c = _coords_of(point)
    _require_inside(model, c)
    g = model.christoffel(c)
    skew = np.max(np.abs(g + np.swapaxes(g, -2, -1)))
    if skew > ANTISYMMETRY_TOL:
        raise ValueError(
            f"model {model.name!r} produced non-antisymmetric connection "
            f"coefficients at {c} (violation {skew:.3e})"
        )
    return ChristoffelCoeffs(gamma=g)


def curvature_at(model: ManifoldModel, point) -> CurvatureCoeffs:
    """Curvature coefficients at one point, validated for both antisymmetries."""
    c = _coords_of(point)
    _require_inside(model, c)
    r = model.curvature(c)
    skew_ij = np.max(np.abs(r + np.swapaxes(r, 0, 1)))
    skew_kl = np.max(np.abs(r + np.swapaxes(r, 2, 3)))
    worst = max(skew_ij, skew_kl)
    if worst > ANTISYMMETRY_TOL:
        raise ValueError(
            f"model {model.name!r} produced curvature coefficients without the "
            f"required antisymmetries at {c} (violation {worst:.3e})"
        )
    return CurvatureCoeffs(r=r)


# ---------------------------------------------------------------------------
# sampling along discrete curves


@dataclass(frozen=True)
class GeometrySamples:
    """Frame geometry sampled along a discrete curve (leading axis = grid index)."""

    frame: np.ndarray      # (N, n, n)
    frame_inv: np.ndarray  # (N, n, n)
    chris: np.ndarray      # (N, n, n, n)
    curv: np.ndarray       # (N, n, n, n, n)


def sample_geometry(model: ManifoldModel, points: np.ndarray) -> GeometrySamples:
    """Evaluate frame, connection and curvature at every curve sample.

    Raises ChartDomainError naming the first offending grid index if any point
    left the chart.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != model.dim:
        raise ValueError(f"expected points of shape (N, {model.dim}), got {pts.shape}")
    inside = model.contains(pts)
    if not np.all(inside):
        k = int(np.argmin(inside))
        raise ChartDomainError(
            f"curve left the chart of model {model.name!r} at grid index {k}, "
            f"coordinates {pts[k]}"
        )
    h = model.frame(pts)
    return GeometrySamples(
        frame=h,
        frame_inv=np.linalg.inv(h),
        chris=model.christoffel(pts),
        curv=model.curvature(pts),
    )


def apply_chris(chris: np.ndarray, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Pointwise bilinear connection action Gamma(u, v) on frame components."""
    return np.einsum("pikj,pi,pj->pk", chris, u, v)


def apply_curv(curv: np.ndarray, u: np.ndarray, v: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Pointwise trilinear curvature action R(u, v) w on frame components."""
    return np.einsum("pijkl,pi,pj,pk->pl", curv, u, v, w)
