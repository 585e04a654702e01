"""Periodic grid fields along the wire and the covariant calculus on them.

The wire is parametrised by arc length on the unit circle R/Z, discretised by
N equispaced samples (dx = 1/N, indices wrap mod N).  A "field" is a plain
float array of shape (N, n) holding frame components of a vector field along
the curve; scalar fields have shape (N,).  Derivatives are second-order
centred differences; the covariant versions add the pointwise connection
action with the appropriate direction vector:

    cov_dx(p) = dp/dx + Gamma(xi, p)        (xi = unit tangent, frame comps)
    cov_dt(p) = dp/dt + Gamma(eta, p)       (eta = velocity, frame comps)

Because the centred difference matrix is antisymmetric and Gamma(v, .) is
pointwise antisymmetric, cov_dx satisfies exact discrete summation by parts:
l2_inner(cov_dx(p), q) == -l2_inner(p, cov_dx(q)) to roundoff.  Downstream
solvers rely on that identity, so no one-sided or spectral variants are used
here.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .geometry import GeometrySamples, apply_chris

MIN_POINTS = 8


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on R/Z with N >= 8 samples."""

    n_points: int

    def __post_init__(self):
        if int(self.n_points) != self.n_points or self.n_points < MIN_POINTS:
            raise ValueError(f"grid needs an integer n_points >= {MIN_POINTS}, got {self.n_points}")
        object.__setattr__(self, "n_points", int(self.n_points))

    @property
    def dx(self) -> float:
        return 1.0 / self.n_points

    def points(self) -> np.ndarray:
        return np.arange(self.n_points) * self.dx


@dataclass(frozen=True)
class CurveState:
    """Wire state at one time: positions, unit tangent, its plain time rate,
    velocity, and (once solved) the tension field.

    ``xi_t`` stores the plain coordinate time derivative of ``xi``; the
    covariant rate is recovered on demand as xi_t + Gamma(eta, xi).  ``theta``
    is None until a tension solve has been attached to this state.
    """

    gamma: np.ndarray            # (N, n) chart coordinates
    xi: np.ndarray               # (N, n) frame components, unit rows
    xi_t: np.ndarray             # (N, n) plain d(xi)/dt
    eta: np.ndarray              # (N, n) frame components of the velocity
    theta: Optional[np.ndarray] = None
    time: float = 0.0

    @property
    def n_points(self) -> int:
        return self.gamma.shape[0]

    @property
    def dim(self) -> int:
        return self.gamma.shape[1]

    def with_theta(self, theta: np.ndarray) -> "CurveState":
        return replace(self, theta=theta)


def as_field(values, grid: Grid, dim: int | None = None) -> np.ndarray:
    """Validate and return an (N, n) float field array."""
    v = np.asarray(values, dtype=float)
    if v.ndim != 2 or v.shape[0] != grid.n_points:
        raise ValueError(f"expected a field of shape ({grid.n_points}, n), got {v.shape}")
    if dim is not None and v.shape[1] != dim:
        raise ValueError(f"expected {dim} components, got {v.shape[1]}")
    return v


# ---------------------------------------------------------------------------
# derivatives


def circ_diff(values: np.ndarray, dx: float) -> np.ndarray:
    """Second-order centred difference with periodic wrap (leading axis)."""
    return (np.roll(values, -1, axis=0) - np.roll(values, 1, axis=0)) / (2.0 * dx)


def cov_dx(p: np.ndarray, xi: np.ndarray, samples: GeometrySamples, dx: float) -> np.ndarray:
    """Covariant arc-length derivative of p along the curve with tangent xi."""
    return circ_diff(p, dx) + apply_chris(samples.chris, xi, p)


def compact_second(values: np.ndarray, dx: float) -> np.ndarray:
    """Symmetric (1, -2, 1)/dx^2 second difference with periodic wrap."""
    v = np.asarray(values, dtype=float)
    return (np.roll(v, -1, axis=0) - 2.0 * v + np.roll(v, 1, axis=0)) / (dx * dx)


def cov_dxx(p: np.ndarray, xi: np.ndarray, samples: GeometrySamples, dx: float) -> np.ndarray:
    """Covariant second arc-length derivative with the compact plain stencil.

    Expanding D_x(D_x p) gives the plain second derivative plus three
    connection terms; those are kept exactly as in the composition of two
    ``cov_dx`` calls, while the doubly centred plain part (an effectively
    2*dx stencil) is replaced by the compact symmetric second difference.
    Both forms are second order; the compact one pairs with
    ``sided_grad_sq`` so that the unit-tangent defect produced by the wave
    step stays at the time-discretization level.
    """
    conn = apply_chris(samples.chris, xi, p)
    return (
        compact_second(p, dx)
        + apply_chris(samples.chris, xi, circ_diff(p, dx))
        + circ_diff(conn, dx)
        + apply_chris(samples.chris, xi, conn)
    )


def sided_grad_sq(p: np.ndarray, xi: np.ndarray, samples: GeometrySamples, dx: float) -> np.ndarray:
    """Averaged squared forward/backward covariant difference of p.

    Second-order accurate for ||D_x p||^2.  On a pointwise-unit field the
    combination g(cov_dxx(xi), xi) + sided_grad_sq(xi) cancels identically
    when the connection vanishes, which is what pins ||xi|| = 1 during
    marching; the centred form leaves an O(dx^2) remainder instead.
    """
    conn = apply_chris(samples.chris, xi, p)
    fwd = (np.roll(p, -1, axis=0) - p) / dx + conn
    bwd = (p - np.roll(p, 1, axis=0)) / dx + conn
    return 0.5 * (np.sum(fwd * fwd, axis=-1) + np.sum(bwd * bwd, axis=-1))


def cov_dt(
    p_prev: np.ndarray,
    p_next: np.ndarray,
    eta: np.ndarray,
    dt: float,
    samples: GeometrySamples,
) -> np.ndarray:
    """Covariant time derivative from two bracketing levels.

    Centred difference in time plus Gamma(eta, .) acting on the level average;
    ``samples`` and ``eta`` belong to the central level.
    """
    mid = 0.5 * (p_prev + p_next)
    return (p_next - p_prev) / (2.0 * dt) + apply_chris(samples.chris, eta, mid)


def time_diff_series(series: np.ndarray, dt: float) -> np.ndarray:
    """Plain time derivative of a field series (M+1, N, n), centred inside,
    one-sided second order at both ends."""
    s = np.asarray(series, dtype=float)
    if s.shape[0] < 3:
        raise ValueError("need at least 3 time levels for a second-order time derivative")
    out = np.empty_like(s)
    out[1:-1] = (s[2:] - s[:-2]) / (2.0 * dt)
    out[0] = (-3.0 * s[0] + 4.0 * s[1] - s[2]) / (2.0 * dt)
    out[-1] = (3.0 * s[-1] - 4.0 * s[-2] + s[-3]) / (2.0 * dt)
    return out


# ---------------------------------------------------------------------------
# pointwise algebra and norms


def perp(v: np.ndarray, xi: np.ndarray) -> np.ndarray:
    """Component of v orthogonal to xi at each sample: v - <v, xi> xi."""
    return v - np.sum(v * xi, axis=-1, keepdims=True) * xi


def l2_inner(p: np.ndarray, q: np.ndarray, dx: float) -> float:
    """Trapezoid (here: exact periodic) L2 pairing dx * sum_k <p_k, q_k>."""
    return float(dx * np.sum(p * q))

def l2_norm(p: np.ndarray, dx: float) -> float:
    return float(np.sqrt(max(l2_inner(p, p, dx), 0.0)))


def row_norms(p: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum(p * p, axis=-1))


def m0(p: np.ndarray) -> float:
    """Sup norm over samples of the pointwise Euclidean norm."""
    if p.ndim == 1:
        return float(np.max(np.abs(p)))
    return float(np.max(row_norms(p)))


def m1(series: np.ndarray, dx: float, dt: float) -> float:
    """Sup over a time window of m0 of the field and of its plain x and t
    derivatives (first-order composite norm of a field series)."""
    s = np.asarray(series, dtype=float)
    x_deriv = np.stack([circ_diff(level, dx) for level in s])
    return sup_m0(s) + sup_m0(x_deriv) + sup_m0(time_diff_series(s, dt))


def sup_m0(series: np.ndarray) -> float:
    """Max of m0 over the leading (time) axis of a series (M+1, N, n)."""
    s = np.asarray(series, dtype=float)
    if s.ndim == 2:
        return m0(s)
    return float(max(m0(level) for level in s))


def m01(series: np.ndarray, dt: float) -> float:
    """Sup-norm of a series plus sup-norm of its plain time derivative."""
    return sup_m0(series) + sup_m0(time_diff_series(np.asarray(series, float), dt))


def constraint_drift(xi: np.ndarray) -> float:
    """max_k | ||xi_k||^2 - 1 |, the discrete unit-tangent defect."""
    return float(np.max(np.abs(np.sum(xi * xi, axis=-1) - 1.0)))
