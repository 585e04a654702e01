"""Tension solve and bentness: periodic covariant elliptic problems.

Both problems share one operator family built from the covariant arc-length
derivative D = cov_dx along the current curve:

* tension:   -D(D u + f) + perp(u) = h   (perp = projection off the tangent)
* bentness:  -D D phi + phi = xi

The second derivative is deliberately the composition D o D.  The centred
difference matrix is antisymmetric and the connection action is pointwise
antisymmetric, so D^T = -D exactly and both operators are symmetric positive
(semi)definite by construction, with no extra symmetrisation step.  The
tension operator loses definiteness exactly when the tangent field is
covariantly constant; the bentness value measures the distance from that
degeneracy and gates the solve.

Systems up to DENSE_CUTOFF unknowns are assembled densely and solved directly;
larger ones use an unassembled conjugate-direction iteration with the same
call signature and tolerances.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg
import scipy.sparse.linalg

from .errors import NearGeodesicError, NumericalSolveError
from .fields import Grid, constraint_drift, cov_dx, l2_norm, m0, perp
from .geometry import GeometrySamples

#: default residual tolerance (infinity norm, relative to the data scale)
DEFAULT_TOL = 1e-8
#: default bentness floor below which the tension solve refuses to run
DEFAULT_B_FLOOR = 1e-3
#: largest N * n solved by dense direct factorisation
DENSE_CUTOFF = 4096


@dataclass(frozen=True)
class EllipticSystem:
    """Dense symmetric system matrix and right-hand side (flattened fields)."""

    matrix: np.ndarray  # (N*n, N*n)
    rhs: np.ndarray     # (N*n,)


@dataclass(frozen=True)
class BentnessReport:
    """Result of the bentness minimisation.

    ``b_value`` is the square-root of the minimal penalty, in [0, 1]; ``phi``
    the minimiser; ``residual`` the infinity norm of the optimality system's
    defect.
    """

    b_value: float
    phi: np.ndarray
    residual: float


@dataclass(frozen=True)
class FluxSolveResult:
    u: np.ndarray
    flux: np.ndarray       # D u + f, reused by the velocity update
    residual: float
    bentness: Optional[BentnessReport]


@dataclass(frozen=True)
class ThetaSolveResult:
    theta: np.ndarray
    flux: np.ndarray       # D theta + psi
    residual: float
    bentness: Optional[BentnessReport]


def _dense_cov_dx_matrix(xi: np.ndarray, samples: GeometrySamples, grid: Grid) -> np.ndarray:
    """Dense (N*n, N*n) matrix of cov_dx along the curve with tangent xi."""
    npts, n = xi.shape
    shift_up = np.eye(npts, k=1) + np.eye(npts, k=1 - npts)
    c = (shift_up - shift_up.T) / (2.0 * grid.dx)
    d = np.kron(c, np.eye(n))
    # pointwise connection blocks Gamma(xi_k, .)
    blocks = np.einsum("pikj,pi->pkj", samples.chris, xi)
    for k in range(npts):
        d[k * n : (k + 1) * n, k * n : (k + 1) * n] += blocks[k]
    return d


def _zeroth_blocks(xi: np.ndarray, kind: str) -> np.ndarray:
    npts, n = xi.shape
    eye = np.broadcast_to(np.eye(n), (npts, n, n))
    if kind == "identity":
        return eye.copy()
    if kind == "perp":
        return eye - xi[:, :, None] * xi[:, None, :]
    raise ValueError(f"unknown zeroth-order kind {kind!r}")


def _dense_operator(xi, samples, grid, kind: str) -> np.ndarray:
    d = _dense_cov_dx_matrix(xi, samples, grid)
    a = -d @ d
    npts, n = xi.shape
    blocks = _zeroth_blocks(xi, kind)
    for k in range(npts):
        a[k * n : (k + 1) * n, k * n : (k + 1) * n] += blocks[k]
    return a


def _matrix_free_operator(xi, samples, grid, kind: str):
    npts, n = xi.shape
    blocks = _zeroth_blocks(xi, kind)

    def matvec(flat):
        u = flat.reshape(npts, n)
        du = cov_dx(u, xi, samples, grid.dx)
        out = -cov_dx(du, xi, samples, grid.dx)
        out += np.einsum("pkj,pj->pk", blocks, u)
        return out.reshape(-1)

    return scipy.sparse.linalg.LinearOperator((npts * n, npts * n), matvec=matvec)


def _solve_system(xi, samples, grid, kind, rhs_field, tol, dense_cutoff):
    """Solve the symmetric operator (dense direct or conjugate-direction)."""
    npts, n = xi.shape
    flat_rhs = rhs_field.reshape(-1)
    if npts * n <= dense_cutoff:
        a = _dense_operator(xi, samples, grid, kind)
        try:
            flat = scipy.linalg.solve(a, flat_rhs, assume_a="sym")
        except scipy.linalg.LinAlgError as exc:
            raise NumericalSolveError(
                f"dense tension-family solve failed ({exc}); "
                f"condition estimate {np.linalg.cond(a):.3e}"
            ) from exc
        return flat.reshape(npts, n)
    op = _matrix_free_operator(xi, samples, grid, kind)
    scale = max(np.max(np.abs(flat_rhs)), 1.0)
    flat, info = _cg(op, flat_rhs, rtol=min(tol, 1e-10) / scale)
    if info != 0:
        raise NumericalSolveError(
            f"conjugate-direction solve did not converge (info={info}, "
            f"size={npts * n})"
        )
    return flat.reshape(npts, n)


def _cg(op, rhs, rtol):
    try:
        return scipy.sparse.linalg.cg(op, rhs, rtol=rtol, atol=0.0, maxiter=20000)
    except TypeError:  # older scipy spells the keyword "tol"
        return scipy.sparse.linalg.cg(op, rhs, tol=rtol, atol=0.0, maxiter=20000)


def assemble_tension_system(f, h, xi, samples: GeometrySamples, grid: Grid) -> EllipticSystem:
    """Dense tension system -D(Du + f) + perp(u) = h as matrix and rhs."""
    rhs = h + cov_dx(f, xi, samples, grid.dx)
    return EllipticSystem(matrix=_dense_operator(xi, samples, grid, "perp"), rhs=rhs.reshape(-1))


def assemble_bentness_system(xi, samples: GeometrySamples, grid: Grid) -> EllipticSystem:
    """Dense bentness optimality system (-DD + I) phi = xi."""
    return EllipticSystem(matrix=_dense_operator(xi, samples, grid, "identity"), rhs=xi.reshape(-1))


def bentness(
    xi: np.ndarray,
    samples: GeometrySamples,
    grid: Grid,
    *,
    tol: float = DEFAULT_TOL,
    dense_cutoff: int = DENSE_CUTOFF,
) -> BentnessReport:
    """Distance of the tangent field from covariant constancy, in [0, 1].

    Minimises ||phi - xi||_L2^2 + ||D phi||_L2^2 over fields phi; the minimum
    is attained at the solution of (-DD + I) phi = xi and vanishes exactly
    when some covariantly constant field equals xi.
    """
    phi = _solve_system(xi, samples, grid, "identity", xi, tol, dense_cutoff)
    dphi = cov_dx(phi, xi, samples, grid.dx)
    value_sq = l2_norm(phi - xi, grid.dx) ** 2 + l2_norm(dphi, grid.dx) ** 2
    defect = -cov_dx(dphi, xi, samples, grid.dx) + phi - xi
    return BentnessReport(
        b_value=float(np.sqrt(max(value_sq, 0.0))),
        phi=phi,
        residual=m0(defect),
    )


def solve_flux_form(
    f: np.ndarray,
    h: np.ndarray,
    xi: np.ndarray,
    samples: GeometrySamples,
    grid: Grid,
    *,
    tol: float = DEFAULT_TOL,
    b_floor: float = DEFAULT_B_FLOOR,
    bentness_report: Optional[BentnessReport] = None,
    check_bentness: bool = True,
    dense_cutoff: int = DENSE_CUTOFF,
) -> FluxSolveResult:
    """Solve -D(Du + f) + perp(u) = h along the current curve.

    Refuses to run (NearGeodesicError) when the bentness of ``xi`` is below
    ``b_floor``; a precomputed ``bentness_report`` is reused when supplied.
    The returned flux D u + f is the quantity downstream consumers need, so
    it is formed here rather than re-differenced.
    """
    if constraint_drift(xi) > 0.1:
        raise ValueError("tangent field is far from unit length; refusing tension solve")
    report = bentness_report
    if check_bentness:
        if report is None:
            report = bentness(xi, samples, grid, tol=tol, dense_cutoff=dense_cutoff)
        if report.b_value < b_floor:
            raise NearGeodesicError(
                f"bentness {report.b_value:.3e} below floor {b_floor:.3e}; "
                "tension operator is (near) singular"
            )
    rhs = h + cov_dx(f, xi, samples, grid.dx)
    u = _solve_system(xi, samples, grid, "perp", rhs, tol, dense_cutoff)
    flux = cov_dx(u, xi, samples, grid.dx) + f
    defect = -cov_dx(flux, xi, samples, grid.dx) + perp(u, xi) - h
    residual = m0(defect)
    scale = max(1.0, m0(h) + m0(f))
    if residual > tol * scale:
        raise NumericalSolveError(
            f"tension solve residual {residual:.3e} exceeds tolerance "
            f"{tol:.1e} * {scale:.3e}"
        )
    return FluxSolveResult(u=u, flux=flux, residual=residual, bentness=report)


def solve_theta(
    state,
    sources,
    samples: GeometrySamples,
    grid: Grid,
    **kwargs,
) -> ThetaSolveResult:
    """Tension field of a wire state: flux form with f = psi, h = phi.

    ``sources`` carries the curvature source terms of the state (see
    dynamics.assemble_sources).  Returns the tension theta together with the
    flux D theta + psi consumed by the velocity update.
    """
    res = solve_flux_form(sources.psi, sources.phi, state.xi, samples, grid, **kwargs)
    return ThetaSolveResult(
        theta=res.u, flux=res.flux, residual=res.residual, bentness=res.bentness
    )
