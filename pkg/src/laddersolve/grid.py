"""Discrete domains, difference operators, norms and the first eigenvalue.

Three uniform grid kinds are supported:

- ``dirichlet-1d``: an interval with zero boundary values; degrees of
  freedom are the interior nodes.
- ``dirichlet-2d``: a rectangle with zero boundary values; degrees of
  freedom are the interior nodes, stored flattened in C order with the
  x index varying slowest (shape ``(cells_x - 1, cells_y - 1)``).
- ``periodic-1d``: the interval ``[-k*T, k*T]`` with node ``0``
  identified with node ``n``; degrees of freedom are one full period of
  nodes.

The minus Laplacian is the standard second-order central stencil
(3-point in 1d, 5-point in 2d, cyclic wrap on periodic grids).
Quadrature is the trapezoid rule on nodes and the midpoint rule on cell
edges, which makes the summation-by-parts identity

    <-lap(u), v>_L2 == <grad(u), grad(v)>_edges

hold to machine precision on every grid kind.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .errors import ConfigurationError, NumericError, UsageError

DIRICHLET_1D = "dirichlet-1d"
DIRICHLET_2D = "dirichlet-2d"
PERIODIC_1D = "periodic-1d"

_KINDS = (DIRICHLET_1D, DIRICHLET_2D, PERIODIC_1D)


@dataclass(frozen=True)
class Grid:
    """A uniform discrete domain.

    Instances are immutable; derived quantities (coordinates, stencil
    matrix) are cached lazily and shared by every consumer.
    """

    kind: str
    x_lo: float
    x_hi: float
    cells_x: int
    y_lo: float = 0.0
    y_hi: float = 0.0
    cells_y: int = 0
    k: int = 0
    period: float = 0.0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ConfigurationError(f"unknown grid kind {self.kind!r}")

    # -- geometry -----------------------------------------------------

    @property
    def h(self) -> float:
        return (self.x_hi - self.x_lo) / self.cells_x

    @property
    def hy(self) -> float:
        if self.kind != DIRICHLET_2D:
            raise UsageError("hy is defined for dirichlet-2d grids only")
        return (self.y_hi - self.y_lo) / self.cells_y

    @property
    def dof(self) -> int:
        """Number of stored degrees of freedom."""
        if self.kind == DIRICHLET_1D:
            return self.cells_x - 1
        if self.kind == DIRICHLET_2D:
            return (self.cells_x - 1) * (self.cells_y - 1)
        return self.cells_x  # periodic: one period of nodes

    @property
    def shape(self) -> tuple:
        if self.kind == DIRICHLET_2D:
            return (self.cells_x - 1, self.cells_y - 1)
        return (self.dof,)

    @property
    def quad_weight(self) -> float:
        """Nodal quadrature weight of the trapezoid rule.

        Boundary nodes carry value zero on Dirichlet grids, so the
        trapezoid rule reduces to a uniform weight on the stored nodes.
        """
        if self.kind == DIRICHLET_2D:
            return self.h * self.hy
        return self.h

    @property
    def diameter(self) -> float:
        if self.kind == DIRICHLET_2D:
            return min(self.x_hi - self.x_lo, self.y_hi - self.y_lo)
        return self.x_hi - self.x_lo

    @cached_property
    def coords(self):
        """Coordinates of the stored nodes.

        1d kinds return one array; dirichlet-2d returns a pair of
        flattened meshgrid arrays (x, y).
        """
        if self.kind == DIRICHLET_1D:
            return self.x_lo + self.h * np.arange(1, self.cells_x)
        if self.kind == PERIODIC_1D:
            return self.x_lo + self.h * np.arange(self.cells_x)
        xs = self.x_lo + self.h * np.arange(1, self.cells_x)
        ys = self.y_lo + self.hy * np.arange(1, self.cells_y)
        X, Y = np.meshgrid(xs, ys, indexing="ij")
        return X.ravel(), Y.ravel()

    @cached_property
    def boundary_distance(self) -> np.ndarray:
        """Distance of every stored node to the Dirichlet boundary."""
        if self.kind == DIRICHLET_1D:
            x = self.coords
            return np.minimum(x - self.x_lo, self.x_hi - x)
        if self.kind == DIRICHLET_2D:
            x, y = self.coords
            return np.minimum(
                np.minimum(x - self.x_lo, self.x_hi - x),
                np.minimum(y - self.y_lo, self.y_hi - y),
            )
        raise UsageError("boundary_distance is undefined on periodic grids")

    @cached_property
    def stencil_matrix(self) -> sp.csc_matrix:
        """Sparse matrix of the minus Laplacian on the stored nodes."""
        if self.kind == DIRICHLET_1D:
            return _lap_1d(self.dof, self.h)
        if self.kind == PERIODIC_1D:
            return _lap_periodic(self.dof, self.h)
        nx, ny = self.shape
        Ax = _lap_1d(nx, self.h)
        Ay = _lap_1d(ny, self.hy)
        Ix = sp.identity(nx, format="csc")
        Iy = sp.identity(ny, format="csc")
        return (sp.kron(Ax, Iy) + sp.kron(Ix, Ay)).tocsc()


def _lap_1d(n, h):
    main = np.full(n, 2.0 / h**2)
    off = np.full(n - 1, -1.0 / h**2)
    return sp.diags([off, main, off], [-1, 0, 1], format="csc")


def _lap_periodic(n, h):
    A = sp.lil_matrix((n, n))
    inv = 1.0 / h**2
    for i in range(n):
        A[i, i] = 2.0 * inv
        A[i, (i - 1) % n] = -inv
        A[i, (i + 1) % n] = -inv
    return A.tocsc()


@dataclass
class GridFunction:
    """A real-valued function stored at the grid's degrees of freedom."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float).ravel()
        if self.values.size != self.grid.dof:
            raise UsageError(
                f"value vector has length {self.values.size}, "
                f"grid has {self.grid.dof} degrees of freedom"
            )
        if not np.all(np.isfinite(self.values)):
            raise UsageError("grid function contains non-finite entries")

    def copy(self) -> "GridFunction":
        return GridFunction(self.grid, self.values.copy())


def build_grid(
    kind: str,
    bounds=None,
    cells=None,
    *,
    k: int = 0,
    period: float = 0.0,
    cells_per_period: int = 0,
) -> Grid:
    """Construct a grid from geometry and resolution.

    Dirichlet kinds take ``bounds`` (``(lo, hi)`` or a pair of such
    pairs) and ``cells`` (an int, or a pair for 2d).  The periodic kind
    takes ``k``, ``period`` and ``cells_per_period`` and spans
    ``[-k*period, k*period]``.
    """
    if kind == DIRICHLET_1D:
        lo, hi = _check_interval(bounds)
        n = _check_cells(cells)
        return Grid(kind, lo, hi, n)
    if kind == DIRICHLET_2D:
        if bounds is None or len(bounds) != 2:
            raise ConfigurationError("dirichlet-2d needs a pair of intervals")
        (xlo, xhi) = _check_interval(bounds[0])
        (ylo, yhi) = _check_interval(bounds[1])
        try:
            nx, ny = cells
        except TypeError:
            nx = ny = cells
        nx, ny = _check_cells(nx), _check_cells(ny)
        return Grid(kind, xlo, xhi, nx, ylo, yhi, ny)
    if kind == PERIODIC_1D:
        if not (isinstance(k, int) and k >= 1):
            raise ConfigurationError("periodic grid needs integer k >= 1")
        if not period > 0:
            raise ConfigurationError("periodic grid needs period > 0")
        cpp = _check_cells(cells_per_period)
        half = k * period
        return Grid(kind, -half, half, 2 * k * cpp, k=k, period=period)
    raise ConfigurationError(f"unknown grid kind {kind!r}")


def _check_interval(bounds):
    try:
        lo, hi = float(bounds[0]), float(bounds[1])
    except (TypeError, IndexError) as exc:
        raise ConfigurationError(f"bad interval {bounds!r}") from exc
    if not hi > lo:
        raise ConfigurationError(f"interval [{lo}, {hi}] has non-positive length")
    return lo, hi


def _check_cells(n):
    if not (isinstance(n, (int, np.integer)) and n >= 4):
        raise ConfigurationError(f"resolution must be an integer >= 4, got {n!r}")
    return int(n)


def _check_pair(grid: Grid, u: GridFunction):
    if u.grid != grid:
        raise UsageError("grid function does not live on the given grid")


# -- difference operators --------------------------------------------


def neg_laplacian_apply(grid: Grid, u: GridFunction) -> GridFunction:
    """Apply the discrete minus Laplacian."""
    _check_pair(grid, u)
    return GridFunction(grid, apply_stencil(grid, u.values))


def apply_stencil(grid: Grid, values: np.ndarray) -> np.ndarray:
    """Matrix-free stencil application on a raw value vector."""
    v = values
    if grid.kind == DIRICHLET_1D:
        out = 2.0 * v
        out[:-1] -= v[1:]
        out[1:] -= v[:-1]
        return out / grid.h**2
    if grid.kind == PERIODIC_1D:
        return (2.0 * v - np.roll(v, 1) - np.roll(v, -1)) / grid.h**2
    w = v.reshape(grid.shape)
    out = np.zeros_like(w)
    out += 2.0 * w / grid.h**2
    out[:-1, :] -= w[1:, :] / grid.h**2
    out[1:, :] -= w[:-1, :] / grid.h**2
    out += 2.0 * w / grid.hy**2
    out[:, :-1] -= w[:, 1:] / grid.hy**2
    out[:, 1:] -= w[:, :-1] / grid.hy**2
    return out.ravel()


def gradient_midpoint(grid: Grid, u: GridFunction):
    """Forward differences on cell edges.

    Dirichlet boundary edges use the zero boundary value.  Returns one
    array for 1d kinds and a pair ``(gx, gy)`` for dirichlet-2d, where
    ``gx`` has shape ``(cells_x, cells_y - 1)`` and ``gy`` has shape
    ``(cells_x - 1, cells_y)``.
    """
    _check_pair(grid, u)
    return edge_gradient(grid, u.values)


def edge_gradient(grid: Grid, values: np.ndarray):
    v = values
    if grid.kind == DIRICHLET_1D:
        padded = np.concatenate(([0.0], v, [0.0]))
        return np.diff(padded) / grid.h
    if grid.kind == PERIODIC_1D:
        return (np.roll(v, -1) - v) / grid.h
    w = v.reshape(grid.shape)
    nx, ny = grid.shape
    px = np.zeros((nx + 2, ny))
    px[1:-1, :] = w
    gx = np.diff(px, axis=0) / grid.h
    py = np.zeros((nx, ny + 2))
    py[:, 1:-1] = w
    gy = np.diff(py, axis=1) / grid.hy
    return gx, gy


def node_gradient_magnitude(grid: Grid, values: np.ndarray) -> np.ndarray:
    """Per-node gradient magnitude: mean of adjacent edge magnitudes.

    This is the reduction used for the gradient argument of convection
    nonlinearities; oracles must use the same rule to match.
    """
    if grid.kind == DIRICHLET_1D:
        g = edge_gradient(grid, values)
        return 0.5 * (np.abs(g[:-1]) + np.abs(g[1:]))
    if grid.kind == PERIODIC_1D:
        g = np.abs(edge_gradient(grid, values))
        return 0.5 * (g + np.roll(g, 1))
    gx, gy = edge_gradient(grid, values)
    ax, ay = np.abs(gx), np.abs(gy)
    mean4 = 0.25 * (ax[:-1, :] + ax[1:, :] + ay[:, :-1] + ay[:, 1:])
    return mean4.ravel()


# -- norms ------------------------------------------------------------

L2 = "L2"
LINF = "Linf"
H10 = "H10-seminorm"
EK = "Ek-full"


def norm(grid: Grid, u: GridFunction, which: str) -> float:
    """Grid norms: trapezoid L2, max norm, edge-midpoint H10 seminorm,
    and the full periodic norm sqrt(seminorm^2 + L2^2)."""
    _check_pair(grid, u)
    return norm_values(grid, u.values, which)


def norm_values(grid: Grid, values: np.ndarray, which: str) -> float:
    if which == L2:
        return float(np.sqrt(grid.quad_weight * np.sum(values**2)))
    if which == LINF:
        return float(np.max(np.abs(values))) if values.size else 0.0
    if which == H10:
        return _seminorm(grid, values)
    if which == EK:
        if grid.kind != PERIODIC_1D:
            raise UsageError("Ek-full norm is defined on periodic grids only")
        s = _seminorm(grid, values)
        l2 = float(np.sqrt(grid.quad_weight * np.sum(values**2)))
        return float(np.sqrt(s**2 + l2**2))
    raise UsageError(f"unknown norm {which!r}")


def _seminorm(grid: Grid, values: np.ndarray) -> float:
    if grid.kind == DIRICHLET_2D:
        gx, gy = edge_gradient(grid, values)
        w = grid.h * grid.hy
        return float(np.sqrt(w * (np.sum(gx**2) + np.sum(gy**2))))
    g = edge_gradient(grid, values)
    return float(np.sqrt(grid.h * np.sum(g**2)))


# -- first eigenvalue --------------------------------------------------

#: CG inner-solve settings for the inverse power iteration
_CG_RTOL = 1e-12
_EIG_RTOL = 1e-10
_MAX_OUTER = 200


def first_eigenvalue(grid: Grid) -> float:
    """Smallest eigenvalue of the discrete Dirichlet minus Laplacian.

    Computed by inverse power iteration with conjugate-gradient inner
    solves; certified against the Rayleigh residual
    ``|A v - lam v| <= 1e-10 * lam``.  For the 1d 3-point stencil this
    equals ``(2/h^2) (1 - cos(pi h / L))`` analytically.
    """
    if grid.kind == PERIODIC_1D:
        raise UsageError(
            "the periodic stencil annihilates constants; its first "
            "eigenvalue is 0 and is not useful here"
        )
    apply_a = lambda x: apply_stencil(grid, x)  # noqa: E731
    v = np.ones(grid.dof)
    v /= np.linalg.norm(v)
    lam = float(v @ apply_a(v))
    for _ in range(_MAX_OUTER):
        v = _cg(apply_a, v, rtol=_CG_RTOL, maxiter=10 * grid.dof)
        v /= np.linalg.norm(v)
        av = apply_a(v)
        lam = float(v @ av)
        if np.linalg.norm(av - lam * v) <= _EIG_RTOL * lam:
            return lam
    raise NumericError("inverse power iteration did not certify the eigenvalue")


def _cg(apply_a, b, rtol, maxiter):
    """Unpreconditioned conjugate gradients for SPD stencil systems."""
    x = np.zeros_like(b)
    r = b.copy()
    p = r.copy()
    rs = float(r @ r)
    bnorm = float(np.linalg.norm(b))
    for _ in range(maxiter):
        ap = apply_a(p)
        alpha = rs / float(p @ ap)
        x += alpha * p
        r -= alpha * ap
        rs_new = float(r @ r)
        if np.sqrt(rs_new) <= rtol * bnorm:
            return x
        p = r + (rs_new / rs) * p
        rs = rs_new
    raise NumericError("conjugate gradients did not converge")


def analytic_first_eigenvalue(grid: Grid) -> float:
    """Closed form of the discrete first eigenvalue (test oracle)."""
    if grid.kind == DIRICHLET_1D:
        L = grid.x_hi - grid.x_lo
        return (2.0 / grid.h**2) * (1.0 - np.cos(np.pi * grid.h / L))
    if grid.kind == DIRICHLET_2D:
        Lx = grid.x_hi - grid.x_lo
        Ly = grid.y_hi - grid.y_lo
        ex = (2.0 / grid.h**2) * (1.0 - np.cos(np.pi * grid.h / Lx))
        ey = (2.0 / grid.hy**2) * (1.0 - np.cos(np.pi * grid.hy / Ly))
        return ex + ey
    raise UsageError("no Dirichlet eigenvalue on periodic grids")
