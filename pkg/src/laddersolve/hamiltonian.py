"""Periodic Hamiltonian problems on expanding intervals [-kT, kT].

The truncated window functional on the periodic grid is

    I(u) = sum_i h [ 1/2 |du|^2 + K(t_i, u_i) - Phi(t_i, u_i) ],

minimized over one period of nodes with no boundary constraint.  The
constant witness is admissible here, so energy negativity is asserted
through the coercivity gate: the window family up to order ``n`` is
solvable once ``b2 < alpha_n`` with

    alpha_n = min over i in 0..2n of inf_t F(t, beta_i) / beta_i^2.

Grids carry a fixed cell count per period, so grids for different ``k``
nest node-for-node and cross-k comparisons on a fixed compact need no
interpolation.  Successive ``k`` solves are seeded by periodic
extension of the previous solution, which keeps each family member in
its window as the interval grows.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConfigurationError, HypothesisViolationError, UsageError
from .grid import PERIODIC_1D, Grid, GridFunction, apply_stencil, build_grid
from .nonlinearity import MINUS, PLUS, HamiltonianSpec, truncate
from .variational import (
    MinimizeOptions,
    SolutionCertificate,
    _energy,
    _minimize_core,
    _potential_for,
    _precheck_window,
    build_seed,
    certify,
)

DEFAULT_T_SAMPLES = 1024


@dataclass
class AlphaGate:
    """The coercivity threshold and the verdict of ``b2 < alpha_n``."""

    alpha_n: float
    b2: float
    n: int
    passed: bool
    per_index: list

    def inequality(self) -> str:
        rel = "<" if self.passed else ">="
        return f"b2 = {self.b2:.6g} {rel} alpha_{self.n} = {self.alpha_n:.6g}"


def _ratio_at(spec: HamiltonianSpec, witness: float, label: str, t_samples: int) -> float:
    """Sampled inf_t F(t, witness) / witness^2, positive or an error."""
    ts = np.linspace(0.0, spec.period, t_samples, endpoint=False)
    inf_f = float(np.min(np.asarray(spec.F(ts, witness), dtype=float)))
    if inf_f <= 0.0:
        raise HypothesisViolationError(
            f"sampled inf_t F(t, {label}) = {inf_f:.6g} is not positive"
        )
    return inf_f / witness**2


def _witness_ratio(spec: HamiltonianSpec, index: int, t_samples: int) -> float:
    beta = spec.ladder.beta_at(index)
    return _ratio_at(spec, beta, f"beta_{index}", t_samples)


def alpha_threshold(spec: HamiltonianSpec, n: int, t_samples: int = DEFAULT_T_SAMPLES) -> AlphaGate:
    """Coercivity gate for the order-n family (witnesses up to index 2n)."""
    if n < 0:
        raise UsageError("family order must be nonnegative")
    ratios = [_witness_ratio(spec, i, t_samples) for i in range(2 * n + 1)]
    alpha = float(min(ratios))
    b2 = float(spec.k_bounds[1])
    return AlphaGate(alpha_n=alpha, b2=b2, n=n, passed=b2 < alpha, per_index=ratios)


def periodic_grid(spec: HamiltonianSpec, k: int, cells_per_period: int) -> Grid:
    return build_grid(
        PERIODIC_1D, k=k, period=spec.period, cells_per_period=cells_per_period
    )


def solve_periodic_window(
    spec: HamiltonianSpec,
    k: int,
    n: int,
    sign: str,
    cells_per_period: int = 256,
    opts: Optional[MinimizeOptions] = None,
    t_samples: int = DEFAULT_T_SAMPLES,
    grid: Optional[Grid] = None,
) -> SolutionCertificate:
    """Minimize one truncated window on [-kT, kT] and certify it.

    Both window bounds and energy negativity are asserted: periodic test
    functions are admissible, and the constant witness trial already
    has negative energy under the gate.
    """
    opts = opts or MinimizeOptions()
    witness = spec.ladder.witness(n, sign)
    label = f"beta_{n}" if sign == PLUS else f"gamma_{n}"
    ratio = _ratio_at(spec, witness, label, t_samples)
    if not spec.k_bounds[1] < ratio:
        raise HypothesisViolationError(
            f"window gate fails: b2 = {spec.k_bounds[1]:.6g} >= "
            f"inf_t F(t, {label})/{label}^2 = {ratio:.6g}"
        )
    if grid is None:
        grid = periodic_grid(spec, k, cells_per_period)
    tr = truncate(spec, n, sign)
    _precheck_window(spec, grid, tr)
    pot = _potential_for(grid, tr)
    seed = build_seed(grid, tr, opts)  # the admissible constant witness
    trial_energy = _energy(grid, pot, seed)
    result = _minimize_core(grid, pot, seed, opts)
    cert = certify(
        grid,
        tr,
        result,
        opts,
        seed_energy=trial_energy,
        constant_trial_energy=trial_energy,
    )
    return cert


def family_solve(
    spec: HamiltonianSpec,
    n: int,
    k: int,
    cells_per_period: int = 256,
    opts: Optional[MinimizeOptions] = None,
    t_samples: int = DEFAULT_T_SAMPLES,
) -> tuple:
    """The order-n solution families: n+1 positive and n+1 negative
    certificates on stride-2 windows, gated by ``b2 < alpha_n``."""
    gate = alpha_threshold(spec, n, t_samples)
    if not gate.passed:
        raise HypothesisViolationError(f"family gate fails: {gate.inequality()}")
    grid = periodic_grid(spec, k, cells_per_period)
    pos = [
        solve_periodic_window(spec, k, 2 * i, PLUS, cells_per_period, opts, t_samples, grid=grid)
        for i in range(n + 1)
    ]
    neg = [
        solve_periodic_window(spec, k, 2 * i, MINUS, cells_per_period, opts, t_samples, grid=grid)
        for i in range(n + 1)
    ]
    return pos, neg


@dataclass
class ConvergenceReport:
    """Cross-k study of one window family member on a fixed compact."""

    k_list: list
    window_index: int
    compact: tuple
    sup_norms: dict
    uniform_bound_M: float
    c1_bounds: dict
    derivative_bound_c: float
    c1_distances: list
    limit_t: np.ndarray
    limit_candidate: np.ndarray
    limit_dcandidate: np.ndarray
    limit_residual: float
    s3_discrepancy: float
    stable_prefix: list
    seeding: str = "periodic-extension"
    certificates: dict = field(default_factory=dict)

    def as_dict(self):
        return {
            "k_list": list(self.k_list),
            "window_index": self.window_index,
            "compact": list(self.compact),
            "sup_norms": {str(k): v for k, v in self.sup_norms.items()},
            "uniform_bound_M": self.uniform_bound_M,
            "c1_bounds": {str(k): list(v) for k, v in self.c1_bounds.items()},
            "derivative_bound_c": self.derivative_bound_c,
            "c1_distances": [float(v) for v in self.c1_distances],
            "limit_residual": self.limit_residual,
            "s3_discrepancy": self.s3_discrepancy,
            "stable_prefix": list(self.stable_prefix),
            "seeding": self.seeding,
        }


def _central_derivative(grid: Grid, values: np.ndarray) -> np.ndarray:
    return (np.roll(values, -1) - np.roll(values, 1)) / (2.0 * grid.h)


def _stencil_second(grid: Grid, values: np.ndarray) -> np.ndarray:
    return -apply_stencil(grid, values)


def _extend_periodically(prev_grid: Grid, values: np.ndarray, new_grid: Grid) -> np.ndarray:
    """Extend one period chain of values onto a larger nested grid."""
    n_prev = prev_grid.dof
    offsets = np.arange(new_grid.dof)
    # node j of the new grid sits at t = -kT + j h; the previous grid's
    # node 0 sits at -k'T, which is (k - k') * cpp cells to the right
    shift = (new_grid.cells_x - n_prev) // 2
    idx = (offsets - shift) % n_prev
    return values[idx]


def derivative_bound(
    spec: HamiltonianSpec, M: float, t_samples: int = DEFAULT_T_SAMPLES, u_samples: int = 2049
) -> float:
    """Dense-sampled c = max |K_u - F_u| over [0, T] x [-M, M]."""
    ts = np.linspace(0.0, spec.period, t_samples, endpoint=False)
    us = np.linspace(-M, M, u_samples)
    worst = 0.0
    for u in us:
        vals = np.abs(
            np.asarray(spec.K_u(ts, u), dtype=float)
            - np.asarray(spec.F_u(ts, u), dtype=float)
        )
        worst = max(worst, float(np.max(vals)))
    return worst


def limit_study(
    spec: HamiltonianSpec,
    window_index: int,
    k_list: list,
    compact,
    cells_per_period: int = 256,
    opts: Optional[MinimizeOptions] = None,
    sign: str = PLUS,
    t_samples: int = DEFAULT_T_SAMPLES,
) -> ConvergenceReport:
    """Track one window solution across expanding intervals.

    Each successive solve is seeded by periodic extension of the
    previous one; a solution that leaves its window breaks the chain
    and the study continues with the stable prefix.
    """
    opts = opts or MinimizeOptions()
    k_list = [int(k) for k in k_list]
    if not k_list or any(b <= a for a, b in zip(k_list, k_list[1:])):
        raise ConfigurationError("k_list must be a nonempty increasing integer list")
    a, b = float(compact[0]), float(compact[1])
    if not a < b:
        raise ConfigurationError("compact window must have positive length")
    if not (-k_list[0] * spec.period <= a and b <= k_list[0] * spec.period):
        raise ConfigurationError(
            "compact window must sit inside the smallest interval"
        )

    lo, hi = spec.ladder.window(window_index, sign)
    M = max(abs(lo), abs(hi))
    c_bound = derivative_bound(spec, M, t_samples)

    sup_norms = {}
    c1_bounds = {}
    certs = {}
    restricted = {}
    stable = []
    prev = None
    for k in k_list:
        grid = periodic_grid(spec, k, cells_per_period)
        run_opts = opts
        if prev is not None:
            seed_vals = _extend_periodically(prev[0], prev[1].values, grid)
            from dataclasses import replace

            run_opts = replace(opts, seed_values=GridFunction(grid, seed_vals))
        cert = solve_periodic_window(
            spec, k, window_index, sign, cells_per_period, run_opts,
            t_samples, grid=grid,
        )
        if not (cert.window_lower_ok and cert.window_upper_ok):
            break  # family instability: the solution left its window
        stable.append(k)
        certs[k] = cert
        u = cert.solution.values
        du = _central_derivative(grid, u)
        ddu = _stencil_second(grid, u)
        sup_norms[k] = float(np.max(np.abs(u)))
        c1_bounds[k] = (float(np.max(np.abs(du))), float(np.max(np.abs(ddu))))
        mask = (grid.coords >= a - 1e-12) & (grid.coords <= b + 1e-12)
        restricted[k] = (grid.coords[mask], u[mask], du[mask], ddu[mask], grid, u)
        prev = (grid, cert.solution)

    distances = []
    for k0, k1 in zip(stable, stable[1:]):
        t0, u0, du0, _, _, _ = restricted[k0]
        t1, u1, du1, _, _, _ = restricted[k1]
        if t0.size != t1.size or not np.allclose(t0, t1, atol=1e-12, rtol=0.0):
            raise UsageError("cross-k grids failed to align on the compact")
        distances.append(float(np.max(np.abs(u0 - u1) + np.abs(du0 - du1))))

    if not stable:
        raise HypothesisViolationError(
            "no interval produced a window-certified solution"
        )
    k_last = stable[-1]
    t_r, u_r, du_r, ddu_r, grid_last, u_full = restricted[k_last]
    v_u = np.asarray(spec.F_u(t_r, u_r), dtype=float) - np.asarray(
        spec.K_u(t_r, u_r), dtype=float
    )
    limit_residual = float(np.max(np.abs(ddu_r + v_u)))
    s3 = _integral_identity_gap(spec, grid_last, u_full, a, b)

    return ConvergenceReport(
        k_list=k_list,
        window_index=window_index,
        compact=(a, b),
        sup_norms=sup_norms,
        uniform_bound_M=M,
        c1_bounds=c1_bounds,
        derivative_bound_c=c_bound,
        c1_distances=distances,
        limit_t=t_r,
        limit_candidate=u_r,
        limit_dcandidate=du_r,
        limit_residual=limit_residual,
        s3_discrepancy=s3,
        stable_prefix=stable,
        certificates=certs,
    )


def _integral_identity_gap(spec, grid, values, a, b) -> float:
    """Sup gap in du(t) - du(a) = integral_a^t (F_u - K_u)(s, u(s)) ds."""
    mask = (grid.coords >= a - 1e-12) & (grid.coords <= b + 1e-12)
    ts = grid.coords[mask]
    du = _central_derivative(grid, values)[mask]
    vu = np.asarray(spec.F_u(ts, values[mask]), dtype=float) - np.asarray(
        spec.K_u(ts, values[mask]), dtype=float
    )
    h = grid.h
    integral = np.concatenate(
        ([0.0], np.cumsum(0.5 * h * (vu[1:] + vu[:-1])))
    )
    lhs = du - du[0]
    return float(np.max(np.abs(lhs - integral)))
