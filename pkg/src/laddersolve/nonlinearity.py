"""Nonlinearity specifications, zero ladders and window truncation.

A zero ladder is a pair of sequences ``mu`` (positive zeros, strictly
increasing) and ``eta`` (negative-side zeros, strictly decreasing) of a
nonlinearity's second argument, together with witness points ``beta``
and ``gamma`` inside consecutive windows at which the antiderivative is
strictly positive.  Truncating the nonlinearity to one window, i.e.
replacing it by zero outside, traps minimizers of the associated energy
inside that window; walking disjoint windows then yields pairwise
distinct solutions.

Evaluators are expected to broadcast over numpy arrays in their second
(solution) argument.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import ConfigurationError, HypothesisViolationError, UsageError
from .grid import DIRICHLET_2D, PERIODIC_1D, Grid

PLUS = "plus"
MINUS = "minus"

#: default tolerance for "f vanishes at a ladder zero"
DEFAULT_ZERO_TOL = 1e-10


@dataclass
class ZeroLadder:
    """Finite prefixes of the zero/witness sequences plus optional rules.

    ``*_rule`` callables map an index ``n`` to the n-th term and are
    queried on demand when an operation walks past the stored prefix.
    """

    mu: list = field(default_factory=list)
    eta: list = field(default_factory=list)
    beta: list = field(default_factory=list)
    gamma: list = field(default_factory=list)
    mu_rule: Optional[Callable[[int], float]] = None
    eta_rule: Optional[Callable[[int], float]] = None
    beta_rule: Optional[Callable[[int], float]] = None
    gamma_rule: Optional[Callable[[int], float]] = None

    def __post_init__(self):
        self.mu = [float(v) for v in self.mu]
        self.eta = [float(v) for v in self.eta]
        self.beta = [float(v) for v in self.beta]
        self.gamma = [float(v) for v in self.gamma]
        for violation in self.check():
            raise ConfigurationError(f"invalid ladder: {violation}")

    def check(self) -> list:
        """Return human-readable descriptions of violated invariants."""
        out = []
        if self.mu and self.mu[0] < 0:
            out.append(f"mu[0] = {self.mu[0]} < 0")
        if any(b <= a for a, b in zip(self.mu, self.mu[1:])):
            out.append("mu is not strictly increasing")
        if self.eta and self.eta[0] > 0:
            out.append(f"eta[0] = {self.eta[0]} > 0")
        if any(b >= a for a, b in zip(self.eta, self.eta[1:])):
            out.append("eta is not strictly decreasing")
        for n, b in enumerate(self.beta):
            if n + 1 < len(self.mu) and not (self.mu[n] < b < self.mu[n + 1]):
                out.append(f"beta[{n}] = {b} outside (mu[{n}], mu[{n + 1}])")
        for n, g in enumerate(self.gamma):
            if n + 1 < len(self.eta) and not (self.eta[n + 1] < g < self.eta[n]):
                out.append(f"gamma[{n}] = {g} outside (eta[{n + 1}], eta[{n}])")
        return out

    def _get(self, seq: list, rule, name: str, n: int) -> float:
        if n < 0:
            raise UsageError("ladder indices are nonnegative")
        while n >= len(seq):
            if rule is None:
                raise ConfigurationError(
                    f"ladder provides {name}[0..{len(seq) - 1}] and no rule; "
                    f"index {n} requested"
                )
            seq.append(float(rule(len(seq))))
        return seq[n]

    def mu_at(self, n: int) -> float:
        return self._get(self.mu, self.mu_rule, "mu", n)

    def eta_at(self, n: int) -> float:
        return self._get(self.eta, self.eta_rule, "eta", n)

    def beta_at(self, n: int) -> float:
        return self._get(self.beta, self.beta_rule, "beta", n)

    def gamma_at(self, n: int) -> float:
        return self._get(self.gamma, self.gamma_rule, "gamma", n)

    def window(self, n: int, sign: str) -> tuple:
        """Window bounds ``(lo, hi)`` of index ``n`` for the given sign."""
        if sign == PLUS:
            return self.mu_at(n), self.mu_at(n + 1)
        if sign == MINUS:
            return self.eta_at(n + 1), self.eta_at(n)
        raise UsageError(f"sign must be {PLUS!r} or {MINUS!r}, got {sign!r}")

    def witness(self, n: int, sign: str) -> float:
        return self.beta_at(n) if sign == PLUS else self.gamma_at(n)


@dataclass
class NonlinearitySpec:
    """Data of a gradient-free elliptic nonlinearity f(x, t).

    ``F`` is the antiderivative in ``t`` with ``F(x, 0) = 0``; if absent,
    window antiderivatives fall back to adaptive Simpson quadrature.
    ``growth`` carries the constants ``(c, r)`` of the growth bound
    ``|f| <= c (1 + |t|^(r-1))`` for hypothesis reporting.
    """

    f: Callable
    ladder: ZeroLadder
    F: Optional[Callable] = None
    growth: tuple = (1.0, 1.0)
    zero_tol: float = DEFAULT_ZERO_TOL
    name: str = "custom-elliptic"
    scalar_f: Optional[Callable] = None  # scalar-only twin of f for jit kernels

    problem = "elliptic"


@dataclass
class ConvectionSpec:
    """Data of a gradient-dependent nonlinearity f(x, t, xi).

    ``xi`` is the scalar gradient magnitude; the solvers reduce the
    discrete gradient to a per-node magnitude (mean of adjacent edge
    magnitudes) before calling the evaluators.  ``lipschitz`` carries
    ``(L1, L2)``: the Lipschitz constants in ``t`` and ``xi``.
    """

    f: Callable
    ladder: ZeroLadder
    F: Optional[Callable] = None
    lipschitz: tuple = (1.0, 1.0)
    growth: tuple = (0.25, 1.0)  # (c1, s)
    zero_tol: float = DEFAULT_ZERO_TOL
    name: str = "custom-convection"

    problem = "convection"

    def __post_init__(self):
        L1, L2 = self.lipschitz
        if not (L1 > 0 and L2 >= 0):
            raise ConfigurationError("Lipschitz constants must be positive")


@dataclass
class HamiltonianSpec:
    """Data of a periodic Hamiltonian potential V = -K + F.

    ``K`` is 2-homogeneous and pinched between ``b1 u^2`` and ``b2 u^2``;
    ``F`` drives the zero ladder through its derivative ``F_u``.  Both are
    ``period``-periodic in ``t``.  ``growth`` carries ``(a, p)`` of
    ``|F| <= a (|u| + |u|^p)``.
    """

    K: Callable
    K_u: Callable
    F: Callable
    F_u: Callable
    ladder: ZeroLadder
    period: float
    k_bounds: tuple = (1.0, 1.0)  # (b1, b2)
    growth: tuple = (1.0, 3.0)  # (a, p)
    zero_tol: float = DEFAULT_ZERO_TOL
    name: str = "custom-hamiltonian"

    problem = "hamiltonian"

    def __post_init__(self):
        if not self.period > 0:
            raise ConfigurationError("period must be positive")
        b1, b2 = self.k_bounds
        if not (0 < b1 <= b2):
            raise ConfigurationError("need 0 < b1 <= b2")


@dataclass
class TruncatedNonlinearity:
    """A nonlinearity restricted to one ladder window.

    The evaluator returns the base ``f`` strictly inside ``(lo, hi)`` and
    exactly zero outside; it stays continuous across the cut because the
    window ends at zeros of ``f``.  For convection specs a frozen
    per-node gradient magnitude field ``xi`` may be attached; evaluators
    then take the node index implicitly through the location argument.
    """

    base: object
    n: int
    sign: str
    lo: float
    hi: float
    xi: Optional[np.ndarray] = None

    @property
    def witness(self) -> float:
        return self.base.ladder.witness(self.n, self.sign)

    def value(self, loc, u, xi=None):
        """Truncated evaluator f_n(loc, u[, xi])."""
        u = np.asarray(u, dtype=float)
        inside = (u > self.lo) & (u < self.hi)
        raw = self._base_f(loc, u, xi)
        return np.where(inside, raw, 0.0)

    def antiderivative(self, loc, u, xi=None):
        """Window antiderivative, zero below the window for plus sign
        and zero above it for minus sign, constant past the far edge."""
        u = np.asarray(u, dtype=float)
        uc = np.clip(u, self.lo, self.hi)
        anchor = self.lo if self.sign == PLUS else self.hi
        if self._base_F is not None:
            return self._base_F(loc, uc, xi) - self._base_F(loc, anchor, xi)
        return self._quad_F(loc, uc, xi) - self._quad_F(loc, anchor, xi)

    def scalar_slice(self) -> Callable:
        """A scalar evaluator of the truncated f, suitable for compiled
        shooting kernels; requires a gradient-free base."""
        if isinstance(self.base, ConvectionSpec):
            raise UsageError("scalar slices need a gradient-free nonlinearity")
        if isinstance(self.base, HamiltonianSpec):
            base = self.base.F_u
        else:
            base = self.base.scalar_f or self.base.f
        lo, hi = self.lo, self.hi

        def f_slice(x, u):
            if lo < u < hi:
                return base(x, u)
            return 0.0

        f_slice.vectorized = lambda x, u: self.value(x, u)
        return f_slice

    # -- internals ----------------------------------------------------

    def _base_f(self, loc, u, xi):
        if isinstance(self.base, ConvectionSpec):
            x = self.xi if xi is None else xi
            if x is None:
                raise UsageError("convection evaluator needs a xi argument")
            return self.base.f(loc, u, x)
        if isinstance(self.base, HamiltonianSpec):
            return self.base.F_u(loc, u)
        return self.base.f(loc, u)

    @property
    def _base_F(self):
        if isinstance(self.base, ConvectionSpec):
            if self.base.F is None:
                return None
            xi_field = self.xi

            def F(loc, u, xi=None):
                x = xi_field if xi is None else xi
                if x is None:
                    raise UsageError("convection evaluator needs a xi argument")
                return self.base.F(loc, u, x)

            return F
        if isinstance(self.base, HamiltonianSpec):
            return lambda loc, u, xi=None: self.base.F(loc, u)
        if self.base.F is None:
            return None
        return lambda loc, u, xi=None: self.base.F(loc, u)

    def _quad_F(self, loc, u, xi):
        """Adaptive Simpson fallback when no closed-form F is supplied."""
        loc_arr = np.broadcast_arrays(np.asarray(loc, float), np.asarray(u, float))
        locs, us = (a.ravel() for a in loc_arr)
        out = np.empty(us.shape)
        for i, (xx, uu) in enumerate(zip(locs, us)):
            out[i] = _adaptive_simpson(
                lambda s: float(self._base_f(xx, s, xi)), 0.0, float(uu)
            )
        return out.reshape(np.asarray(u).shape) if np.ndim(u) else float(out[0])


_SIMPSON_TOL = 1e-12


def _adaptive_simpson(fun, a, b, tol=_SIMPSON_TOL, depth=48):
    if a == b:
        return 0.0
    fa, fm, fb = fun(a), fun(0.5 * (a + b)), fun(b)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    return _simpson_rec(fun, a, b, fa, fm, fb, whole, tol, depth)


def _simpson_rec(fun, a, b, fa, fm, fb, whole, tol, depth):
    m = 0.5 * (a + b)
    lm, rm = 0.5 * (a + m), 0.5 * (m + b)
    flm, frm = fun(lm), fun(rm)
    left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    if depth <= 0:
        from .errors import NumericError

        raise NumericError("adaptive Simpson quadrature did not converge")
    if abs(left + right - whole) <= 15.0 * tol:
        return left + right + (left + right - whole) / 15.0
    return _simpson_rec(fun, a, m, fa, flm, fm, left, tol / 2, depth - 1) + _simpson_rec(
        fun, m, b, fm, frm, fb, right, tol / 2, depth - 1
    )


def truncate(spec, n: int, sign: str, xi: Optional[np.ndarray] = None) -> TruncatedNonlinearity:
    """Restrict ``spec``'s nonlinearity to window ``n`` of the given sign."""
    lo, hi = spec.ladder.window(n, sign)
    spec.ladder.witness(n, sign)  # fail early if the witness is missing
    if not lo < hi:
        raise ConfigurationError(f"window {n} ({sign}) is empty: [{lo}, {hi}]")
    if xi is not None and not isinstance(spec, ConvectionSpec):
        raise UsageError("a frozen xi field applies to convection specs only")
    return TruncatedNonlinearity(spec, n, sign, lo, hi, xi=xi)


def truncated_antiderivative(tr: TruncatedNonlinearity, loc, u, xi=None):
    """Antiderivative of the truncated nonlinearity at ``(loc, u)``."""
    return tr.antiderivative(loc, u, xi=xi)


# -- hypothesis validation ---------------------------------------------


@dataclass
class HypothesisCheck:
    name: str
    passed: bool
    worst: float = 0.0
    where: str = ""

    def as_dict(self):
        return {
            "name": self.name,
            "passed": bool(self.passed),
            "worst": float(self.worst),
            "where": self.where,
        }


@dataclass
class HypothesisReport:
    spec_name: str
    checks: list

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list:
        return [c for c in self.checks if not c.passed]

    def as_dict(self):
        return {
            "spec": self.spec_name,
            "passed": self.passed,
            "checks": [c.as_dict() for c in self.checks],
        }


def _sample_locations(grid: Grid, count: int):
    if grid.kind == DIRICHLET_2D:
        x, y = grid.coords
        idx = np.linspace(0, x.size - 1, min(count, x.size)).astype(int)
        return x[idx], y[idx]
    x = grid.coords
    idx = np.linspace(0, x.size - 1, min(count, x.size)).astype(int)
    return x[idx]


def validate_hypotheses(spec, grid: Grid, samples: int = 256) -> HypothesisReport:
    """Numerical spot-check of every structural hypothesis of ``spec``.

    Failures are report entries, never exceptions; each entry carries
    the worst violation magnitude and where it occurred.
    """
    checks = []
    ladder = spec.ladder
    checks.append(
        HypothesisCheck(
            "ladder-ordering",
            not ladder.check(),
            where="; ".join(ladder.check()),
        )
    )
    if isinstance(spec, NonlinearitySpec):
        _check_elliptic(spec, grid, samples, checks)
    elif isinstance(spec, ConvectionSpec):
        _check_convection(spec, grid, samples, checks)
    elif isinstance(spec, HamiltonianSpec):
        _check_hamiltonian(spec, samples, checks)
    else:
        raise UsageError(f"unknown spec type {type(spec).__name__}")
    return HypothesisReport(getattr(spec, "name", "spec"), checks)


def _worst_entry(values, locs):
    i = int(np.argmax(values))
    loc = locs[i] if locs is not None else i
    return float(values[i]), f"at {loc}"


def _check_zeros(f_at, zeros, tol, tag, checks, locs=None):
    worst, where, ok = 0.0, "", True
    for z in zeros:
        mag = np.max(np.abs(f_at(z)))
        if mag > worst:
            worst, where = float(mag), f"zero {z}"
        if mag > tol:
            ok = False
    checks.append(HypothesisCheck(tag, ok, worst, where))


def _check_witness_positive(F_at, witnesses, tag, checks):
    worst, where, ok = np.inf, "", True
    for w in witnesses:
        val = np.min(F_at(w))
        if val < worst:
            worst, where = float(val), f"witness {w}"
        if val <= 0:
            ok = False
    checks.append(HypothesisCheck(tag, ok, worst if np.isfinite(worst) else 0.0, where))


def _check_elliptic(spec, grid, samples, checks):
    xs = _sample_locations(grid, samples)
    zeros = list(spec.ladder.mu) + list(spec.ladder.eta)
    _check_zeros(lambda z: spec.f(xs, z), zeros, spec.zero_tol, "zeros-of-f", checks)
    witnesses = list(spec.ladder.beta) + list(spec.ladder.gamma)
    if spec.F is not None:
        _check_witness_positive(
            lambda w: spec.F(xs, w), witnesses, "witness-positivity", checks
        )
    c, r = spec.growth
    span = 1.5 * _ladder_span(spec.ladder)
    ts = np.linspace(-span, span, samples)
    worst, where = -np.inf, ""
    for t in ts:
        excess = np.max(np.abs(spec.f(xs, t))) - c * (1.0 + abs(t) ** (r - 1.0))
        if excess > worst:
            worst, where = float(excess), f"t = {t:.6g}"
    checks.append(HypothesisCheck("growth-bound", worst <= 0, max(worst, 0.0), where))


def _check_convection(spec, grid, samples, checks):
    xs = _sample_locations(grid, samples)
    xi_samples = np.array([0.0, 0.5, 1.0, 3.7, 10.0])
    zeros = list(spec.ladder.mu) + list(spec.ladder.eta)
    worst, where, ok = 0.0, "", True
    for z in zeros:
        for xi in xi_samples:
            mag = float(np.max(np.abs(spec.f(xs, z, xi))))
            if mag > worst:
                worst, where = mag, f"zero {z}, xi {xi}"
            if mag > spec.zero_tol:
                ok = False
    checks.append(HypothesisCheck("zeros-of-f", ok, worst, where))
    if spec.F is not None:
        witnesses = list(spec.ladder.beta) + list(spec.ladder.gamma)
        worst, where, ok = np.inf, "", True
        for w in witnesses:
            for xi in xi_samples:
                val = float(np.min(spec.F(xs, w, xi)))
                if val < worst:
                    worst, where = val, f"witness {w}, xi {xi}"
                if val <= 0:
                    ok = False
        checks.append(HypothesisCheck("witness-positivity", ok, worst, where))
    L1, L2 = spec.lipschitz
    rng = np.random.default_rng(0)
    span = 1.5 * _ladder_span(spec.ladder)
    t1 = rng.uniform(-span, span, samples)
    t2 = rng.uniform(-span, span, samples)
    x0 = xs[0] if not isinstance(xs, tuple) else (xs[0][0], xs[1][0])
    worst = 0.0
    for xi in xi_samples:
        df = np.abs(
            np.asarray(spec.f(x0, t1, xi)) - np.asarray(spec.f(x0, t2, xi))
        )
        excess = np.max(df - L1 * np.abs(t1 - t2))
        worst = max(worst, float(excess))
    checks.append(HypothesisCheck("lipschitz-t", worst <= 1e-9 * max(1.0, L1), worst))
    xi1 = rng.uniform(0.0, 10.0, samples)
    xi2 = rng.uniform(0.0, 10.0, samples)
    tmid = rng.uniform(-span, span, samples)
    df = np.abs(
        np.asarray(spec.f(x0, tmid, xi1)) - np.asarray(spec.f(x0, tmid, xi2))
    )
    worst = float(np.max(df - L2 * np.abs(xi1 - xi2)))
    checks.append(HypothesisCheck("lipschitz-xi", worst <= 1e-9 * max(1.0, L2), worst))
    # contraction gate needs the discrete eigenvalue, so it is checked
    # here only when the grid is a Dirichlet one
    if grid.kind != PERIODIC_1D:
        from .grid import first_eigenvalue

        lam = first_eigenvalue(grid)
        if L1 >= lam:
            checks.append(
                HypothesisCheck(
                    "contraction-gate",
                    False,
                    L1 - lam,
                    f"L1 = {L1:.6g} >= lambda1 = {lam:.6g}",
                )
            )
        else:
            kval = (L2 / np.sqrt(lam)) / (1.0 - L1 / lam)
            checks.append(
                HypothesisCheck(
                    "contraction-gate",
                    0.0 <= kval < 1.0,
                    kval,
                    f"k = {kval:.6g} with discrete lambda1 = {lam:.6g}",
                )
            )


def _check_hamiltonian(spec, samples, checks):
    T = spec.period
    ts = np.linspace(0.0, T, samples, endpoint=False)
    b1, b2 = spec.k_bounds
    us = np.linspace(-1.5 * _ladder_span(spec.ladder), 1.5 * _ladder_span(spec.ladder), 65)
    us = us[np.abs(us) > 1e-9]
    worst_lo, worst_hi = 0.0, 0.0
    where_lo = where_hi = ""
    for u in us:
        K = np.asarray(spec.K(ts, u), dtype=float)
        lo_violation = float(np.max(b1 * u * u - K))
        hi_violation = float(np.max(K - b2 * u * u))
        if lo_violation > worst_lo:
            worst_lo, where_lo = lo_violation, f"u = {u:.6g}"
        if hi_violation > worst_hi:
            worst_hi, where_hi = hi_violation, f"u = {u:.6g}"
    checks.append(
        HypothesisCheck("K-lower-bound", worst_lo <= 1e-9, worst_lo, where_lo)
    )
    checks.append(
        HypothesisCheck("K-upper-bound", worst_hi <= 1e-9, worst_hi, where_hi)
    )
    worst, where = 0.0, ""
    for lam in (0.5, 2.0, 3.0):
        for u in us[:: max(1, len(us) // 8)]:
            lhs = np.asarray(spec.K(ts, lam * u), dtype=float)
            rhs = lam**2 * np.asarray(spec.K(ts, u), dtype=float)
            err = float(np.max(np.abs(lhs - rhs) / (1.0 + np.abs(rhs))))
            if err > worst:
                worst, where = err, f"lambda = {lam}, u = {u:.6g}"
    checks.append(HypothesisCheck("K-2-homogeneous", worst <= 1e-9, worst, where))
    a, p = spec.growth
    worst, where = -np.inf, ""
    for u in us:
        excess = float(
            np.max(np.abs(spec.F(ts, u)) - a * (abs(u) + abs(u) ** p))
        )
        if excess > worst:
            worst, where = excess, f"u = {u:.6g}"
    checks.append(HypothesisCheck("F-growth", worst <= 0, max(worst, 0.0), where))
    zeros = list(spec.ladder.mu) + list(spec.ladder.eta)
    _check_zeros(lambda z: spec.F_u(ts, z), zeros, spec.zero_tol, "zeros-of-F_u", checks)
    witnesses = list(spec.ladder.beta) + list(spec.ladder.gamma)
    _check_witness_positive(
        lambda w: spec.F(ts, w), witnesses, "witness-positivity", checks
    )
    worst, where = 0.0, ""
    for u in us[:: max(1, len(us) // 8)]:
        dK = float(np.max(np.abs(np.asarray(spec.K(ts + T, u)) - np.asarray(spec.K(ts, u)))))
        dF = float(np.max(np.abs(np.asarray(spec.F(ts + T, u)) - np.asarray(spec.F(ts, u)))))
        err = max(dK, dF)
        if err > worst:
            worst, where = err, f"u = {u:.6g}"
    checks.append(HypothesisCheck("T-periodicity", worst <= 1e-9, worst, where))


def _ladder_span(ladder: ZeroLadder) -> float:
    vals = [abs(v) for v in ladder.mu + ladder.eta + ladder.beta + ladder.gamma]
    return max(vals) if vals else 1.0


# -- builtin example library -------------------------------------------


def load_builtin(name: str, params: Optional[dict] = None):
    """Construct one of the built-in example nonlinearities.

    - ``sine-elliptic``: f(x, t) = a(x) sin t with F = a(x)(1 - cos t)
      and the ladder mu_n = 2 n pi, beta_n = (2n+1) pi (mirrored on the
      negative side).
    - ``tanh-convection``: f(x, t, xi) = sin(pi t)(a + b tanh xi) with
      mu_n = n, beta_n = n + 1/2; requires a > b > 0 and a + b < 1/2.
    - ``sinusoidal-hamiltonian``: K(t, u) = (1 + sin(2 pi t / T)/2
      + sin(4 pi t / T)/10) u^2 pinched by (2/5) u^2 <= K <= (8/5) u^2,
      with F(t, u) = a (1 - cos u) and the sine ladder.
    """
    params = dict(params or {})
    if name == "sine-elliptic":
        return _builtin_sine_elliptic(params)
    if name == "tanh-convection":
        return _builtin_tanh_convection(params)
    if name == "sinusoidal-hamiltonian":
        return _builtin_sinusoidal_hamiltonian(params)
    raise ConfigurationError(f"unknown builtin nonlinearity {name!r}")


def _take(params: dict, key, default=None, required=False):
    if required and key not in params:
        raise ConfigurationError(f"builtin parameter {key!r} is required")
    return params.pop(key, default)


def _reject_leftovers(params: dict, name: str):
    if params:
        raise ConfigurationError(f"unknown parameters for {name}: {sorted(params)}")


def _sine_ladder() -> ZeroLadder:
    return ZeroLadder(
        mu_rule=lambda n: 2.0 * n * np.pi,
        eta_rule=lambda n: -2.0 * n * np.pi,
        beta_rule=lambda n: (2.0 * n + 1.0) * np.pi,
        gamma_rule=lambda n: -(2.0 * n + 1.0) * np.pi,
    )


def _builtin_sine_elliptic(params) -> NonlinearitySpec:
    a = _take(params, "a", required=True)
    a_sup = _take(params, "a_sup", None)
    _reject_leftovers(params, "sine-elliptic")
    if callable(a):
        a_fn = a
        c = float(a_sup) if a_sup is not None else 1.0

        def f(x, t):
            return np.asarray(a_fn(x), dtype=float) * np.sin(np.asarray(t, dtype=float))

        def F(x, t):
            return np.asarray(a_fn(x), dtype=float) * (
                1.0 - np.cos(np.asarray(t, dtype=float))
            )

        scalar_f = None
    else:
        a = float(a)
        if not a > 0:
            raise ConfigurationError("sine-elliptic needs a > 0")
        c = a

        def f(x, t):
            return a * np.sin(np.asarray(t, dtype=float))

        def F(x, t):
            return a * (1.0 - np.cos(np.asarray(t, dtype=float)))

        def scalar_f(x, t):
            return a * math.sin(t)

    return NonlinearitySpec(
        f=f,
        F=F,
        ladder=_sine_ladder(),
        growth=(c, 1.0),
        name="sine-elliptic",
        scalar_f=scalar_f,
    )


def _builtin_tanh_convection(params) -> ConvectionSpec:
    a = float(_take(params, "a", required=True))
    b = float(_take(params, "b", required=True))
    _reject_leftovers(params, "tanh-convection")
    if not a > b:
        raise ConfigurationError(f"tanh-convection needs a > b, got a = {a}, b = {b}")
    if not b > 0:
        raise ConfigurationError(f"tanh-convection needs b > 0, got b = {b}")
    if not a + b < 0.5:
        raise ConfigurationError(
            f"tanh-convection needs a + b < 1/2, got a + b = {a + b}"
        )

    def f(x, t, xi):
        return np.sin(np.pi * np.asarray(t, dtype=float)) * (a + b * np.tanh(xi))

    def F(x, t, xi):
        return (a + b * np.tanh(xi)) * (1.0 - np.cos(np.pi * np.asarray(t, dtype=float))) / np.pi

    ladder = ZeroLadder(
        mu_rule=lambda n: float(n),
        eta_rule=lambda n: -float(n),
        beta_rule=lambda n: n + 0.5,
        gamma_rule=lambda n: -(n + 0.5),
    )
    return ConvectionSpec(
        f=f,
        F=F,
        ladder=ladder,
        lipschitz=(np.pi * (a + b), b),
        growth=(a + b, 1.0),
        name="tanh-convection",
    )


def _builtin_sinusoidal_hamiltonian(params) -> HamiltonianSpec:
    a = float(_take(params, "a", required=True))
    T = float(_take(params, "period", 1.0))
    p = float(_take(params, "p", 3.0))
    _reject_leftovers(params, "sinusoidal-hamiltonian")
    if not a > 0:
        raise ConfigurationError("sinusoidal-hamiltonian needs a > 0")
    if not T > 0:
        raise ConfigurationError("sinusoidal-hamiltonian needs period > 0")
    if not p > 2:
        raise ConfigurationError("sinusoidal-hamiltonian needs p > 2")

    def coef(t):
        t = np.asarray(t, dtype=float)
        return 1.0 + 0.5 * np.sin(2.0 * np.pi * t / T) + 0.1 * np.sin(4.0 * np.pi * t / T)

    def K(t, u):
        return coef(t) * np.square(np.asarray(u, dtype=float))

    def K_u(t, u):
        return 2.0 * coef(t) * np.asarray(u, dtype=float)

    def F(t, u):
        # t-independent, but broadcast against t so callers can pass arrays
        return a * (1.0 - np.cos(np.asarray(u, dtype=float))) + 0.0 * np.asarray(t, dtype=float)

    def F_u(t, u):
        return a * np.sin(np.asarray(u, dtype=float)) + 0.0 * np.asarray(t, dtype=float)

    return HamiltonianSpec(
        K=K,
        K_u=K_u,
        F=F,
        F_u=F_u,
        ladder=_sine_ladder(),
        period=T,
        k_bounds=(0.4, 1.6),
        growth=(a, p),
        name="sinusoidal-hamiltonian",
    )
