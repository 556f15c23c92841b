"""Concentrated (Aubin-type) test functions and the bounds built from them.

phi_eps = eta(theta) * (theta^2 + eps^2)^(-(n-4)/2) concentrates at a pole
as eps -> 0 and drives the sharp-quotient functional Y toward the best
Sobolev constant.  This module evaluates Y, fits the small-eps expansion
Y ~ A - C eps^2, assembles the two-component test density u_eps behind the
second-invariant upper bound, and spot-checks the elementary power
inequality used alongside it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .einstein import (
    OperatorCoefficients,
    derive_coefficients,
    round_sphere,
    sharp_constant_oracle,
)
from .spectral import ConformalDensity, assemble_mass, minimax_over_plane, round_setup
from .zonal import QuadratureRule, ZonalBasis, ZonalField, analyze, constant_field


@dataclass(frozen=True)
class BubbleSpec:
    """One concentrated profile: scale eps, cutoff radius delta, pole."""

    eps: float
    delta: float = 0.5
    center: str = "north"

    def __post_init__(self):
        if self.eps <= 0:
            raise ValueError("eps must be positive")
        if not 0 < self.delta <= math.pi / 2:
            raise ValueError("cutoff radius must lie in (0, pi/2]")
        if self.center not in ("north", "south"):
            raise ValueError("center must be 'north' or 'south'")


def _cutoff(theta: np.ndarray, delta: float):
    """Quintic smoothstep cutoff: 1 on [0, delta], 0 on [2*delta, pi], C^2.

    Returns (eta, eta', eta'') at the given colatitudes.
    """
    t = np.clip((theta - delta) / delta, 0.0, 1.0)
    s = t**3 * (6 * t * t - 15 * t + 10)
    ds = 30 * t * t * (t - 1) ** 2
    d2s = 60 * t * (t - 1) * (2 * t - 1)
    inside = theta <= delta
    outside = theta >= 2 * delta
    eta = np.where(inside, 1.0, np.where(outside, 0.0, 1.0 - s))
    deta = np.where(inside | outside, 0.0, -ds / delta)
    d2eta = np.where(inside | outside, 0.0, -d2s / delta**2)
    return eta, deta, d2eta


def bubble_profile(theta: np.ndarray, spec: BubbleSpec, n: int):
    """phi, phi', phi'' of the cutoff bubble at the given colatitudes.

    Geodesic distance from the center is theta itself (north) or
    pi - theta (south); derivatives are with respect to theta.
    """
    r = theta if spec.center == "north" else math.pi - theta
    sgn = 1.0 if spec.center == "north" else -1.0
    m = (n - 4) / 2.0
    base = r * r + spec.eps**2
    g = base**-m
    dg = -2 * m * r * base ** (-m - 1)
    d2g = -2 * m * base ** (-m - 1) + 4 * m * (m + 1) * r * r * base ** (-m - 2)
    eta, deta, d2eta = _cutoff(r, spec.delta)
    phi = eta * g
    dphi = deta * g + eta * dg
    d2phi = d2eta * g + 2 * deta * dg + eta * d2g
    return phi, sgn * dphi, d2phi


def sphere_laplacian_values(
    theta: np.ndarray, dphi: np.ndarray, d2phi: np.ndarray, n: int
) -> np.ndarray:
    """Laplace-Beltrami of a zonal profile from its theta-derivatives."""
    return -(d2phi + (n - 1) / np.tan(theta) * dphi)


def functional_Y(v: ZonalField, coeffs: OperatorCoefficients) -> float:
    """Sharp-quotient functional: energy of v over its L^N norm squared.

    Scale-invariant; equals the canonical K2^(-2) for constants on the
    round sphere.  Energy computed in coefficient space (exact Laplacian),
    the L^N norm by quadrature.
    """
    basis = v.basis
    A_diag = (basis.eigs + coeffs.a) * (basis.eigs + coeffs.b)
    num = float(np.dot(A_diag, v.coeffs**2))
    den = basis.rule.integrate(np.abs(v.values) ** coeffs.N) ** (2.0 / coeffs.N)
    if den == 0:
        raise ValueError("field is zero in L^N norm")
    return num / den


def profile_quotient(
    spec: BubbleSpec, coeffs: OperatorCoefficients, rule: QuadratureRule
) -> float:
    """Y of the bubble via analytic derivatives at the quadrature nodes.

    Bypasses the basis: the energy integrand (Lap phi)^2 + alpha phi'^2 +
    alpha_bar phi^2 is evaluated pointwise, so small-eps profiles are not
    smoothed by truncation.
    """
    n = coeffs.n
    phi, dphi, d2phi = bubble_profile(rule.theta, spec, n)
    lap = sphere_laplacian_values(rule.theta, dphi, d2phi, n)
    num = rule.integrate(lap**2 + coeffs.alpha * dphi**2 + coeffs.alpha_bar * phi**2)
    den = rule.integrate(phi**coeffs.N) ** (2.0 / coeffs.N)
    return num / den


def _alias_floor(rule: QuadratureRule) -> float:
    # a bubble narrower than a few node spacings near the pole is invisible
    # to the quadrature
    return 3.0 * math.pi / len(rule.nodes)


@dataclass
class BubbleField:
    """Cutoff bubble projected on the basis, plus its L^N-normalized form."""

    spec: BubbleSpec
    phi: ZonalField
    v: ZonalField       # c_eps * phi, unit L^N mass
    c_eps: float


def bubble_field(spec: BubbleSpec, basis: ZonalBasis) -> BubbleField:
    """Project phi_eps on the zonal basis and normalize to unit L^N mass."""
    rule = basis.rule
    floor = _alias_floor(rule)
    if spec.eps < floor:
        need = math.ceil(3 * math.pi / spec.eps)
        raise ValueError(
            f"eps={spec.eps} under the alias floor {floor:.4f}; need q >= {need} nodes"
        )
    phi_vals, _, _ = bubble_profile(rule.theta, spec, basis.n)
    phi = analyze(basis, phi_vals)
    n = basis.n
    N = 2 * n / (n - 4)
    c_eps = rule.integrate(phi_vals**N) ** (-1.0 / N)
    return BubbleField(spec=spec, phi=phi, v=phi * c_eps, c_eps=c_eps)


def norm_scaling_slope(
    eps_grid, basis: ZonalBasis, delta: float = 0.5
) -> float:
    """Regression slope of log c_eps against log eps; ~ (n-4)/2 for small eps."""
    logs = [
        math.log(bubble_field(BubbleSpec(eps=e, delta=delta), basis).c_eps)
        for e in eps_grid
    ]
    slope = np.polyfit(np.log(np.asarray(eps_grid, dtype=float)), logs, 1)[0]
    return float(slope)


DEFAULT_EPS_GRID = (0.05, 0.075, 0.1, 0.15, 0.2)


@dataclass
class SweepReport:
    """Least-squares fit Y(eps) ~ A - C eps^2 over a grid."""

    n: int
    eps: np.ndarray
    Y: np.ndarray
    A: float
    C: float
    residual: float  # rms misfit relative to A


def epsilon_sweep(
    eps_grid, n: int, q: int = 200, delta: float = 0.5
) -> SweepReport:
    """Fit the small-eps expansion of Y(phi_eps) on the round n-sphere."""
    if n <= 6:
        raise ValueError("sweep fit requires n > 6")
    eps = np.sort(np.asarray(eps_grid, dtype=float))
    if len(eps) < 3:
        raise ValueError("need at least 3 grid points to fit two parameters")
    data = round_sphere(n)
    coeffs = derive_coefficients(data)
    from .zonal import build_quadrature

    rule = build_quadrature(data, q)
    floor = _alias_floor(rule)
    if eps[0] < floor:
        raise ValueError(
            f"grid point {eps[0]} under the alias floor {floor:.4f} at q={q}"
        )
    Y = np.array([profile_quotient(BubbleSpec(eps=e, delta=delta), coeffs, rule) for e in eps])
    design = np.column_stack([np.ones_like(eps), -(eps**2)])
    (A, C), *_ = np.linalg.lstsq(design, Y, rcond=None)
    fit = design @ np.array([A, C])
    residual = float(np.sqrt(np.mean((fit - Y) ** 2)) / A)
    return SweepReport(n=n, eps=eps, Y=Y, A=float(A), C=float(C), residual=residual)


@dataclass
class BoundReport:
    """Two-plane upper bound at u_eps against the closed-form target."""

    n: int
    eps: np.ndarray
    bounds: np.ndarray
    best_eps: float
    best_bound: float
    rhs: float
    ratio: float           # best_bound / rhs
    hypothesis_ok: bool    # n >= 12 per the strict-bound regime


def lemma3_bound(
    n: int,
    best_mu1: float,
    eps_grid=DEFAULT_EPS_GRID,
    q: int = 200,
    L: int = 48,
    delta: float = 0.5,
) -> BoundReport:
    """Certified upper bound for the second normalized eigenvalue at u_eps.

    u_eps = Y(v_eps)^(1/(N-2)) v_eps + mu1^(1/(N-2)) * const, with the
    constant the unit-mass round first minimizer.  The bound is the sup of
    the Rayleigh quotient over span(v_eps, const) times the volume factor
    of u_eps; the target is (mu1^(n/4) + K2^(-2*n/4))^(4/n), which is
    2^(4/n) K2^(-2) on the round sphere.
    """
    setup = round_setup(n, q=q, L=L)
    coeffs = setup.coeffs
    N = coeffs.N
    expo = 1.0 / (N - 2)
    vol = setup.rule.weights.sum()
    vconst = constant_field(setup.basis, vol ** (-1.0 / N))
    eps = np.asarray(eps_grid, dtype=float)
    bounds = []
    for e in eps:
        bf = bubble_field(BubbleSpec(eps=float(e), delta=delta), setup.basis)
        Yv = functional_Y(bf.v, coeffs)
        u_nodes = Yv**expo * bf.v.values + best_mu1**expo * vconst.values
        # truncation ripple can dip below zero in the tail; clip, the density
        # only needs to be nonnegative
        u = ConformalDensity(setup.basis, np.clip(u_nodes, 0.0, None), N)
        B = assemble_mass(u, setup.basis)
        sup = minimax_over_plane(setup.A_diag, B, bf.v, vconst)
        bounds.append(sup * u.lN_mass() ** (4.0 / n))
    bounds = np.array(bounds)
    K2_inv_sq = sharp_constant_oracle(n)
    rhs = (best_mu1 ** (n / 4.0) + K2_inv_sq ** (n / 4.0)) ** (4.0 / n)
    i = int(np.argmin(bounds))
    return BoundReport(
        n=n,
        eps=eps,
        bounds=bounds,
        best_eps=float(eps[i]),
        best_bound=float(bounds[i]),
        rhs=float(rhs),
        ratio=float(bounds[i] / rhs),
        hypothesis_ok=n >= 12,
    )


def elementary_inequality_check(
    p: float, C: float, samples: int, seed: int = 0
) -> int:
    """Count violations of (x+y)^p <= x^p + y^p + C(x^(p-1)y + xy^(p-1)).

    x, y drawn log-uniform over [1e-6, 1e6]^2.  A 1e-12 relative slack
    absorbs round-off in the exact-equality cases (p = 3, C = 3).
    """
    if p <= 2:
        raise ValueError("exponent must exceed 2")
    if C <= 0:
        raise ValueError("constant must be positive")
    if samples < 1:
        raise ValueError("need at least one sample")
    rng = np.random.default_rng(seed)
    x = 10.0 ** rng.uniform(-6, 6, samples)
    y = 10.0 ** rng.uniform(-6, 6, samples)
    lhs = (x + y) ** p
    rhs = x**p + y**p + C * (x ** (p - 1) * y + x * y ** (p - 1))
    return int(np.sum(lhs > rhs * (1 + 1e-12)))
