"""Quadrature and orthonormal zonal basis on the round n-sphere.

A zonal (rotationally symmetric) function lives on x = cos(theta) with the
surface measure area(S^(n-1)) * (1-x^2)^((n-2)/2) dx.  The basis functions
are the orthonormal Gegenbauer-type polynomials for that weight; they are
Laplace-Beltrami eigenfunctions with exact eigenvalues l(l+n-1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .einstein import EinsteinData, euclidean_sphere_area


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss rule in x = cos(theta); weights carry the full surface measure."""

    n: int
    nodes: np.ndarray    # x_j, strictly increasing in (-1, 1)
    weights: np.ndarray  # positive, sum = Vol(S^n)
    theta: np.ndarray    # arccos(nodes), cached

    def integrate(self, values: np.ndarray) -> float:
        return float(np.dot(self.weights, values))


def build_quadrature(data: EinsteinData, q: int) -> QuadratureRule:
    """Gauss rule with q nodes, exact for x-polynomials of degree <= 2q-1.

    Nodes and weights come from the symmetric tridiagonal (Golub-Welsch)
    eigenproblem of the three-term recurrence for the weight
    (1-x^2)^((n-2)/2).
    """
    if q < 2:
        raise ValueError("need at least 2 quadrature nodes")
    n = data.n
    mu = (n - 2) / 2
    k = np.arange(1, q)
    beta = k * (k + 2 * mu) / ((2 * k + 2 * mu + 1) * (2 * k + 2 * mu - 1))
    b0 = math.sqrt(math.pi) * math.gamma(mu + 1) / math.gamma(mu + 1.5)
    x, V = eigh_tridiagonal(np.zeros(q), np.sqrt(beta))
    w = b0 * V[0] ** 2 * euclidean_sphere_area(n)
    return QuadratureRule(n=n, nodes=x, weights=w, theta=np.arccos(x))


@dataclass(frozen=True)
class ZonalBasis:
    """Orthonormal zonal harmonics Z_0..Z_L tabulated at the quadrature nodes.

    ``table[l, j] = Z_l(x_j)``; ``eigs[l] = l(l+n-1)`` is the exact
    Laplace-Beltrami eigenvalue of Z_l.
    """

    n: int
    L: int
    rule: QuadratureRule
    table: np.ndarray
    eigs: np.ndarray = field(init=False)

    def __post_init__(self):
        l = np.arange(self.L + 1, dtype=float)
        object.__setattr__(self, "eigs", l * (l + self.n - 1))

    @property
    def dim(self) -> int:
        return self.L + 1


def build_basis(rule: QuadratureRule, L: int) -> ZonalBasis:
    """Orthonormal basis up to degree L; requires L < q so every Gram
    integral (degree <= 2L) is quadrature-exact."""
    q = len(rule.nodes)
    if L >= q:
        raise ValueError(f"basis degree L={L} must be < node count q={q} (aliasing)")
    n = rule.n
    mu = (n - 2) / 2
    k = np.arange(1, L + 2)
    beta = k * (k + 2 * mu) / ((2 * k + 2 * mu + 1) * (2 * k + 2 * mu - 1))
    b0 = math.sqrt(math.pi) * math.gamma(mu + 1) / math.gamma(mu + 1.5)
    x = rule.nodes
    P = np.zeros((L + 1, q))
    P[0] = 1.0 / math.sqrt(b0)
    if L >= 1:
        P[1] = x * P[0] / math.sqrt(beta[0])
    for j in range(1, L):
        P[j + 1] = (x * P[j] - math.sqrt(beta[j - 1]) * P[j - 1]) / math.sqrt(beta[j])
    # rows are orthonormal for the x-weight; rescale to the full measure
    table = P / math.sqrt(euclidean_sphere_area(n))
    return ZonalBasis(n=n, L=L, rule=rule, table=table)


@dataclass
class ZonalField:
    """A zonal function held as basis coefficients with cached node values."""

    basis: ZonalBasis
    coeffs: np.ndarray
    _values: np.ndarray | None = None

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=float)
        if self.coeffs.shape != (self.basis.dim,):
            raise ValueError(
                f"expected {self.basis.dim} coefficients, got {self.coeffs.shape}"
            )

    @property
    def values(self) -> np.ndarray:
        if self._values is None:
            self._values = synthesize(self)
        return self._values

    def __mul__(self, c: float) -> "ZonalField":
        return ZonalField(self.basis, self.coeffs * c)

    __rmul__ = __mul__

    def __add__(self, other: "ZonalField") -> "ZonalField":
        return ZonalField(self.basis, self.coeffs + other.coeffs)

    def __sub__(self, other: "ZonalField") -> "ZonalField":
        return ZonalField(self.basis, self.coeffs - other.coeffs)


def synthesize(field: ZonalField) -> np.ndarray:
    """Node values Sum_l c_l Z_l(x_j)."""
    return field.basis.table.T @ field.coeffs


def analyze(basis: ZonalBasis, values: np.ndarray) -> ZonalField:
    """Quadrature projection c_l = Sum_j w_j f(x_j) Z_l(x_j).

    Exact inverse of ``synthesize`` for fields of degree <= L; anything
    beyond the basis degree is aliased by design.
    """
    values = np.asarray(values, dtype=float)
    if values.shape != basis.rule.nodes.shape:
        raise ValueError("value vector length does not match the quadrature rule")
    return ZonalField(basis, basis.table @ (basis.rule.weights * values))


def laplacian(field: ZonalField) -> ZonalField:
    """Laplace-Beltrami action, exact in coefficient space."""
    return ZonalField(field.basis, field.basis.eigs * field.coeffs)


def constant_field(basis: ZonalBasis, value: float = 1.0) -> ZonalField:
    """The constant function as a ZonalField (Z_0 = Vol^(-1/2))."""
    c = np.zeros(basis.dim)
    c[0] = value * math.sqrt(basis.rule.weights.sum())
    return ZonalField(basis, c)
