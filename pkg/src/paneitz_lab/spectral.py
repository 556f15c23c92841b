"""Generalized eigenproblem for the pencil (A, B(u)).

A is the quadratic form of Delta^2 + alpha*Delta + alpha_bar, diagonal in
the zonal basis with entries (mu_l + a)(mu_l + b).  B(u) is the
u^(N-2)-weighted mass form of a conformal density u, assembled by
quadrature and possibly only positive semidefinite (densities may vanish
on sets of positive measure).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import eigh

from .einstein import OperatorCoefficients
from .zonal import ZonalBasis, ZonalField, analyze


class DegeneratePencilError(ValueError):
    """Raised when the pencil cannot be solved as requested."""


@dataclass
class ConformalDensity:
    """Nonnegative zonal density u, normally with unit L^N mass.

    ``sqrt_field`` is the optional parameterizing field q with u = q^2 at
    the nodes; densities built directly from node values leave it None.
    """

    basis: ZonalBasis
    values: np.ndarray          # u at the quadrature nodes, >= 0
    N: float
    normalized: bool = False
    sqrt_field: ZonalField | None = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.basis.rule.nodes.shape:
            raise ValueError("density values must live on the quadrature nodes")
        if np.any(self.values < 0):
            raise ValueError("density must be nonnegative at every node")
        if not np.any(self.values > 0):
            raise ValueError("density is identically zero (degenerate metric)")

    @property
    def weight_values(self) -> np.ndarray:
        """u^(N-2) at the nodes."""
        return self.values ** (self.N - 2)

    def lN_mass(self) -> float:
        """Integral of u^N."""
        return self.basis.rule.integrate(self.values**self.N)

    def normalize(self) -> "ConformalDensity":
        scale = self.lN_mass() ** (-1.0 / self.N)
        return ConformalDensity(
            basis=self.basis,
            values=self.values * scale,
            N=self.N,
            normalized=True,
            sqrt_field=None
            if self.sqrt_field is None
            else self.sqrt_field * float(np.sqrt(scale)),
        )


def density_from_sqrt_field(qfield: ZonalField, N: float, normalize: bool = True) -> ConformalDensity:
    """Density u = q^2: nonnegative by construction, zeros permitted."""
    u = ConformalDensity(basis=qfield.basis, values=qfield.values**2, N=N, sqrt_field=qfield)
    return u.normalize() if normalize else u


def constant_density(basis: ZonalBasis, N: float) -> ConformalDensity:
    """The normalized constant density u = Vol^(-1/N)."""
    vol = basis.rule.weights.sum()
    return ConformalDensity(
        basis=basis,
        values=np.full_like(basis.rule.nodes, vol ** (-1.0 / N)),
        N=N,
        normalized=True,
    )


def assemble_stiffness(coeffs: OperatorCoefficients, basis: ZonalBasis) -> np.ndarray:
    """Diagonal of the operator quadratic form: (mu_l + a)(mu_l + b)."""
    if coeffs.n != basis.n:
        raise ValueError("coefficient dimension does not match the basis")
    return (basis.eigs + coeffs.a) * (basis.eigs + coeffs.b)


def assemble_mass(u: ConformalDensity, basis: ZonalBasis) -> np.ndarray:
    """B_lm = Sum_j w_j u^(N-2)(x_j) Z_l(x_j) Z_m(x_j), symmetric PSD."""
    if u.basis is not basis and u.basis.n != basis.n:
        raise ValueError("density and basis dimensions disagree")
    wdens = basis.rule.weights * u.weight_values
    return (basis.table * wdens) @ basis.table.T


@dataclass
class GeneralizedSpectrum:
    """Ascending eigenvalues of the pencil with B-orthonormal eigenfields."""

    eigenvalues: np.ndarray
    eigenfields: list[ZonalField]
    residuals: np.ndarray
    shift: float  # regularization actually added to B (0.0 if none)

    def __len__(self) -> int:
        return len(self.eigenvalues)


def _fix_sign(vec: np.ndarray) -> np.ndarray:
    """Deterministic sign: first coefficient above noise is positive."""
    idx = np.flatnonzero(np.abs(vec) > 1e-12 * np.linalg.norm(vec))
    if len(idx) and vec[idx[0]] < 0:
        return -vec
    return vec


def solve_generalized_eigen(
    A_diag: np.ndarray, B: np.ndarray, k: int, basis: ZonalBasis
) -> GeneralizedSpectrum:
    """Smallest k eigenpairs of A v = lambda B v.

    A must be positive definite (refused otherwise; that is the S <= 0
    regime).  B may be singular: a fixed relative shift
    delta = 1e-12 * trace(B)/dim is then added and recorded.  The solve
    inverts the pencil through A^(-1/2), which keeps near-null directions
    of B harmless: they correspond to huge Rayleigh quotients and never
    pollute the bottom of the spectrum.
    """
    dim = len(A_diag)
    if k > dim:
        raise DegeneratePencilError(f"requested {k} eigenvalues from a {dim}-dim pencil")
    if np.any(A_diag <= 0):
        raise DegeneratePencilError(
            "operator form is not positive definite (nonpositive scalar curvature regime)"
        )
    shift = 0.0
    try:
        np.linalg.cholesky(B)
    except np.linalg.LinAlgError:
        shift = 1e-12 * np.trace(B) / dim
        B = B + shift * np.eye(dim)
    s = 1.0 / np.sqrt(A_diag)
    C = (B * s).T * s
    w, Y = eigh(C)
    order = np.argsort(w)[::-1][:k]
    mass = w[order]
    if np.any(mass <= 0):
        raise DegeneratePencilError("mass form vanishes on the requested eigenspace")
    lams = 1.0 / mass
    fields, residuals = [], []
    for i, j in enumerate(order):
        v = _fix_sign(Y[:, j] * s / np.sqrt(mass[i]))
        av = A_diag * v
        residuals.append(np.linalg.norm(av - lams[i] * (B @ v)) / np.linalg.norm(av))
        fields.append(ZonalField(basis, v))
    return GeneralizedSpectrum(
        eigenvalues=lams,
        eigenfields=fields,
        residuals=np.array(residuals),
        shift=shift,
    )


def _quad_form(B: np.ndarray, v: np.ndarray, w: np.ndarray) -> float:
    return float(v @ (B @ w))


def rayleigh(A_diag: np.ndarray, B: np.ndarray, v: ZonalField) -> float:
    """Generalized Rayleigh quotient of a single field."""
    c = v.coeffs
    mass = _quad_form(B, c, c)
    if mass <= 0:
        raise DegeneratePencilError("field has zero mass-form norm")
    return float(np.dot(A_diag, c * c)) / mass


def minimax_over_plane(
    A_diag: np.ndarray, B: np.ndarray, v: ZonalField, w: ZonalField
) -> float:
    """Sup of the Rayleigh quotient over span(v, w): the larger eigenvalue
    of the 2x2 restricted pencil, computed exactly."""
    cv, cw = v.coeffs, w.coeffs
    E = np.array(
        [
            [np.dot(A_diag, cv * cv), np.dot(A_diag, cv * cw)],
            [np.dot(A_diag, cv * cw), np.dot(A_diag, cw * cw)],
        ]
    )
    M = np.array(
        [
            [_quad_form(B, cv, cv), _quad_form(B, cv, cw)],
            [_quad_form(B, cv, cw), _quad_form(B, cw, cw)],
        ]
    )
    if np.linalg.det(M) <= 0 or M[0, 0] <= 0:
        raise DegeneratePencilError("plane is degenerate for the mass form")
    return float(eigh(E, M, eigvals_only=True)[-1])


def normalized_invariant(
    spectrum: GeneralizedSpectrum, u: ConformalDensity, k: int
) -> float:
    """lambda_k(u) * (integral of u^N)^(4/n); invariant under u -> c*u."""
    n = u.basis.n
    return float(spectrum.eigenvalues[k - 1]) * u.lN_mass() ** (4.0 / n)


@dataclass(frozen=True)
class SphereSetup:
    """Bundle of the standard objects for one round-sphere discretization."""

    data: "object"
    coeffs: OperatorCoefficients
    rule: "object"
    basis: ZonalBasis
    A_diag: np.ndarray


def round_setup(n: int, q: int = 200, L: int = 48) -> SphereSetup:
    """Quadrature, basis and operator form for the round unit n-sphere."""
    from .einstein import derive_coefficients, round_sphere
    from .zonal import build_basis, build_quadrature

    data = round_sphere(n)
    coeffs = derive_coefficients(data)
    rule = build_quadrature(data, q)
    basis = build_basis(rule, L)
    return SphereSetup(
        data=data,
        coeffs=coeffs,
        rule=rule,
        basis=basis,
        A_diag=assemble_stiffness(coeffs, basis),
    )


def solve_density(
    setup: SphereSetup, u: ConformalDensity, k: int
) -> GeneralizedSpectrum:
    """Convenience: assemble B(u) and solve for the smallest k pairs."""
    B = assemble_mass(u, setup.basis)
    return solve_generalized_eigen(setup.A_diag, B, k, setup.basis)
