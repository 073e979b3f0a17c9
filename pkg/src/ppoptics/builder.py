"""From a target permanental/determinantal spectrum to grand-canonical
energy levels and back.

The mean occupation 1/(e^{beta(nu-zeta)} - eta) maps levels to kernel
eigenvalues; inverting it realizes any admissible spectrum as a free-
particle thermal state.  Includes the zero-temperature (projection)
limit and measurement-basis rotations on discrete ground sets.
"""

import json
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .config import TOL
from .kernels import SpectralKernel


@dataclass(frozen=True)
class GrandCanonicalSpec:
    """(beta, zeta, levels nu_i, statistics eta) defining a thermal state."""

    beta: float
    zeta: float
    nu: np.ndarray
    eta: int

    def __post_init__(self):
        nu = np.atleast_1d(np.asarray(self.nu, dtype=float))
        object.__setattr__(self, "nu", nu)
        if self.beta <= 0:
            raise ValueError(f"beta must be positive, got {self.beta}")
        if self.eta not in (-1, 1):
            raise ValueError(f"eta must be +1 or -1, got {self.eta}")
        if self.eta == 1 and np.any(nu <= self.zeta):
            raise ValueError(
                "bosonic levels must lie above the chemical potential "
                "(geometric sums diverge otherwise)"
            )

    def to_json(self) -> str:
        return json.dumps(
            {"beta": self.beta, "zeta": self.zeta, "nu": self.nu.tolist(), "eta": self.eta},
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "GrandCanonicalSpec":
        d = json.loads(text)
        return cls(d["beta"], d["zeta"], np.asarray(d["nu"]), d["eta"])


@dataclass(frozen=True)
class TargetSpectrum:
    """Kernel eigenvalues to realize; endpoints only through limits."""

    lambdas: np.ndarray

    def __post_init__(self):
        lam = np.atleast_1d(np.asarray(self.lambdas, dtype=float))
        object.__setattr__(self, "lambdas", lam)

    def validate(self, eta: int):
        lam = self.lambdas
        if np.any(lam <= 0):
            raise ValueError("target eigenvalues must be positive (0 only as a limit)")
        if eta == -1 and np.any(lam >= 1):
            raise ValueError(
                "fermionic target eigenvalues must lie in (0, 1) (1 only as a limit)"
            )

    def to_json(self) -> str:
        return json.dumps({"lambdas": self.lambdas.tolist()}, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "TargetSpectrum":
        return cls(np.asarray(json.loads(text)["lambdas"]))


def levels_to_spectrum(spec: GrandCanonicalSpec) -> TargetSpectrum:
    """Mean occupations lambda_i = 1/(e^{beta(nu_i - zeta)} - eta)."""
    x = spec.beta * (spec.nu - spec.zeta)
    if spec.eta == -1:
        lam = expit(-x)  # 1/(e^x + 1), stable at both ends
    else:
        with np.errstate(over="ignore"):
            lam = np.where(x > 700, np.exp(-x), 1.0 / np.expm1(np.minimum(x, 700)))
    return TargetSpectrum(lam)


def spectrum_to_levels(
    target: TargetSpectrum, beta: float, zeta: float = 0.0, eta: int = -1
) -> GrandCanonicalSpec:
    """Invert the occupation law: beta (nu - zeta) = log((1 + eta lambda)/lambda).

    Round-trips with levels_to_spectrum to working precision on the open
    admissible intervals.  zeta is a free convention (only nu - zeta
    matters) and defaults to 0.
    """
    if eta not in (-1, 1):
        raise ValueError(f"eta must be +1 or -1, got {eta}")
    target.validate(eta)
    lam = target.lambdas
    x = np.log1p(eta * lam) - np.log(lam)
    return GrandCanonicalSpec(beta, zeta, zeta + x / beta, eta)


def zero_temperature_spectrum(nu, zeta: float) -> TargetSpectrum:
    """Fermionic beta -> infinity limit: fill every level below zeta.

    Endpoint eigenvalues {0, 1} are only reachable through this limit;
    the finite-beta inversion is singular there.
    """
    nu = np.asarray(nu, dtype=float)
    return TargetSpectrum(np.where(nu < zeta, 1.0, 0.0))


def log_partition_function(spec: GrandCanonicalSpec) -> float:
    """log Z: -sum log(1 - e^{-x}) for bosons, sum log(1 + e^{-x}) for fermions."""
    x = spec.beta * (spec.nu - spec.zeta)
    if spec.eta == -1:
        return float(np.sum(np.logaddexp(0.0, -x)))
    return float(-np.sum(np.log(-np.expm1(-x))))


def induced_kernel(spec: GrandCanonicalSpec, basis, window) -> SpectralKernel:
    """Kernel <psi^dag(x) psi(y)> of the thermal state in the given basis.

    Eigenvalues are the mean occupations of the levels; eta propagates.
    """
    if len(basis) != spec.nu.size:
        raise ValueError("need exactly one basis function per level")
    lam = levels_to_spectrum(spec).lambdas
    return SpectralKernel(lam, tuple(basis), spec.eta, tuple(window))


def rotate_measurement_basis(kernel, v) -> np.ndarray:
    """Kernel matrix V diag(lambda) V^dag after a change of measurement basis.

    `kernel` is a SpectralKernel or a plain eigenvalue array on a
    discrete ground set; `v` must be unitary.  The spectrum and trace
    are preserved exactly.
    """
    lam = np.asarray(getattr(kernel, "eigenvalues", kernel), dtype=float)
    v = np.asarray(v, dtype=complex)
    n = lam.size
    if v.shape != (n, n):
        raise ValueError(f"unitary must be {n}x{n}, got {v.shape}")
    if np.abs(v.conj().T @ v - np.eye(n)).max() > TOL.unitary:
        raise ValueError("matrix is not unitary to tolerance")
    return (v * lam) @ v.conj().T


def two_mode_unitary(alpha: complex, beta_c: complex, n: int) -> np.ndarray:
    """Identity except a special-unitary block mixing the last two modes.

    Measuring in this rotated basis leaves the trailing-block
    co-occurrence determinant invariant for fermions while the marginals
    move with (alpha, beta_c); |alpha|^2 + |beta_c|^2 must be 1.
    """
    if n < 2:
        raise ValueError("need at least two modes")
    if abs(abs(alpha) ** 2 + abs(beta_c) ** 2 - 1.0) > 1e-10:
        raise ValueError("|alpha|^2 + |beta|^2 must equal 1")
    v = np.eye(n, dtype=complex)
    v[n - 2, n - 2] = np.conj(alpha)
    v[n - 2, n - 1] = -beta_c
    v[n - 1, n - 2] = np.conj(beta_c)
    v[n - 1, n - 1] = alpha
    return v
