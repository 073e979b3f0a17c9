"""The kernel zoo.

Closed-form stationary covariances, spectral (eigenfunction) kernels,
first-order coherence kernels for free fermions, and the theoretical
pair-correlation formulas for permanental and determinantal processes.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from .config import TOL

HERMITE_MAX_MODES = 200
HERMITE_SAFE_RANGE = 40.0  # |x| beyond which the recurrence start underflows


@dataclass(frozen=True)
class StationaryCovariance:
    """Stationary covariance tau -> C0(tau), with named parameters.

    C0(0) must be real and positive, and C0(-tau) = conj(C0(tau)).
    """

    c0: callable
    params: dict = field(default_factory=dict)

    def __call__(self, tau):
        return self.c0(np.asarray(tau, dtype=float))

    @property
    def at_zero(self) -> float:
        return float(np.real(self.c0(np.asarray(0.0))))


def lorentz_kernel(sigma: float, omega: float) -> StationaryCovariance:
    """Exponential envelope times a cosine carrier: exp(-|tau|/sigma) cos(omega tau)."""
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    if omega < 1.0 / sigma:
        warnings.warn(
            f"carrier omega={omega} is not well separated from the envelope "
            f"rate 1/sigma={1/sigma:g}; the quasi-monochromatic picture degrades",
            stacklevel=2,
        )

    def c0(tau):
        return np.exp(-np.abs(tau) / sigma) * np.cos(omega * tau)

    return StationaryCovariance(c0, {"name": "lorentz", "sigma": sigma, "omega": omega})


def analytic_lorentz_kernel(sigma: float, omega: float) -> StationaryCovariance:
    """Covariance of the analytic signal of the Lorentz field: 2 exp(-|tau|/sigma) e^{i omega tau}.

    The factor 2 and the phase follow from taking the analytic signal of
    a stationary process with a slowly varying envelope (Bedrosian).
    """
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    if omega < 1.0 / sigma:
        warnings.warn(
            f"carrier omega={omega} is not well separated from the envelope "
            f"rate 1/sigma={1/sigma:g}",
            stacklevel=2,
        )

    def c0(tau):
        return 2.0 * np.exp(-np.abs(tau) / sigma) * np.exp(1j * omega * tau)

    return StationaryCovariance(
        c0, {"name": "analytic_lorentz", "sigma": sigma, "omega": omega}
    )


def hermite_functions(n: int, x) -> np.ndarray:
    """Rows 0..n-1 of the orthonormal Hermite functions at the points x.

    Normalized three-term recurrence starting from the Gaussian
    psi_0 = pi^(-1/4) exp(-x^2/2); this stays bounded for all k, unlike
    evaluating Hermite polynomials and attaching the weight afterwards.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if n < 1 or n > HERMITE_MAX_MODES:
        raise ValueError(f"n must be in 1..{HERMITE_MAX_MODES}, got {n}")
    if np.any(np.abs(x) > HERMITE_SAFE_RANGE):
        warnings.warn(
            f"Hermite recurrence start underflows for |x| > {HERMITE_SAFE_RANGE}; "
            "values there are flushed to 0",
            stacklevel=2,
        )
    out = np.zeros((n, x.size))
    out[0] = np.pi ** -0.25 * np.exp(-0.5 * x**2)
    if n > 1:
        out[1] = np.sqrt(2.0) * x * out[0]
    for k in range(1, n - 1):
        out[k + 1] = x * np.sqrt(2.0 / (k + 1)) * out[k] - np.sqrt(k / (k + 1.0)) * out[k - 1]
    return out


@dataclass(frozen=True)
class SpectralKernel:
    """Kernel K(x,y) = sum_i lambda_i phi_i(x) conj(phi_i(y)).

    `basis` holds the eigenfunction handles, orthonormal on `window`
    with respect to the Lebesgue reference measure; eta = +1 flags a
    permanental kernel, -1 a determinantal one.
    """

    eigenvalues: np.ndarray
    basis: tuple
    eta: int
    window: tuple

    def __post_init__(self):
        object.__setattr__(self, "eigenvalues", np.asarray(self.eigenvalues, dtype=float))
        if self.eta not in (-1, 1):
            raise ValueError(f"eta must be +1 or -1, got {self.eta}")
        if len(self.basis) != len(self.eigenvalues):
            raise ValueError("one basis function per eigenvalue required")
        a, b = self.window
        if not a < b:
            raise ValueError(f"window must satisfy a < b, got {self.window}")

    @property
    def rank(self) -> int:
        return len(self.eigenvalues)

    def feature_matrix(self, points) -> np.ndarray:
        """Matrix F with F[k, i] = phi_k(points[i])."""
        pts = np.atleast_1d(np.asarray(points, dtype=float))
        return np.stack([np.asarray(f(pts), dtype=complex).reshape(pts.shape) for f in self.basis])

    def evaluate(self, x, y) -> complex:
        fx = self.feature_matrix([x])[:, 0]
        fy = self.feature_matrix([y])[:, 0]
        return complex(np.sum(self.eigenvalues * fx * fy.conj()))

    def diagonal(self, points) -> np.ndarray:
        """K(x,x) on an array of points."""
        f = self.feature_matrix(points)
        return np.real(np.einsum("k,ki,ki->i", self.eigenvalues, f, f.conj()))


def hermite_projection_kernel(n_modes: int) -> SpectralKernel:
    """Rank-N projection onto the first N Hermite functions (eta=-1).

    This is the kernel of the ground state of N free fermions in a
    harmonic trap; its point process is the GUE eigenvalue ensemble.
    """
    if not 1 <= n_modes <= HERMITE_MAX_MODES:
        raise ValueError(f"n_modes must be in 1..{HERMITE_MAX_MODES}, got {n_modes}")
    half_width = np.sqrt(2.0 * n_modes) + 10.0

    def make_phi(k):
        def phi(x):
            return hermite_functions(k + 1, x)[k]

        return phi

    return SpectralKernel(
        eigenvalues=np.ones(n_modes),
        basis=tuple(make_phi(k) for k in range(n_modes)),
        eta=-1,
        window=(-half_width, half_width),
    )


def fermi_sea_kernel_3d(k_f: float):
    """First-order coherence of the 3-D Fermi sea as a function of distance.

    Returns d -> (1/pi^2) (sin(k_f d) - k_f d cos(k_f d)) / d^3, with the
    coincidence value hard-coded to the analytic limit k_f^3 / (3 pi^2);
    a series is used near d=0 where the closed form loses digits.
    """
    if k_f <= 0:
        raise ValueError(f"k_f must be positive, got {k_f}")

    def g1(d):
        d = np.asarray(d, dtype=float)
        if np.any(d < 0):
            raise ValueError("distance must be nonnegative")
        x = k_f * d
        small = x < 1e-3
        xs = np.where(small, 1.0, x)  # placeholder to keep the division finite
        bracket = np.where(
            small,
            1.0 / 3.0 - x**2 / 30.0,
            (np.sin(xs) - xs * np.cos(xs)) / xs**3,
        )
        return k_f**3 / np.pi**2 * bracket

    return g1


def chiral_thermal_kernel(
    beta: float, zeta: float, epsilon: float = None, hbar: float = 1.0, v_fermi: float = 1.0
):
    """Thermal first-order coherence of a chiral wire, (t, t') -> complex.

    K(t,t') = i/(2 pi v_F tau_th) * exp(-i zeta (t-t')/hbar)
              / sinh((t-t'+i eps)/tau_th), with thermal coherence time
    tau_th = hbar beta / pi.  eps > 0 models the finite bandwidth and
    regularizes the coincidence singularity (default 1e-3 tau_th);
    natural units by default.
    """
    if beta <= 0:
        raise ValueError(f"beta must be positive, got {beta}")
    tau_th = hbar * beta / np.pi
    if epsilon is None:
        epsilon = 1e-3 * tau_th
    if epsilon <= 0:
        raise ValueError("epsilon must be positive: the kernel is singular at coincidence")

    def kern(t, tp):
        dt = np.asarray(t, dtype=float) - np.asarray(tp, dtype=float)
        return (
            1j
            / (2.0 * np.pi * v_fermi * tau_th)
            * np.exp(-1j * zeta / hbar * dt)
            / np.sinh((dt + 1j * epsilon) / tau_th)
        )

    return kern


def theoretical_pcf(kernel_value_xy: complex, kxx: float, kyy: float, eta: int):
    """Closed-form pair correlation 1 + eta |K(x,y)|^2 / (K(x,x) K(y,y)).

    >= 1 for permanental kernels (bunching), in [0, 1] for Hermitian
    determinantal kernels (antibunching).
    """
    if eta not in (-1, 1):
        raise ValueError(f"eta must be +1 or -1, got {eta}")
    kxx = np.asarray(kxx, dtype=float)
    kyy = np.asarray(kyy, dtype=float)
    if np.any(kxx <= 0) or np.any(kyy <= 0):
        raise ValueError("diagonal kernel values must be positive")
    g = 1.0 + eta * np.abs(np.asarray(kernel_value_xy)) ** 2 / (kxx * kyy)
    # rounding can push the coincidence value of a saturated Hermitian
    # kernel a few ulp below 0; genuine violations stay visible
    return np.where((g < 0) & (g > -1e-12), 0.0, g)


def gram_matrix(kernel: SpectralKernel, points) -> np.ndarray:
    """Matrix [K(x_i, x_j)] on a point set; Hermitian by construction."""
    f = kernel.feature_matrix(points)
    return (f.T * kernel.eigenvalues) @ f.conj()


def basis_gram(kernel: SpectralKernel, oversample: float = 8.0) -> np.ndarray:
    """Gram matrix of the basis by trapezoid quadrature on the window.

    The node spacing resolves the fastest basis oscillation (estimated
    from the rank); for smooth rapidly decaying bases the trapezoid rule
    converges spectrally, so orthonormal bases come out as the identity
    to well below TOL.quadrature.
    """
    a, b = kernel.window
    max_freq = np.sqrt(2.0 * kernel.rank) + 1.0
    n_nodes = int(oversample * max_freq * (b - a) / np.pi) + 64
    x = np.linspace(a, b, n_nodes)
    w = np.full(n_nodes, x[1] - x[0])
    w[0] *= 0.5
    w[-1] *= 0.5
    f = kernel.feature_matrix(x)
    return (f * w) @ f.conj().T


def min_eigenvalue(matrix) -> float:
    """Smallest eigenvalue of a Hermitian matrix (PSD check helper)."""
    return float(np.linalg.eigvalsh(np.asarray(matrix)).min())


def kernel_from_spec(spec: dict):
    """Build a zoo kernel from a JSON-style {'name': ..., 'params': {...}} spec."""
    try:
        name = spec["name"]
        params = dict(spec.get("params", {}))
    except (TypeError, KeyError) as exc:
        raise ValueError(f"malformed kernel spec {spec!r}") from exc
    def hermite_modes(p):
        for key in ("n_modes", "N", "n"):
            if key in p:
                return int(p[key])
        raise KeyError("'n_modes'")

    builders = {
        "lorentz": lambda p: lorentz_kernel(p["sigma"], p["omega"]),
        "analytic_lorentz": lambda p: analytic_lorentz_kernel(p["sigma"], p["omega"]),
        "hermite": lambda p: hermite_projection_kernel(hermite_modes(p)),
        "fermi_sea_3d": lambda p: fermi_sea_kernel_3d(p["k_f"]),
        "chiral_thermal": lambda p: chiral_thermal_kernel(
            p["beta"], p["zeta"], p.get("epsilon"),
            p.get("hbar", 1.0), p.get("v_fermi", 1.0),
        ),
    }
    if name not in builders:
        raise ValueError(f"unknown kernel name {name!r}; known: {sorted(builders)}")
    try:
        return builders[name](params)
    except KeyError as exc:
        raise ValueError(f"kernel {name!r} is missing parameter {exc}") from exc
