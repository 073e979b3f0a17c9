"""Samplers for Poisson, Cox, permanental, determinantal, and fixed-count
i.i.d. point processes on an interval.

Continuous sampling happens on a dense uniform grid (inverse-CDF draws
with uniform jitter inside a cell); grid density is a knob and
convergence is checked by doubling in the tests.  Every sampler is
deterministic given its seed, and replicates use independently spawned
child seeds.
"""

import csv
import json
from dataclasses import dataclass

import numpy as np

from .config import TOL
from .gaussian_field import TrajectoryGrid, embedding_spectrum, _embedded_complex_sample
from .kernels import SpectralKernel, StationaryCovariance


class RankLossError(RuntimeError):
    """The sequential projection sampler ran out of diagonal mass."""


@dataclass(frozen=True)
class Window:
    a: float
    b: float

    def __post_init__(self):
        if not self.a < self.b:
            raise ValueError(f"window must satisfy a < b, got [{self.a}, {self.b}]")

    @property
    def length(self) -> float:
        return self.b - self.a


@dataclass(frozen=True, eq=False)
class PointConfiguration:
    """A simple (strictly increasing) finite configuration in a window."""

    points: np.ndarray
    window: Window

    def __post_init__(self):
        pts = np.sort(np.asarray(self.points, dtype=float).ravel())
        if pts.size:
            if pts[0] < self.window.a or pts[-1] > self.window.b:
                raise ValueError("points outside the window")
            if np.any(np.diff(pts) <= 0):
                raise ValueError("configuration must be simple (strictly increasing)")
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return self.points.size

    def translate(self, offset: float) -> "PointConfiguration":
        return PointConfiguration(
            self.points + offset, Window(self.window.a + offset, self.window.b + offset)
        )


@dataclass(frozen=True)
class KernelValidityReport:
    eta: int
    valid: bool
    violations: tuple  # (index, eigenvalue, reason)

    def __bool__(self) -> bool:
        return self.valid


def validate_kernel(kernel: SpectralKernel) -> KernelValidityReport:
    """Existence check on the spectrum: lambda >= 0, and lambda <= 1 for eta=-1."""
    tol = TOL.exact
    violations = []
    for i, lam in enumerate(kernel.eigenvalues):
        if lam < -tol:
            violations.append((i, float(lam), "negative eigenvalue"))
        elif kernel.eta == -1 and lam > 1.0 + tol:
            violations.append((i, float(lam), "exceeds the Macchi-Soshnikov bound"))
    return KernelValidityReport(kernel.eta, not violations, tuple(violations))


def _child_rngs(seed, reps: int):
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(reps)]


def _simple_sorted(points: np.ndarray, window: Window, rng, cell: float) -> np.ndarray:
    """Sort and break any grid-cell ties by re-jittering inside the cell."""
    pts = np.sort(points)
    for _ in range(100):
        if pts.size < 2 or np.all(np.diff(pts) > 0):
            return pts
        dup = np.concatenate([[False], np.diff(pts) <= 0])
        pts[dup] += (rng.random(int(dup.sum())) - 0.5) * 1e-9 * cell
        pts = np.clip(np.sort(pts), window.a, window.b)
    raise RuntimeError("could not break ties in a grid sample")


# ---------------------------------------------------------------------------
# Poisson and Cox


def sample_poisson(rate_fn, rate_max: float, w: Window, seed) -> PointConfiguration:
    """Inhomogeneous Poisson sample by thinning a homogeneous rate_max process."""
    rng = np.random.default_rng(seed)
    return _poisson_with_rng(rate_fn, rate_max, w, rng)


def _poisson_with_rng(rate_fn, rate_max, w, rng) -> PointConfiguration:
    if rate_max <= 0:
        raise ValueError(f"rate_max must be positive, got {rate_max}")
    n = rng.poisson(rate_max * w.length)
    t = w.a + w.length * rng.random(n)
    vals = np.asarray(rate_fn(t), dtype=float)
    if vals.shape != t.shape:
        vals = np.array([float(rate_fn(ti)) for ti in t])
    if vals.size and vals.max() > rate_max * (1 + 1e-12):
        worst = t[np.argmax(vals)]
        raise ValueError(
            f"rate_fn({worst:g}) = {vals.max():g} exceeds rate_max = {rate_max:g}"
        )
    keep = rng.random(n) * rate_max < vals
    return PointConfiguration(np.unique(t[keep]), w)


def sample_cox(
    intensity, grid: TrajectoryGrid, scale: float, w: Window, seed
) -> PointConfiguration:
    """Poisson sample conditional on a realized intensity path.

    `intensity` is the nonnegative path (e.g. |E+|^2) on the grid cells,
    interpolated as piecewise constant; the rate is scale * intensity.
    """
    rng = np.random.default_rng(seed)
    return _cox_with_rng(np.asarray(intensity, dtype=float), grid, scale, w, rng)


def _cox_with_rng(intensity, grid, scale, w, rng) -> PointConfiguration:
    if scale < 0:
        raise ValueError(f"scale must be nonnegative, got {scale}")
    if intensity.shape != (grid.n,):
        raise ValueError("intensity path must live on the grid")
    if np.any(intensity < 0):
        raise ValueError("intensity path must be nonnegative")
    cell_start = grid.times
    if w.a < grid.t0 - 1e-9 * grid.dt or w.b > grid.t_end + grid.dt + 1e-9 * grid.dt:
        raise ValueError("window exceeds the trajectory support")
    overlap = np.clip(
        np.minimum(w.b, cell_start + grid.dt) - np.maximum(w.a, cell_start), 0.0, grid.dt
    )
    masses = scale * intensity * overlap
    total = masses.sum()
    if total == 0:
        return PointConfiguration(np.empty(0), w)
    n = rng.poisson(total)
    cum = np.cumsum(masses)
    idx = np.searchsorted(cum, rng.random(n) * total, side="right")
    idx = np.minimum(idx, grid.n - 1)
    pts = np.maximum(w.a, cell_start[idx]) + rng.random(n) * overlap[idx]
    return PointConfiguration(_simple_sorted(pts, w, rng, grid.dt), w)


# ---------------------------------------------------------------------------
# Permanental (Cox process driven by a squared complex Gaussian field)


def _field_grid(cov: StationaryCovariance, w: Window, nodes_per_unit: int) -> TrajectoryGrid:
    # 5 envelope lengths of margin on each side of the observation window
    margin = 5.0 * cov.params.get("sigma", w.length / 4.0)
    return TrajectoryGrid.for_window(w.a, w.b, margin, nodes_per_unit)


def sample_permanental(
    cov: StationaryCovariance, scale: float, w: Window, seed, nodes_per_unit: int = 4096
) -> PointConfiguration:
    """One permanental sample with kernel scale * cov.

    Composes a circularly-symmetric complex Gaussian field draw with a
    Cox draw at rate scale * |E+|^2.
    """
    return sample_permanental_batch(cov, scale, w, 1, seed, nodes_per_unit)[0]


def sample_permanental_batch(
    cov, scale, w: Window, reps: int, seed, nodes_per_unit: int = 4096
) -> list:
    grid = _field_grid(cov, w, nodes_per_unit)
    d = embedding_spectrum(cov, grid)
    out = []
    for rng in _child_rngs(seed, reps):
        field = _embedded_complex_sample(d, rng)[: grid.n]
        out.append(_cox_with_rng(np.abs(field) ** 2, grid, scale, w, rng))
    return out


# ---------------------------------------------------------------------------
# Determinantal (sequential conditional scheme for projection kernels)


class _ProjectionSampler:
    """Sequential sampler for a rank-N projection kernel on a dense grid.

    The chain-rule conditional density after j accepted points is
    (K(x,x) - sum_i |<e_i, phi(x)>|^2) / (N - j), with e_i the
    orthonormalized feature directions of the accepted points.  Each
    conditional draw is realized by exact rejection from the fixed
    proposal K(x,x)/N, which the Bessel inequality dominates pointwise.
    """

    MAX_TRIES = 2000

    def __init__(self, kernel: SpectralKernel, w: Window, nodes_per_unit: int = 4096):
        lam = kernel.eigenvalues
        unit = np.abs(lam - 1.0) <= 1e-9
        zero = np.abs(lam) <= 1e-9
        if not np.all(unit | zero):
            raise ValueError("projection sampling requires all eigenvalues in {0, 1}")
        self.n_points = int(unit.sum())
        self.window = w
        n_cells = max(1024, int(round(nodes_per_unit * w.length)))
        self.cell = w.length / n_cells
        self.centers = w.a + (np.arange(n_cells) + 0.5) * self.cell
        basis = tuple(f for f, u in zip(kernel.basis, unit) if u)
        sub = SpectralKernel(np.ones(self.n_points), basis, kernel.eta, (w.a, w.b))
        self.features = sub.feature_matrix(self.centers)
        self.diag = np.real(np.einsum("ki,ki->i", self.features, self.features.conj()))
        self.cdf = np.cumsum(self.diag)
        self.total = self.cdf[-1]
        trace = self.total * self.cell
        if self.n_points and abs(trace - self.n_points) > 0.05 * self.n_points:
            raise ValueError(
                f"kernel trace on the window is {trace:.3f}, expected {self.n_points}; "
                "the basis is not orthonormal on this window or the grid is too coarse"
            )

    def sample(self, rng) -> np.ndarray:
        n = self.n_points
        if n == 0:
            return np.empty(0)
        directions = np.zeros((n, n), dtype=complex)
        points = np.empty(n)
        for j in range(n):
            idx = self._accept_index(rng, directions[:j])
            phi = self.features[:, idx]
            coef = directions[:j].conj() @ phi
            e = phi - coef @ directions[:j]
            norm = np.linalg.norm(e)
            if norm < 1e-6 * np.linalg.norm(phi):
                # re-orthogonalize: one extra Gram-Schmidt pass
                coef2 = directions[:j].conj() @ e
                e = e - coef2 @ directions[:j]
                norm = np.linalg.norm(e)
            directions[j] = e / norm
            points[j] = self.centers[idx] + (rng.random() - 0.5) * self.cell
        return points

    def _accept_index(self, rng, accepted) -> int:
        for _ in range(self.MAX_TRIES):
            u, v = rng.random(2)
            idx = min(np.searchsorted(self.cdf, u * self.total), self.diag.size - 1)
            q = self.diag[idx]
            if q <= 0:
                continue
            proj = accepted.conj() @ self.features[:, idx]
            resid = q - np.sum(np.abs(proj) ** 2)
            if v * q <= resid:
                return idx
        mass = self._residual_mass(accepted)
        if mass < TOL.rank_loss * self.n_points:
            raise RankLossError(
                f"projected diagonal mass {mass:.3e} after {accepted.shape[0]} points"
            )
        raise RuntimeError(
            f"rejection loop stalled with residual mass {mass:.3e}; "
            "the grid may be too coarse for this kernel"
        )

    def _residual_mass(self, accepted) -> float:
        proj = np.abs(accepted.conj() @ self.features) ** 2
        return float((self.diag - proj.sum(axis=0)).sum() * self.cell)


def sample_projection_dpp(
    kernel: SpectralKernel, w: Window, seed, nodes_per_unit: int = 4096
) -> PointConfiguration:
    """Exactly-N sample of a projection determinantal process."""
    return sample_projection_dpp_batch(kernel, w, 1, seed, nodes_per_unit)[0]


def sample_projection_dpp_batch(
    kernel, w: Window, reps: int, seed, nodes_per_unit: int = 4096
) -> list:
    if kernel.eta != -1:
        raise ValueError("the sequential conditional scheme samples determinantal kernels")
    sampler = _ProjectionSampler(kernel, w, nodes_per_unit)
    out = []
    for rng in _child_rngs(seed, reps):
        pts = _simple_sorted(sampler.sample(rng), w, rng, sampler.cell)
        out.append(PointConfiguration(pts, w))
    return out


def sample_dpp_mixture(
    kernel: SpectralKernel, w: Window, seed, nodes_per_unit: int = 4096
) -> PointConfiguration:
    """DPP sample via the Bernoulli mixture over projection kernels."""
    return sample_dpp_mixture_batch(kernel, w, 1, seed, nodes_per_unit)[0]


def sample_dpp_mixture_batch(
    kernel, w: Window, reps: int, seed, nodes_per_unit: int = 4096
) -> list:
    if kernel.eta != -1:
        raise ValueError("the Bernoulli mixture construction is determinantal (eta=-1)")
    report = validate_kernel(kernel)
    if not report:
        raise ValueError(f"kernel fails the validity check: {report.violations}")
    # precompute features for the full basis once; per-replicate subsets are row views
    proto = _ProjectionSampler(
        SpectralKernel(np.ones(kernel.rank), kernel.basis, -1, kernel.window),
        w,
        nodes_per_unit,
    )
    lam = kernel.eigenvalues
    abs2 = np.abs(proto.features) ** 2
    out = []
    for rng in _child_rngs(seed, reps):
        keep = rng.random(lam.size) < lam
        n_keep = int(keep.sum())
        if n_keep == 0:
            out.append(PointConfiguration(np.empty(0), w))
            continue
        sub = _ProjectionSampler.__new__(_ProjectionSampler)
        sub.n_points = n_keep
        sub.window = w
        sub.cell = proto.cell
        sub.centers = proto.centers
        sub.features = proto.features[keep]
        sub.diag = abs2[keep].sum(axis=0)
        sub.cdf = np.cumsum(sub.diag)
        sub.total = sub.cdf[-1]
        pts = _simple_sorted(sub.sample(rng), w, rng, sub.cell)
        out.append(PointConfiguration(pts, w))
    return out


# ---------------------------------------------------------------------------
# Fixed-count i.i.d. process (single-mode number state)


def sample_fock_pp(
    phi_plus, k: int, w: Window, seed, nodes_per_unit: int = 4096
) -> PointConfiguration:
    """k i.i.d. draws from the density proportional to |phi_plus|^2."""
    return sample_fock_pp_batch(phi_plus, k, w, 1, seed, nodes_per_unit)[0]


def sample_fock_pp_batch(
    phi_plus, k: int, w: Window, reps: int, seed, nodes_per_unit: int = 4096
) -> list:
    if k < 1:
        raise ValueError(f"k must be a positive integer, got {k}")
    n_cells = max(1024, int(round(nodes_per_unit * w.length)))
    cell = w.length / n_cells
    centers = w.a + (np.arange(n_cells) + 0.5) * cell
    masses = np.abs(np.asarray(phi_plus(centers), dtype=complex)) ** 2
    total = masses.sum()
    if total <= 0:
        raise ValueError("|phi_plus|^2 has zero total mass on the window")
    cdf = np.cumsum(masses)
    out = []
    for rng in _child_rngs(seed, reps):
        idx = np.minimum(np.searchsorted(cdf, rng.random(k) * total), n_cells - 1)
        pts = centers[idx] + (rng.random(k) - 0.5) * cell
        out.append(PointConfiguration(_simple_sorted(pts, w, rng, cell), w))
    return out


def sample_poisson_batch(rate_fn, rate_max, w: Window, reps: int, seed) -> list:
    return [_poisson_with_rng(rate_fn, rate_max, w, rng) for rng in _child_rngs(seed, reps)]


# ---------------------------------------------------------------------------
# Serialization

_BATCH_MAGIC = "# ppoptics-batch "


def save_batch_csv(path, batch: list, meta: dict):
    """One point per row (replicate_id, t); metadata in a JSON header line."""
    window = batch[0].window
    header = dict(meta)
    header["window"] = [window.a, window.b]
    header["n_replicates"] = len(batch)
    with open(path, "w", newline="") as fh:
        fh.write(_BATCH_MAGIC + json.dumps(header, sort_keys=True) + "\n")
        writer = csv.writer(fh)
        writer.writerow(["replicate_id", "t"])
        for r, config in enumerate(batch):
            for t in config.points:
                writer.writerow([r, repr(float(t))])


def load_batch_csv(path):
    """Inverse of save_batch_csv; returns (batch, meta)."""
    with open(path, newline="") as fh:
        first = fh.readline()
        if not first.startswith(_BATCH_MAGIC):
            raise ValueError(f"{path} is not a batch file")
        meta = json.loads(first[len(_BATCH_MAGIC):])
        rows = list(csv.reader(fh))
    w = Window(*meta["window"])
    points = [[] for _ in range(meta["n_replicates"])]
    for row in rows[1:]:
        points[int(row[0])].append(float(row[1]))
    return [PointConfiguration(np.array(p), w) for p in points], meta


def batch_to_json(batch: list, meta: dict) -> str:
    window = batch[0].window
    return json.dumps(
        {
            "meta": meta,
            "window": [window.a, window.b],
            "points": [config.points.tolist() for config in batch],
        },
        sort_keys=True,
    )


def batch_from_json(text: str):
    doc = json.loads(text)
    w = Window(*doc["window"])
    return [PointConfiguration(np.array(p), w) for p in doc["points"]], doc["meta"]
