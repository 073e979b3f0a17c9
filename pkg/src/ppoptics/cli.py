"""Command-line surface: sampling runs, pair-correlation estimation, and
verification suites.

Outputs are CSV for bulk numbers and JSON for configs/reports; every
output embeds the resolved configuration and seed so that re-running a
command reproduces the file byte-exactly.
"""

import argparse
import json
import os
import sys

import numpy as np
from scipy.stats import ks_2samp, poisson as poisson_dist

from . import builder, estimators, fock, kernels, samplers
from .samplers import Window

DEFAULT_OUTDIR_ENV = "PPOPTICS_OUTDIR"


def _resolve_out(path):
    outdir = os.environ.get(DEFAULT_OUTDIR_ENV)
    if outdir and path and not os.path.isabs(path):
        return os.path.join(outdir, path)
    return path


def parse_kernel_arg(text: str) -> dict:
    """'hermite:n_modes=10' -> {'name': 'hermite', 'params': {'n_modes': 10.0}}."""
    name, _, rest = text.partition(":")
    params = {}
    if rest:
        for item in rest.split(","):
            key, _, val = item.partition("=")
            if not val:
                raise ValueError(f"malformed kernel parameter {item!r}")
            params[key] = float(val)
    return {"name": name, "params": params}


# ---------------------------------------------------------------------------
# sample


def cmd_sample(args) -> int:
    w = Window(args.window[0], args.window[1])
    meta = {"family": args.family, "seed": args.seed, "command": "sample"}
    try:
        if args.family == "poisson":
            if args.rate is None:
                raise ValueError("--rate is required for the poisson family")
            meta["rate"] = args.rate
            batch = samplers.sample_poisson_batch(
                lambda t: np.full_like(np.asarray(t, dtype=float), args.rate),
                args.rate,
                w,
                args.reps,
                args.seed,
            )
        elif args.family == "permanental":
            meta.update({"sigma": args.sigma, "omega": args.omega, "scale": args.scale})
            cov = kernels.analytic_lorentz_kernel(args.sigma, args.omega)
            batch = samplers.sample_permanental_batch(
                cov, args.scale, w, args.reps, args.seed, args.nodes_per_unit
            )
        elif args.family == "projection-dpp":
            spec = parse_kernel_arg(args.kernel)
            meta["kernel"] = spec
            kern = kernels.kernel_from_spec(spec)
            if args.window_from_kernel:
                w = Window(*kern.window)
                meta["window_from_kernel"] = True
            report = samplers.validate_kernel(kern)
            if not report:
                raise ValueError(f"kernel fails validity: {report.violations}")
            batch = samplers.sample_projection_dpp_batch(
                kern, w, args.reps, args.seed, args.nodes_per_unit
            )
        elif args.family == "dpp-mixture":
            spec = parse_kernel_arg(args.kernel)
            lambdas = np.array([float(x) for x in args.lambdas.split(",")])
            meta["kernel"] = spec
            meta["lambdas"] = lambdas.tolist()
            base = kernels.kernel_from_spec(spec)
            if lambdas.size != base.rank:
                raise ValueError("need one lambda per kernel eigenvalue")
            kern = kernels.SpectralKernel(lambdas, base.basis, -1, base.window)
            if args.window_from_kernel:
                w = Window(*kern.window)
                meta["window_from_kernel"] = True
            report = samplers.validate_kernel(kern)
            if not report:
                raise ValueError(f"kernel fails validity: {report.violations}")
            batch = samplers.sample_dpp_mixture_batch(
                kern, w, args.reps, args.seed, args.nodes_per_unit
            )
        elif args.family == "fock":
            meta.update({"k": args.k, "center": args.center, "width": args.width})
            c, s = args.center, args.width
            batch = samplers.sample_fock_pp_batch(
                lambda t: np.exp(-((t - c) ** 2) / (4.0 * s**2)),
                args.k,
                w,
                args.reps,
                args.seed,
                args.nodes_per_unit,
            )
        else:
            raise ValueError(f"unknown family {args.family!r}")
    except ValueError as exc:
        json.dump({"error": str(exc), "config": meta}, sys.stderr)
        sys.stderr.write("\n")
        return 2
    out = _resolve_out(args.out)
    samplers.save_batch_csv(out, batch, meta)
    counts = [len(c) for c in batch]
    print(f"wrote {out}: {len(batch)} replicates, mean count {np.mean(counts):.3f}")
    return 0


# ---------------------------------------------------------------------------
# pcf


def _theory_curve(theory: str, r_mid: np.ndarray) -> np.ndarray:
    if theory == "poisson":
        return np.ones_like(r_mid)
    spec = parse_kernel_arg(theory)
    if spec["name"] == "permanental":
        cov = kernels.analytic_lorentz_kernel(
            spec["params"]["sigma"], spec["params"].get("omega", 8.0 / spec["params"]["sigma"])
        )
        c0 = cov.at_zero
        return np.array(
            [kernels.theoretical_pcf(cov(r), c0, c0, +1) for r in r_mid]
        )
    raise ValueError(f"unknown theory {theory!r} (use 'poisson' or 'permanental:sigma=...')")


def cmd_pcf(args) -> int:
    batch_path = _resolve_out(args.batch)
    if not os.path.exists(batch_path):
        json.dump({"error": f"batch file {batch_path} not found"}, sys.stderr)
        sys.stderr.write("\n")
        return 2
    batch, meta = samplers.load_batch_csv(batch_path)
    w = batch[0].window
    rmax = args.rmax if args.rmax is not None else w.length / 4.0
    edges = np.linspace(0.0, rmax, args.bins + 1)
    est = estimators.estimate_pcf(batch, edges)
    g_theory = _theory_curve(args.theory, est.r_mid) if args.theory else None
    header = "# ppoptics-pcf " + json.dumps(
        {"batch": os.path.basename(batch_path), "batch_meta": meta, "bins": args.bins,
         "rmax": rmax, "theory": args.theory},
        sort_keys=True,
    )
    out = _resolve_out(args.out)
    estimators.pcf_to_csv(out, est, g_theory, header)
    if g_theory is None:
        print(f"wrote {out}")
        return 0
    dev = np.abs(est.g_hat - g_theory)
    bound = 4.0 * est.stderr
    worst = float((dev - bound).max())
    ok = bool(np.all(dev <= bound))
    print(f"wrote {out}: max |g_hat - g_theory| excess over 4*stderr = {worst:.4f}")
    return 0 if ok else 1


# ---------------------------------------------------------------------------
# verify suites


def _check(name, value, tol) -> dict:
    return {"name": name, "value": float(value), "tol": float(tol),
            "pass": bool(value <= tol)}


def random_gaussian_case(rng, bosonic_gap=(3.5, 7.0)):
    """A random grand-canonical state plus an even ladder-operator product.

    Bosonic level gaps are kept large enough that the cutoff-8
    truncation tail sits far below the Wick verification tolerance.
    """
    eta = -1 if rng.random() < 0.55 else 1
    if eta == -1:
        spec = fock.ModeSpec(int(rng.integers(2, 7)), 1, -1)
        beta = float(rng.uniform(0.5, 2.0))
        nu = rng.uniform(-2.0, 2.0, spec.n_modes)
        zeta = float(rng.uniform(-0.5, 0.5))
    else:
        spec = fock.ModeSpec(int(rng.integers(1, 4)), 8, 1)
        beta = 1.0
        zeta = 0.0
        nu = rng.uniform(*bosonic_gap, spec.n_modes)
    length = int(rng.choice([2, 4, 6]))
    ops = [
        ("create" if rng.random() < 0.5 else "annihilate", int(rng.integers(spec.n_modes)))
        for _ in range(length)
    ]
    return spec, nu, beta, zeta, ops


def suite_wick(seed: int = 0, cases: int = 60) -> dict:
    rng = np.random.default_rng(seed)
    worst = 0.0
    results = []
    for _ in range(cases):
        spec, nu, beta, zeta, ops = random_gaussian_case(rng)
        check = fock.wick_verify(spec, nu, beta, zeta, ops)
        rel = check.deviation / (1.0 + abs(check.exact))
        worst = max(worst, rel)
        results.append(check.to_json_dict())
    checks = [_check("max_relative_wick_deviation", worst, 1e-9)]
    return {
        "suite": "wick",
        "config": {"seed": seed, "cases": cases},
        "checks": checks,
        "cases": results,
        "pass": all(c["pass"] for c in checks),
    }


def suite_ccr(seed: int = 0) -> dict:
    fermi = fock.check_commutation(fock.ModeSpec(3, 1, -1))
    bose = fock.check_commutation(fock.ModeSpec(2, 8, 1))
    checks = [
        _check("fermion_anticommutator_dev", fermi["max_pair_dev"], 1e-13),
        _check("fermion_same_kind_dev", fermi["max_same_kind_dev"], 1e-13),
        _check("boson_bulk_commutator_dev", bose["max_pair_dev"], 1e-13),
        _check("boson_same_kind_dev", bose["max_same_kind_dev"], 1e-13),
        # truncation identity: the top layer deviation equals cutoff+1
        _check("boson_top_layer_vs_identity", abs(bose["max_top_layer_dev"] - 9.0), 1e-12),
    ]
    return {"suite": "ccr", "config": {"seed": seed}, "checks": checks,
            "pass": all(c["pass"] for c in checks)}


def suite_coherent(alpha: complex = 1.5, cutoff: int = 40) -> dict:
    state = fock.coherent_state(alpha, cutoff)
    mean = abs(alpha) ** 2
    ns = np.arange(cutoff + 1)
    pmf_dev = np.abs(np.abs(state) ** 2 - poisson_dist.pmf(ns, mean))[: cutoff // 2].max()
    a = np.diag(np.sqrt(np.arange(1, cutoff + 1)), k=1)
    eigen_dev = abs(state.conj() @ (a @ state) - alpha)
    # small displacement at the documented cutoff, large one with headroom:
    # the low-occupation block only obeys D^-1 a D = a + alpha once the
    # displaced states clear the truncation boundary
    disp_small = fock.displacement_check(0.5, 40)
    disp_large = fock.displacement_check(alpha, cutoff + 20)
    checks = [
        _check("number_distribution_vs_poisson", pmf_dev, 1e-10),
        _check("annihilation_eigenvalue_dev", eigen_dev, 1e-8),
        _check("displacement_action_dev_small", disp_small["action_dev"], 1e-8),
        _check("displacement_action_dev_large", disp_large["action_dev"], 1e-8),
        _check("displacement_vacuum_dev", disp_small["vacuum_dev"], 1e-8),
    ]
    return {
        "suite": "coherent",
        "config": {"alpha": [np.real(alpha), np.imag(alpha)], "cutoff": cutoff},
        "checks": checks,
        "pass": all(c["pass"] for c in checks),
    }


def suite_builder(seed: int = 0) -> dict:
    rng = np.random.default_rng(seed)
    checks = []

    # round trip lambda -> nu -> lambda for both statistics
    for eta in (-1, 1):
        lam = rng.uniform(0.01, 0.99, 50) if eta == -1 else rng.uniform(0.05, 5.0, 50)
        spec = builder.spectrum_to_levels(builder.TargetSpectrum(lam), beta=1.3, eta=eta)
        back = builder.levels_to_spectrum(spec).lambdas
        checks.append(_check(f"round_trip_eta_{eta:+d}", np.abs(back - lam).max(), 1e-12))

    # closed-form log partition function against the exact engine trace
    nu = rng.uniform(-2.0, 2.0, 8)
    spec = builder.GrandCanonicalSpec(0.9, 0.2, nu, -1)
    exact = fock.log_partition(fock.ModeSpec(8, 1, -1), nu, 0.9, 0.2)
    checks.append(
        _check("fermion_log_partition_vs_trace",
               abs(builder.log_partition_function(spec) - exact), 1e-10)
    )

    # zero-temperature limit reproduces the Hermite projection kernel
    n_fill, n_levels = 6, 9
    nu = np.arange(n_levels) - (n_fill - 0.5)
    gc = builder.GrandCanonicalSpec(1e3, 0.0, nu, -1)
    base = kernels.hermite_projection_kernel(n_levels)
    induced = builder.induced_kernel(gc, base.basis, base.window)
    grid = np.linspace(-4.0, 4.0, 50)
    target = kernels.gram_matrix(kernels.hermite_projection_kernel(n_fill), grid)
    got = kernels.gram_matrix(induced, grid)
    checks.append(_check("zero_temperature_projection_kernel",
                         np.abs(got - target).max(), 1e-8))

    # measurement-basis rotation invariants
    lam = rng.uniform(0.05, 0.95, 12)
    worst_det, worst_trace = 0.0, 0.0
    for theta in np.linspace(0.05, np.pi / 2 - 0.05, 10):
        v = builder.two_mode_unitary(np.cos(theta), np.sin(theta) * np.exp(0.3j), lam.size)
        k = builder.rotate_measurement_basis(lam, v)
        det2 = np.linalg.det(k[-2:, -2:])
        worst_det = max(worst_det, abs(det2 - lam[-2] * lam[-1]))
        worst_trace = max(worst_trace, abs(np.trace(k).real - lam.sum()))
    checks.append(_check("co_occurrence_determinant_invariance", worst_det, 1e-12))
    checks.append(_check("trace_invariance", worst_trace, 1e-12))

    return {"suite": "builder", "config": {"seed": seed}, "checks": checks,
            "pass": all(c["pass"] for c in checks)}


def gue_eigenvalues(n: int, reps: int, seed) -> np.ndarray:
    """Pooled eigenvalues of (A+A^dag)/2 with i.i.d. standard complex Gaussian A.

    Entry convention: diagonal ~ Normal(0, 1/2); off-diagonal real and
    imaginary parts each Normal(0, 1/4), so the matrix density is
    proportional to exp(-Tr H^2) and the eigenvalue density matches the
    Hermite-function projection process.
    """
    rng = np.random.default_rng(seed)
    a = (rng.standard_normal((reps, n, n)) + 1j * rng.standard_normal((reps, n, n)))
    h = (a + np.conj(np.transpose(a, (0, 2, 1)))) / (2.0 * np.sqrt(2.0))
    return np.linalg.eigvalsh(h).ravel()


def suite_gue(n: int = 8, reps: int = 5000, seed: int = 0) -> dict:
    eigs = gue_eigenvalues(n, reps, seed)
    kern = kernels.hermite_projection_kernel(n)
    w = Window(*kern.window)
    batch = samplers.sample_projection_dpp_batch(kern, w, reps, seed + 1)
    pooled = np.concatenate([c.points for c in batch])
    ks = float(ks_2samp(eigs, pooled).statistic)
    checks = [_check("ks_distance_gue_vs_hermite_dpp", ks, 0.02)]
    return {
        "suite": "gue",
        "config": {"n": n, "reps": reps, "seed": seed},
        "checks": checks,
        "pass": all(c["pass"] for c in checks),
    }


SUITES = {
    "wick": lambda args: suite_wick(args.seed, args.cases),
    "ccr": lambda args: suite_ccr(args.seed),
    "coherent": lambda args: suite_coherent(),
    "builder": lambda args: suite_builder(args.seed),
    "gue": lambda args: suite_gue(args.n, args.reps, args.seed),
}


def cmd_verify(args) -> int:
    report = SUITES[args.suite](args)
    text = json.dumps(report, sort_keys=True, indent=2, default=float)
    if args.out:
        with open(_resolve_out(args.out), "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    for check in report["checks"]:
        status = "ok" if check["pass"] else "FAIL"
        print(f"[{status}] {check['name']}: {check['value']:.3e} (tol {check['tol']:.1e})",
              file=sys.stderr)
    return 0 if report["pass"] else 1


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ppoptics",
        description="Point-process sampling, estimation, and verification runs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sample = sub.add_parser("sample", help="sample replicates of a point process")
    p_sample.add_argument("--family", required=True,
                          choices=["poisson", "permanental", "projection-dpp",
                                   "dpp-mixture", "fock"])
    p_sample.add_argument("--window", nargs=2, type=float, default=[0.0, 1.0])
    p_sample.add_argument("--window-from-kernel", action="store_true",
                          help="use the kernel's natural domain as the window")
    p_sample.add_argument("--reps", type=int, default=100)
    p_sample.add_argument("--seed", type=int, default=0)
    p_sample.add_argument("--rate", type=float, help="poisson: constant rate")
    p_sample.add_argument("--sigma", type=float, default=0.1, help="permanental envelope")
    p_sample.add_argument("--omega", type=float, default=100.0, help="permanental carrier")
    p_sample.add_argument("--scale", type=float, default=1.0, help="cox scale constant")
    p_sample.add_argument("--kernel", default="hermite:n_modes=10",
                          help="kernel spec, e.g. hermite:n_modes=10")
    p_sample.add_argument("--lambdas", default="", help="mixture eigenvalues, comma separated")
    p_sample.add_argument("--k", type=int, default=5, help="fock: number of particles")
    p_sample.add_argument("--center", type=float, default=0.5, help="fock envelope center")
    p_sample.add_argument("--width", type=float, default=0.15, help="fock envelope width")
    p_sample.add_argument("--nodes-per-unit", type=int, default=4096)
    p_sample.add_argument("--out", required=True)
    p_sample.set_defaults(func=cmd_sample)

    p_pcf = sub.add_parser("pcf", help="pair-correlation estimate of a sampled batch")
    p_pcf.add_argument("--batch", required=True)
    p_pcf.add_argument("--bins", type=int, default=50)
    p_pcf.add_argument("--rmax", type=float)
    p_pcf.add_argument("--theory", help="'poisson' or 'permanental:sigma=...'")
    p_pcf.add_argument("--out", required=True)
    p_pcf.set_defaults(func=cmd_pcf)

    p_verify = sub.add_parser("verify", help="run a property verification suite")
    p_verify.add_argument("suite", choices=sorted(SUITES))
    p_verify.add_argument("--seed", type=int, default=0)
    p_verify.add_argument("--cases", type=int, default=60)
    p_verify.add_argument("--n", type=int, default=8)
    p_verify.add_argument("--reps", type=int, default=5000)
    p_verify.add_argument("--out")
    p_verify.set_defaults(func=cmd_verify)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
