"""Command-line front end: verify, render, sweep, dim-lower, dim-upper.

Exit codes: 0 success, 1 failed check or computation error, 2 usage or
config error.  Every output file embeds the effective config as comment
lines, CSV floats carry 17 significant digits, and reruns with the same
config and seed are byte-identical.
"""
from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from .config import (
    ConfigError,
    ExperimentConfig,
    config_comment_lines,
    load_config,
    validate_config,
)
from .dimension import (
    ContractionViolationError,
    DegenerateMultiplierError,
    DegenerateSystemError,
    IFSBranchSet,
    InsufficientPolesError,
    UndefinedDimensionError,
    box_counting,
    continuity_envelope,
    estimate_branch_contractions,
    formula_lower,
    formula_upper,
    multiplier_sign_mismatch,
    qc_dilatation,
    series_exponent,
    solve_bowen,
    synthetic_lattice_branches,
)
from .dynamics import (
    LinearizationDomainError,
    NoAttractingFixedPointError,
    find_attracting_fixed_point,
    koenigs_check,
    koenigs_value,
    render,
)
from .elliptic import PI, eisenstein_g4, square_lattice, wp, wp_direct_sum, wp_prime
from .families import (
    MapFamily,
    PoleRangeError,
    enumerate_poles,
    eval_family,
    eval_family_array,
    local_exponent,
    nearest_pole,
)

_COMMAND_ERRORS = (
    NoAttractingFixedPointError,
    LinearizationDomainError,
    PoleRangeError,
    DegenerateSystemError,
    ContractionViolationError,
    InsufficientPolesError,
    UndefinedDimensionError,
    DegenerateMultiplierError,
    ValueError,
    ArithmeticError,
)


def _fmt(x: float) -> str:
    return "%.17g" % float(x)


def _sanitize(msg: str) -> str:
    return msg.replace(",", ";").replace("\n", " ")


class _Checks:
    def __init__(self) -> None:
        self.rows: list[tuple[str, float, float]] = []

    def add(self, name: str, residual: float, tol: float) -> None:
        self.rows.append((name, float(residual), float(tol)))

    def add_flag(self, name: str, ok: bool) -> None:
        self.rows.append((name, 0.0 if ok else 1.0, 0.5))

    def report(self) -> tuple[str, bool]:
        lines = []
        passed = 0
        for name, residual, tol in self.rows:
            ok = residual <= tol
            passed += ok
            lines.append(
                f"{'PASS' if ok else 'FAIL'}  {name:<42} residual={residual:.3e}  tol={tol:.3e}"
            )
        total = len(self.rows)
        lines.append(f"verify: {passed}/{total} checks passed")
        return "\n".join(lines) + "\n", passed == total


def _run_verify(cfg: ExperimentConfig, seed: int) -> tuple[str, bool]:
    rng = np.random.default_rng(seed)
    lat = square_lattice()
    c = _Checks()

    c.add("wp-e2-at-corner-half-period", abs(wp(complex(PI / 2, PI / 2))), 1e-9)
    c.add("wp-half-period-values-sum", abs(wp(PI / 2) + wp(1j * PI / 2)), 1e-9)
    c.add("g2-vs-weight4-lattice-sum", abs(lat.g2 - 60.0 * eisenstein_g4()) / lat.g2, 1e-9)
    c.add("e1-vs-direct-lattice-sum", abs(wp_direct_sum(PI / 2, 1e-12).real - lat.e1) / lat.e1, 1e-9)

    pts = []
    while len(pts) < 100:
        z = complex(rng.uniform(-PI / 2, PI / 2), rng.uniform(-PI / 2, PI / 2))
        if abs(z) > 0.05:
            pts.append(z)
    c.add(
        "wp-against-direct-sum-oracle",
        max(abs(wp(z) - wp_direct_sum(z, 1e-9)) for z in pts),
        1e-8,
    )

    rel = 0.0
    for z in pts:
        if abs(z) < 0.1:
            continue
        v = wp(z)
        d = wp_prime(z)
        rhs = 4.0 * v ** 3 - lat.g2 * v
        rel = max(rel, abs(d * d - rhs) / max(1.0, abs(rhs)))
    c.add("wp-differential-equation", rel, 1e-7)

    z0 = 0.3 + 0.2j
    h = 1e-6
    cd = (wp(z0 + h) - wp(z0 - h)) / (2.0 * h)
    c.add("wp-prime-central-difference", abs(wp_prime(z0) - cd) / abs(cd), 1e-5)

    even = per1 = per2 = 0.0
    for z in pts[:40]:
        even = max(even, abs(wp(z) - wp(-z)))
        per1 = max(per1, abs(wp(z + PI) - wp(z)))
        per2 = max(per2, abs(wp(z + 1j * PI) - wp(z)))
    c.add("wp-evenness", even, 1e-9)
    c.add("wp-periodicity", max(per1, per2), 1e-9)

    fam_g = MapFamily(tag="G")
    fam_h = MapFamily(tag="H", p=cfg.p, eta=cfg.eta)
    fam_hm = MapFamily(tag="Hm", m=cfg.m, p=cfg.p, eta=cfg.eta)
    fam_fl = MapFamily(tag="FLambda", lam=cfg.lam, m=cfg.m, p=cfg.p, eta=cfg.eta)

    c.add("G-zero-at-half-pi", abs(eval_family(fam_g, PI / 2).value), 1e-9)
    c.add("G-one-at-origin", abs(eval_family(fam_g, 0.0).value - 1.0), 1e-9)
    c.add_flag("G-pole-at-i-half-pi", eval_family(fam_g, 0.5j * PI).at_infinity)
    fam_f = MapFamily(tag="FMax")
    c.add("fmax-value-i-at-origin", abs(eval_family(fam_f, 0.0).value - 1j), 1e-9)
    c.add("fmax-zero-at-one", abs(eval_family(fam_f, 1.0).value), 1e-9)
    c.add_flag("fmax-pole-at-i", eval_family(fam_f, 1j).at_infinity)
    c.add("H-value-eta-at-origin", abs(eval_family(fam_h, 0.0).value - cfg.eta), 1e-9)
    c.add("hm-value-eta-at-origin", abs(eval_family(fam_hm, 0.0).value - cfg.eta), 1e-9)
    c.add("hm-zero-at-m", abs(eval_family(fam_hm, float(cfg.m)).value), 1e-9)

    pole = nearest_pole(fam_hm)
    probe = eval_family(fam_hm, pole.location + 1e-9)
    c.add_flag("hm-nearest-pole-blows-up", probe.at_infinity or abs(probe.value) > 1e10)

    xs = np.linspace(-4.0, 4.0, 201)
    gv, gp = eval_family_array(fam_g, xs.astype(complex))
    range_dev = max(
        float(np.max(np.abs(gv.imag))),
        float(np.max(np.maximum(gv.real - 1.0, 0.0))),
        float(np.max(np.maximum(-gv.real, 0.0))),
    )
    c.add_flag("G-real-axis-no-poles", not gp.any())
    c.add("G-real-axis-range", range_dev, 1e-9)

    hx = np.linspace(1e-3, PI / 2 - 1e-3, 60).astype(complex)
    hv, _ = eval_family_array(fam_h, hx)
    c.add("H-strictly-decreasing-on-interval", float(np.max(np.diff(hv.real))), 0.0)

    c.add("G-zero-multiplicity-4", abs(local_exponent(fam_g, PI / 2, "zero") - 4.0), 0.05)
    c.add("G-pole-multiplicity-4", abs(local_exponent(fam_g, 0.5j * PI, "pole") - 4.0), 0.05)
    c.add("G-one-point-multiplicity-2", abs(local_exponent(fam_g, 0.0, "value", 1.0) - 2.0), 0.05)
    c.add(
        "hm-pole-multiplicity-4p",
        abs(local_exponent(fam_hm, pole.location, "pole") - 4.0 * cfg.p),
        0.05,
    )
    c.add(
        "hm-zero-multiplicity-2p",
        abs(local_exponent(fam_hm, float(cfg.m), "zero") - 2.0 * cfg.p),
        0.05,
    )

    dev = 0.0
    for _ in range(30):
        z = complex(rng.uniform(-3, 3), rng.uniform(0.2, 3))
        w = cfg.m * complex(np.arcsin(np.asarray(z / cfg.m))[()])
        v1 = eval_family(fam_h, w)
        v2 = eval_family(fam_h, PI * cfg.m - w)
        if v1.at_infinity or v2.at_infinity:
            continue
        dev = max(dev, abs(v1.value - v2.value))
    c.add("arcsin-branch-consistency", dev, 1e-9)

    sym = 0.0
    for _ in range(40):
        z = complex(rng.uniform(-3, 3), rng.uniform(-3, 3))
        a = eval_family(fam_fl, z)
        b = eval_family(fam_fl, z.conjugate())
        e = eval_family(fam_fl, -z)
        if a.at_infinity != b.at_infinity or a.at_infinity != e.at_infinity:
            sym = max(sym, 1.0)
        elif not a.at_infinity:
            sym = max(sym, abs(b.value - a.value.conjugate()), abs(e.value - a.value))
    c.add("flambda-conjugation-and-evenness", sym, 0.0)

    fp = find_attracting_fixed_point(cfg.lam, cfg.m, cfg.p, cfg.eta)
    gap = eval_family(fam_fl, complex(fp.location)).value - fp.location
    c.add("fixed-point-residual", abs(gap), 1e-12)
    c.add_flag("fixed-point-inside-(0,eta)", 0.0 < fp.location < cfg.eta)
    c.add_flag("multiplier-attracting", abs(fp.multiplier) < 1.0)
    fp1 = find_attracting_fixed_point(1.0, cfg.m, cfg.p, cfg.eta)
    c.add_flag("multiplier-negative-at-lambda-1", fp1.multiplier < 0.0)

    mults = [
        find_attracting_fixed_point(float(l), cfg.m, cfg.p, cfg.eta).multiplier
        for l in np.linspace(0.1, 1.0, 10)
    ]
    c.add("multiplier-strictly-decreasing", float(np.max(np.diff(mults))), 0.0)

    c.add("koenigs-residual-near-fixed-point", koenigs_check(fam_fl, fp, fp.location + 1e-4), 1e-8)
    g1 = koenigs_value(fam_fl, fp, fp.location + 1e-5)
    g0 = koenigs_value(fam_fl, fp, complex(fp.location))
    c.add("koenigs-derivative-one", abs((g1 - g0) / 1e-5 - 1.0), 1e-4)

    return c.report()


def cmd_verify(cfg: ExperimentConfig, out: str, threads: int, seed: int) -> int:
    report, ok = _run_verify(cfg, seed)
    sys.stdout.write(report)
    if out:
        header = "".join(f"# {line}\n" for line in config_comment_lines(cfg))
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(header + report)
    return 0 if ok else 1


def _fixed_point_for(cfg: ExperimentConfig, family: MapFamily):
    if family.tag == "FLambda":
        return find_attracting_fixed_point(family.lam, family.m, family.p, family.eta)
    if family.tag == "Hm":
        return find_attracting_fixed_point(1.0, family.m, family.p, family.eta)
    return None


def cmd_render(cfg: ExperimentConfig, out: str, threads: int, seed: int) -> int:
    family = cfg.to_family()
    fp = _fixed_point_for(cfg, family)
    raster = render(
        cfg.to_grid(),
        family,
        fp,
        threads=threads,
        guard_modulus=cfg.guard_modulus,
        guard_exit_limit=cfg.guard_exits,
    )
    path = out or cfg.out or "render.pgm"
    with open(path, "wb") as fh:
        fh.write(raster.to_pgm(config_comment_lines(cfg)))
    sys.stdout.write(
        f"render: wrote {path} attracted={raster.attracted_fraction:.6f} "
        f"julia={raster.julia_fraction:.6f} undetermined={raster.undetermined_fraction:.6f}\n"
    )
    return 0


_SWEEP_COLUMNS = (
    "lam,fixed_point,multiplier,box_dim,box_lo,box_hi,K,holder_lo,holder_hi,"
    "astala_lo,astala_hi,sign_mismatch,status"
)


def cmd_sweep(cfg: ExperimentConfig, out: str, threads: int, seed: int) -> int:
    lams = np.linspace(cfg.lambda_min, cfg.lambda_max, cfg.lambda_count)
    lines = [f"# {line}" for line in config_comment_lines(cfg)]
    lines.append(_SWEEP_COLUMNS)
    prev: tuple[float, float] | None = None  # (multiplier, box dim) of last good row
    for lam in lams:
        lam = float(lam)
        try:
            fp = find_attracting_fixed_point(lam, cfg.m, cfg.p, cfg.eta)
            family = MapFamily(tag="FLambda", lam=lam, m=cfg.m, p=cfg.p, eta=cfg.eta)
            raster = render(
                cfg.to_grid(),
                family,
                fp,
                threads=threads,
                guard_modulus=cfg.guard_modulus,
                guard_exit_limit=cfg.guard_exits,
            )
            est = box_counting(raster, cfg.box_scale_list())
            if prev is None:
                K = math.nan
                hol = (math.nan, math.nan)
                ast = (math.nan, math.nan)
                mismatch = 0
            else:
                K = qc_dilatation(fp.multiplier, prev[0])
                hol = continuity_envelope(prev[1], K, "holder")
                ast = continuity_envelope(prev[1], K, "astala")
                mismatch = int(multiplier_sign_mismatch(fp.multiplier, prev[0]))
            fields = [
                _fmt(lam),
                _fmt(fp.location),
                _fmt(fp.multiplier),
                _fmt(est.value),
                _fmt(est.uncertainty[0]),
                _fmt(est.uncertainty[1]),
                _fmt(K),
                _fmt(hol[0]),
                _fmt(hol[1]),
                _fmt(ast[0]),
                _fmt(ast[1]),
                str(mismatch),
                "ok",
            ]
            prev = (fp.multiplier, est.value)
        except _COMMAND_ERRORS as exc:
            fields = [_fmt(lam)] + ["nan"] * 10 + ["0", f"failed: {_sanitize(str(exc))}"]
        lines.append(",".join(fields))
    path = out or cfg.out or "sweep.csv"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    sys.stdout.write(f"sweep: wrote {path} rows={len(lams)}\n")
    return 0


def _estimate_rows_csv(cfg: ExperimentConfig, rows: list[tuple[str, float, float, float, str]]) -> str:
    lines = [f"# {line}" for line in config_comment_lines(cfg)]
    lines.append("method,value,lo,hi,detail")
    for method, value, lo, hi, detail in rows:
        lines.append(f"{method},{_fmt(value)},{_fmt(lo)},{_fmt(hi)},{_sanitize(detail)}")
    return "\n".join(lines) + "\n"


def cmd_dim_lower(cfg: ExperimentConfig, out: str, threads: int, seed: int) -> int:
    family = cfg.to_family()
    q = family.pole_multiplicity
    rows: list[tuple[str, float, float, float, str]] = []
    if cfg.bowen_mode == "synthetic":
        for n in (int(x) for x in cfg.bowen_table.split(",") if x.strip()):
            t = solve_bowen(synthetic_lattice_branches(n, q=q))
            rows.append(("bowen_lower_synthetic", t, t, 2.0, f"N={n};q={q}"))
    else:
        base = cfg.branch_base_index if cfg.branch_base_index > 0 else None
        branch_set = estimate_branch_contractions(
            family,
            base,
            cfg.branch_count,
            cfg.branch_r0,
            cfg.branch_r1,
            boundary_samples=cfg.branch_samples,
        )
        n = len(branch_set.branches)
        for count in sorted({max(2, n // 4), max(2, n // 2), n}):
            sub = IFSBranchSet(branch_set.branches[:count], branch_set.base_index)
            t = solve_bowen(sub)
            rows.append(
                (
                    "bowen_lower",
                    t,
                    t,
                    2.0,
                    f"branches={count};base={branch_set.base_index};rejected={len(branch_set.rejected)}",
                )
            )
    fl = formula_lower(q)
    rows.append(("formula_lower", fl, fl, 2.0, f"q={q}"))
    path = out or cfg.out or "dim_lower.csv"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(_estimate_rows_csv(cfg, rows))
    sys.stdout.write(f"dim-lower: wrote {path} rows={len(rows)}\n")
    return 0


def _pole_density_exponent(moduli: np.ndarray) -> float:
    """Slope of log pole-count against log radius over the enumerated range."""
    from scipy.stats import linregress

    moduli = np.sort(moduli)
    radii = np.geomspace(moduli[0] * 2.0, moduli[-1], 8)
    counts = np.searchsorted(moduli, radii, side="right")
    fit = linregress(np.log(radii), np.log(counts))
    return max(0.0, float(fit.slope))


def cmd_dim_upper(cfg: ExperimentConfig, out: str, threads: int, seed: int) -> int:
    family = cfg.to_family()
    poles = enumerate_poles(family, cfg.series_radius)
    est = series_exponent(poles, t_hi=cfg.series_t_hi)
    rows = [
        (
            "series_upper",
            est.value,
            est.uncertainty[0],
            est.uncertainty[1],
            f"poles={len(poles)};multiplicity={est.metadata['multiplicity']};radius={cfg.series_radius:g}",
        )
    ]
    moduli = np.array([abs(p.location) for p in poles])
    rho = _pole_density_exponent(moduli)
    q = family.pole_multiplicity
    fu = formula_upper(q, rho)
    rows.append(("formula_upper", fu, 0.0, fu, f"M={q};rho={rho:.6g}"))
    sorted_moduli = np.sort(moduli)
    fit_hi = min(cfg.pole_radius, float(sorted_moduli[-1]))
    fit_lo = 2.0 * float(sorted_moduli[0])
    if fit_hi > fit_lo * 1.5:
        from scipy.stats import linregress

        radii = np.geomspace(fit_lo, fit_hi, 10)
        counts = np.searchsorted(sorted_moduli, radii, side="right").astype(float)
        fit = linregress(np.log(radii), counts)
        se = 2.0 * float(fit.stderr)
        rows.append(
            (
                "pole_count_per_log_radius",
                float(fit.slope),
                float(fit.slope) - se,
                float(fit.slope) + se,
                f"r_max={fit_hi:g};r_squared={fit.rvalue ** 2:.6g}",
            )
        )
    path = out or cfg.out or "dim_upper.csv"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(_estimate_rows_csv(cfg, rows))
    sys.stdout.write(f"dim-upper: wrote {path} rows={len(rows)}\n")
    return 0


_COMMANDS = {
    "verify": cmd_verify,
    "render": cmd_render,
    "sweep": cmd_sweep,
    "dim-lower": cmd_dim_lower,
    "dim-upper": cmd_dim_upper,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="speiserdim",
        description="Julia set dimension toolkit for a lattice-built family of "
        "finite-singular-value meromorphic maps",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("verify", "run the built-in invariant suite and report pass/fail lines"),
        ("render", "rasterize Fatou/Julia classification to a PGM image"),
        ("sweep", "per-lambda fixed point, multiplier, box dimension and envelopes (CSV)"),
        ("dim-lower", "contraction-system lower bound via the pressure equation (CSV)"),
        ("dim-upper", "pole-series exponent and closed-form upper bound (CSV)"),
    ):
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("--config", metavar="PATH", help="key = value config file")
        sp.add_argument("--out", metavar="PATH", help="output file path")
        sp.add_argument("--threads", type=int, default=None, help="worker threads (0 = auto)")
        sp.add_argument("--seed", type=int, default=None, help="seed for randomized checks")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        cfg = load_config(args.config) if args.config else validate_config(ExperimentConfig())
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    threads = args.threads if args.threads is not None else cfg.threads
    seed = args.seed if args.seed is not None else cfg.seed
    out = args.out or ""
    try:
        return _COMMANDS[args.command](cfg, out, threads, seed)
    except _COMMAND_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
