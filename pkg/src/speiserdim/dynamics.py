"""Orbit dynamics: attracting fixed points, Fatou/Julia classification, rasters.

Classification semantics.  A point is Fatou(k) when its orbit first enters
the disk of radius `attraction_tol` around the attracting fixed point at
step k.  It is Julia when the orbit lands within the pole cutoff of a pole
(the value is the point at infinity) or when it exceeds the huge-modulus
guard repeatedly: every guard exit means the orbit just visited a small
neighbourhood of some pole, and an orbit that keeps doing so without being
attracted is treated as Julia once `guard_exit_limit` exits accumulate.
Orbits that survive `max_iterations` steps without a verdict are
Undetermined; they are counted and reported, never dropped.

The raster target set for dimension estimates is Julia plus Undetermined,
i.e. everything not observed to be attracted.

When no attracting fixed point is supplied, rendering falls back to an
attracting-cycle sweep: a pixel counts as attracted when its orbit revisits
one of its last `cycle_periods` values within tolerance for several
consecutive steps.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from io import StringIO

import numpy as np
from scipy.optimize import brentq

from .families import MapFamily, eval_deriv, eval_family, eval_family_array

CODE_JULIA = -1
CODE_UNDETERMINED = -2

DEFAULT_GUARD_MODULUS = 1e12
DEFAULT_GUARD_EXITS = 3

_CYCLE_STABLE_STEPS = 5


class NoAttractingFixedPointError(RuntimeError):
    """No sign change of f(x) - x was found on the scanned interval."""


class LinearizationDomainError(RuntimeError):
    """Koenigs iteration failed: the orbit left the linearization domain."""


@dataclass(frozen=True)
class FixedPointData:
    """Attracting fixed point on the real axis with its multiplier."""

    location: float
    multiplier: float
    lam: float


@dataclass(frozen=True)
class GridSpec:
    """Square pixel grid: center, half-width, resolution and orbit budget."""

    center: complex = 0j
    half_width: float = 2.0
    resolution: int = 512
    max_iterations: int = 500
    attraction_tol: float = 1e-6

    def __post_init__(self) -> None:
        if self.resolution < 2:
            raise ValueError("resolution must be at least 2")
        if self.half_width <= 0:
            raise ValueError("half_width must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be positive")
        if self.attraction_tol <= 0:
            raise ValueError("attraction_tol must be positive")

    def pixel_centers(self) -> np.ndarray:
        xs = np.linspace(self.center.real - self.half_width, self.center.real + self.half_width, self.resolution)
        ys = np.linspace(self.center.imag + self.half_width, self.center.imag - self.half_width, self.resolution)
        return xs[None, :] + 1j * ys[:, None]


def find_attracting_fixed_point(lam: float, m: int, p: int, eta: float) -> FixedPointData:
    """Root of f(x) = x on (0, eta) by bracketing, with its multiplier.

    f(0) = eta > 0 guarantees the left bracket; if f(x) - x never changes
    sign on the interval the search fails loudly with the scanned range.
    """
    family = MapFamily(tag="FLambda", lam=lam, m=m, p=p, eta=eta)

    def gap(x: float) -> float:
        v = eval_family(family, complex(x))
        if v.at_infinity:
            raise NoAttractingFixedPointError(f"map is infinite at x={x!r} inside the scan interval")
        return v.value.real - x

    lo, hi = 1e-12, eta * (1.0 - 1e-12)
    a, b = lo, hi
    if gap(a) * gap(b) > 0:
        # walk a grid for a bracket before giving up
        xs = np.linspace(lo, hi, 65)
        vals = [gap(float(x)) for x in xs]
        bracket = None
        for i in range(len(xs) - 1):
            if vals[i] * vals[i + 1] <= 0:
                bracket = (float(xs[i]), float(xs[i + 1]))
                break
        if bracket is None:
            raise NoAttractingFixedPointError(
                f"no attracting fixed point found: f(x) - x has no sign change on ({lo:g}, {hi:g})"
            )
        a, b = bracket
    root = float(brentq(gap, a, b, xtol=1e-15, rtol=8.9e-16))
    deriv = eval_deriv(family, complex(root))
    if deriv.at_infinity:
        raise NoAttractingFixedPointError(f"derivative is infinite at the fixed point {root!r}")
    mult = deriv.value.real
    if not abs(mult) < 1.0:
        raise NoAttractingFixedPointError(
            f"fixed point {root!r} is not attracting: multiplier {mult!r}"
        )
    return FixedPointData(location=root, multiplier=mult, lam=lam)


def _iterate_block(
    points: np.ndarray,
    family: MapFamily,
    fp: FixedPointData | None,
    max_iterations: int,
    tol: float,
    guard_modulus: float,
    guard_exit_limit: int,
    cycle_periods: int,
) -> np.ndarray:
    """Classify a flat array of starting points; returns int32 codes."""
    cur = np.array(points, dtype=complex).ravel()
    n = cur.size
    codes = np.full(n, CODE_UNDETERMINED, dtype=np.int32)
    alive = np.ones(n, dtype=bool)
    guards = np.zeros(n, dtype=np.int16)

    if fp is not None:
        att0 = np.abs(cur - fp.location) < tol
        codes[att0] = 0
        alive &= ~att0
        hist = stable = None
    else:
        hist = [np.full(n, np.inf + 0j) for _ in range(cycle_periods)]
        stable = np.zeros(n, dtype=np.int16)

    for step in range(1, max_iterations + 1):
        idx = np.flatnonzero(alive)
        if idx.size == 0:
            break
        vals, pole = eval_family_array(family, cur[idx])
        hit = idx[pole]
        codes[hit] = CODE_JULIA
        alive[hit] = False
        live = idx[~pole]
        v = vals[~pole]
        if hist is not None:
            prev = cur[live]
        cur[live] = v

        if fp is not None:
            att = np.abs(v - fp.location) < tol
            done = live[att]
            codes[done] = step
            alive[done] = False
            live = live[~att]
            v = v[~att]
        else:
            # rotate per-point history, then look for a revisit of period <= cycle_periods
            for j in range(cycle_periods - 1, 0, -1):
                hist[j][live] = hist[j - 1][live]
            hist[0][live] = prev
            near = np.zeros(live.size, dtype=bool)
            for j in range(cycle_periods):
                near |= np.abs(v - hist[j][live]) < tol
            stable[live] = np.where(near, stable[live] + 1, 0)
            att = stable[live] >= _CYCLE_STABLE_STEPS
            done = live[att]
            codes[done] = step
            alive[done] = False
            live = live[~att]
            v = v[~att]

        big = np.abs(v) > guard_modulus
        bidx = live[big]
        guards[bidx] += 1
        dead = bidx[guards[bidx] >= guard_exit_limit]
        codes[dead] = CODE_JULIA
        alive[dead] = False
    return codes


def classify_point(
    z: complex,
    family: MapFamily,
    fp: FixedPointData,
    max_iterations: int = 500,
    tol: float = 1e-6,
    guard_modulus: float = DEFAULT_GUARD_MODULUS,
    guard_exit_limit: int = DEFAULT_GUARD_EXITS,
) -> int:
    """Code for one point: attraction step k >= 0, CODE_JULIA, or CODE_UNDETERMINED."""
    codes = _iterate_block(
        np.asarray([complex(z)]), family, fp, max_iterations, tol, guard_modulus, guard_exit_limit, 3
    )
    return int(codes[0])


@dataclass(frozen=True)
class RasterResult:
    """Per-pixel classification codes for a grid, plus export helpers."""

    grid: GridSpec
    family: MapFamily
    codes: np.ndarray

    @property
    def attracted_fraction(self) -> float:
        return float(np.mean(self.codes >= 0))

    @property
    def julia_fraction(self) -> float:
        return float(np.mean(self.codes == CODE_JULIA))

    @property
    def undetermined_fraction(self) -> float:
        return float(np.mean(self.codes == CODE_UNDETERMINED))

    def target_mask(self) -> np.ndarray:
        """Pixels kept for dimension estimates: everything not attracted."""
        return self.codes < 0

    def to_pgm(self, comments: list[str] | None = None) -> bytes:
        """Binary PGM; attracted pixels shaded by step (1..254), Julia 0, Undetermined 255."""
        n = self.grid.resolution
        span = max(self.grid.max_iterations, 1)
        shade = 1 + (self.codes.astype(np.int64) * 253) // (span + 1)
        img = np.where(self.codes == CODE_JULIA, 0, np.where(self.codes == CODE_UNDETERMINED, 255, shade))
        header = StringIO()
        header.write("P5\n")
        for line in comments or []:
            header.write(f"# {line}\n")
        header.write(f"{n} {n}\n255\n")
        return header.getvalue().encode("ascii") + img.astype(np.uint8).tobytes()

    def to_csv(self, comments: list[str] | None = None) -> str:
        """Matrix of class codes, one raster row per line; -1 Julia, -2 Undetermined."""
        buf = StringIO()
        for line in comments or []:
            buf.write(f"# {line}\n")
        buf.write("# codes: k>=0 attraction step, -1 julia, -2 undetermined\n")
        for row in self.codes:
            buf.write(",".join(str(int(c)) for c in row))
            buf.write("\n")
        return buf.getvalue()


def render(
    grid: GridSpec,
    family: MapFamily,
    fp: FixedPointData | None,
    threads: int = 0,
    guard_modulus: float = DEFAULT_GUARD_MODULUS,
    guard_exit_limit: int = DEFAULT_GUARD_EXITS,
    cycle_periods: int = 3,
) -> RasterResult:
    """Classify every pixel center; deterministic for any thread count.

    Pixels are independent, so the raster is split into fixed row blocks and
    merged by index; scheduling cannot change the result.
    """
    pts = grid.pixel_centers()
    n = grid.resolution
    rows_per_block = 16
    blocks = [(r, min(r + rows_per_block, n)) for r in range(0, n, rows_per_block)]

    def work(span):
        r0, r1 = span
        return _iterate_block(
            pts[r0:r1],
            family,
            fp,
            grid.max_iterations,
            grid.attraction_tol,
            guard_modulus,
            guard_exit_limit,
            cycle_periods,
        ).reshape(r1 - r0, n)

    workers = threads if threads > 0 else (os.cpu_count() or 1)
    codes = np.empty((n, n), dtype=np.int32)
    if workers == 1 or len(blocks) == 1:
        for span in blocks:
            codes[span[0]:span[1]] = work(span)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for span, block in zip(blocks, pool.map(work, blocks)):
                codes[span[0]:span[1]] = block
    return RasterResult(grid=grid, family=family, codes=codes)


def koenigs_value(
    family: MapFamily,
    fp: FixedPointData,
    z: complex,
    tol: float = 1e-10,
    max_steps: int = 400,
) -> complex:
    """Limit of multiplier^(-n) * (f^n(z) - fixed point).

    Successive values first converge at the multiplier's rate, then float
    noise (amplified like |multiplier|^-n) takes over; the iteration stops at
    the first difference below tol or at the noise floor, whichever comes
    first, and fails loudly if neither happens.
    """
    zeta = fp.location
    mult = fp.multiplier
    if not 0.0 < abs(mult) < 1.0:
        raise LinearizationDomainError(f"multiplier {mult!r} admits no Koenigs coordinate")
    cur = complex(z)
    power = 1.0
    prev = cur - zeta
    best = math.inf
    best_val = prev
    grew = 0
    for _ in range(max_steps):
        v = eval_family(family, cur)
        if v.at_infinity:
            raise LinearizationDomainError("orbit hit a pole before the Koenigs limit converged")
        cur = v.value
        power *= mult
        val = (cur - zeta) / power
        diff = abs(val - prev)
        prev = val
        if diff < best:
            best = diff
            best_val = val
            grew = 0
        else:
            grew += 1
        if diff < tol:
            return val
        if grew >= 5:
            if best < 1e-6:
                return best_val
            raise LinearizationDomainError(
                f"Koenigs iteration diverged; best successive difference {best:g}"
            )
    if best < 1e-6:
        return best_val
    raise LinearizationDomainError("Koenigs iteration exhausted its step budget")


def koenigs_check(family: MapFamily, fp: FixedPointData, z: complex) -> float:
    """Residual |g(f(z)) - multiplier * g(z)| of the linearization equation."""
    gz = koenigs_value(family, fp, z)
    fz = eval_family(family, z)
    if fz.at_infinity:
        raise LinearizationDomainError("z maps to a pole; no linearization residual")
    gfz = koenigs_value(family, fp, fz.value)
    return abs(gfz - fp.multiplier * gz)
