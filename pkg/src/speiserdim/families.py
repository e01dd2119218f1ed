"""Families of finite-singular-value meromorphic maps built on the square lattice.

The base map is

    G(z) = (wp(z + i*pi/2) / e1)^2,

an even, pi-periodic elliptic function with critical values {0, 1, infinity}:
its zeros and poles have multiplicity 4 and its 1-points multiplicity 2.
Derived families, selected by the `tag` of a MapFamily:

    G        the base map itself
    FMax     i * G(pi*z/2); critical values {0, i, infinity}
    H        eta * G(z)^p; critical values {0, eta, infinity}
    Hm       H(m * arcsin(z/m)) with m odd; merges the strip picture of H
             with polynomial-like pole sparsity (pole moduli grow
             exponentially), zeros at +-m of multiplicity 2p
    FLambda  Hm(lam * z) for lam in (0, 1]

arcsin uses the principal branch, cuts on (-inf, -1] and [1, inf) scaled
by m; on-cut values are the limit from the upper half-plane.  For odd m the
two branch choices w and pi*m - w give equal values (H is even and
pi-periodic), so the composition is single-valued.

Every public evaluation is normalized before computing: arguments in the
lower half-plane evaluate via the conjugate symmetry f(conj z) = conj f(z)
(for FMax: f(conj z) = -conj f(z)), arguments in the left half-plane via
evenness.  This makes the symmetries bitwise-exact, which downstream
classification invariants rely on.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from io import StringIO

import numpy as np

from .elliptic import PI, square_lattice, _wp_array, _wp_prime_array
from .sphere import INFINITY, ExtendedComplex

TAGS = ("G", "FMax", "H", "Hm", "FLambda")

# coordinates beyond this cannot be enumerated without double overflow headroom
_RADIUS_LIMIT = 1e306
# refuse pole enumerations that would materialize absurdly many entries
_COUNT_LIMIT = 3_000_000


class PoleRangeError(ValueError):
    """Requested pole-enumeration radius exceeds representable coordinates."""


@dataclass(frozen=True)
class MapFamily:
    """Tagged, immutable description of one member of the map families above.

    Only the parameters the tag uses are validated; the others keep their
    defaults and are ignored.
    """

    tag: str
    p: int = 1
    eta: float = 0.3
    m: int = 9
    lam: float = 1.0

    def __post_init__(self) -> None:
        if self.tag not in TAGS:
            raise ValueError(f"unknown family tag {self.tag!r}; expected one of {TAGS}")
        if self.tag in ("H", "Hm", "FLambda"):
            if int(self.p) != self.p or self.p < 1:
                raise ValueError("p must be a positive integer")
            if not 0.0 < self.eta < PI / 2:
                raise ValueError("eta must lie strictly inside (0, pi/2)")
        if self.tag in ("Hm", "FLambda"):
            if int(self.m) != self.m or self.m < 1 or self.m % 2 == 0:
                raise ValueError(
                    "m must be an odd positive integer; the arcsin composition "
                    "is single-valued only for odd m"
                )
        if self.tag == "FLambda":
            if not 0.0 < self.lam <= 1.0:
                raise ValueError("lam must lie in (0, 1]")

    @property
    def pole_multiplicity(self) -> int:
        return 4 if self.tag in ("G", "FMax") else 4 * self.p


def _finite(values: np.ndarray) -> np.ndarray:
    return np.isfinite(values.real) & np.isfinite(values.imag)


def eval_family_array(family: MapFamily, z) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized evaluation.

    Returns (values, pole_mask); entries under pole_mask are meaningless
    placeholders and stand for the point at infinity.  Values that overflow
    double precision are also folded into pole_mask (they only arise inside
    pole neighbourhoods).
    """
    z = np.asarray(z, dtype=complex)
    lat = square_lattice()
    tag = family.tag

    if tag == "FMax":
        zn = np.where(np.signbit(z.real), -z, z)
        conj_mask = np.signbit(zn.imag)
        zn = np.where(conj_mask, np.conj(zn), zn)
        v, pole = _wp_array(PI * zn / 2.0 + 0.5j * PI)
        g = (v / lat.e1) ** 2
        out = 1j * g
        out = np.where(conj_mask, -np.conj(out), out)
        bad = ~_finite(out)
        return np.where(bad, 0.0, out), pole | bad

    # negation first: conjugating first could leave the negated point back
    # in the lower half-plane, splitting one symmetry orbit over two
    # representatives
    zn = np.where(np.signbit(z.real), -z, z)
    conj_mask = np.signbit(zn.imag)
    zn = np.where(conj_mask, np.conj(zn), zn)

    if tag in ("Hm", "FLambda"):
        scale = family.lam if tag == "FLambda" else 1.0
        u = scale * zn
        w = family.m * np.arcsin(u / family.m)
    else:
        w = zn

    v, pole = _wp_array(w + 0.5j * PI)
    g = (v / lat.e1) ** 2
    if tag == "G":
        out = g
    else:
        out = family.eta * g ** family.p
    out = np.where(conj_mask, np.conj(out), out)
    bad = ~_finite(out)
    return np.where(bad, 0.0, out), pole | bad


def eval_family(family: MapFamily, z: complex) -> ExtendedComplex:
    values, pole = eval_family_array(family, np.asarray(complex(z)))
    if bool(pole):
        return INFINITY
    return ExtendedComplex(complex(values[()]))


def eval_deriv_array(family: MapFamily, z) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized derivative via the chain rule through wp and wp'.

    Same (values, pole_mask) contract as eval_family_array.  The symmetry
    normalization conjugates or negates the output as required: the families
    are even, so their derivatives are odd.
    """
    z = np.asarray(z, dtype=complex)
    lat = square_lattice()
    tag = family.tag

    if tag == "FMax":
        neg = np.signbit(z.real)
        zn = np.where(neg, -z, z)
        conj_mask = np.signbit(zn.imag)
        zn = np.where(conj_mask, np.conj(zn), zn)
        w = PI * zn / 2.0 + 0.5j * PI
        v, p1 = _wp_array(w)
        vp, p2 = _wp_prime_array(w)
        dg = 2.0 * v * vp / (lat.e1 * lat.e1)
        out = 1j * (PI / 2.0) * dg
        out = np.where(neg, -out, out)
        out = np.where(conj_mask, -np.conj(out), out)
        pole = p1 | p2
        bad = ~_finite(out)
        return np.where(bad, 0.0, out), pole | bad

    neg = np.signbit(z.real)
    zn = np.where(neg, -z, z)
    conj_mask = np.signbit(zn.imag)
    zn = np.where(conj_mask, np.conj(zn), zn)

    if tag in ("Hm", "FLambda"):
        scale = family.lam if tag == "FLambda" else 1.0
        u = scale * zn
        w = family.m * np.arcsin(u / family.m)
        chain = scale / np.sqrt(1.0 - (u / family.m) ** 2)
    else:
        w = zn
        chain = np.asarray(1.0 + 0j)

    wa = w + 0.5j * PI
    v, p1 = _wp_array(wa)
    vp, p2 = _wp_prime_array(wa)
    dg = 2.0 * v * vp / (lat.e1 * lat.e1)
    if tag == "G":
        out = dg
    else:
        g = (v / lat.e1) ** 2
        out = family.eta * family.p * g ** (family.p - 1) * dg
    out = out * chain
    out = np.where(neg, -out, out)
    out = np.where(conj_mask, np.conj(out), out)
    pole = p1 | p2
    bad = ~_finite(out)
    return np.where(bad, 0.0, out), pole | bad


def eval_deriv(family: MapFamily, z: complex) -> ExtendedComplex:
    values, pole = eval_deriv_array(family, np.asarray(complex(z)))
    if bool(pole):
        return INFINITY
    return ExtendedComplex(complex(values[()]))


def eval_G(z: complex) -> ExtendedComplex:
    return eval_family(MapFamily(tag="G"), z)


def eval_fmax(z: complex) -> ExtendedComplex:
    return eval_family(MapFamily(tag="FMax"), z)


def eval_H(z: complex, p: int, eta: float) -> ExtendedComplex:
    return eval_family(MapFamily(tag="H", p=p, eta=eta), z)


def eval_hm(z: complex, m: int, p: int, eta: float) -> ExtendedComplex:
    return eval_family(MapFamily(tag="Hm", m=m, p=p, eta=eta), z)


def eval_flambda(z: complex, lam: float, m: int, p: int, eta: float) -> ExtendedComplex:
    return eval_family(MapFamily(tag="FLambda", lam=lam, m=m, p=p, eta=eta), z)


@dataclass(frozen=True)
class PoleData:
    """One pole: location a, multiplicity q, and |b| with f(z) ~ (b/(z-a))^q."""

    location: complex
    multiplicity: int
    coeff_magnitude: float


def _lattice_pole_locations(radius: float, step: float) -> list[complex]:
    """Points step*(k + i*(l + 1/2)) with modulus <= radius."""
    if radius / step > math.sqrt(_COUNT_LIMIT):
        raise PoleRangeError(
            f"radius {radius:g} would enumerate more than {_COUNT_LIMIT} poles"
        )
    out: list[complex] = []
    lmax = int(radius / step) + 1
    for l in range(-lmax, lmax + 1):
        y = step * (l + 0.5)
        if abs(y) > radius:
            continue
        kmax = int(math.sqrt(radius * radius - y * y) / step) + 1
        for k in range(-kmax, kmax + 1):
            a = complex(step * k, y)
            if abs(a) <= radius:
                out.append(a)
    return out


def _strip_pole_locations(radius: float, m: int) -> list[complex]:
    """Images m*sin(w/m) of the points w = pi*k + i*pi*(l + 1/2), |k| <= (m-1)/2.

    Only that strip of w-points is reachable by the principal arcsin, so these
    are exactly the poles of the arcsin-composed family.  Moduli grow like
    (m/2)*exp(pi*(l+1/2)/m), hence the explicit overflow guard on radius.
    """
    if radius > _RADIUS_LIMIT:
        raise PoleRangeError(
            f"radius {radius:g} exceeds {_RADIUS_LIMIT:g}; pole coordinates "
            "would overflow double precision"
        )
    out: list[complex] = []
    half = (m - 1) // 2
    l = 0
    while True:
        y = PI * (l + 0.5) / m
        if m * math.sinh(y) > radius:
            break
        for k in range(-half, half + 1):
            w = complex(PI * k, PI * (l + 0.5))
            a = m * complex(np.sin(np.asarray(w / m))[()])
            if abs(a) <= radius:
                out.append(a)
                out.append(a.conjugate())
        l += 1
        if len(out) > _COUNT_LIMIT:
            raise PoleRangeError("pole enumeration exceeded the entry limit")
    return out


_COEFF_SAMPLES = 16
_COEFF_ANGLE_OFFSET = 0.3711  # keeps samples off the axes and lattice directions


def coeff_magnitude(
    family: MapFamily, location: complex, multiplicity: int, radius: float | None = None
) -> float:
    """|b| from |f(z)| * |z - a|^q -> |b|^q sampled on a small circle about a."""
    locs = _batch_coeff_magnitudes(family, np.asarray([location]), multiplicity, radius)
    return float(locs[0])


def _batch_coeff_magnitudes(
    family: MapFamily,
    locations: np.ndarray,
    multiplicity: int,
    radius: float | None = None,
) -> np.ndarray:
    a = locations[:, None]
    r = radius if radius is not None else np.maximum(1e-3, np.abs(a) * 1e-4)
    theta = _COEFF_ANGLE_OFFSET + 2.0 * PI * np.arange(_COEFF_SAMPLES) / _COEFF_SAMPLES
    pts = a + r * np.exp(1j * theta)[None, :]
    values, pole = eval_family_array(family, pts)
    if pole.any():
        raise ArithmeticError("coefficient sampling circle touched a pole cutoff")
    logs = np.log(np.abs(values)) + multiplicity * np.log(np.abs(pts - a))
    return np.exp(logs.mean(axis=1) / multiplicity)


def enumerate_poles(family: MapFamily, radius: float) -> list[PoleData]:
    """All poles with |a| <= radius, sorted by modulus, |b| measured numerically."""
    if radius <= 0:
        raise ValueError("radius must be positive")
    tag = family.tag
    if tag in ("G", "H"):
        locations = _lattice_pole_locations(radius, PI)
    elif tag == "FMax":
        locations = _lattice_pole_locations(radius, 2.0)
    elif tag == "Hm":
        locations = _strip_pole_locations(radius, family.m)
    else:
        if radius > _RADIUS_LIMIT * family.lam:
            raise PoleRangeError(
                f"radius {radius:g} exceeds the representable pole range at lam={family.lam:g}"
            )
        locations = [a / family.lam for a in _strip_pole_locations(radius * family.lam, family.m)]
    locations.sort(key=lambda a: (abs(a), a.real, a.imag))
    if not locations:
        return []
    q = family.pole_multiplicity
    mags = _batch_coeff_magnitudes(family, np.asarray(locations), q)
    return [
        PoleData(location=a, multiplicity=q, coeff_magnitude=float(b))
        for a, b in zip(locations, mags)
    ]


def nearest_pole(family: MapFamily) -> PoleData:
    """The pole of smallest modulus (upper half-plane representative)."""
    tag = family.tag
    if tag in ("G", "H"):
        a = 0.5j * PI
    elif tag == "FMax":
        a = 1j
    else:
        a = 1j * family.m * math.sinh(PI / (2.0 * family.m))
        if tag == "FLambda":
            a = a / family.lam
    q = family.pole_multiplicity
    return PoleData(location=a, multiplicity=q, coeff_magnitude=coeff_magnitude(family, a, q))


_EXP_RADII = np.logspace(-3.4, -2.4, 9)
_EXP_ANGLES = np.exp(1j * (0.2183 + 2.0 * PI * np.arange(8) / 8))


def local_exponent(family: MapFamily, z0: complex, kind: str, value: complex = 0.0) -> float:
    """Multiplicity estimate at z0 by log-log regression over a decade of radii.

    kind selects the measured quantity: "zero" and "value" fit
    log|f - target| against log|z - z0| (target 0 or the given value),
    "pole" fits log|f| and negates the slope.  Returns NaN when the fit is
    not credible (residual slope error above 0.02), the inconclusive marker.
    """
    from scipy.stats import linregress

    if kind not in ("zero", "pole", "value"):
        raise ValueError("kind must be 'zero', 'pole' or 'value'")
    target = 0.0 if kind in ("zero", "pole") else complex(value)
    pts = complex(z0) + _EXP_RADII[:, None] * _EXP_ANGLES[None, :]
    values, pole = eval_family_array(family, pts)
    if pole.any():
        return math.nan
    if kind == "pole":
        mags = np.abs(values)
    else:
        mags = np.abs(values - target)
    if (mags == 0.0).any():
        return math.nan
    y = np.log(mags).mean(axis=1)
    fit = linregress(np.log(_EXP_RADII), y)
    if not math.isfinite(fit.slope) or fit.stderr > 0.02:
        return math.nan
    return -fit.slope if kind == "pole" else fit.slope


def second_derivative_floor(
    p: int = 1,
    eta: float = 0.3,
    radial_samples: int = 32,
    angular_samples: int = 64,
) -> tuple[float, complex]:
    """Minimum of |H''| over the punctured disk 0 < |z| <= eta, with its argmin.

    The fixed-point construction needs the second derivative of the
    eta-scaled power family to stay away from zero on this disk.  No
    closed-form bound on eta is known, so candidate parameters are vetted
    by a numerical scan; by the evenness and conjugation symmetries only
    the closed first quadrant needs sampling.  The second derivative comes
    from a central difference of the analytic first derivative.
    """
    family = MapFamily(tag="H", p=p, eta=eta)
    radii = np.linspace(eta / radial_samples, eta, radial_samples)
    angles = np.exp(1j * np.linspace(0.0, PI / 2.0, angular_samples))
    pts = radii[:, None] * angles[None, :]
    h = 1e-6
    hi, p1 = eval_deriv_array(family, pts + h)
    lo, p2 = eval_deriv_array(family, pts - h)
    second = np.abs(hi - lo) / (2.0 * h)
    second[p1 | p2] = np.inf
    flat = int(np.argmin(second))
    return float(second.ravel()[flat]), complex(pts.ravel()[flat])


def poles_to_csv(poles: list[PoleData], comments: list[str] | None = None) -> str:
    """CSV text with columns re(a), im(a), multiplicity, |b| at 17 significant digits."""
    buf = StringIO()
    for line in comments or []:
        buf.write(f"# {line}\n")
    buf.write("re_a,im_a,multiplicity,coeff_magnitude\n")
    for pd in poles:
        buf.write(
            "%.17g,%.17g,%d,%.17g\n"
            % (pd.location.real, pd.location.imag, pd.multiplicity, pd.coeff_magnitude)
        )
    return buf.getvalue()
