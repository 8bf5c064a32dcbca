"""Characteristic polynomials of cutting-time recursions and their roots.

The recursions S_k = S_{k-1} + S_{k-d} are driven by lambda^d - lambda^{d-1} - 1.
Whether fp(rho S_k) decays geometrically (rho the leading root, fp the signed
distance to the nearest integer) is governed by the non-leading modes of the
*full* recursion polynomial, not the minimal polynomial of rho: the quintic
d = 5 factors as (lambda^2 - lambda + 1)(lambda^3 - lambda - 1) and its pair
of unit-modulus roots blocks the decay even though the leading root taken by
itself generates a Pisot field.  Hence "Pisot-driven" below tests the full
polynomial.

Rho * S_k suffers catastrophic cancellation for large k, so fractional parts
are always evaluated with a mantissa of at least bit_length(S_k) + 64 bits
and re-checked at doubled precision; disagreement beyond 2^-20 raises, it is
never absorbed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath as mp

from .errors import InputError, PrecisionError
from .kneading import KneadingData

__all__ = [
    "poly_mul",
    "poly_divmod",
    "poly_eval",
    "recursion_poly",
    "PolyRoot",
    "leading_root",
    "Recurrence",
    "analyze_recurrence",
    "PisotReport",
    "is_pisot_driven",
    "fp",
    "fp_of_multiple",
    "DecayReport",
    "decay_diagnostics",
]


# ---------------------------------------------------------------------------
# exact integer polynomials, descending coefficients

def poly_mul(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        for j, bj in enumerate(b):
            out[i + j] += ai * bj
    return out


def poly_divmod(a, b):
    """Exact division of integer polynomials; quotient must stay integral."""
    a = list(a)
    if not b or b[0] == 0:
        raise InputError("division by zero polynomial")
    q = [0] * max(len(a) - len(b) + 1, 0)
    for i in range(len(q)):
        c, r = divmod(a[i], b[0])
        if r:
            raise InputError("non-integral quotient in polynomial division")
        q[i] = c
        for j, bj in enumerate(b):
            a[i + j] -= c * bj
    rem = a[len(q):]
    while rem and rem[0] == 0:
        rem = rem[1:]
    return q, rem


def poly_eval(coeffs, x):
    acc = x * 0  # matches the arithmetic type of x
    for c in coeffs:
        acc = acc * x + c
    return acc


def recursion_poly(d: int):
    """lambda^d - lambda^{d-1} - 1 for the recursion S_k = S_{k-1} + S_{k-d}."""
    if d < 2:
        raise InputError(f"recursion degree must be >= 2, got {d}")
    return [1, -1] + [0] * (d - 2) + [-1]


# ---------------------------------------------------------------------------
# certified real-root enclosures by exact bisection

@dataclass(frozen=True)
class PolyRoot:
    """A real root of an integer polynomial, bracketed by exact rationals.

    The polynomial has a single sign change on [lo, hi], so refinement by
    bisection with exact Fraction arithmetic is rigorous.
    """

    coeffs: tuple[int, ...]
    lo: Fraction
    hi: Fraction

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def refined(self, tol) -> "PolyRoot":
        lo, hi = self.lo, self.hi
        s_lo = _sign(poly_eval(self.coeffs, lo))
        tol = Fraction(tol) if not isinstance(tol, Fraction) else tol
        while hi - lo > tol:
            mid = (lo + hi) / 2
            s = _sign(poly_eval(self.coeffs, mid))
            if s == 0:
                lo = hi = mid  # exact rational root
                break
            if s == s_lo:
                lo = mid
            else:
                hi = mid
        return PolyRoot(self.coeffs, lo, hi)

    def to_mpf(self, prec: int):
        """Midpoint at `prec` mantissa bits, enclosure refined to match."""
        r = self.refined(Fraction(1, 2 ** (prec + 8)))
        with mp.workprec(prec):
            return mp.mpf(r.mid.numerator) / r.mid.denominator

    def __float__(self):
        return float(self.refined(Fraction(1, 2 ** 60)).mid)


def _sign(x):
    return (x > 0) - (x < 0)


def leading_root(d: int, tol: float = 1e-12) -> PolyRoot:
    """The unique real root > 1 of lambda^d - lambda^{d-1} - 1, width <= tol.

    The polynomial is strictly increasing on [1, 2] with a sign change, so
    bisection is a proof.
    """
    coeffs = tuple(recursion_poly(d))
    root = PolyRoot(coeffs, Fraction(1), Fraction(2))
    return root.refined(Fraction(tol))


# ---------------------------------------------------------------------------
# full root portraits with certified radii

@dataclass(frozen=True)
class Recurrence:
    """A cutting-time recursion: polynomial, leading root, conjugate moduli.

    ``conjugate_moduli`` holds (modulus, radius) pairs: each disk
    |z - z_i| <= radius_i around the computed root contains exactly one true
    root (disks are pairwise disjoint and each is certified to contain at
    least one root by the product bound min_i |z - w_i| <= (|p(z)|/|lc|)^(1/n)).
    """

    coeffs: tuple[int, ...]
    leading: PolyRoot
    conjugate_moduli: tuple[tuple[float, float], ...]


def _certified_roots(coeffs, prec):
    n = len(coeffs) - 1
    with mp.workprec(prec):
        roots = mp.polyroots([mp.mpf(c) for c in coeffs], maxsteps=200,
                             extraprec=prec)
        lc = abs(coeffs[0])
        out = []
        for z in roots:
            with mp.workprec(2 * prec):
                resid = abs(poly_eval(coeffs, mp.mpc(z)))
            rad = mp.mpf(2) * (resid / lc) ** (mp.mpf(1) / n)
            out.append((mp.mpc(z), rad))
        # disjointness certifies the root-to-disk bijection
        for i in range(len(out)):
            for j in range(i + 1, len(out)):
                if abs(out[i][0] - out[j][0]) <= out[i][1] + out[j][1]:
                    return None
        return out


def analyze_recurrence(coeffs, tol: float = 1e-25) -> Recurrence:
    """Certified root portrait of an integer recursion polynomial."""
    coeffs = tuple(int(c) for c in coeffs)
    for prec in (120, 300, 800, 2000):
        certified = _certified_roots(coeffs, prec)
        if certified is None:
            continue
        if all(float(r) <= tol for _, r in certified):
            break
    else:
        raise PrecisionError(
            f"could not certify roots of {coeffs} to radius {tol}"
        )
    # leading root: the real one of largest modulus, > 1
    real_cands = [z for z, _ in certified if abs(z.imag) < 1e-10 and z.real > 1]
    if not real_cands:
        raise InputError(f"{coeffs} has no real root > 1")
    lead = max(c.real for c in real_cands)
    lead_encl = _bracket_real_root(coeffs, lead)
    conj = tuple(
        (float(abs(z)), float(r))
        for z, r in certified
        if abs(z - lead) > 1e-9
    )
    return Recurrence(coeffs, lead_encl, conj)


def _bracket_real_root(coeffs, approx):
    x = Fraction(float(approx)).limit_denominator(10 ** 12)
    for w in (Fraction(1, 10 ** 6), Fraction(1, 10 ** 3), Fraction(1, 10)):
        lo, hi = x - w, x + w
        if _sign(poly_eval(coeffs, lo)) * _sign(poly_eval(coeffs, hi)) < 0:
            return PolyRoot(tuple(coeffs), lo, hi).refined(Fraction(1, 10 ** 30))
    raise PrecisionError(f"failed to bracket real root near {float(approx)}")


@dataclass(frozen=True)
class PisotReport:
    pisot: bool
    leading: float
    moduli: tuple[tuple[float, float], ...]
    margin: float

    def __str__(self):
        mods = ", ".join(f"{m:.6f}(+-{r:.1e})" for m, r in self.moduli)
        return (f"{'pisot-driven' if self.pisot else 'not-pisot-driven'} "
                f"leading={self.leading:.10f} conjugates=[{mods}]")


def is_pisot_driven(coeffs, margin: float = 1e-9, tol: float = 1e-25) -> PisotReport:
    """All non-leading roots strictly inside the unit disk, with margin.

    This tests the recursion's full polynomial (see module docstring); the
    report lists every conjugate modulus with its certified radius.
    """
    rec = analyze_recurrence(coeffs, tol)
    ok = True
    for m, r in rec.conjugate_moduli:
        if r >= margin / 2:
            raise PrecisionError(
                f"enclosure radius {r} too wide for margin {margin}"
            )
        if m + r >= 1 - margin:
            ok = False
    return PisotReport(ok, float(rec.leading), rec.conjugate_moduli, margin)


# ---------------------------------------------------------------------------
# signed distance to the nearest integer

def fp(x):
    """x - round(x), valued in [-1/2, 1/2); the half-integer tie maps to -1/2."""
    if isinstance(x, mp.mpf):
        return x - mp.floor(x + mp.mpf(1) / 2)
    return x - math.floor(x + 0.5)


def fp_of_multiple(root, s: int, guard_bits: int = 64):
    """fp(rho * s) for a huge integer s, with a doubled-precision cross-check.

    ``root`` is a PolyRoot (refined internally to whatever precision the
    magnitude of s demands) or a number that is treated as exact.  The check
    compares the working-precision value against one at twice the precision;
    disagreement beyond 2^-20 raises.  For large s always pass a PolyRoot: a
    fixed-precision value of rho cannot be sharpened after the fact.
    """
    need = int(s).bit_length() + guard_bits
    vals = []
    for prec in (need, 2 * need):
        with mp.workprec(prec):
            if isinstance(root, PolyRoot):
                r = root.to_mpf(prec)
            else:
                r = mp.mpf(root)
            vals.append(fp(r * s))
    if abs(vals[0] - vals[1]) > 2 ** -20:
        raise PrecisionError(
            f"fp(rho*{s}) unstable under precision doubling: "
            f"{float(vals[0])} vs {float(vals[1])}; supply rho as a PolyRoot"
        )
    return vals[1]


# ---------------------------------------------------------------------------
# decay diagnostics for the distal-attractor summability hypothesis

@dataclass(frozen=True)
class DecayReport:
    """Terms t_k = k * max_{i in [k-B, k_max]} |fp(rho S_i)| and their verdict."""

    B: int
    k_max: int
    terms: tuple[float, ...]          # t_k for k = 1..k_max
    window_max: tuple[float, ...]     # the max factor alone, same indexing
    partial_sums: tuple[float, ...]
    rate: float
    test_range: tuple[int, int]
    test_window_max: float
    verdict: str                      # summable-looking | not-summable-looking | inconclusive

    def lines(self):
        out = []
        for i, (t, p) in enumerate(zip(self.terms, self.partial_sums), start=1):
            out.append(f"{i} {t:.17g} {p:.17g}")
        return out


def decay_diagnostics(kd: KneadingData, root, B: int, k_max: int,
                      test_range=(20, 60)) -> DecayReport:
    """Evaluate the summability diagnostic sum_k k max_{i>=k-B} |fp(rho S_i)|.

    The window is capped at k_max.  Verdict: summable-looking when the
    geometric rate fitted to log t_k over the last half of the range is
    <= 0.95; otherwise not-summable-looking when the window factor stays
    >= 0.02 over ``test_range``; otherwise inconclusive.
    """
    if k_max > kd.depth:
        raise InputError(f"k_max {k_max} exceeds kneading depth {kd.depth}")
    if B < 0:
        raise InputError("B must be >= 0")
    absfp = [0.0] * (k_max + 1)
    for i in range(k_max + 1):
        absfp[i] = abs(float(fp_of_multiple(root, kd.S(i))))
    # suffix maxima over [j, k_max]
    suffix = list(absfp)
    for j in range(k_max - 1, -1, -1):
        suffix[j] = max(suffix[j], suffix[j + 1])
    wmax = [suffix[max(k - B, 0)] for k in range(1, k_max + 1)]
    terms = [k * wmax[k - 1] for k in range(1, k_max + 1)]
    partial = []
    acc = 0.0
    for t in terms:
        acc += t
        partial.append(acc)
    # least squares on log t_k over the last half, ignoring exact zeros
    lo_fit = k_max // 2
    pts = [(k, math.log(terms[k - 1])) for k in range(lo_fit, k_max + 1)
           if terms[k - 1] > 0]
    if len(pts) >= 2:
        n = len(pts)
        sx = sum(p[0] for p in pts)
        sy = sum(p[1] for p in pts)
        sxx = sum(p[0] * p[0] for p in pts)
        sxy = sum(p[0] * p[1] for p in pts)
        slope = (n * sxy - sx * sy) / (n * sxx - sx * sx)
        rate = math.exp(slope)
    else:
        rate = 0.0  # all-zero tail: decayed below representability
    t_lo, t_hi = max(test_range[0], 1), min(test_range[1], k_max)
    test_wmax = max(wmax[k - 1] for k in range(t_lo, t_hi + 1))
    if rate <= 0.95:
        verdict = "summable-looking"
    elif test_wmax >= 0.02:
        verdict = "not-summable-looking"
    else:
        verdict = "inconclusive"
    return DecayReport(B, k_max, tuple(terms), tuple(wmax), tuple(partial),
                       rate, (t_lo, t_hi), test_wmax, verdict)
