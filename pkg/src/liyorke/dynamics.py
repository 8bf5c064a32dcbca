"""Concrete unimodal maps: evaluation, orbits, empirical cutting times, tuning.

Two families:

* ``logistic``   x -> a x (1 - x)      on [0, 1],  critical point 1/2,  0 < a <= 4
* ``symmetric``  x -> 1 - a |x|^ell    on [-1, 1], critical point 0,    0 < a <= 2

Arithmetic runs at a configurable mantissa size (mpmath).  53-bit maps take
plain-float fast paths so Monte-Carlo work stays cheap.  Error along the
*critical* orbit grows only polynomially for the tuned combinatorics here,
which is what makes deep tuning at modest precision possible; random orbits
lose shadowing exponentially, and everything downstream treats them as
pseudo-orbits (per-step consistency, surfaced ambiguities).
"""

from __future__ import annotations

import random
from dataclasses import dataclass

import mpmath as mp

from .errors import (
    DegenerateOrbitError,
    InputError,
    PrecisionError,
    TuningError,
)
from .kneading import KneadingData, QRule, cutting_times, q_from_cutting_times

__all__ = [
    "UnimodalMap",
    "make_map",
    "parse_map_spec",
    "Orbit",
    "iterate",
    "critical_orbit_iter",
    "ScanRow",
    "critical_scan",
    "EmpiricalKneading",
    "empirical_cutting_times",
    "kneading_itinerary",
    "itinerary",
    "parity_lex_less",
    "TuneResult",
    "tune_parameter",
    "AttractorReport",
    "detect_attractor",
]

_FAMILIES = ("logistic", "symmetric")


@dataclass(frozen=True)
class UnimodalMap:
    family: str
    a: mp.mpf
    ell: float = 2.0
    precision_bits: int = 53

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise InputError(f"unknown family {self.family!r}")
        if self.ell < 1:
            raise InputError(f"critical order must be >= 1, got {self.ell}")
        amax = 4 if self.family == "logistic" else 2
        if not 0 < self.a <= amax:
            raise InputError(
                f"{self.family} parameter must lie in (0, {amax}], got {self.a}"
            )

    # -- geometry -----------------------------------------------------------
    @property
    def domain(self):
        return (0.0, 1.0) if self.family == "logistic" else (-1.0, 1.0)

    @property
    def critical_point(self):
        return 0.5 if self.family == "logistic" else 0.0

    @property
    def diam(self):
        lo, hi = self.domain
        return hi - lo

    # -- evaluation ---------------------------------------------------------
    def step(self, x):
        """One application of f, in the arithmetic of x (float or mpf)."""
        if self.family == "logistic":
            if isinstance(x, float):
                return float(self.a) * x * (1.0 - x)
            with mp.workprec(self.precision_bits):
                return self.a * x * (1 - x)
        if isinstance(x, float):
            return 1.0 - float(self.a) * abs(x) ** self.ell
        with mp.workprec(self.precision_bits):
            e = self.ell
            if float(e).is_integer():
                return 1 - self.a * abs(x) ** int(e)
            return 1 - self.a * abs(x) ** mp.mpf(e)

    def deriv(self, x):
        """f'(x) by the closed form of each family."""
        if self.family == "logistic":
            if isinstance(x, float):
                return float(self.a) * (1.0 - 2.0 * x)
            with mp.workprec(self.precision_bits):
                return self.a * (1 - 2 * x)
        sgn = 1.0 if x > 0 else (-1.0 if x < 0 else 0.0)
        if isinstance(x, float):
            return -float(self.a) * self.ell * abs(x) ** (self.ell - 1.0) * sgn
        with mp.workprec(self.precision_bits):
            return -self.a * mp.mpf(self.ell) * abs(x) ** (mp.mpf(self.ell) - 1) * sgn

    def mpf_point(self, x):
        with mp.workprec(self.precision_bits):
            return mp.mpf(x)

    def spec_string(self) -> str:
        with mp.workprec(self.precision_bits):
            a_str = mp.nstr(self.a, int(self.precision_bits * 0.302) + 3)
        return f"family:{self.family} a:{a_str} ell:{_fmt_num(self.ell)} bits:{self.precision_bits}"


def _fmt_num(v):
    return str(int(v)) if float(v).is_integer() else repr(float(v))


def make_map(family: str, a, ell=2.0, precision_bits: int = 53) -> UnimodalMap:
    """Build a map, parsing the parameter under the requested precision."""
    with mp.workprec(precision_bits):
        av = mp.mpf(a)
    return UnimodalMap(family, av, float(ell), precision_bits)


def parse_map_spec(spec: str) -> UnimodalMap:
    """Map spec grammar: whitespace-separated tokens, each ``key:value`` or
    ``key=value``; a bare leading token names the family.

    Examples: ``logistic a=4``, ``family:symmetric a:1.98 ell:8 bits:1024``.
    """
    family = None
    kv = {}
    for tok in spec.split():
        if ":" in tok:
            k, v = tok.split(":", 1)
        elif "=" in tok:
            k, v = tok.split("=", 1)
        elif family is None and tok in _FAMILIES:
            family, k, v = tok, None, None
        else:
            raise InputError(f"bad map-spec token {tok!r}")
        if k is not None:
            if k not in ("family", "a", "ell", "bits"):
                raise InputError(f"unknown map-spec key {k!r}")
            kv[k] = v
    family = kv.pop("family", family)
    if family is None:
        raise InputError(f"map spec {spec!r} names no family")
    if "a" not in kv:
        raise InputError(f"map spec {spec!r} carries no parameter a")
    return make_map(family, kv["a"], float(kv.get("ell", 2)),
                    int(kv.get("bits", 53)))


# ---------------------------------------------------------------------------
# orbits

@dataclass(frozen=True)
class Orbit:
    x0: object
    points: tuple
    stride: int = 1


def iterate(m: UnimodalMap, x, n: int, stride: int = 1) -> Orbit:
    """Orbit x, f(x), ..., f^n(x) stored every `stride` steps; deterministic.

    A point escaping the domain by more than one unit-in-last-place is a
    parameter-misuse error.
    """
    lo, hi = m.domain
    slack = 2.0 ** -(m.precision_bits - 2)
    z = x if isinstance(x, float) and m.precision_bits == 53 else m.mpf_point(x)
    if not lo - slack <= z <= hi + slack:
        raise InputError(f"initial point {x} outside {m.family} domain")
    pts = [z]
    for j in range(1, n + 1):
        z = m.step(z)
        if not lo - slack <= z <= hi + slack:
            raise InputError(
                f"orbit escaped the domain at step {j} (point {float(z)}); "
                "check the parameter"
            )
        if j % stride == 0:
            pts.append(z)
    return Orbit(x0=x, points=tuple(pts), stride=stride)


def critical_orbit_iter(m: UnimodalMap):
    """Yields c_1, c_2, ... at the map's precision."""
    z = m.mpf_point(m.critical_point)
    while True:
        z = m.step(z)
        yield z


# ---------------------------------------------------------------------------
# empirical cutting structure from the critical orbit

@dataclass(frozen=True)
class ScanRow:
    n: int
    c_n: object       # f^n(c)
    beta: int         # beta(n); 0 for n = 1
    cutting: bool


def critical_scan(m: UnimodalMap, n_max: int, tol=None):
    """Generate the level intervals between c_n and c_{beta(n)} and flag cuts.

    beta increments by one per step and resets to 1 after each cutting time.
    n is cutting iff c lies strictly between c_n and c_{beta(n)}, with margin
    tol; a near-boundary hit aborts (ambiguous at this precision).  An orbit
    landing on a fixed point is degenerate: no further cutting times exist.
    """
    if tol is None:
        tol = mp.mpf(2) ** -(max(m.precision_bits // 4, 8))
    c = m.mpf_point(m.critical_point)
    orb = [c]  # orb[j] = c_j
    gen = critical_orbit_iter(m)
    orb.append(next(gen))
    yield ScanRow(1, orb[1], 0, True)  # S_0 = 1 by definition
    b = 1
    for n in range(2, n_max + 1):
        z = next(gen)
        orb.append(z)
        if abs(z - orb[n - 1]) <= tol:
            raise DegenerateOrbitError(
                f"critical orbit reached a fixed point near n={n}; "
                "no further cutting times exist"
            )
        lo, hi = (z, orb[b]) if z < orb[b] else (orb[b], z)
        if abs(c - lo) <= tol or abs(c - hi) <= tol:
            raise PrecisionError(
                f"critical point within tol=2^{int(mp.log(tol, 2))} of the "
                f"level boundary at n={n}; raise precision_bits"
            )
        cut = lo < c < hi
        yield ScanRow(n, z, b, cut)
        b = 1 if cut else b + 1


@dataclass(frozen=True)
class EmpiricalKneading:
    kd: KneadingData
    rows: tuple  # ScanRow trace of the critical-orbit intervals


def empirical_cutting_times(m: UnimodalMap, k_max: int, n_cap: int | None = None,
                            tol=None) -> EmpiricalKneading:
    """Measure S_0..S_{k_max} by direct simulation of the critical orbit."""
    cap = n_cap if n_cap is not None else 1_000_000
    S = []
    rows = []
    for row in critical_scan(m, cap, tol):
        rows.append(row)
        if row.cutting:
            S.append(row.n)
            if len(S) == k_max + 1:
                break
    else:
        raise DegenerateOrbitError(
            f"only {len(S)} cutting times found within {cap} iterates"
        )
    kd = q_from_cutting_times(S, name=f"empirical:{m.family}")
    return EmpiricalKneading(kd=kd, rows=tuple(rows))


# ---------------------------------------------------------------------------
# symbolic itineraries and the parameter order

def kneading_itinerary(kd: KneadingData, length: int) -> str:
    """The itinerary of c_1 forced by the cutting structure.

    nu_1 = R; nu_n copies nu_{beta(n)} off the cutting times and flips it on
    them (the level interval straddles c exactly at cutting times).
    """
    import bisect as _b

    S = kd.cutting_times
    if length > S[-1]:
        raise InputError(f"itinerary length {length} beyond S_depth = {S[-1]}")
    nu = [""] * (length + 1)
    nu[1] = "R"
    for n in range(2, length + 1):
        i = _b.bisect_left(S, n)
        b = n - S[i - 1]
        prev = nu[b]
        if kd.is_cutting(n):
            nu[n] = "L" if prev == "R" else "R"
        else:
            nu[n] = prev
    return "".join(nu[1:])


def itinerary(m: UnimodalMap, x, length: int, tol=None) -> str:
    """Symbols of x's orbit relative to c: L / R, or C within tolerance."""
    if tol is None:
        tol = mp.mpf(2) ** -(max(m.precision_bits - 6, 8))
    c = m.mpf_point(m.critical_point)
    z = m.mpf_point(x)
    out = []
    for _ in range(length):
        d = z - c
        out.append("C" if abs(d) <= tol else ("R" if d > 0 else "L"))
        z = m.step(z)
    return "".join(out)


_SYMBOL_ORD = {"L": 0, "C": 1, "R": 2}


def parity_lex_less(s: str, t: str) -> bool:
    """Total order on itineraries: lexicographic, direction flipped after an
    odd number of orientation-reversing (R) symbols.  Monotone in the map
    parameter for both families."""
    parity = 0
    for a, b in zip(s, t):
        if a != b:
            lt = _SYMBOL_ORD[a] < _SYMBOL_ORD[b]
            return lt if parity % 2 == 0 else not lt
        if a == "R":
            parity += 1
    return False


# ---------------------------------------------------------------------------
# parameter tuning by bisection on the itinerary order

@dataclass(frozen=True)
class TuneResult:
    family: str
    ell: float
    lo: mp.mpf
    hi: mp.mpf
    mid: mp.mpf
    iterations: int
    depth: int
    map: UnimodalMap


def tune_parameter(family: str, ell, target: KneadingData, depth: int,
                   precision_bits: int = 256, max_iter: int | None = None) -> TuneResult:
    """Bisect the family parameter until the midpoint realizes the target
    cutting times through index `depth`.

    Direction comes from the parity-lexicographic comparison between the
    midpoint's critical-value itinerary and the itinerary forced by the
    target kneading data; the match is then confirmed by re-measuring
    empirical cutting times at the midpoint (the independent check).
    """
    if depth > target.depth:
        raise InputError(f"depth {depth} exceeds target depth {target.depth}")
    L = target.S(depth)
    want = kneading_itinerary(target, L)
    want_S = list(target.cutting_times[: depth + 1])
    limit = max_iter if max_iter is not None else precision_bits + 64

    def critical_value_itinerary(a):
        mm = make_map(family, a, ell, precision_bits)
        c1 = mm.step(mm.mpf_point(mm.critical_point))
        return mm, itinerary(mm, c1, L)

    with mp.workprec(precision_bits):
        lo = mp.mpf(2) if family == "logistic" else mp.mpf("0.5")
        hi = mp.mpf(4) if family == "logistic" else mp.mpf(2)
        _, top = critical_value_itinerary(hi)
        if parity_lex_less(top, want):
            raise TuningError(
                "target not realized within the family's parameter range"
            )
        for it in range(1, limit + 1):
            mid = (lo + hi) / 2
            mm, got = critical_value_itinerary(mid)
            if got == want:
                emp = empirical_cutting_times(mm, depth, n_cap=L + 2)
                if list(emp.kd.cutting_times[: depth + 1]) != want_S:
                    raise PrecisionError(
                        "itinerary matched but re-measured cutting times did "
                        "not; precision too low for this depth"
                    )
                return TuneResult(family, float(ell), lo, hi, mid, it, depth, mm)
            if parity_lex_less(got, want):
                lo = mid
            else:
                hi = mid
    raise TuningError(
        f"no parameter matching depth {depth} within {limit} bisection steps; "
        "target may not be realized or precision is too low"
    )


# ---------------------------------------------------------------------------
# attractor-type heuristics

@dataclass(frozen=True)
class AttractorReport:
    label: str
    detail: object
    per_sample: tuple
    confidence: str


def _cycle_period(tail, eps, p_max):
    n = len(tail)
    for p in range(1, p_max + 1):
        if 3 * p > n:
            break
        if all(abs(tail[-1 - j] - tail[-1 - j - p]) < eps for j in range(2 * p)):
            return p
    return None


def detect_attractor(m: UnimodalMap, sample_count: int = 16, transient: int = 3000,
                     horizon: int = 4096, eps: float = 2.0 ** -20,
                     p_max: int = 64, seed: int = 0, cells: int = 512) -> AttractorReport:
    """Heuristic attractor label from sampled orbits; never a proof claim.

    periodic(p): tail eps-converged to a p-cycle.  solenoidal(depth): the
    empirical kneading map shows the period-doubling witness k = Q(k+1)
    repeatedly.  interval-cycle(r): occupied cells form r blocks permuted
    consistently by the dynamics.  Otherwise undetermined.
    """
    lo, hi = m.domain
    # map-level combinatorial evidence for a cascade
    witnesses = 0
    try:
        emp = empirical_cutting_times(m, 10, n_cap=200_000)
        kd = emp.kd
        witnesses = sum(
            1
            for k in range(1, kd.depth)
            if kd.Q(k + 1) == k
            and all(kd.Q(k + j) >= k for j in range(2, kd.depth - k + 1))
        )
    except (DegenerateOrbitError, PrecisionError, InputError):
        pass
    rng = random.Random(seed)
    labels = []
    for _ in range(sample_count):
        x = lo + (hi - lo) * rng.random()
        z = x
        for _ in range(transient):
            z = m.step(z)
        tail = [z]
        for _ in range(horizon - 1):
            z = m.step(z)
            tail.append(z)
        p = _cycle_period(tail, eps, p_max)
        if p is not None:
            labels.append(("periodic", p))
            continue
        if witnesses >= 2:
            labels.append(("solenoidal", witnesses))
            continue
        # occupied-cell blocks and their cyclic permutation
        w = (hi - lo) / cells
        occ = sorted({min(int((t - lo) / w), cells - 1) for t in tail})
        blocks = []
        for cell in occ:
            if blocks and cell == blocks[-1][1] + 1:
                blocks[-1] = (blocks[-1][0], cell)
            else:
                blocks.append((cell, cell))
        if len(blocks) > 16:
            labels.append(("undetermined", None))
            continue

        def block_of(t):
            cell = min(int((t - lo) / w), cells - 1)
            for bi, (a0, a1) in enumerate(blocks):
                if a0 <= cell <= a1:
                    return bi
            return -1

        seq = [block_of(t) for t in tail]
        trans = {}
        ok = 0
        for u, v in zip(seq, seq[1:]):
            if u in trans:
                ok += trans[u] == v
            trans[u] = v
        consistent = ok >= 0.95 * max(len(seq) - 1 - len(blocks), 1)
        if consistent and len(trans) == len(blocks):
            # period of the block permutation
            r = 1
            start = seq[0]
            cur = trans.get(start, start)
            seen = 1
            while cur != start and seen <= len(blocks):
                cur = trans.get(cur, start)
                r += 1
                seen += 1
            labels.append(("interval-cycle", r))
        else:
            labels.append(("undetermined", None))
    tally = {}
    for lab in labels:
        tally[lab] = tally.get(lab, 0) + 1
    best, cnt = max(tally.items(), key=lambda kv: kv[1])
    conf = (
        f"heuristic label from {sample_count} samples "
        f"({cnt}/{sample_count} agree); not a proof"
    )
    return AttractorReport(best[0], best[1], tuple(labels), conf)
