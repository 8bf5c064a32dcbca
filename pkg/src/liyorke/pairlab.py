"""Finite-window classification of point pairs and interval-mass estimates.

liminf/limsup of orbit gaps are uncomputable, so every label here is a
finite-window proxy and says so: asymptotic-like, distal-like, ly-like(eps),
or undecided.  The default thresholds follow the headline statistics of the
underlying theory: a mixing map without Cantor attractors separates typical
pairs by at least half the interval diameter, so eps defaults to 0.45 * diam
(numerical headroom below 1/2) with delta_min = 1e-3 for "got close".

Throughput work (Monte-Carlo estimates) runs vectorized at 53-bit floats;
the sensitivity of the reported fractions to precision is itself a
reported diagnostic, not an assumption.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

import mpmath as mp
import numpy as np

from .errors import InputError
from .dynamics import UnimodalMap

__all__ = [
    "PairVerdict",
    "classify_pair",
    "sample_pairs",
    "classify_batch",
    "MeasureReport",
    "measure_estimate",
    "wilson_interval",
    "ApproxPeriodicResult",
    "approx_periodic_test",
    "SeparationResult",
    "factor_separation",
    "LimsupReport",
    "limsup_full_estimate",
    "push_forward",
]

LABELS = ("distal-like", "asymptotic-like", "ly-like", "undecided")


@dataclass(frozen=True)
class PairVerdict:
    label: str
    eps: float
    delta_min: float
    min_gap: float
    max_gap: float
    early_max: float       # sup of gaps over the first quarter after burn-in
    late_max: float        # sup of gaps over the last quarter
    burn_in: int
    window: int


def _label(min_gap, max_gap, early_max, late_max, eps, delta_min):
    """Exactly one label per window.

    distal-like: never closer than delta_min after burn-in.
    asymptotic-like: the gap envelope has settled below delta_min by the end
    (last-quarter sup below delta_min and no larger than the first-quarter sup).
    ly-like: got within delta_min and spread to at least eps.
    """
    if min_gap > delta_min:
        return "distal-like"
    if late_max < delta_min and late_max <= early_max:
        return "asymptotic-like"
    if max_gap >= eps:
        return "ly-like"
    return "undecided"


def classify_pair(m: UnimodalMap, x, y, window: int = 100_000,
                  burn_in: int = 1_000, eps: float | None = None,
                  delta_min: float = 1e-3) -> PairVerdict:
    """Classify one pair by its orbit-gap statistics over [burn_in, window)."""
    if window <= burn_in:
        raise InputError("window must exceed burn_in")
    if x == y:
        raise InputError("pair points must differ")
    if eps is None:
        eps = 0.45 * m.diam
    use_float = m.precision_bits == 53
    zx = float(x) if use_float else m.mpf_point(x)
    zy = float(y) if use_float else m.mpf_point(y)
    span = window - burn_in
    q1 = burn_in + span // 4
    q3 = burn_in + (3 * span) // 4
    min_gap, max_gap, early, late = math.inf, 0.0, 0.0, 0.0
    for n in range(window):
        if n >= burn_in:
            g = abs(zx - zy)
            g = float(g)
            if g < min_gap:
                min_gap = g
            if g > max_gap:
                max_gap = g
            if n < q1 and g > early:
                early = g
            if n >= q3 and g > late:
                late = g
        zx = m.step(zx)
        zy = m.step(zy)
    lab = _label(min_gap, max_gap, early, late, eps, delta_min)
    return PairVerdict(lab, eps, delta_min, min_gap, max_gap, early, late,
                       burn_in, window)


# ---------------------------------------------------------------------------
# vectorized Monte Carlo

def sample_pairs(m: UnimodalMap, n_pairs: int, seed: int) -> np.ndarray:
    """Deterministic uniform pairs on the square of the domain; pair i depends
    only on (seed, i), so chunked and serial runs agree exactly."""
    lo, hi = m.domain
    out = np.empty((n_pairs, 2))
    children = np.random.SeedSequence(seed).spawn(n_pairs)
    for i, child in enumerate(children):
        g = np.random.Generator(np.random.PCG64(child))
        out[i, 0] = lo + (hi - lo) * g.random()
        out[i, 1] = lo + (hi - lo) * g.random()
    return out


def _step_array(m: UnimodalMap, xs: np.ndarray) -> np.ndarray:
    a = float(m.a)
    if m.family == "logistic":
        return a * xs * (1.0 - xs)
    return 1.0 - a * np.abs(xs) ** m.ell


def classify_batch(m: UnimodalMap, pairs: np.ndarray, window: int = 100_000,
                   burn_in: int = 1_000, eps: float | None = None,
                   delta_min: float = 1e-3):
    """classify_pair over many pairs at 53-bit floats, vectorized."""
    if eps is None:
        eps = 0.45 * m.diam
    xs = pairs[:, 0].copy()
    ys = pairs[:, 1].copy()
    n = len(xs)
    span = window - burn_in
    q1 = burn_in + span // 4
    q3 = burn_in + (3 * span) // 4
    min_gap = np.full(n, np.inf)
    max_gap = np.zeros(n)
    early = np.zeros(n)
    late = np.zeros(n)
    for t in range(window):
        if t >= burn_in:
            g = np.abs(xs - ys)
            np.minimum(min_gap, g, out=min_gap)
            np.maximum(max_gap, g, out=max_gap)
            if t < q1:
                np.maximum(early, g, out=early)
            if t >= q3:
                np.maximum(late, g, out=late)
        xs = _step_array(m, xs)
        ys = _step_array(m, ys)
    out = []
    for i in range(n):
        lab = _label(min_gap[i], max_gap[i], early[i], late[i], eps, delta_min)
        out.append(PairVerdict(lab, eps, delta_min, float(min_gap[i]),
                               float(max_gap[i]), float(early[i]),
                               float(late[i]), burn_in, window))
    return out


def wilson_interval(successes: int, trials: int, z: float = 1.96):
    if trials == 0:
        return (0.0, 1.0)
    p = successes / trials
    denom = 1 + z * z / trials
    center = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    return (max(center - half, 0.0), min(center + half, 1.0))


@dataclass(frozen=True)
class MeasureReport:
    n_pairs: int
    seed: int
    fractions: dict
    intervals: dict
    verdicts: tuple
    precision_note: str | None

    def lines(self):
        out = []
        for i, v in enumerate(self.verdicts):
            out.append(f"{v.label} {v.min_gap:.17g} {v.max_gap:.17g} {i}")
        return out


def measure_estimate(m: UnimodalMap, n_pairs: int, rng_seed: int,
                     window: int = 100_000, burn_in: int = 1_000,
                     eps: float | None = None, delta_min: float = 1e-3,
                     precision_check: bool = False) -> MeasureReport:
    """Label fractions over uniform pairs, with Wilson confidence intervals.

    Deterministic given the seed.  With precision_check, a small subsample is
    re-run at 113-bit arithmetic and the label agreement is reported.
    """
    if n_pairs < 1:
        raise InputError("n_pairs must be >= 1")
    pairs = sample_pairs(m, n_pairs, rng_seed)
    verdicts = classify_batch(m, pairs, window, burn_in, eps, delta_min)
    fractions, intervals = {}, {}
    for lab in LABELS:
        cnt = sum(1 for v in verdicts if v.label == lab)
        fractions[lab] = cnt / n_pairs
        intervals[lab] = wilson_interval(cnt, n_pairs)
    note = None
    if precision_check:
        k = min(n_pairs, 12)
        w = min(window, 20_000)
        hi_m = UnimodalMap(m.family, m.a, m.ell, 113)
        agree = 0
        for i in range(k):
            v53 = classify_pair(
                UnimodalMap(m.family, m.a, m.ell, 53),
                float(pairs[i, 0]), float(pairs[i, 1]), w, burn_in, eps, delta_min)
            v113 = classify_pair(hi_m, pairs[i, 0], pairs[i, 1], w, burn_in,
                                 eps, delta_min)
            agree += v53.label == v113.label
        note = f"precision sensitivity: {agree}/{k} labels agree at 53 vs 113 bits (window {w})"
    return MeasureReport(n_pairs, rng_seed, fractions, intervals,
                         tuple(verdicts), note)


# ---------------------------------------------------------------------------
# approximate periodicity

@dataclass(frozen=True)
class ApproxPeriodicResult:
    found: bool
    period: int | None
    cycle: tuple | None
    sup_dist: float | None
    refine_failures: int


def approx_periodic_test(m: UnimodalMap, x, eps: float, p_max: int = 64,
                         window: int = 20_000, n_seeds: int = 4,
                         newton_steps: int = 60) -> ApproxPeriodicResult:
    """Search periods p <= p_max whose refined cycle eps-shadows the late orbit.

    Candidate cycles come from Newton refinement of f^p(z) = z seeded at late
    orbit points; per-seed non-convergence is counted, never fatal.  The
    shadow test takes the best cyclic phase alignment of the late window.
    """
    lo, hi = m.domain
    z = float(x)
    orb = np.empty(window)
    for i in range(window):
        z = m.step(z)
        orb[i] = z
    tail = orb[window // 2:]
    failures = 0
    for p in range(1, p_max + 1):
        if 2 * p >= len(tail):
            break
        # cheap recurrence filter: a shadowing cycle forces p-step returns
        if np.abs(tail[p:] - tail[:-p]).max() > 2 * eps:
            continue
        seeds = tail[:: max(len(tail) // n_seeds, 1)][:n_seeds]
        for s in seeds:
            zc = float(s)
            converged = False
            for _ in range(newton_steps):
                w, dw = zc, 1.0
                for _ in range(p):
                    dw *= m.deriv(w) if isinstance(w, float) else float(m.deriv(w))
                    w = m.step(w) if isinstance(w, float) else float(m.step(w))
                gp = dw - 1.0
                if abs(gp) < 1e-14:
                    break
                step = (w - zc) / gp
                zc -= step
                if abs(step) < 1e-13:
                    converged = True
                    break
            if not converged or not lo <= zc <= hi:
                failures += 1
                continue
            cycle = [zc]
            for _ in range(p - 1):
                cycle.append(m.step(cycle[-1]))
            cycle = np.array(cycle)
            if any(abs(cycle[0] - cycle[q]) < 1e-9 for q in range(1, p)):
                continue  # not a minimal period-p orbit; smaller p already tried
            idx = np.arange(len(tail)) % p
            best = math.inf
            for off in range(p):
                sup = np.abs(tail - cycle[(idx + off) % p]).max()
                if sup < best:
                    best = sup
            if best < eps:
                return ApproxPeriodicResult(True, p, tuple(float(t) for t in cycle),
                                            float(best), failures)
    return ApproxPeriodicResult(False, None, None, None, failures)


# ---------------------------------------------------------------------------
# distal certificates from the circle factor

@dataclass(frozen=True)
class SeparationResult:
    certificate: bool
    delta: float
    required: float


def factor_separation(pi_x, pi_y, rho, threshold: float) -> SeparationResult:
    """Certificate iff the circle distance of the two stabilized estimates
    exceeds threshold plus both stabilization residuals.

    Non-stabilized inputs are rejected: a certificate must not rest on a
    value that is still moving.
    """
    if not (pi_x.stabilized and pi_y.stabilized):
        raise InputError("factor_separation requires stabilized estimates")
    d = abs(pi_x.estimate - pi_y.estimate) % 1.0
    d = min(d, 1.0 - d)
    required = threshold + pi_x.residual + pi_y.residual
    return SeparationResult(d > required, d, required)


# ---------------------------------------------------------------------------
# exact interval-union pushforward

def _normalize(intervals):
    ivs = sorted((min(a, b), max(a, b)) for a, b in intervals if a != b)
    out = []
    for lo, hi in ivs:
        if out and lo <= out[-1][1]:
            out[-1] = (out[-1][0], max(out[-1][1], hi))
        else:
            out.append((lo, hi))
    return out


def push_forward(m: UnimodalMap, intervals):
    """Exact image of an interval union: each piece is split at the critical
    point and mapped endpoint-wise (monotone pieces), then merged."""
    c = m.critical_point
    out = []
    for lo, hi in intervals:
        pieces = []
        if lo < c < hi:
            pieces = [(lo, c), (c, hi)]
        else:
            pieces = [(lo, hi)]
        for a, b in pieces:
            fa = m.step(float(a))
            fb = m.step(float(b))
            out.append((min(fa, fb), max(fa, fb)))
    return _normalize(out)


def _measure(intervals):
    return sum(hi - lo for lo, hi in intervals)


@dataclass(frozen=True)
class LimsupReport:
    rows: tuple              # (n, lower, upper, components, widened)
    running_max_lower: float
    cap: int

    def lines(self):
        return [f"{n} {lo:.17g} {up:.17g} {k}" for n, lo, up, k, _ in self.rows]


def limsup_full_estimate(m: UnimodalMap, A, n_max: int, cap: int = 10_000) -> LimsupReport:
    """Per-iterate Lebesgue mass of the forward images of A, exactly.

    Two unions are carried: an inner one (components dropped smallest-first
    when the cap is exceeded; its measure is a true lower bound) and an outer
    one (smallest gaps filled instead; a true upper bound).  The running
    maximum of the lower bound is the limsup-fullness statistic.
    """
    dom_lo, dom_hi = m.domain
    inner = _normalize(A)
    if not inner:
        raise InputError("A is empty")
    for lo, hi in inner:
        if lo < dom_lo - 1e-12 or hi > dom_hi + 1e-12:
            raise InputError(f"A component ({lo}, {hi}) outside the domain")
    outer = list(inner)
    rows = []
    run_max = 0.0
    for n in range(1, n_max + 1):
        inner = push_forward(m, inner)
        outer = push_forward(m, outer)
        widened = False
        if len(inner) > cap:
            inner.sort(key=lambda iv: iv[1] - iv[0])
            inner = _normalize(inner[len(inner) - cap:])
            widened = True
        if len(outer) > cap:
            gaps = sorted(
                ((outer[i + 1][0] - outer[i][1], i) for i in range(len(outer) - 1))
            )
            fill = {i for _, i in gaps[: len(outer) - cap]}
            merged = []
            for i, iv in enumerate(outer):
                if merged and (i - 1) in fill:
                    merged[-1] = (merged[-1][0], iv[1])
                else:
                    merged.append(iv)
            outer = merged
            widened = True
        lower = _measure(inner)
        upper = _measure(outer)
        run_max = max(run_max, lower)
        rows.append((n, lower, upper, len(inner), widened))
    return LimsupReport(tuple(rows), run_max, cap)
