"""Hofbauer tower: levels, orbit lifting, last-visit times, circle factors,
drift statistics, loop synthesis, and numeric first-entry maps.

Level n of the tower is the interval between c_n and c_{beta(n)}.  A lifted
orbit climbs one level per step except at cutting levels S_k, where it either
climbs to 1 + S_k (point on the same side of c as c_{S_k}) or falls to
1 + S_{Q(k)} (other side).  The states of the induced walk are the levels
1 + S_l; a fall entered from state l lands in state Q(l+1).

b_n is the last time a trace occupies level n; the circle value at level n is
-rho (b_n - n) mod 1, which is constant off the cutting times and changes at
S_k by fractional parts of rho times high cutting times once the walk drifts
upward -- that is what the stabilization diagnostics measure.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass

import mpmath as mp

from .errors import DepthError, InputError, PrecisionError
from .kneading import KneadingData
from .dynamics import UnimodalMap, critical_scan

__all__ = [
    "TowerLevels",
    "build_levels",
    "TowerTrace",
    "lift",
    "BValue",
    "b_value",
    "chi_states",
    "chi_increments",
    "PiTildeResult",
    "pi_tilde",
    "DriftReport",
    "drift",
    "drift_from_traces",
    "CoverReport",
    "omega_cover_check",
    "Edge",
    "LoopPair",
    "synthesize_loops",
    "EntryRecord",
    "BranchStats",
    "EntryReport",
    "first_entry_map",
]


# ---------------------------------------------------------------------------
# levels

@dataclass(frozen=True)
class TowerLevels:
    map: UnimodalMap
    kd: KneadingData          # empirical cutting structure of the map
    n_max: int
    c: tuple                  # c[j] = f^j(c), j = 0..n_max
    beta: tuple               # beta[n] for n >= 2; beta[0] = beta[1] = 0
    tol: object

    def interval(self, n: int):
        """Endpoints of level n (sorted).  Level 1 spans c_1 and f(boundary)."""
        if n < 1 or n > self.n_max:
            raise DepthError(f"level {n} outside 1..{self.n_max}")
        if n == 1:
            lo, hi = self.map.domain
            edge = self.map.step(self.map.mpf_point(lo))
            a, b = edge, self.c[1]
        else:
            a, b = self.c[n], self.c[self.beta[n]]
        return (a, b) if a <= b else (b, a)

    def is_cutting(self, n: int) -> bool:
        return self.kd.is_cutting(n)

    def state_of(self, level: int):
        """l with level = 1 + S_l, else None."""
        if level < 2:
            return None
        try:
            return self.kd.index_of(level - 1)
        except DepthError:
            return None


def build_levels(m: UnimodalMap, n_max: int, tol=None) -> TowerLevels:
    """Measure the tower to depth n_max from the critical orbit."""
    c = [m.mpf_point(m.critical_point)]
    beta = [0, 0]
    S = []
    for row in critical_scan(m, n_max, tol):
        c.append(row.c_n)
        if row.n >= 2:
            beta.append(row.beta)
        if row.cutting:
            S.append(row.n)
    from .kneading import q_from_cutting_times

    kd = q_from_cutting_times(S, name=f"empirical:{m.family}")
    if tol is None:
        tol = mp.mpf(2) ** -(max(m.precision_bits // 4, 8))
    return TowerLevels(m, kd, n_max, tuple(c), tuple(beta), tol)


# ---------------------------------------------------------------------------
# lifting

@dataclass(frozen=True)
class TowerTrace:
    x0: object
    levels_seq: tuple      # levels_seq[j-1] = level after j iterates, j = 1..N
    branches: tuple        # '-' plain climb, 'c' climb at a cut, 'f' fall
    ties: tuple            # times j where f^j(x) hit c to precision (climbed)
    membership_ambiguous: int

    @property
    def N(self):
        return len(self.levels_seq)

    def level(self, j: int) -> int:
        return self.levels_seq[j - 1]

    def visits(self):
        """level -> last visit time."""
        last = {}
        for j, n in enumerate(self.levels_seq, start=1):
            last[n] = j
        return last

    def lines(self):
        return [f"{j} {n} {b}" for j, (n, b) in
                enumerate(zip(self.levels_seq, self.branches), start=1)]


def lift(m: UnimodalMap, levels: TowerLevels, x, N: int, verify: bool = False) -> TowerTrace:
    """Lift the orbit of x through N steps of the tower.

    Always starts at level 1 (every monotone lap maps onto level 1).  A tie
    at c (within the level tolerance) takes the climb branch and is logged.
    With verify=True each point is checked against its level interval (a
    tri-state test; ambiguous hits are counted, hard misses raise).
    """
    kd = levels.kd
    c = levels.c[0]
    tol = levels.tol
    z = m.step(m.mpf_point(x))
    seq = [1]
    branches = []
    ties = []
    ambiguous = 0
    for j in range(1, N):
        n = seq[-1]
        if levels.is_cutting(n):
            k = kd.index_of(n)
            d = z - c
            if abs(d) <= tol:
                ties.append(j)
                nxt, br = n + 1, "c"
            else:
                marker_right = levels.c[n] > c
                if (d > 0) == marker_right:
                    nxt, br = n + 1, "c"
                else:
                    nxt = 1 + kd.S(kd.Q(k)) if k >= 1 else 1
                    br = "f"
        else:
            nxt, br = n + 1, "-"
        if nxt > levels.n_max:
            raise DepthError(
                f"orbit climbed past the computed tower depth {levels.n_max} "
                f"at step {j}"
            )
        z = m.step(z)
        if verify:
            lo, hi = levels.interval(nxt)
            if lo - tol <= z <= hi + tol:
                if not lo + tol < z < hi - tol:
                    ambiguous += 1
            else:
                raise PrecisionError(
                    f"lifted point left its level interval at step {j + 1} "
                    f"(level {nxt}); precision exhausted"
                )
        seq.append(nxt)
        branches.append(br)
    branches.append("-")
    return TowerTrace(x, tuple(seq), tuple(branches), tuple(ties), ambiguous)


# ---------------------------------------------------------------------------
# last-visit times

@dataclass(frozen=True)
class BValue:
    n: int
    time: int
    provisional: bool


def b_value(trace: TowerTrace, n: int, guard_factor: int = 4) -> BValue:
    """Last time the trace occupies level n.

    At a finite horizon the "last" visit is only certain when the trace has
    moved on for long enough; the value is flagged provisional when the
    remaining window after it is shorter than guard_factor times the time
    the trace took to first exceed level n again (a revisit would need at
    least a comparable excursion).
    """
    last = None
    for j, lv in enumerate(trace.levels_seq, start=1):
        if lv == n:
            last = j
    if last is None:
        raise InputError(f"level {n} never visited in this trace")
    t_up = None
    for j in range(last + 1, trace.N + 1):
        if trace.level(j) > n:
            t_up = j
            break
    if t_up is None:
        return BValue(n, last, True)
    guard = guard_factor * (t_up - last)
    return BValue(n, last, (trace.N - last) < guard)


# ---------------------------------------------------------------------------
# induced-walk states

def chi_states(trace: TowerTrace, levels: TowerLevels):
    """(time, state) pairs at the levels 1 + S_l, in trace order."""
    out = []
    for j, lv in enumerate(trace.levels_seq, start=1):
        st = levels.state_of(lv)
        if st is not None:
            out.append((j, st))
    return out


def chi_increments(trace: TowerTrace, levels: TowerLevels):
    """Consecutive state increments of the induced walk."""
    states = [s for _, s in chi_states(trace, levels)]
    return [b - a for a, b in zip(states, states[1:])]


# ---------------------------------------------------------------------------
# the circle factor

@dataclass(frozen=True)
class PiTildeResult:
    values: tuple            # (n, value in [0,1)) at the requested levels
    estimate: float | None
    residual: float | None   # max circle-step over the stabilization window
    stabilized: bool
    threshold: float
    bound: float | None      # C k max_{i >= k-B} |fp(rho S_i)| at the top level


def _circle_dist(a, b):
    d = abs(a - b) % 1.0
    return min(d, 1.0 - d)


def pi_tilde(trace: TowerTrace, levels: TowerLevels, rho, n_list=None,
             window: int = 5, threshold: float = 0.05,
             B: int | None = None, C: float | None = None) -> PiTildeResult:
    """Circle values -rho (b_n - n) mod 1 along cutting levels, with a
    finite-window stabilization verdict.

    The estimate is the value at the deepest requested level; the residual
    is the largest circle step among the last `window` values.  Stabilized
    means residual < threshold.  Non-stabilization is reported, not raised.
    The theoretical step bound at the top level (drift constant C, default
    3B) is attached as a diagnostic.
    """
    kd = levels.kd
    visits = trace.visits()
    if n_list is None:
        n_list = [s for s in kd.cutting_times if s in visits]
        if not n_list:
            raise InputError("trace visits no cutting level")
    prec = max(64, int(trace.N).bit_length() + 64)
    with mp.workprec(prec):
        r = mp.mpf(rho)
        vals = []
        for n in n_list:
            if n not in visits:
                raise InputError(f"level {n} never visited; b_n unavailable")
            bn = visits[n]
            v = float((-r * (bn - n)) % 1)
            vals.append((n, v % 1.0))
    w = min(window, len(vals) - 1)
    if w < 1:
        return PiTildeResult(tuple(vals), vals[-1][1] if vals else None,
                             None, False, threshold, None)
    steps = [_circle_dist(vals[i + 1][1], vals[i][1])
             for i in range(len(vals) - 1)]
    residual = max(steps[-w:])
    stabilized = residual < threshold
    bound = None
    if B is None:
        from .kneading import max_gap
        try:
            B = max_gap(kd)
        except Exception:
            B = None
    if B is not None:
        if C is None:
            C = 3.0 * B
        top = n_list[-1]
        try:
            k_top = kd.index_of(top)
            from .algebra import fp
            lo_i = max(k_top - B, 0)
            with mp.workprec(max(kd.S(kd.depth).bit_length() + 64, 96)):
                m_ = max(abs(fp(mp.mpf(rho) * kd.S(i)))
                         for i in range(lo_i, kd.depth + 1))
                bound = float(C * k_top * m_)
        except DepthError:
            bound = None
    return PiTildeResult(tuple(vals), vals[-1][1], residual, stabilized,
                         threshold, bound)


# ---------------------------------------------------------------------------
# drift estimation

@dataclass(frozen=True)
class DriftReport:
    bins: dict               # state k -> (count, mean, second_moment)
    total: int
    mean: float | None
    ci_half_width: float | None
    verdict: str             # positive-drift-looking | negative-drift-looking | inconclusive

    def lines(self):
        out = []
        for k in sorted(self.bins):
            cnt, mean, m2 = self.bins[k]
            out.append(f"{k} {mean:.17g} {m2:.17g} {cnt}")
        return out


def drift_from_traces(traces, levels: TowerLevels) -> DriftReport:
    sums = {}
    for tr in traces:
        states = [s for _, s in chi_states(tr, levels)]
        for a, b in zip(states, states[1:]):
            cnt, s1, s2 = sums.get(a, (0, 0.0, 0.0))
            d = b - a
            sums[a] = (cnt + 1, s1 + d, s2 + d * d)
    bins = {k: (cnt, s1 / cnt, s2 / cnt) for k, (cnt, s1, s2) in sums.items()}
    total = sum(c for c, _, _ in bins.values())
    if total == 0:
        return DriftReport(bins, 0, None, None, "inconclusive")
    g1 = sum(c * m for c, m, _ in bins.values()) / total
    g2 = sum(c * m2 for c, _, m2 in bins.values()) / total
    var = max(g2 - g1 * g1, 0.0)
    half = 1.96 * (var / total) ** 0.5
    if g1 - half > 0:
        verdict = "positive-drift-looking"
    elif g1 + half < 0:
        verdict = "negative-drift-looking"
    else:
        verdict = "inconclusive"
    return DriftReport(bins, total, g1, half, verdict)


def drift(m: UnimodalMap, levels: TowerLevels, samples: int, N: int,
          seed: int = 0) -> DriftReport:
    """Empirical conditional increments of the induced walk over sampled lifts.

    Sample seeds derive deterministically from (seed, index); sparse bins
    are reported as such, never asserted on.
    """
    lo, hi = m.domain
    traces = []
    for i in range(samples):
        rng = random.Random(seed * 1_000_003 + i)
        x = lo + (hi - lo) * rng.random()
        traces.append(lift(m, levels, x, N))
    return drift_from_traces(traces, levels)


# ---------------------------------------------------------------------------
# omega-limit cover

@dataclass(frozen=True)
class CoverReport:
    fraction: float
    inside: int
    total: int
    ambiguous: int


def omega_cover_check(m: UnimodalMap, levels: TowerLevels, kd: KneadingData,
                      k: int, B: int, sample_len: int,
                      start: int | None = None) -> CoverReport:
    """Fraction of late critical-orbit points inside the levels
    1 + S_k .. S_{k+B}.

    Requires max(j - Q(j)) <= B over the computed range (hypothesis of the
    cover statement); violations are errors, not silent.
    """
    from .kneading import max_gap

    gap = max_gap(kd)
    if gap > B:
        raise InputError(
            f"hypothesis violated: max(k - Q(k)) = {gap} exceeds B = {B}"
        )
    if k + B > kd.depth:
        raise DepthError(f"needs S_{k + B}, depth is {kd.depth}")
    n_lo, n_hi = 1 + kd.S(k), kd.S(k + B)
    if n_hi > levels.n_max:
        raise DepthError(f"levels computed to {levels.n_max}, need {n_hi}")
    ivs = [levels.interval(n) for n in range(n_lo, n_hi + 1)]
    tol = levels.tol
    first = start if start is not None else n_hi + 1
    # continue the critical orbit past the stored range as needed
    z = levels.c[min(first - 1, levels.n_max)]
    for _ in range(first - 1 - min(first - 1, levels.n_max)):
        z = m.step(z)
    inside = ambiguous = 0
    for _ in range(sample_len):
        z = m.step(z)
        hit = amb = False
        for lo, hi in ivs:
            if lo + tol < z < hi - tol:
                hit = True
                break
            if lo - tol <= z <= hi + tol:
                amb = True
        if hit:
            inside += 1
        elif amb:
            ambiguous += 1
    return CoverReport(inside / sample_len, inside, sample_len, ambiguous)


# ---------------------------------------------------------------------------
# equal-length loop synthesis

@dataclass(frozen=True)
class Edge:
    src: int
    dst: int
    kind: str     # 'up' or 'down'
    cost: int     # f-iterates: S_{Q(src+1)} either way


@dataclass(frozen=True)
class LoopPair:
    loop_a: tuple     # kappa -> ... -> kappa, passing kappa_hat
    loop_b: tuple     # kappa_hat -> ... -> kappa_hat, same edge multiset
    length_a: int
    length_b: int


def _edges_from(kd: KneadingData, l: int):
    if l + 1 > kd.depth:
        return []
    cost = kd.S(kd.Q(l + 1))
    return [Edge(l, l + 1, "up", cost), Edge(l, kd.Q(l + 1), "down", cost)]


def synthesize_loops(kd: KneadingData, kappa: int, kappa_hat: int,
                     search_bound: int | None = None) -> LoopPair:
    """Two loops through states kappa and kappa_hat made of one shared
    connecting path plus the climb between them; both use the same edge
    multiset in a different cyclic order, so their exact f-lengths agree.

    The connecting path kappa_hat -> kappa is found by breadth-first search
    over up/down edges; absence within the search bound is an error.
    """
    if kappa_hat == kappa:
        return LoopPair((), (), 0, 0)
    if not 0 <= kappa < kappa_hat:
        raise InputError("need 0 <= kappa < kappa_hat")
    bound = search_bound if search_bound is not None else kd.depth - 1
    if kappa_hat > bound:
        raise InputError(f"kappa_hat {kappa_hat} beyond search bound {bound}")
    # climb kappa -> kappa_hat
    climb = []
    for l in range(kappa, kappa_hat):
        e = _edges_from(kd, l)
        if not e:
            raise DepthError(f"no edges from state {l} at depth {kd.depth}")
        climb.append(e[0])
    # BFS kappa_hat -> kappa
    prev = {kappa_hat: None}
    q = deque([kappa_hat])
    while q:
        u = q.popleft()
        if u == kappa:
            break
        for e in _edges_from(kd, u):
            if e.dst <= bound + 1 and e.dst not in prev:
                prev[e.dst] = e
                q.append(e.dst)
    if kappa not in prev:
        raise InputError(
            f"no path from state {kappa_hat} down to {kappa} within bound "
            f"{bound} (falls go to Q(l+1); this family may not descend)"
        )
    path = []
    u = kappa
    while prev[u] is not None:
        e = prev[u]
        path.append(e)
        u = e.src
    path.reverse()
    loop_a = tuple(climb + path)           # kappa -> kappa_hat -> kappa
    loop_b = tuple(path + climb)           # kappa_hat -> kappa -> kappa_hat
    return LoopPair(loop_a, loop_b,
                    sum(e.cost for e in loop_a),
                    sum(e.cost for e in loop_b))


# ---------------------------------------------------------------------------
# numeric first-entry maps

@dataclass(frozen=True)
class EntryRecord:
    x: float
    time: int | None      # None: no entry within the horizon
    image: float | None
    branch: tuple | None  # itinerary symbols up to entry


@dataclass(frozen=True)
class BranchStats:
    count: int
    deriv_min: float
    deriv_max: float

    @property
    def distortion(self):
        return self.deriv_max / self.deriv_min if self.deriv_min > 0 else float("inf")


@dataclass(frozen=True)
class EntryReport:
    records: tuple
    branches: dict          # branch key -> BranchStats
    boundary_reentries: int # niceness-violation hint


def _in_union(z, U, tol):
    for lo, hi in U:
        if lo + tol < z < hi - tol:
            return True
    return False


def first_entry_map(m: UnimodalMap, U, xs, horizon: int, tol=None) -> EntryReport:
    """First entry times r >= 1 into the open set U, per sample point.

    Branches are keyed by the symbol itinerary up to entry, so all points of
    one branch share it by construction; each branch reports the empirical
    range of |Df^r| (chain rule) and its distortion ratio.  U is taken as
    given -- no niceness is verified; re-entries of boundary orbits into U
    within the horizon are counted as a hint.
    """
    if tol is None:
        tol = 2.0 ** -(max(m.precision_bits // 4, 8))
    U = [(min(a, b), max(a, b)) for a, b in U]
    dom_lo, dom_hi = m.domain
    for lo, hi in U:
        if lo < dom_lo or hi > dom_hi:
            raise InputError(f"component ({lo}, {hi}) not inside the domain")
    c = m.critical_point
    records = []
    branch_derivs = {}
    for x in xs:
        z = float(x)
        sym = []
        dfr = 1.0
        entry = None
        for r in range(1, horizon + 1):
            sym.append("R" if z > c else ("L" if z < c else "C"))
            dfr *= abs(m.deriv(z))
            z = m.step(z) if isinstance(z, float) else float(m.step(z))
            if _in_union(z, U, tol):
                entry = r
                break
        if entry is None:
            records.append(EntryRecord(float(x), None, None, None))
            continue
        key = tuple(sym)
        records.append(EntryRecord(float(x), entry, z, key))
        branch_derivs.setdefault(key, []).append(dfr)
    branches = {
        key: BranchStats(len(ds), min(ds), max(ds))
        for key, ds in branch_derivs.items()
    }
    # boundary orbits of U re-entering U hint that U is not nice
    reent = 0
    for lo, hi in U:
        for b0 in (lo, hi):
            z = b0
            for _ in range(horizon):
                z = m.step(z) if isinstance(z, float) else float(m.step(z))
                if _in_union(z, U, tol):
                    reent += 1
                    break
    return EntryReport(tuple(records), branches, reent)
