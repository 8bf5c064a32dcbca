"""Exact integer algebra of kneading maps and cutting times.

A kneading map Q generates cutting times through the recursion

    S_0 = 1,   S_k = S_{k-1} + S_{Q(k)}   with 0 <= Q(k) < k.

Everything here is exact: cutting times are arbitrary-size Python ints
(they grow geometrically; 64-bit machine words overflow near k ~ 90 for
the golden-ratio family).
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field

from .errors import DepthError, InputError

__all__ = [
    "QRule",
    "KneadingData",
    "cutting_times",
    "beta",
    "q_from_cutting_times",
    "is_renormalizable",
    "RenormVerdict",
    "check_relation_5fib",
    "six_periodic_correction",
    "max_gap",
    "to_text",
    "from_text",
    "fibonacci_rule",
    "feigenbaum_rule",
    "gap_rule",
    "doubled_example_rule",
]


@dataclass(frozen=True)
class QRule:
    """Kneading map rule: tabulated values plus an optional closed-form tail.

    ``table[i]`` holds Q(i+1).  Past the table, ``tail_gap = d`` means
    Q(k) = max(k - d, 0).  A rule with no tail is only defined up to its
    table length.
    """

    table: tuple[int, ...] = ()
    tail_gap: int | None = None
    name: str = ""

    def __call__(self, k: int) -> int:
        if k < 1:
            raise InputError(f"kneading map is defined for k >= 1, got k={k}")
        if k <= len(self.table):
            return self.table[k - 1]
        if self.tail_gap is None:
            raise DepthError(
                f"Q({k}) requested but rule '{self.name or self.table}' is "
                f"tabulated only through k={len(self.table)} and has no tail"
            )
        return max(k - self.tail_gap, 0)

    def defined_through(self, k_max: int) -> bool:
        return self.tail_gap is not None or len(self.table) >= k_max


def gap_rule(d: int, name: str = "") -> QRule:
    """Q(k) = max(k - d, 0).  d=2 is the golden-ratio family, d=1 doubling."""
    if d < 1:
        raise InputError(f"gap must be >= 1, got {d}")
    return QRule(tail_gap=d, name=name or f"gap{d}")


def fibonacci_rule() -> QRule:
    return gap_rule(2, "fib")


def feigenbaum_rule() -> QRule:
    return gap_rule(1, "feigenbaum")


def doubled_example_rule() -> QRule:
    """The doubled-cutting-time rule: S = 1,2,3,4,6,8,10,12 then S_k = S_{k-1} + S_{k-5}.

    The hand-listed prefix is not generated by a pure gap rule, so it is
    stored tabulated; the tail takes over at k = 8.
    """
    return QRule(table=(0, 0, 0, 1, 1, 1, 1), tail_gap=5, name="doubled-example")


_NAMED_RULES = {
    "fib": fibonacci_rule,
    "fibonacci": fibonacci_rule,
    "feigenbaum": feigenbaum_rule,
    "doubled-example": doubled_example_rule,
}


def rule_by_name(spec: str) -> QRule:
    """Resolve a rule spec: a known name, ``gap:<d>``, or ``table:q1,q2,...``."""
    spec = spec.strip()
    if spec in _NAMED_RULES:
        return _NAMED_RULES[spec]()
    if spec.startswith("gap:"):
        return gap_rule(int(spec[4:]))
    if spec.startswith("table:"):
        vals = tuple(int(t) for t in spec[6:].split(",") if t.strip())
        return QRule(table=vals, name=spec)
    raise InputError(f"unknown kneading rule spec: {spec!r}")


@dataclass(frozen=True)
class KneadingData:
    """A kneading map together with its computed cutting times S_0..S_depth."""

    q: QRule
    cutting_times: tuple[int, ...]
    name: str = ""
    _index: dict = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(
            self, "_index", {s: i for i, s in enumerate(self.cutting_times)}
        )

    @property
    def depth(self) -> int:
        return len(self.cutting_times) - 1

    def S(self, k: int) -> int:
        if not 0 <= k <= self.depth:
            raise DepthError(f"S_{k} not computed (depth {self.depth})")
        return self.cutting_times[k]

    def Q(self, k: int) -> int:
        if not 1 <= k <= self.depth:
            raise DepthError(f"Q({k}) outside computed range 1..{self.depth}")
        return self.q(k)

    def index_of(self, s: int) -> int:
        """Index k with S_k = s, or raise."""
        try:
            return self._index[s]
        except KeyError:
            raise DepthError(f"{s} is not a computed cutting time") from None

    def is_cutting(self, n: int) -> bool:
        return n in self._index


def cutting_times(q_rule: QRule, k_max: int, name: str = "") -> KneadingData:
    """Run the recursion S_k = S_{k-1} + S_{Q(k)} out to k_max, exactly.

    Rejects rules with Q(k) < 0 or Q(k) >= k; a rule that is undefined
    before k_max (finite kneading map) is rejected as well.
    """
    if k_max < 0:
        raise InputError(f"k_max must be >= 0, got {k_max}")
    if not q_rule.defined_through(k_max):
        raise InputError(
            f"q rule {q_rule.name!r} undefined through k={k_max}; "
            "finite kneading maps are not representable"
        )
    S = [1]
    for k in range(1, k_max + 1):
        qk = q_rule(k)
        if not 0 <= qk < k:
            raise InputError(f"kneading map must satisfy 0 <= Q(k) < k; Q({k}) = {qk}")
        S.append(S[k - 1] + S[qk])
    return KneadingData(q=q_rule, cutting_times=tuple(S), name=name or q_rule.name)


def beta(n: int, kd: KneadingData) -> int:
    """beta(n) = n minus the largest cutting time strictly below n (n >= 2)."""
    if n < 2:
        raise InputError(f"beta is defined for n >= 2, got {n}")
    if n > kd.S(kd.depth):
        raise DepthError(f"beta({n}) beyond computed cutting times (S_depth = {kd.S(kd.depth)})")
    i = bisect.bisect_left(kd.cutting_times, n)
    return n - kd.cutting_times[i - 1]


def q_from_cutting_times(S, name: str = "") -> KneadingData:
    """Invert the recursion: recover Q from a cutting-time sequence.

    Every difference S_k - S_{k-1} must itself be a cutting time; the first
    k violating this is reported.  Round-trips with :func:`cutting_times`.
    """
    S = list(S)
    if not S or S[0] != 1:
        raise InputError("cutting times must start with S_0 = 1")
    index = {}
    q_vals = []
    for k, s in enumerate(S):
        if k > 0:
            if s <= S[k - 1]:
                raise InputError(f"cutting times must be strictly increasing (k={k})")
            diff = s - S[k - 1]
            if diff not in index:
                raise InputError(
                    f"inadmissible sequence: S_{k} - S_{k-1} = {diff} "
                    f"is not a cutting time"
                )
            q_vals.append(index[diff])
        index[s] = k
    rule = QRule(table=tuple(q_vals), name=name or "tabulated")
    return KneadingData(q=rule, cutting_times=tuple(S), name=name or "tabulated")


@dataclass(frozen=True)
class RenormVerdict:
    renormalizable: bool
    k: int | None
    period: int | None
    horizon: int

    def __str__(self):
        if self.renormalizable:
            return (
                f"yes(k={self.k}, period={self.period}) "
                f"[certified up to horizon {self.horizon}]"
            )
        return f"no-within-horizon({self.horizon})"


def is_renormalizable(kd: KneadingData, horizon: int) -> RenormVerdict:
    """Search for the least k >= 1 with k = Q(k+1) <= Q(k+j) for 1 < j <= horizon-k.

    The defining condition quantifies over all j, so a "yes" here is
    certified only up to the horizon; the verdict carries that caveat.
    """
    if horizon > kd.depth:
        raise DepthError(f"horizon {horizon} exceeds computed depth {kd.depth}")
    for k in range(1, horizon):
        if kd.Q(k + 1) != k:
            continue
        if all(kd.Q(k + j) >= k for j in range(2, horizon - k + 1)):
            return RenormVerdict(True, k, kd.S(k), horizon)
    return RenormVerdict(False, None, None, horizon)


def six_periodic_correction(k: int) -> int:
    """+1 for k = 2,3 mod 6; -1 for k = 5,0 mod 6; 0 for k = 1,4 mod 6."""
    r = k % 6
    if r in (2, 3):
        return 1
    if r in (5, 0):
        return -1
    return 0


def check_relation_5fib(kd: KneadingData, k_range) -> list[tuple[int, int, int, int]]:
    """Residuals of S_k = S_{k-2} + S_{k-3} + correction(k) for the gap-5 family.

    Returns (k, lhs, rhs, residual) rows; all residuals are zero when kd was
    built from Q(k) = max(k-5, 0).  Exact integer arithmetic throughout.
    """
    rows = []
    for k in k_range:
        if k < 3:
            raise InputError(f"relation needs k >= 3, got {k}")
        lhs = kd.S(k)
        rhs = kd.S(k - 2) + kd.S(k - 3) + six_periodic_correction(k)
        rows.append((k, lhs, rhs, lhs - rhs))
    return rows


def max_gap(kd: KneadingData) -> int:
    """max(k - Q(k)) over the computed range; equals d for Q(k) = max(k-d, 0)."""
    return max(k - kd.Q(k) for k in range(1, kd.depth + 1))


def to_text(kd: KneadingData) -> str:
    """Serialize: header line then one ``k Q(k) S_k`` line per index."""
    lines = [f"#kneading v1 {kd.name}".rstrip()]
    lines.append(f"0 - {kd.S(0)}")
    for k in range(1, kd.depth + 1):
        lines.append(f"{k} {kd.Q(k)} {kd.S(k)}")
    return "\n".join(lines) + "\n"


def from_text(text: str) -> KneadingData:
    """Parse the ``#kneading v1`` format back into tabulated KneadingData."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("#kneading v1"):
        raise InputError("missing '#kneading v1' header")
    name = lines[0][len("#kneading v1"):].strip()
    S = []
    for ln in lines[1:]:
        parts = ln.split()
        if len(parts) != 3:
            raise InputError(f"malformed kneading line: {ln!r}")
        S.append(int(parts[2]))
    kd = q_from_cutting_times(S, name=name)
    return kd
