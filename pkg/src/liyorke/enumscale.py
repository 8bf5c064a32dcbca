"""Enumeration-scale odometer over a cutting-time sequence.

Non-negative integers get a canonical greedy representation n = sum e_j S_j
over the cutting times of a kneading structure.  The digit sequences form
the scale: 0/1 sequences where e_i = 1 forces e_j = 0 for Q(i+1) <= j < i.
Adding one is the odometer ("add and carry"); projecting a sequence through
the fractional parts of rho * S_k gives a circle point that intertwines the
odometer with the rotation by rho.

Only finite truncations are represented; the tail of an infinite sequence
enters solely through an explicit bound.
"""

from __future__ import annotations

from dataclasses import dataclass

import mpmath as mp

from .errors import AdmissibilityError, InputError, OdometerOverflowError
from .kneading import KneadingData

__all__ = [
    "EnumSequence",
    "encode",
    "decode",
    "add_one",
    "project",
    "ProjectResult",
    "admissibility_violation",
    "random_admissible",
    "to_text",
    "from_text",
]


def admissibility_violation(bits, kd: KneadingData):
    """Return the first violating pair (j, i) with e_i = 1, e_j = 1, Q(i+1) <= j < i.

    None means admissible.  Q must be computed through len(bits).
    """
    if len(bits) > kd.depth:
        raise InputError(
            f"sequence length {len(bits)} exceeds kneading depth {kd.depth}"
        )
    for i, b in enumerate(bits):
        if b not in (0, 1):
            raise AdmissibilityError(f"digit e_{i} = {b} is not 0/1")
        if b == 1:
            lo = kd.Q(i + 1)
            for j in range(lo, i):
                if bits[j] == 1:
                    return (j, i)
    return None


@dataclass(frozen=True)
class EnumSequence:
    """A finite admissible 0/1 digit sequence, lowest index first."""

    bits: tuple[int, ...]
    kd: KneadingData

    def __post_init__(self):
        v = admissibility_violation(self.bits, self.kd)
        if v is not None:
            raise AdmissibilityError(
                f"digits {v[0]} and {v[1]} are both set but Q({v[1]+1}) <= {v[0]}"
            )

    def __len__(self):
        return len(self.bits)

    def __str__(self):
        return "".join(str(b) for b in self.bits)


def encode(n: int, kd: KneadingData, length: int | None = None) -> EnumSequence:
    """Greedy-from-the-top representation of n over the cutting times.

    Takes the largest cutting time <= the remaining value, repeatedly.
    Requires n < S_depth so the result round-trips within the computed range.
    """
    if n < 0:
        raise InputError(f"cannot encode negative value {n}")
    if n >= kd.S(kd.depth):
        raise OdometerOverflowError(
            f"{n} >= S_depth = {kd.S(kd.depth)}; extend the kneading data"
        )
    m = length if length is not None else kd.depth
    bits = [0] * m
    rem = n
    for j in range(kd.depth, -1, -1):
        if kd.S(j) <= rem:
            if j >= m:
                raise InputError(f"encode({n}) needs index {j}, length {m} given")
            bits[j] = 1
            rem -= kd.S(j)
    assert rem == 0
    return EnumSequence(tuple(bits), kd)


def decode(e: EnumSequence) -> int:
    """Exact integer sum e_j S_j (input admissibility enforced at construction)."""
    return sum(kd_S for b, kd_S in zip(e.bits, e.kd.cutting_times) if b)


def _carry(bits: list[int], kd: KneadingData) -> list[int]:
    """Normalize after incrementing digit 0, by the two rewrite moves:

    * a digit 2 at position p (possible only when Q(p+1) = p, so that
      2 S_p = S_p + S_{Q(p+1)} = S_{p+1}): clear it, carry into p+1;
    * digits at p and i with p = Q(i+1): clear both, carry into i+1.

    Each move preserves the represented value exactly.
    """
    p = 0
    while True:
        if p >= len(bits):
            raise OdometerOverflowError("carry past the end of the sequence")
        if bits[p] == 2:
            if p + 1 > kd.depth or kd.Q(p + 1) != p:
                # cannot happen for admissible input; guard anyway
                raise AdmissibilityError(f"unresolvable double digit at {p}")
            bits[p] = 0
            if p + 1 >= len(bits):
                raise OdometerOverflowError("carry past the end of the sequence")
            bits[p + 1] += 1
            p += 1
            continue
        # bits[p] == 1: the only possible violation pairs p with the next set
        # digit above it
        i = next((j for j in range(p + 1, len(bits)) if bits[j] == 1), None)
        if i is not None and i + 1 <= kd.depth and kd.Q(i + 1) <= p:
            bits[p] = 0
            bits[i] = 0
            if i + 1 >= len(bits):
                raise OdometerOverflowError("carry past the end of the sequence")
            bits[i + 1] += 1
            p = i + 1
            continue
        return bits


def add_one(e: EnumSequence, cross_check: bool = True) -> EnumSequence:
    """Odometer step: decode(add_one(e)) = decode(e) + 1.

    Implemented by direct carry rewriting; by default the result is
    cross-checked against encode(decode(e) + 1), which must agree.
    """
    bits = list(e.bits)
    if not bits:
        raise OdometerOverflowError("empty sequence cannot be incremented")
    bits[0] += 1
    bits = _carry(bits, e.kd)
    out = EnumSequence(tuple(bits), e.kd)
    if cross_check:
        ref = encode(decode(e) + 1, e.kd, length=len(bits))
        if ref.bits != out.bits:
            raise AssertionError(
                f"carry/encode disagreement at n={decode(e)}: {out} vs {ref}"
            )
    return out


@dataclass(frozen=True)
class ProjectResult:
    value: float
    tail_bound: float | None


def project(e: EnumSequence, rho, trunc: int | None = None, decay=None,
            prec: int | None = None) -> ProjectResult:
    """Partial sum of e_k * fp(rho S_k) over k < trunc, reduced mod 1 to [0,1).

    ``rho`` must carry enough precision that rho * S_k keeps its fractional
    part: at least bit_length(S_trunc) + 64 mantissa bits.  Pass ``prec`` to
    override (a too-small value raises).  ``decay=(C, r)`` supplies a
    geometric model |fp(rho S_k)| <= C r^k, from which the tail bound
    sum_{k >= trunc} C r^k is reported.
    """
    from .algebra import fp  # local import; algebra imports nothing from here

    kd = e.kd
    m = len(e.bits) if trunc is None else min(trunc, len(e.bits))
    need = kd.S(min(m, kd.depth)).bit_length() + 64
    if prec is not None and prec < need:
        raise _precision_error(prec, need)
    work = prec if prec is not None else need
    with mp.workprec(work):
        r = mp.mpf(rho) if not isinstance(rho, mp.mpf) else rho
        total = mp.mpf(0)
        for k in range(m):
            if e.bits[k]:
                total += fp(r * kd.S(k))
        val = total % 1
        out = float(val)
    if out >= 1.0:  # float rounding at the seam
        out = 0.0
    bound = None
    if decay is not None:
        C, rate = decay
        if not 0 < rate < 1:
            raise InputError(f"decay rate must be in (0,1), got {rate}")
        bound = C * rate ** m / (1 - rate)
    return ProjectResult(out, bound)


def _precision_error(given, need):
    from .errors import PrecisionError

    return PrecisionError(
        f"projection needs >= {need} mantissa bits, {given} given"
    )


def random_admissible(kd: KneadingData, max_index: int, rng,
                      density: float = 0.5) -> EnumSequence:
    """Draw an admissible sequence supported on indices < max_index.

    Scans from the top; a digit may be set only below the forbidden window
    of the digit set above it, which keeps the result admissible by
    construction.
    """
    if max_index > kd.depth:
        raise InputError(f"max_index {max_index} exceeds depth {kd.depth}")
    bits = [0] * max_index
    ceiling = max_index  # next digit must sit at an index < ceiling
    i = max_index - 1
    while i >= 0:
        if i < ceiling and rng.random() < density:
            bits[i] = 1
            ceiling = kd.Q(i + 1)
            i = ceiling - 1
        else:
            i -= 1
    return EnumSequence(tuple(bits), kd)


def to_text(e: EnumSequence) -> str:
    """Compact 0/1 string, lowest index first, plus the kneading name."""
    return f"{e} {e.kd.name or 'unnamed'}"


def from_text(line: str, kd: KneadingData) -> EnumSequence:
    parts = line.split()
    if not parts:
        raise InputError("empty enum-sequence line")
    if len(parts) > 1 and kd.name and parts[1] != kd.name:
        raise InputError(f"sequence is relative to {parts[1]!r}, not {kd.name!r}")
    bits = tuple(int(ch) for ch in parts[0])
    return EnumSequence(bits, kd)
