"""Closed-form query and ancilla bounds, evaluated exactly where possible.

Combinatorial bounds use exact integer arithmetic.  Logarithmic bounds resolve
ties at integer boundaries by exact rational comparison: a fidelity F with
F^(N/2) (K-1) = 1 exactly means N is still insufficient, because linear
independence needs the strict inequality.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .gatesets import GateSet

__all__ = [
    "BoundEntry",
    "BoundsReport",
    "DimensionalBound",
    "dimensional_min_queries",
    "linear_upper_bound",
    "copies_for_unambiguous",
    "ancilla_bounds",
    "extra_queries_bound",
    "AncillaFreeQueries",
    "ancilla_free_group_min_queries",
    "assemble_report",
]


def _exact(value) -> Fraction:
    """Exact rational view of a number.  A float very close to a simple
    fraction (within one part in 1e15) is snapped to it, so literal inputs
    like 1/3 get the tie-breaking the exact value would."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    f = float(value)
    exact = Fraction(f)
    snapped = exact.limit_denominator(10**9)
    if abs(snapped - exact) <= Fraction(1, 10**15) * max(abs(exact), Fraction(1)):
        return snapped
    return exact


@dataclass
class BoundEntry:
    name: str
    kind: str  # lower | upper | feasibility
    value: float
    eq_tag: str

    def to_jsonable(self) -> dict:
        value = self.value
        if isinstance(value, float) and value.is_integer():
            pass
        return {
            "name": self.name,
            "kind": self.kind,
            "value": value if isinstance(value, int) else float(value),
            "eq_tag": self.eq_tag,
        }


@dataclass
class BoundsReport:
    entries: list = field(default_factory=list)
    consistency_flags: list = field(default_factory=list)
    measured_n_min: Optional[int] = None

    def add(self, name: str, kind: str, value, eq_tag: str) -> None:
        if kind not in ("lower", "upper", "feasibility"):
            raise ValueError(f"kind must be lower/upper/feasibility, got {kind!r}")
        self.entries.append(BoundEntry(name, kind, value, eq_tag))

    def to_jsonable(self) -> dict:
        return {
            "entries": [e.to_jsonable() for e in self.entries],
            "consistency_flags": list(self.consistency_flags),
            "measured_n_min": self.measured_n_min,
        }

    def to_markdown(self) -> str:
        lines = ["| name | kind | value | eq_tag |", "| --- | --- | --- | --- |"]
        for e in self.entries:
            value = e.value if isinstance(e.value, int) else f"{float(e.value):.6g}"
            lines.append(f"| {e.name} | {e.kind} | {value} | {e.eq_tag} |")
        if self.measured_n_min is not None:
            lines.append(f"| measured minimum queries | measured | {self.measured_n_min} | - |")
        for flag in self.consistency_flags:
            lines.append(f"| FLAG | - | - | {flag} |")
        return "\n".join(lines)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["name", "kind", "value", "eq_tag"])
        for e in self.entries:
            writer.writerow([e.name, e.kind, e.value, e.eq_tag])
        return buf.getvalue()


@dataclass
class DimensionalBound:
    n_queries: int
    crude_estimate: float


def dimensional_min_queries(card: int, d: int) -> DimensionalBound:
    """Least N whose symmetric-space dimension binom(N + d^2 - 1, d^2 - 1) can
    hold ``card`` independent tensor powers, plus the crude estimate
    card^(1/(d^2-1)) - 1 that gives the large-set scaling."""
    if card < 2 or d < 2:
        raise ValueError("requires card >= 2 and d >= 2")
    k = d * d - 1
    n = 1
    while math.comb(n + k, k) < card:
        n += 1
    return DimensionalBound(n, card ** (1.0 / k) - 1.0)


def linear_upper_bound(card: int, dim_u: int) -> int:
    """Queries never exceed |U| - dim(U) + 1: the span grows by at least one
    independent direction per extra parallel query until it saturates."""
    if not 1 <= dim_u <= card:
        raise ValueError("requires 1 <= dim_u <= card")
    return card - dim_u + 1


def copies_for_unambiguous(F, K: int) -> int:
    """Copies guaranteeing linear independence of K pure states with maximum
    pairwise squared overlap F: the least N with F^(N/2) (K-1) < 1 strictly,
    i.e. floor(log(K-1)/log(F^(-1/2))) + 1.  Exact-tie inputs (for example
    F = 1/3, K = 4) land on the insufficient side and move up by one."""
    if K < 2:
        raise ValueError("requires K >= 2")
    f = _exact(F)
    if not 0 <= f < 1:
        raise ValueError(f"requires 0 <= F < 1, got {F!r}")
    if f == 0 or K == 2:
        return 1
    # condition at N: F^N (K-1)^2 < 1  (the squared form avoids square roots)
    target = Fraction((K - 1) ** 2)
    guess = math.floor(math.log(K - 1) / math.log(float(f) ** -0.5)) + 1
    if guess > 512:
        return guess
    n = 1
    while f**n * target >= 1:
        n += 1
    return n


def ancilla_bounds(
    N: int,
    d: int,
    group_order: Optional[int] = None,
    commuting: bool = False,
    young_bound: Optional[int] = None,
) -> list:
    """Upper bounds on the ancilla dimension for unambiguous identification.

    Always includes the universal binomial bound binom(N + d - 1, d - 1).  A
    finite group of known order adds the sqrt(|G|) bound (reported as the real
    value plus its integer ceiling); commuting gates need no ancilla at all;
    a caller-computed irrep-ratio value is appended verbatim when given.
    """
    if N < 1 or d < 2:
        raise ValueError("requires N >= 1 and d >= 2")
    entries = [
        BoundEntry(
            "ancilla binomial bound",
            "upper",
            math.comb(N + d - 1, d - 1),
            "ancilla-binomial",
        )
    ]
    if group_order is not None:
        if group_order < 1:
            raise ValueError("group_order must be >= 1")
        root = math.isqrt(group_order)
        ceil_root = root if root * root == group_order else root + 1
        entries.append(
            BoundEntry(
                "ancilla group-size bound", "upper", math.sqrt(group_order), "ancilla-sqrt-group"
            )
        )
        entries.append(
            BoundEntry(
                "ancilla group-size bound (ceiling)", "upper", ceil_root, "ancilla-sqrt-group"
            )
        )
    if commuting:
        entries.append(
            BoundEntry("ancilla for commuting gates", "upper", 1, "ancilla-commuting")
        )
    if young_bound is not None:
        entries.append(
            BoundEntry("ancilla irrep-ratio bound", "upper", int(young_bound), "ancilla-irrep-ratio")
        )
    return entries


def extra_queries_bound(d_A: int, group_order: int, d: int) -> int:
    """Extra queries that replace a d_A-dimensional ancilla for group gate
    sets: ceil(log_d(d_A * sqrt(|G|))), computed exactly as the least M with
    d^(2M) >= d_A^2 |G|."""
    if d_A < 1 or group_order < 1 or d < 2:
        raise ValueError("requires d_A >= 1, group_order >= 1, d >= 2")
    target = d_A * d_A * group_order
    m = 0
    while d ** (2 * m) < target:
        m += 1
    return m


@dataclass
class AncillaFreeQueries:
    n_queries: Optional[int]
    note: str
    bracket: Optional[tuple] = None


def ancilla_free_group_min_queries(
    d: int,
    group_order: int,
    F_ent,
    C: int,
    alpha: Optional[float] = None,
    n_cap: int = 64,
) -> AncillaFreeQueries:
    """Queries sufficient for perfect ancilla-free identification of a group:
    the least N with d^N (1 - F_ent^(N/2) C) >= |G|.

    F_ent is the largest squared normalized trace over non-identity elements
    and C counts elements with nonzero trace.  When F_ent = 0 this reduces to
    ceil(log_d |G|), which is optimal.  The criterion is sufficient, not
    necessary, so exhausting the search cap reports infeasibility by this
    criterion rather than impossibility.  With ``alpha`` given and the
    log-ratio condition satisfied, the result carries the bracket
    [ceil(log_d |G|), ceil(log_d |G|) + log_d(1/alpha)] for the true value.
    """
    if d < 2 or group_order < 1 or C < 0:
        raise ValueError("requires d >= 2, group_order >= 1, C >= 0")
    f = _exact(F_ent)
    if not 0 <= f <= 1:
        raise ValueError(f"requires 0 <= F_ent <= 1, got {F_ent!r}")
    n_found = None
    for n in range(1, n_cap + 1):
        lhs = d**n - group_order
        if lhs < 0:
            continue
        # d^n - |G| >= d^n C F^(n/2), squared to stay rational
        if Fraction(lhs) ** 2 >= Fraction(d ** (2 * n)) * C * C * f**n:
            n_found = n
            break
    bracket = None
    if alpha is not None and 0 < alpha < 1 and 0 < f < 1 and C > 0:
        log_dg = math.log(group_order) / math.log(d)
        lhs = math.log(C / (1.0 - alpha)) / math.log(float(f) ** -0.5)
        if lhs <= log_dg:
            floor_n = 0  # ceil(log_d |G|), exactly
            while d**floor_n < group_order:
                floor_n += 1
            bracket = (floor_n, floor_n + math.log(1.0 / alpha) / math.log(d))
    if n_found is None:
        return AncillaFreeQueries(
            None,
            f"no N <= {n_cap} satisfies the criterion (sufficient, not necessary)",
            bracket,
        )
    note = f"criterion met at N = {n_found}"
    if f == 0:
        note += " (zero overlap with the identity: this is the optimal packing value)"
    return AncillaFreeQueries(n_found, note, bracket)


def assemble_report(
    g: GateSet,
    dim_u: int,
    measured_n_min: Optional[int] = None,
    fidelity=None,
    group_order: Optional[int] = None,
    commuting: bool = False,
    ancilla_queries: Optional[int] = None,
    young_bound: Optional[int] = None,
) -> BoundsReport:
    """Merge all applicable bounds for a gate set and cross-check consistency.

    Flags any query lower bound exceeding a query upper bound, and a measured
    minimum query count falling outside [dimensional lower, min(linear,
    fidelity) upper].
    """
    report = BoundsReport()
    card, d = g.size, g.dimension
    dimensional = dimensional_min_queries(card, d)
    report.add("queries dimensional lower bound", "lower", dimensional.n_queries, "dim-lower")
    report.add(
        "queries crude dimensional estimate", "lower", dimensional.crude_estimate, "dim-crude"
    )
    linear = linear_upper_bound(card, dim_u)
    report.add("queries linear upper bound", "upper", linear, "linear-upper")
    uppers = [linear]
    if fidelity is not None and fidelity < 1.0:
        fid_bound = copies_for_unambiguous(fidelity, card)
        report.add("queries fidelity upper bound", "upper", fid_bound, "fidelity-upper")
        uppers.append(fid_bound)
    if ancilla_queries is not None:
        for entry in ancilla_bounds(ancilla_queries, d, group_order, commuting, young_bound):
            report.entries.append(entry)
    lower = dimensional.n_queries
    for up in uppers:
        if lower > up:
            report.consistency_flags.append(
                f"query lower bound {lower} exceeds an upper bound {up}"
            )
    if measured_n_min is not None:
        report.measured_n_min = int(measured_n_min)
        if measured_n_min < lower:
            report.consistency_flags.append(
                f"measured N_min = {measured_n_min} is below the dimensional lower bound {lower}"
            )
        if uppers and measured_n_min > min(uppers):
            report.consistency_flags.append(
                f"measured N_min = {measured_n_min} exceeds the best upper bound {min(uppers)}"
            )
    return report
