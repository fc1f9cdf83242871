"""Distal cell decompositions: instantiation, the coverage / non-crossing
verifier, the intersection combinator, boolean lifting, and shatter-function
estimation.

A decomposition is a map B -> list of cells, where each cell carries an exact
membership predicate, an exact exclusion predicate I(Delta) over single
parameters, and a canonical extent key for deduplication.  Verification is
exact in one dimension (engines supply exhaustive probe sets) and probe-based
in higher dimensions: failures are always genuine, successes are certified on
the probe set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

from .families import (
    ParamFamily,
    TypeCensus,
    as_param,
    as_point,
    census_probes_1d,
    fast_truth_masks,
    type_census_probe,
)
from .rng import SplitMix64

Point = tuple[Fraction, ...]


@dataclass
class CellInstance:
    template: str
    params: tuple
    member: Callable[[Point], bool]
    excluded: Callable[[tuple], bool]  # I(Delta) membership test for one parameter
    extent_key: object = None
    meta: dict = field(default_factory=dict)


@dataclass
class Decomposition:
    name: str
    point_dim: int
    param_count: int
    instantiate_fn: Callable[[list], list[CellInstance]]
    probe_fn: Optional[Callable[[list], list[Point]]] = None
    locator_fn: Optional[Callable[[list], Callable[[Point], object]]] = None
    template_names: tuple = ()

    def instantiate(self, B: Sequence) -> list[CellInstance]:
        B = list(B)
        if len(set(B)) != len(B):
            raise ValueError("parameter set contains duplicates")
        return self.instantiate_fn(B)


@dataclass
class VerificationReport:
    covered: bool
    first_uncovered: Optional[Point]
    uncrossed: bool
    crossing_witness: Optional[tuple]  # (template, pred_idx, b, point1, point2)
    cell_count_raw: int
    cell_count_deduped: int
    census_lower_bound: int
    probe_count: int

    @property
    def count_ok(self) -> bool:
        return self.cell_count_deduped >= self.census_lower_bound

    @property
    def passed(self) -> bool:
        return self.covered and self.uncrossed and self.count_ok

    def to_dict(self) -> dict:
        return {
            "covered": self.covered,
            "first_uncovered": _fmt_point(self.first_uncovered),
            "uncrossed": self.uncrossed,
            "crossing_witness": _fmt_witness(self.crossing_witness),
            "cell_count_raw": self.cell_count_raw,
            "cell_count_deduped": self.cell_count_deduped,
            "census_lower_bound": self.census_lower_bound,
            "probe_count": self.probe_count,
            "passed": self.passed,
        }


def _fmt_point(pt):
    return None if pt is None else [str(v) for v in pt]


def _fmt_witness(w):
    if w is None:
        return None
    template, pred, b, p1, p2 = w
    return {
        "template": template,
        "pred": pred,
        "b": [str(v) for v in b],
        "points": [_fmt_point(p1), _fmt_point(p2)],
    }


def dedupe_cells(cells: list[CellInstance]) -> list[CellInstance]:
    """One representative per extent key (extensional keys are the engines'
    responsibility; cells with key None are kept as-is)."""
    seen = set()
    out = []
    for c in cells:
        if c.extent_key is None:
            out.append(c)
            continue
        if c.extent_key not in seen:
            seen.add(c.extent_key)
            out.append(c)
    return out


def verify(
    decomp: Decomposition,
    family: ParamFamily,
    B: Sequence,
    probes: Optional[Sequence] = None,
    check_exclusion: bool = True,
) -> VerificationReport:
    """Check the defining properties of a decomposition instance against an
    independent probe census.

    For |x| = 1 the engine's probe builder supplies all exact atom
    representatives, so coverage and crossing checks are exact; for |x| >= 2
    caller probes are required.
    """
    B = [as_param(b, family.param_dim) for b in B]
    cells = decomp.instantiate(B)
    raw = len(cells)

    pts: list[Point] = []
    seen_pts = set()
    if decomp.probe_fn is not None:
        for a in decomp.probe_fn(B):
            a = as_point(a, family.point_dim)
            if a not in seen_pts:
                seen_pts.add(a)
                pts.append(a)
    if probes:
        for a in probes:
            a = as_point(a, family.point_dim)
            if a not in seen_pts:
                seen_pts.add(a)
                pts.append(a)
    if not pts:
        raise ValueError("probes are required for this verification")
    pts.sort()

    cells = dedupe_cells(cells)

    # membership table, with the engine locator as an accelerator when present
    members: list[list[int]] = [[] for _ in cells]
    if decomp.locator_fn is not None:
        locate = decomp.locator_fn(cells)
        buckets: dict[object, list[int]] = {}
        unkeyed: list[int] = []
        for ci, c in enumerate(cells):
            key = c.meta.get("lockey")
            if key is None:
                unkeyed.append(ci)
            else:
                buckets.setdefault(key, []).append(ci)
        covered_flags = []
        for pi, a in enumerate(pts):
            hit = False
            for ci in buckets.get(locate(a), ()):
                if cells[ci].member(a):
                    members[ci].append(pi)
                    hit = True
            for ci in unkeyed:
                if cells[ci].member(a):
                    members[ci].append(pi)
                    hit = True
            covered_flags.append(hit)
    else:
        covered_flags = [False] * len(pts)
        for ci, c in enumerate(cells):
            mem = c.member
            for pi, a in enumerate(pts):
                if mem(a):
                    members[ci].append(pi)
                    covered_flags[pi] = True

    covered = all(covered_flags)
    first_uncovered = None
    if not covered:
        first_uncovered = pts[covered_flags.index(False)]

    # drop probe-empty duplicates for the deduped count (extensionally equal
    # cells collapse; engines with canonical keys are already distinct)
    nonempty = [ci for ci in range(len(cells)) if members[ci]]
    ext_seen = set()
    deduped = 0
    for ci in nonempty:
        key = frozenset(members[ci])
        if key not in ext_seen:
            ext_seen.add(key)
            deduped += 1

    masks = fast_truth_masks(family, B, pts)
    if masks is None:
        masks = [family.truth_mask(a, B) for a in pts]

    uncrossed = True
    witness = None
    for ci in nonempty:
        idxs = members[ci]
        m0 = masks[idxs[0]]
        for pi in idxs[1:]:
            if masks[pi] != m0:
                uncrossed = False
                diff = masks[pi] ^ m0
                bit = (diff & -diff).bit_length() - 1
                pred_idx, b_idx = divmod(bit, len(B)) if B else (0, 0)
                witness = (
                    cells[ci].template,
                    pred_idx,
                    B[b_idx] if B else (),
                    pts[idxs[0]],
                    pts[pi],
                )
                break
        if not uncrossed:
            break

    if check_exclusion:
        # validate the I(Delta) implementation against its definition; on
        # large instances a deterministic stride subsample keeps this O(5000)
        pairs = [(ci, b) for ci in nonempty for b in B]
        stride = max(1, len(pairs) // 5000)
        for ci, b in pairs[::stride]:
            if cells[ci].excluded(b):
                raise AssertionError(
                    f"exclusion violated: emitted cell {cells[ci].template} excluded by {b}"
                )

    census = len({m for m in masks})
    return VerificationReport(
        covered=covered,
        first_uncovered=first_uncovered,
        uncrossed=uncrossed,
        crossing_witness=witness,
        cell_count_raw=raw,
        cell_count_deduped=deduped,
        census_lower_bound=census,
        probe_count=len(pts),
    )


def boolean_lift(
    decomp: Decomposition,
    base_family: ParamFamily,
    derived_family: ParamFamily,
    B: Sequence,
    probes: Optional[Sequence] = None,
) -> VerificationReport:
    """Verify a decomposition built for a base family against a family of
    boolean combinations of its predicates; non-crossing must carry over."""
    if decomp.probe_fn is None and probes is None:
        probes = census_probes_1d(base_family, B)
    return verify(decomp, derived_family, B, probes=probes)


def intersect(decomps: list[Decomposition]) -> Decomposition:
    """Product decomposition: cells are nonempty intersections, exclusion sets
    are unions; valid for the union of the input families."""
    if not decomps:
        raise ValueError("need at least one decomposition")
    dim = decomps[0].point_dim
    if any(d.point_dim != dim for d in decomps):
        raise ValueError("point dimension mismatch")

    def inst(B: list) -> list[CellInstance]:
        layers = [d.instantiate(B) for d in decomps]
        combos: list[list[CellInstance]] = [[]]
        for layer in layers:
            combos = [prev + [c] for prev in combos for c in layer]
        cells = []
        for combo in combos:
            ivs = [c.meta.get("interval") for c in combo]
            meta = {}
            if all(iv is not None for iv in ivs):
                from .linear import iv_intersect

                cur = ivs[0]
                for iv in ivs[1:]:
                    cur = iv_intersect(cur, iv)
                if cur.is_empty():
                    continue
                meta["interval"] = cur
            parts = tuple(c for c in combo)
            cells.append(
                CellInstance(
                    template="cap(" + ",".join(c.template for c in parts) + ")",
                    params=tuple(p for c in parts for p in c.params),
                    member=lambda a, parts=parts: all(c.member(a) for c in parts),
                    excluded=lambda b, parts=parts: any(c.excluded(b) for c in parts),
                    extent_key=tuple(c.extent_key for c in parts),
                    meta=meta,
                )
            )
        return cells

    def probe_union(B: list) -> list[Point]:
        pts: list[Point] = []
        seen = set()
        for d in decomps:
            if d.probe_fn is None:
                continue
            for a in d.probe_fn(B):
                if a not in seen:
                    seen.add(a)
                    pts.append(a)
        return pts

    has_probes = any(d.probe_fn is not None for d in decomps)
    return Decomposition(
        name="cap(" + ",".join(d.name for d in decomps) + ")",
        point_dim=dim,
        param_count=sum(d.param_count for d in decomps),
        instantiate_fn=inst,
        probe_fn=probe_union if has_probes else None,
    )


@dataclass
class ShatterRow:
    n: int
    trial: int
    cells_raw: int
    cells_deduped: int


@dataclass
class ShatterTable:
    rows: list[ShatterRow]
    sizes: list[int]
    max_counts: list[int]
    slope: float
    degenerate: bool

    def to_rows(self) -> list[dict]:
        return [
            {"n": r.n, "trial": r.trial, "cells_raw": r.cells_raw, "cells_deduped": r.cells_deduped}
            for r in self.rows
        ]


def fit_loglog_slope(sizes: Sequence[int], counts: Sequence[int]) -> tuple[float, bool]:
    """Least-squares slope of log(count) against log(n).  Degenerate tables
    (all counts 0 or 1) report slope 0 with a flag."""
    pairs = [(n, c) for n, c in zip(sizes, counts) if c >= 1]
    if len(pairs) < 2 or all(c <= 1 for _, c in pairs):
        return 0.0, True
    xs = [math.log(n) for n, _ in pairs]
    ys = [math.log(c) for _, c in pairs]
    mx = sum(xs) / len(xs)
    my = sum(ys) / len(ys)
    var = sum((x - mx) ** 2 for x in xs)
    if var == 0:
        return 0.0, True
    cov = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    return cov / var, False


def shatter_estimate(
    decomp: Decomposition,
    generator: Callable[[SplitMix64, int], list],
    sizes: Sequence[int],
    trials: int,
    seed: int,
    threads: int = 1,
) -> ShatterTable:
    """Max deduped cell count per size over seeded trials, plus the fitted
    log-log slope.  Trials use split PRNG streams, so thread count does not
    change results."""
    master = SplitMix64(seed)
    tasks = [(n, t) for n in sizes for t in range(trials)]

    def run(task: tuple[int, int]) -> ShatterRow:
        n, t = task
        rng = master.split(n, t)
        B = generator(rng, n)
        cells = decomp.instantiate(B)
        ded = dedupe_cells(cells)
        return ShatterRow(n=n, trial=t, cells_raw=len(cells), cells_deduped=len(ded))

    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as ex:
            rows = list(ex.map(run, tasks))
    else:
        rows = [run(t) for t in tasks]

    max_counts = []
    for n in sizes:
        max_counts.append(max(r.cells_deduped for r in rows if r.n == n))
    slope, degenerate = fit_loglog_slope(list(sizes), max_counts)
    return ShatterTable(rows, list(sizes), max_counts, slope, degenerate)
