from fractions import Fraction as F

from distalcells.decomp import (
    boolean_lift,
    dedupe_cells,
    fit_loglog_slope,
    intersect,
    shatter_estimate,
    verify,
    Decomposition,
    CellInstance,
)
from distalcells.families import semilinear_family
from distalcells.linear import f_atom, f_not, f_or, f_and
from distalcells.omin1d import build_decomposition
from distalcells.rng import SplitMix64


def _x_lt_y():
    return semilinear_family([f_atom([1, -1], 0, "<")], 1, 1)


def _x_le_shift(c):
    return semilinear_family([f_atom([1, -1], -c, "<=")], 1, 1)


def _trivial_decomp():
    from distalcells.linear import Iv

    def inst(B):
        return [
            CellInstance(
                template="full", params=(),
                member=lambda a: True, excluded=lambda b: False,
                extent_key=("full",), meta={"interval": Iv.full()},
            )
        ]

    return Decomposition("trivial", 1, 0, inst, probe_fn=lambda B: [(F(0),)])


def test_intersect_singleton_is_identity():
    fam = _x_lt_y()
    d = build_decomposition(fam)
    cap = intersect([d])
    B = [F(0), F(2)]
    assert len(dedupe_cells(cap.instantiate(B))) == len(dedupe_cells(d.instantiate(B)))
    rep = verify(cap, fam, B)
    assert rep.passed


def test_intersect_two_chains():
    fam1 = _x_lt_y()
    fam2 = _x_le_shift(F(1, 2))
    d1, d2 = build_decomposition(fam1), build_decomposition(fam2)
    cap = intersect([d1, d2])
    B = [F(0), F(2)]
    cells = cap.instantiate(B)
    assert len(cells) <= len(d1.instantiate(B)) * len(d2.instantiate(B))
    # nonempty intersections only
    for c in cells:
        assert not c.meta["interval"].is_empty()
    union = semilinear_family(
        [f_atom([1, -1], 0, "<"), f_atom([1, -1], F(-1, 2), "<=")], 1, 1
    )
    rep = verify(cap, union, B)
    assert rep.covered and rep.uncrossed


def test_intersect_with_trivial_is_identity_extent():
    fam = _x_lt_y()
    d = build_decomposition(fam)
    cap = intersect([d, _trivial_decomp()])
    B = [F(0), F(2)]
    ivs1 = sorted(str(c.meta["interval"]) for c in cap.instantiate(B))
    ivs2 = sorted(str(c.meta["interval"]) for c in d.instantiate(B))
    assert ivs1 == ivs2


def test_intersect_preserves_validity_random():
    rng = SplitMix64(314)
    for _ in range(10):
        c1, c2 = rng.fraction(5, 2), rng.fraction(5, 2)
        fam1, fam2 = _x_le_shift(c1), _x_le_shift(c2)
        cap = intersect([build_decomposition(fam1), build_decomposition(fam2)])
        union = semilinear_family(
            [f_atom([1, -1], -c1, "<="), f_atom([1, -1], -c2, "<=")], 1, 1
        )
        B = sorted({rng.fraction(10, 2) for _ in range(4)})
        rep = verify(cap, union, B)
        assert rep.covered and rep.uncrossed


def test_boolean_lift_disjunction():
    base = semilinear_family(
        [f_atom([1, -1], 0, "<"), f_atom([1, -1], 0, "=")], 1, 1
    )
    decomp = build_decomposition(base)
    derived = semilinear_family(
        [f_or(f_atom([1, -1], 0, "<"), f_atom([1, -1], 0, "="))], 1, 1
    )
    rep = boolean_lift(decomp, base, derived, [F(0), F(2)])
    assert rep.uncrossed


def test_boolean_lift_negation():
    base = _x_lt_y()
    decomp = build_decomposition(base)
    derived = semilinear_family([f_not(f_atom([1, -1], 0, "<"))], 1, 1)
    rep = boolean_lift(decomp, base, derived, [F(0), F(2)])
    assert rep.uncrossed


def test_boolean_lift_non_combination_crosses():
    base = _x_lt_y()
    decomp = build_decomposition(base)
    # x < y + 1 is not a boolean combination of x < y: it must cross
    derived = semilinear_family([f_atom([1, -1], -1, "<")], 1, 1)
    rep = boolean_lift(
        decomp, base, derived, [F(0), F(2)],
        probes=[(F(k, 2),) for k in range(-4, 8)],
    )
    assert not rep.uncrossed
    assert rep.crossing_witness is not None


def test_shatter_slope_linear_family():
    fam = _x_lt_y()
    decomp = build_decomposition(fam)

    def gen(rng, n):
        out = set()
        while len(out) < n:
            out.add(rng.fraction(10 * n, 7))
        return sorted(out)

    table = shatter_estimate(decomp, gen, sizes=[8, 16, 32, 64, 128], trials=5, seed=42)
    assert 0.9 <= table.slope <= 1.1
    # counts are exactly |B| + 1 for this family
    assert table.max_counts == [n + 1 for n in (8, 16, 32, 64, 128)]


def test_shatter_trivial_decomposition_degenerate():
    table = shatter_estimate(
        _trivial_decomp(), lambda rng, n: list(range(n)), sizes=[4, 8], trials=2, seed=1
    )
    assert table.slope == 0.0 and table.degenerate


def test_shatter_threads_deterministic():
    fam = _x_lt_y()
    decomp = build_decomposition(fam)

    def gen(rng, n):
        out = set()
        while len(out) < n:
            out.add(rng.fraction(50, 3))
        return sorted(out)

    t1 = shatter_estimate(decomp, gen, sizes=[4, 8, 16], trials=3, seed=9, threads=1)
    t4 = shatter_estimate(decomp, gen, sizes=[4, 8, 16], trials=3, seed=9, threads=4)
    assert t1.max_counts == t4.max_counts
    assert [r.__dict__ for r in t1.rows] == [r.__dict__ for r in t4.rows]


def test_fit_slope_degenerate():
    assert fit_loglog_slope([2, 4, 8], [1, 1, 1]) == (0.0, True)
    slope, flag = fit_loglog_slope([2, 4, 8], [4, 16, 64])
    assert abs(slope - 2.0) < 1e-9 and not flag