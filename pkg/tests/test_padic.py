from fractions import Fraction as F

import pytest

from distalcells.decomp import verify
from distalcells.families import laff_family, macintyre_family, type_census_1d
from distalcells.linear import AffineMap
from distalcells.padic import (
    ArrangementError,
    BallForest,
    Subinterval,
    UltrametricBall,
    arrangement,
    ball_forest,
    coset_transfer_check,
    laff_balls,
    laff_dcd_1d,
    macintyre_dcd,
    special_balls,
    subinterval_atoms,
    t_val,
    t_val_candidate_centers,
)
from distalcells.rng import SplitMix64
from distalcells.scalars import Gamma, NEG_INF, POS_INF, in_pn, valuation

ZERO = AffineMap.of([0])
IDENT = AffineMap.of([1])
DOUBLE = AffineMap.of([2])


def B3(c, r):
    rad = r if isinstance(r, Gamma) else Gamma.of(r)
    return UltrametricBall(F(c), rad, 3)


def test_ball_membership_and_equality():
    b = B3(0, 0)
    assert b.member(F(3)) and b.member(F(9)) and not b.member(F(1))
    assert b.same_extent(B3(3, 0))  # v(0-3)=1 > 0
    assert not b.same_extent(B3(1, 0))
    pt = B3(5, POS_INF)
    assert pt.member(F(5)) and not pt.member(F(5) + F(3) ** 10)


def test_special_balls_example():
    # F={0}, C={identity}, B={0,1}: point balls at 0, 1 and B_0(0), B_0(1)
    balls = special_balls([ZERO], [IDENT], [(F(0),), (F(1),)], 3)
    keys = {b.key() for b in balls}
    assert (1, 0, F(0)) in keys and (1, 0, F(1)) in keys  # points
    assert (0, 0, F(0)) in keys  # B_0(0)
    assert len(balls) == 4


def test_special_balls_empty():
    assert special_balls([ZERO], [IDENT], [], 3) == []


def test_ball_forest_nested_chain():
    forest = ball_forest([B3(0, 1), B3(0, 0)])
    assert len(forest.hasse_edges) == 1
    assert len(forest.roots) == 1


def test_ball_forest_disjoint():
    forest = ball_forest([B3(0, 0), B3(1, 0)])
    assert len(forest.hasse_edges) == 0
    assert len(forest.roots) == 2


def test_forest_comparability_iff_intersection():
    rng = SplitMix64(20240808)
    for _ in range(20):
        balls = [
            B3(F(rng.randint(-40, 40), rng.choice([1, 1, 3, 9])), rng.randint(-2, 3))
            for _ in range(12)
        ]
        balls = [b for b in balls]
        from distalcells.padic import dedupe_balls

        balls = dedupe_balls(balls)
        for i, a in enumerate(balls):
            for b in balls[i + 1:]:
                comparable = a.contains(b) or b.contains(a)
                # intersection test: sample membership on centers
                intersect = a.member(b.center) or b.member(a.center)
                assert comparable == intersect


def _probe_region_atoms(balls, probes):
    """Brute-force boolean-algebra atoms via region probing: distinct
    membership bit-vectors over the ball list."""
    regions = {}
    for x in probes:
        key = tuple(b.member(x) for b in balls)
        regions.setdefault(key, []).append(x)
    return regions


def _critical_probes(balls):
    """For each pair of centers, representatives at every critical radius
    +-1, plus the centers themselves."""
    pts = set()
    for b in balls:
        pts.add(b.center)
        radii = set()
        for other in balls:
            if other.radius.is_finite:
                radii.add(other.radius.level)
        for r in radii | {r + 1 for r in radii} | {r - 1 for r in radii}:
            for u in (1, 2):
                pts.add(b.center + F(u) * F(3) ** r)
    return sorted(pts)


@pytest.mark.parametrize(
    "balls,expected",
    [
        ([B3(0, 0)], 2),
        ([B3(0, 0), B3(1, 0)], 3),
        ([B3(0, -1), B3(0, 0), B3(0, 1)], 4),
    ],
)
def test_subinterval_atoms_counts(balls, expected):
    atoms = subinterval_atoms(balls)
    assert len(atoms) == expected
    # region-probe oracle agrees
    probes = _critical_probes(balls)
    regions = _probe_region_atoms(balls, probes)
    assert len(regions) == expected
    # and the atoms induce exactly the probe partition
    for x in probes:
        owners = [i for i, a in enumerate(atoms) if a.member(x)]
        assert len(owners) == 1


def test_atoms_match_region_probing_on_special_arrangements():
    rng = SplitMix64(777)
    for _ in range(15):
        B = []
        seen = set()
        for _ in range(rng.randint(1, 4)):
            v = (F(rng.randint(-30, 30), rng.choice([1, 1, 3])),)
            if v not in seen:
                seen.add(v)
                B.append(v)
        balls = special_balls([ZERO, IDENT], [IDENT, DOUBLE], B, 3)
        atoms = subinterval_atoms(balls)
        assert len(atoms) <= 2 * len(balls) + 1
        probes = _critical_probes(balls)
        regions = _probe_region_atoms(balls, probes)
        assert len(regions) == len(atoms)
        for x in probes:
            owners = [i for i, a in enumerate(atoms) if a.member(x)]
            assert len(owners) == 1, (x, owners)


def test_arrangement_error_on_unequal_siblings():
    # two disjoint children of the line at different radii, same parent
    with pytest.raises(ArrangementError):
        subinterval_atoms([B3(0, 2), B3(1, 5)])


def test_t_val_examples():
    balls = special_balls([ZERO], [IDENT], [(F(0),), (F(1),)], 3)
    atoms = subinterval_atoms(balls)
    assert t_val(F(0), atoms) == POS_INF  # a center
    # outside all balls: v(a - t) = v(a) for the root-complement atom
    assert t_val(F(1, 3), atoms) == Gamma.of(-1)
    # inside B_0(0) but not 0 itself: v(a - 0)
    assert t_val(F(9), atoms) == Gamma.of(2)


def test_t_val_well_defined_across_candidate_centers():
    rng = SplitMix64(31337)
    for _ in range(25):
        B = []
        seen = set()
        for _ in range(rng.randint(1, 4)):
            v = (F(rng.randint(-20, 20)),)
            if v not in seen:
                seen.add(v)
                B.append(v)
        balls = special_balls([ZERO, IDENT], [IDENT, DOUBLE], B, 3)
        atoms = subinterval_atoms(balls)
        T = sorted({c((b[0],)) for c in (IDENT, DOUBLE) for b in B})
        probes = _critical_probes(balls)
        for x in probes:
            sub = next(a for a in atoms if a.member(x))
            cands = t_val_candidate_centers(sub, T)
            vals = {valuation(x - t, 3) for t in cands}
            assert len(vals) <= 1
            if cands and sub.alpha_l != POS_INF:
                assert vals == {sub.t_val(x)}


def test_coset_transfer_examples():
    # v(1 - 28) = v(-27) = 3 > 2*0 + v(1 - 0)
    assert coset_transfer_check(F(28), F(1), F(0), 2, 3) is True
    assert coset_transfer_check(F(7), F(7), F(1), 2, 3) is True  # ratio 1
    with pytest.raises(ValueError):
        coset_transfer_check(F(2), F(1), F(0), 2, 3)


def test_coset_transfer_randomized():
    rng = SplitMix64(5)
    done = 0
    while done < 2000:
        p = rng.choice([3, 5])
        n = 2
        a = F(rng.randint(-20, 20), rng.choice([1, 1, 2, 3]))
        y = F(rng.randint(-20, 20), rng.choice([1, 1, 2, 3]))
        if y == a:
            continue
        k = rng.randint(1, 6)
        x = y + F(rng.randint(1, p - 1)) * F(p) ** (
            (valuation(y - a, p).level if valuation(y - a, p).is_finite else 0) + k
        )
        if x == a or x == y:
            continue
        assert coset_transfer_check(x, y, a, n, p) is True
        done += 1


def _mac_family():
    return macintyre_family(
        F=[ZERO, IDENT], C=[IDENT], Lambda=[1, 2], n=2, p=3, param_dim=1
    )


def test_macintyre_dcd_verify_example():
    fam = _mac_family()
    decomp = macintyre_dcd(fam)
    B = [F(0), F(1), F(3)]
    rep = verify(decomp, fam, B)
    assert rep.covered, rep.first_uncovered
    assert rep.uncrossed, rep.crossing_witness
    assert rep.count_ok
    assert rep.cell_count_deduped >= rep.census_lower_bound


def test_macintyre_singleton_parameter():
    fam = _mac_family()
    decomp = macintyre_dcd(fam)
    cells = decomp.instantiate([F(2)])
    # a constant number of cells: at most (#types) * (#subintervals)
    balls = special_balls(fam.meta["F"], fam.meta["C"], [(F(2),)], 3)
    atoms = subinterval_atoms(balls)
    n_types = 4 + 2  # P_2 cosets + (p-1) edge balls at the removal level
    assert len(cells) <= n_types * len(atoms) + 1
    rep = verify(decomp, fam, [F(2)])
    assert rep.passed


def test_macintyre_three_parameter_descriptors():
    fam = _mac_family()
    decomp = macintyre_dcd(fam)
    for c in decomp.instantiate([F(0), F(1), F(3)]):
        assert len(c.params) <= 3


def test_laff_dcd_verify_example():
    fam = laff_family(
        C=[IDENT, DOUBLE], m=2, n=1, Lambda=[1], p=3, param_dim=1
    )
    decomp = laff_dcd_1d(fam)
    B = [F(0), F(1), F(3)]
    rep = verify(decomp, fam, B)
    assert rep.covered, rep.first_uncovered
    assert rep.uncrossed, rep.crossing_witness
    assert rep.count_ok


def test_laff_singleton_parameter():
    fam = laff_family(C=[IDENT, DOUBLE], m=2, n=1, Lambda=[1], p=3, param_dim=1)
    decomp = laff_dcd_1d(fam)
    B = [F(5)]
    cells = decomp.instantiate(B)
    balls = laff_balls(fam.meta["C"], [(F(5),)], 3)
    atoms = subinterval_atoms(balls)
    n_types = 2 * 2 + 2 * 1  # cosets of Q_{2,1} plus edge balls
    assert len(cells) <= n_types * len(atoms) + 1
    assert verify(decomp, fam, B).passed


def test_laff_exclusion_matches_atom_structure():
    # emitted subinterval extents equal brute-force atoms
    fam = laff_family(C=[IDENT, DOUBLE], m=2, n=1, Lambda=[1], p=3, param_dim=1)
    decomp = laff_dcd_1d(fam)
    B = [F(0), F(1), F(3)]
    balls = laff_balls(fam.meta["C"], [(b,) for b in B], 3)
    atoms = subinterval_atoms(balls)
    cells = decomp.instantiate(B)
    probes = [x for (x,) in decomp.probe_fn([(b,) for b in B])]
    for cell in cells:
        inside = [x for x in probes if cell.member((x,))]
        if not inside:
            continue
        owner = {next(i for i, a in enumerate(atoms) if a.member(x)) for x in inside}
        assert len(owner) == 1  # every cell sits inside one atom


def test_census_on_valuation_family():
    fam = _mac_family()
    census = type_census_1d(fam, [F(0), F(1)])
    assert census.count >= 4


def test_macintyre_shatter_is_linear():
    from distalcells.decomp import shatter_estimate

    fam = _mac_family()
    decomp = macintyre_dcd(fam)

    def gen(rng, size):
        out = []
        seen = set()
        while len(out) < size:
            v = F(rng.randint(-3 ** 6, 3 ** 6), rng.choice([1, 1, 1, 2, 4, 5]))
            if v not in seen:
                seen.add(v)
                out.append(v)
        return out

    table = shatter_estimate(decomp, gen, sizes=[4, 8, 16, 32], trials=3, seed=11)
    assert table.slope <= 1.1, table.max_counts
