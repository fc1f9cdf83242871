from fractions import Fraction as F

import pytest

from distalcells.conjcells import (
    build_decomposition,
    check_conjunction_property,
    conj_decomposition,
    expected_exponent,
    negation_closure_check,
)
from distalcells.decomp import verify
from distalcells.families import (
    CongAtom,
    congruence_family,
    type_census_1d,
    vector_linear_family,
    vl_trichotomy,
)
from distalcells.linear import AffineMap
from distalcells.rng import SplitMix64


def _trichotomy_x_minus_y():
    # x - y < 0, x - y = 0, x - y > 0
    return vector_linear_family(
        vl_trichotomy(AffineMap.of([1]), AffineMap.of([-1])), 1, 1
    )


def _presburger_parity():
    # trichotomy of x - y plus parity atoms 2 | (x - y + c), c in {0, 1}
    f, g = AffineMap.of([1]), AffineMap.of([-1])
    atoms = [CongAtom(f, g, "<"), CongAtom(f, g, "="), CongAtom(f, g, ">")]
    atoms.append(CongAtom(f, AffineMap.of([-1], 0), "mod"))
    atoms.append(CongAtom(f, AffineMap.of([-1], 1), "mod"))
    return congruence_family(atoms, K=2, point_dim=1, param_dim=1)


def test_conjunction_property_inequality():
    fam = _trichotomy_x_minus_y()
    res = check_conjunction_property(fam, [F(0), F(2)])
    assert res.ok
    assert res.witnesses[0] == (F(0),)  # x < 0 is the binding bound


def test_conjunction_property_parity_clash():
    fam = _presburger_parity()
    res = check_conjunction_property(fam, [F(0), F(1)])
    assert 3 in res.certificates  # 2 | (x - y) unrealizable over both parities


def test_conjunction_property_equal_parities():
    fam = _presburger_parity()
    res = check_conjunction_property(fam, [F(0), F(2)])
    assert res.witnesses[3] == (F(0),)


def test_negation_closure_random():
    rng = SplitMix64(99)
    assert negation_closure_check(_trichotomy_x_minus_y(), rng, samples=300)
    assert negation_closure_check(_presburger_parity(), rng, samples=300)


def test_vl_cells_trichotomy():
    fam = _trichotomy_x_minus_y()
    cells = conj_decomposition(fam, [(F(0),), (F(2),)])
    # x<0, x=0, 0<x<2, x=2, x>2
    assert len(cells) == 5
    census = type_census_1d(fam, [F(0), F(2)])
    assert census.count == 5


def test_vl_cells_match_census_randomized():
    rng = SplitMix64(123)
    for _ in range(30):
        groups = rng.randint(1, 2)
        atoms = []
        for _ in range(groups):
            a = F(rng.choice([1, 1, 2, -1]))
            atoms += vl_trichotomy(
                AffineMap.of([a]), AffineMap.of([rng.choice([1, -1, 2])], rng.fraction(4, 2))
            )
        fam = vector_linear_family(atoms, 1, 1)
        B = []
        seen = set()
        for _ in range(rng.randint(1, 10)):
            v = rng.fraction(20, 4)
            if v not in seen:
                seen.add(v)
                B.append(v)
        cells = conj_decomposition(fam, B)
        assert len(cells) == type_census_1d(fam, B).count


def test_presburger_cells_equal_census():
    fam = _presburger_parity()
    B = [F(0), F(1)]
    cells = conj_decomposition(fam, B)
    census = type_census_1d(fam, B)
    assert len(cells) == census.count


def test_presburger_cells_equal_census_randomized():
    rng = SplitMix64(5150)
    for _ in range(25):
        K = rng.choice([2, 3, 4])
        f = AffineMap.of([rng.choice([1, 1, 2])])
        g = AffineMap.of([rng.choice([1, -1])], rng.randint(-3, 3))
        atoms = [CongAtom(f, g, r) for r in ("<", "=", ">")]
        for c in range(K):
            atoms.append(CongAtom(f, AffineMap.of(list(g.coeffs), g.const + c), "mod"))
        fam = congruence_family(atoms, K=K, point_dim=1, param_dim=1)
        B = []
        seen = set()
        for _ in range(rng.randint(1, 8)):
            v = F(rng.randint(-12, 12))
            if v not in seen:
                seen.add(v)
                B.append(v)
        cells = conj_decomposition(fam, B)
        assert len(cells) == type_census_1d(fam, B).count, (K, B)


def test_empty_B_single_full_cell():
    decomp = build_decomposition(_trichotomy_x_minus_y())
    cells = decomp.instantiate([])
    assert len(cells) == 1 and cells[0].member((F(7),))


def test_verify_conj_decomposition():
    fam = _trichotomy_x_minus_y()
    decomp = build_decomposition(fam)
    rep = verify(decomp, fam, [F(0), F(2)])
    assert rep.passed
    assert rep.cell_count_deduped == rep.census_lower_bound == 5


def test_verify_presburger():
    fam = _presburger_parity()
    decomp = build_decomposition(fam)
    rep = verify(decomp, fam, [F(0), F(1)])
    assert rep.passed
    assert rep.cell_count_deduped == rep.census_lower_bound


def test_vl_two_dimensional_grid():
    # independent directions x1 - y1 and x2 - y2
    atoms = vl_trichotomy(AffineMap.of([1, 0]), AffineMap.of([-1, 0])) + vl_trichotomy(
        AffineMap.of([0, 1]), AffineMap.of([0, -1])
    )
    fam = vector_linear_family(atoms, 2, 2)
    B = [(F(0), F(0)), (F(1), F(1))]
    cells = conj_decomposition(fam, B)
    # 5 cells per coordinate direction
    assert len(cells) == 25
    from distalcells.families import grid_probes

    rep = verify(build_decomposition(fam), fam, B, probes=grid_probes(-1, 2, 6, 2))
    assert rep.covered and rep.uncrossed
    assert rep.cell_count_deduped >= rep.census_lower_bound


def test_congruence_unrealizable_certificates_match_exhaustive():
    fam = _presburger_parity()
    B = [F(0), F(1)]
    res = check_conjunction_property(fam, B)
    # exhaustive residue search over one period window agrees
    for i, cert in res.certificates.items():
        pred = fam.preds[i]
        K = fam.meta["K"]
        found = False
        for x in range(0, K):
            if all(fam.evaluate(i, F(x + t * K), b) for b in B for t in (0, 1)):
                found = True
        assert not found, f"certificate {cert} but conjunction realizable"


def test_expected_exponent_table():
    assert expected_exponent("vector-space", 1) == 1
    assert expected_exponent("presburger", 2) == 2
    assert expected_exponent("vector-space", 3) == 3
    with pytest.raises(ValueError):
        expected_exponent("o-minimal-field", 2)
