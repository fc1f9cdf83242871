"""Dimension induction for semilinear families over Q: a d-dimensional
decomposition is assembled from the 1-dimensional chain engine applied along
the first coordinate and a (d-1)-dimensional decomposition of a derived
family on the remaining coordinates.

Cells are cylinders: the base coordinates run over a cell of the derived
decomposition, and the first coordinate runs over a fixed 1-dim template
instantiated with the base point and two parameters from B.  The derived
predicates say, for a fiber template psi and a predicate phi, whether phi
holds on all of the fiber / on none of it, plus whether the fiber template is
crossed at this base point; all are produced by exact linear quantifier
elimination, so the recursion stays inside semilinear families.

A cylinder is excluded for b when its base cell is excluded for the extended
parameter or when the fiber template is crossed somewhere over the base
(decided at a base sample point; valid cells have this constant over the
base, since the crossing predicate itself belongs to the derived family).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from . import omin1d
from .decomp import CellInstance, Decomposition
from .families import ParamFamily, as_param, semilinear_family
from .linear import (
    FALSE,
    TRUE,
    Atom,
    dnf_simplify,
    eliminate_exists,
    eval_formula,
    f_and,
    f_atom,
    f_not,
    f_or,
    fold_atom,
    formula_atoms,
)


def _subst_var(f, var: int, target: int):
    """vars[var] := vars[target] (a plain variable swap-in)."""
    from .linear import _subst_affine

    coeffs = tuple(Fraction(0) for _ in range(target)) + (Fraction(1),)
    return _subst_affine(f, var, coeffs, Fraction(0))


def _remap(f, mapping):
    """Rebuild a formula with variable indices remapped."""
    tag = f[0]
    if tag in ("true", "false"):
        return f
    if tag == "atom":
        a: Atom = f[1]
        new: dict[int, Fraction] = {}
        for i, c in enumerate(a.coeffs):
            if c:
                new[mapping(i)] = new.get(mapping(i), Fraction(0)) + c
        size = max(new) + 1 if new else 0
        coeffs = tuple(new.get(i, Fraction(0)) for i in range(size))
        return fold_atom(Atom(coeffs, a.const, a.rel))
    if tag == "and":
        return f_and(*(_remap(g, mapping) for g in f[1]))
    if tag == "or":
        return f_or(*(_remap(g, mapping) for g in f[1]))
    if tag == "not":
        return f_not(_remap(f[1], mapping))
    raise ValueError(tag)


def _shift_y_block(f, d: int, e: int, block: int):
    """Move the parameter block [d, d+e) to [d + block*e, d + (block+1)*e)."""

    def mapping(i: int) -> int:
        return i if i < d else i + block * e

    return _remap(f, mapping)


def _drop_first_var(f):
    """Reindex away variable 0, which must no longer occur."""

    def mapping(i: int) -> int:
        if i == 0:
            raise ValueError("variable 0 still occurs")
        return i - 1

    return _remap(f, mapping)


@dataclass(frozen=True)
class FiberSource:
    """A downward-closed fiber set: the inclusive or strict closure of one
    convex component of one predicate, as a formula over [x (d), y (e)]."""

    pred: int
    comp: int
    flavor: str  # "<=" or "<"
    formula: tuple


def fiber_sources(family: ParamFamily, component_cap: Optional[int] = None) -> list[FiberSource]:
    """Closure formulas of the fiber components along the first coordinate.

    `component_cap` truncates the per-predicate component count; it is used on
    recursive levels where the syntactic bound of QE outputs is far above the
    realized count, and the coverage verifier backstops the truncation.
    """
    if family.kind != "semilinear":
        raise ValueError("dimension induction handles semilinear families")
    d, e = family.point_dim, family.param_dim
    fresh = d + e
    out: list[FiberSource] = []
    for pi, f in enumerate(family.preds):
        bound = family.component_bound(pi)
        if component_cap is not None:
            bound = min(bound, component_cap)
        comp_ge: list = []
        for i in range(bound + 1):
            if i == 0:
                comp_ge.append(f)
                continue
            g = f
            v = fresh
            order_chain = []
            prev = None
            for _ in range(i):
                u, w = v, v + 1
                v += 2
                g = f_and(g, _subst_var(f, 0, u), f_not(_subst_var(f, 0, w)))
                if prev is not None:
                    order_chain.append((prev, u))
                order_chain.append((u, w))
                prev = w
            order_chain.append((prev, 0))
            for lo, hi in order_chain:
                coeffs = [Fraction(0)] * (max(lo, hi) + 1)
                coeffs[lo] += 1
                if hi == 0:
                    coeffs[0] -= 1
                else:
                    coeffs[hi] -= 1
                g = f_and(g, f_atom(coeffs, 0, "<"))
            for t in range(v - 1, fresh - 1, -1):
                g = eliminate_exists(g, t)
            comp_ge.append(dnf_simplify(g))
            if comp_ge[-1] == FALSE:
                break
        while len(comp_ge) <= bound:
            comp_ge.append(FALSE)
        for i in range(bound):
            comp = dnf_simplify(f_and(comp_ge[i], f_not(comp_ge[i + 1])))
            if comp == FALSE:
                continue
            t = fresh
            comp_t = _subst_var(comp, 0, t)
            le_t = f_atom([Fraction(1)] + [Fraction(0)] * (t - 1) + [Fraction(-1)], 0, "<=")
            ge_t = f_atom([Fraction(1)] + [Fraction(0)] * (t - 1) + [Fraction(-1)], 0, ">=")
            leq = dnf_simplify(eliminate_exists(f_and(comp_t, le_t), t))
            lt = dnf_simplify(f_not(eliminate_exists(f_and(comp_t, ge_t), t)))
            out.append(FiberSource(pi, i, "<=", leq))
            out.append(FiberSource(pi, i, "<", lt))
    return out


@dataclass(frozen=True)
class FiberTemplate:
    """psi(x1; x', yA, yB): an upper closure minus a lower closure (either
    side may be absent).  Formula ambient: [x (d), yA (e), yB (e)]."""

    ident: str
    up: Optional[FiberSource]
    dn: Optional[FiberSource]
    formula: tuple
    arity: int  # parameters actually used (0, 1 or 2)
    nonempty: tuple = TRUE  # exists x1 . formula, over [x (d), yA, yB]


@dataclass
class DerivedFamily:
    """The derived predicates of one fiber template: index 0 is the crossing
    predicate theta*, then for each phi the all-true and all-false forms."""

    template: FiberTemplate
    family: ParamFamily  # semilinear, point_dim d-1, param_dim 3e


def derive_family(
    family: ParamFamily,
    sources: Optional[list[FiberSource]] = None,
    component_cap: Optional[int] = None,
) -> list[DerivedFamily]:
    d, e = family.point_dim, family.param_dim
    if sources is None:
        sources = fiber_sources(family, component_cap)
    templates: list[FiberTemplate] = []

    def make(ident, up, dn, formula, arity) -> FiberTemplate:
        ne = dnf_simplify(eliminate_exists(formula, 0))
        return FiberTemplate(ident, up, dn, formula, arity, ne)

    for s in sources:
        up_a = _shift_y_block(s.formula, d, e, 0)
        templates.append(make(f"[{_lbl(s)}]", s, None, up_a, 1))
    for s in sources:
        dn_b = _shift_y_block(s.formula, d, e, 1)
        templates.append(make(f"[~{_lbl(s)}]", None, s, f_not(dn_b), 1))
    for s1 in sources:
        up_a = _shift_y_block(s1.formula, d, e, 0)
        for s2 in sources:
            dn_b = _shift_y_block(s2.formula, d, e, 1)
            templates.append(
                make(f"[{_lbl(s1)}\\{_lbl(s2)}]", s1, s2, f_and(up_a, f_not(dn_b)), 2)
            )
    templates.append(FiberTemplate("[line]", None, None, TRUE, 0, TRUE))

    out: list[DerivedFamily] = []
    for tpl in templates:
        preds = []
        theta_parts = []
        per_phi = []
        for f in family.preds:
            phi_c = _shift_y_block(f, d, e, 2)
            pos = dnf_simplify(eliminate_exists(f_and(tpl.formula, phi_c), 0))
            neg = dnf_simplify(eliminate_exists(f_and(tpl.formula, f_not(phi_c)), 0))
            theta_parts.append(dnf_simplify(f_and(pos, neg)))
            per_phi.append((f_not(neg), f_not(pos)))  # (all-phi, all-not-phi)
        preds.append(_drop_first_var(dnf_simplify(f_or(*theta_parts))))
        for allpos, allneg in per_phi:
            preds.append(_drop_first_var(dnf_simplify(allpos)))
            preds.append(_drop_first_var(dnf_simplify(allneg)))
        out.append(
            DerivedFamily(tpl, semilinear_family(preds, d - 1, 3 * e))
        )
    return out


def _lbl(s: FiberSource) -> str:
    return f"p{s.pred}c{s.comp}{s.flavor}"


def induct(family: ParamFamily, _recursive_cap: Optional[int] = None) -> Decomposition:
    """Distal cell decomposition for a semilinear family of any point
    dimension; 1-dimensional input goes straight to the chain engine.

    Recursive levels cap the fiber component count at 3 (QE outputs carry a
    syntactic bound far above the realized count); the coverage check in
    `verify` backstops the cap.
    """
    if family.kind != "semilinear":
        raise ValueError("dimension induction handles semilinear families")
    if family.point_dim == 1:
        return omin1d.build_decomposition(family)
    d, e = family.point_dim, family.param_dim
    derived = derive_family(family, component_cap=_recursive_cap)
    bases = [induct(df.family, _recursive_cap=3) for df in derived]

    def inst(B: list) -> list[CellInstance]:
        B = [as_param(b, e) for b in B]
        if not B:
            return [
                CellInstance(
                    template="full", params=(),
                    member=lambda a: True, excluded=lambda b: False,
                    extent_key=("full",), meta={},
                )
            ]
        cells: list[CellInstance] = []
        for ti, df in enumerate(derived):
            tpl = df.template
            if tpl.arity == 2:
                tuples = [(b1, b2) for b1 in B for b2 in B]
            elif tpl.arity == 1:
                tuples = [(b, b) for b in B]
            else:
                tuples = [(B[0], B[0])]
            for b1, b2 in tuples:
                B_der = [b1 + b2 + b for b in B]
                for base_cell in bases[ti].instantiate(B_der):
                    cell = _cyl_cell(family, df, ti, b1, b2, base_cell)
                    if cell.meta.get("empty"):
                        continue
                    # T(B) keeps only potential cells missed by every I(Delta)
                    if not any(cell.excluded(b) for b in B):
                        cells.append(cell)
        return cells

    return Decomposition(
        name=f"dim-induction-{d}d",
        point_dim=d,
        param_count=2 * (d - 1) + 2,
        instantiate_fn=inst,
        probe_fn=None,
    )


def _base_sample(base_cell: CellInstance) -> Optional[tuple]:
    iv = base_cell.meta.get("interval")
    if iv is not None:
        return (iv.sample(),)
    return base_cell.meta.get("sample")


def _cyl_cell(family, df: DerivedFamily, ti: int, b1, b2, base_cell: CellInstance) -> CellInstance:
    tpl = df.template
    psi = tpl.formula
    d = family.point_dim

    def member(a: tuple) -> bool:
        if not base_cell.member(a[1:]):
            return False
        return eval_formula(psi, list(a) + list(b1) + list(b2))

    base_pt = _base_sample(base_cell)

    def excluded(b) -> bool:
        b = as_param(b, family.param_dim)
        b_der = b1 + b2 + b
        if base_cell.excluded(b_der):
            return True
        if base_pt is None:
            raise ValueError("base cell carries no sample point")
        # theta*: the fiber template is crossed somewhere over the base; the
        # crossing predicate is part of the derived family, so on a valid
        # base cell its value at the sample decides it everywhere
        return df.family.evaluate(0, base_pt, b_der)

    meta: dict = {"base": base_cell}
    sample = None
    if base_pt is not None:
        from .linear import components_1d, iv_intersect

        env = [Fraction(0)] + list(base_pt) + list(b1) + list(b2)
        comps = components_1d(psi, 0, env)
        if comps:
            sample = (comps[0].sample(),) + tuple(base_pt)
        else:
            base_iv = base_cell.meta.get("interval")
            if base_iv is not None:
                # fiber empty at the sample: find a base point where the
                # fiber is inhabited (or certify the cylinder empty)
                region = components_1d(
                    tpl.nonempty, 1, [Fraction(0), Fraction(0)] + list(b1) + list(b2)
                )
                for piece in region:
                    cut = iv_intersect(piece, base_iv)
                    if not cut.is_empty():
                        alt = cut.sample()
                        comps = components_1d(psi, 0, [Fraction(0), alt] + list(b1) + list(b2))
                        if comps:
                            sample = (comps[0].sample(), alt)
                            break
                else:
                    meta["empty"] = True
    meta["sample"] = sample
    return CellInstance(
        template=f"{tpl.ident}x{base_cell.template}",
        params=(b1, b2) + base_cell.params,
        member=member,
        excluded=excluded,
        extent_key=(ti, b1, b2, base_cell.extent_key),
        meta=meta,
    )


# ---------------------------------------------------------------------------
# Probe construction for planar verification
# ---------------------------------------------------------------------------


def plane_probes(family: ParamFamily, B: Sequence, steps: int = 40, pad: int = 2) -> list[tuple]:
    """A steps x steps rational grid over the parameter bounding box plus all
    pairwise intersection points of the predicates' zero lines (with small
    perturbed neighbors), for planar coverage and crossing checks."""
    if family.point_dim != 2:
        raise ValueError("plane probes are for |x| = 2")
    B = [as_param(b, family.param_dim) for b in B]
    lines: list[tuple[Fraction, Fraction, Fraction]] = []  # a*x1 + b*x2 + c = 0
    vals: list[Fraction] = [Fraction(0)]
    for f in family.preds:
        for atom in formula_atoms(f):
            for b in B:
                cs = list(atom.coeffs) + [Fraction(0)] * (2 + len(b) - len(atom.coeffs))
                a1, a2 = cs[0], cs[1]
                c = atom.const + sum(ci * bi for ci, bi in zip(cs[2:], b))
                if a1 or a2:
                    lines.append((a1, a2, c))
    for b in B:
        vals.extend(b)
    delta = Fraction(1, 101)
    pts: set[tuple] = set()
    for i in range(len(lines)):
        a1, a2, c = lines[i]
        # axis-aligned fallbacks so single lines contribute probes too
        if a2 != 0:
            for x1 in (Fraction(0), Fraction(1)):
                pts.add((x1, (-c - a1 * x1) / a2))
        if a1 != 0:
            for x2 in (Fraction(0), Fraction(1)):
                pts.add(((-c - a2 * x2) / a1, x2))
        for j in range(i + 1, len(lines)):
            b1, b2, cc = lines[j]
            det = a1 * b2 - a2 * b1
            if det == 0:
                continue
            x1 = (-c * b2 + cc * a2) / det
            x2 = (-a1 * cc + b1 * c) / det
            for dx in (-delta, Fraction(0), delta):
                for dy in (-delta, Fraction(0), delta):
                    pts.add((x1 + dx, x2 + dy))
    lo = min(vals) - pad
    hi = max(vals) + pad
    for i in range(steps + 1):
        x1 = lo + (hi - lo) * Fraction(i, steps)
        for j in range(steps + 1):
            pts.add((x1, lo + (hi - lo) * Fraction(j, steps)))
    return sorted(pts)
