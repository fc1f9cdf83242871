"""JSON descriptors for families and experiment specs.

The descriptor format is documented with worked examples in
docs/family_descriptors.md; rationals may be written as integers or as
"num/den" strings.  Validation errors carry a JSON-pointer-style path.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .families import (
    CongAtom,
    ParamFamily,
    VLAtom,
    congruence_family,
    laff_family,
    macintyre_family,
    semilinear_family,
    vector_linear_family,
)
from .linear import AffineMap, f_and, f_atom, f_not, f_or, FALSE, TRUE


class SpecError(ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


def _rat(value, path: str) -> Fraction:
    try:
        if isinstance(value, str):
            return Fraction(value)
        if isinstance(value, (int, Fraction)):
            return Fraction(value)
    except (ValueError, ZeroDivisionError) as e:
        raise SpecError(path, f"bad rational: {e}")
    raise SpecError(path, f"expected rational, got {type(value).__name__}")


def _rats(values, path: str) -> list[Fraction]:
    if not isinstance(values, list):
        raise SpecError(path, "expected a list")
    return [_rat(v, f"{path}/{i}") for i, v in enumerate(values)]


def _affine(obj, path: str) -> AffineMap:
    if isinstance(obj, list):
        return AffineMap.of(_rats(obj, path), 0)
    if not isinstance(obj, dict):
        raise SpecError(path, "expected coefficient list or object")
    return AffineMap.of(
        _rats(obj.get("coeffs", []), f"{path}/coeffs"),
        _rat(obj.get("const", 0), f"{path}/const"),
    )


def _formula(obj, point_dim: int, param_dim: int, path: str):
    if not isinstance(obj, dict) or len(obj) != 1:
        raise SpecError(path, "formula must be a single-key object")
    ((tag, body),) = obj.items()
    if tag == "const":
        return TRUE if body else FALSE
    if tag == "atom":
        x = _rats(body.get("x", []), f"{path}/atom/x")
        y = _rats(body.get("y", []), f"{path}/atom/y")
        if len(x) > point_dim or len(y) > param_dim:
            raise SpecError(f"{path}/atom", "coefficient lists exceed dimensions")
        x = x + [Fraction(0)] * (point_dim - len(x))
        y = y + [Fraction(0)] * (param_dim - len(y))
        rel = body.get("rel", "<")
        return f_atom(x + y, _rat(body.get("c", 0), f"{path}/atom/c"), rel)
    if tag == "not":
        return f_not(_formula(body, point_dim, param_dim, f"{path}/not"))
    if tag in ("and", "or"):
        if not isinstance(body, list):
            raise SpecError(f"{path}/{tag}", "expected a list of formulas")
        parts = [
            _formula(g, point_dim, param_dim, f"{path}/{tag}/{i}")
            for i, g in enumerate(body)
        ]
        return f_and(*parts) if tag == "and" else f_or(*parts)
    raise SpecError(path, f"unknown formula tag {tag!r}")


def load_family(obj: dict, path: str = "/family") -> ParamFamily:
    if not isinstance(obj, dict):
        raise SpecError(path, "family descriptor must be an object")
    kind = obj.get("kind")
    point_dim = obj.get("point_dim", 1)
    param_dim = obj.get("param_dim", 1)
    if kind == "semilinear":
        preds = [
            _formula(f, point_dim, param_dim, f"{path}/predicates/{i}")
            for i, f in enumerate(obj.get("predicates", []))
        ]
        if not preds:
            raise SpecError(f"{path}/predicates", "at least one predicate required")
        return semilinear_family(preds, point_dim, param_dim)
    if kind == "vector-linear":
        atoms = []
        for i, a in enumerate(obj.get("predicates", [])):
            p = f"{path}/predicates/{i}"
            f = _affine(a.get("f"), f"{p}/f")
            g_map = _affine(a.get("g"), f"{p}/g")
            c = _rat(a.get("c", 0), f"{p}/c")
            g = AffineMap(g_map.coeffs, g_map.const + c)
            rel = a.get("rel")
            if rel == "trichotomy":
                atoms += [VLAtom(f, g, r) for r in ("<", "=", ">")]
            elif rel in ("<", "=", ">"):
                atoms.append(VLAtom(f, g, rel))
            else:
                raise SpecError(f"{p}/rel", f"bad relation {rel!r}")
        return vector_linear_family(atoms, point_dim, param_dim)
    if kind == "congruence":
        K = obj.get("modulus")
        if not isinstance(K, int) or K < 1:
            raise SpecError(f"{path}/modulus", "positive integer modulus required")
        atoms = []
        for i, a in enumerate(obj.get("predicates", [])):
            p = f"{path}/predicates/{i}"
            f = _affine(a.get("f"), f"{p}/f")
            g_map = _affine(a.get("g"), f"{p}/g")
            c = _rat(a.get("c", 0), f"{p}/c")
            g = AffineMap(g_map.coeffs, g_map.const + c)
            typ = a.get("type", "order")
            if typ == "mod":
                atoms.append(CongAtom(f, g, "mod"))
            elif typ == "order":
                rel = a.get("rel")
                if rel == "trichotomy":
                    atoms += [CongAtom(f, g, r) for r in ("<", "=", ">")]
                elif rel in ("<", "=", ">"):
                    atoms.append(CongAtom(f, g, rel))
                else:
                    raise SpecError(f"{p}/rel", f"bad relation {rel!r}")
            else:
                raise SpecError(f"{p}/type", f"bad atom type {typ!r}")
        return congruence_family(atoms, K, point_dim, param_dim)
    if kind == "valuation-macintyre":
        p_ = obj.get("prime")
        n = obj.get("n")
        if not isinstance(p_, int) or p_ < 3 or p_ % 2 == 0:
            raise SpecError(f"{path}/prime", "odd prime >= 3 required")
        if not isinstance(n, int) or n < 2:
            raise SpecError(f"{path}/n", "integer n >= 2 required")
        F = [_affine(a, f"{path}/F/{i}") for i, a in enumerate(obj.get("F", []))]
        C = [_affine(a, f"{path}/C/{i}") for i, a in enumerate(obj.get("C", []))]
        if not C:
            raise SpecError(f"{path}/C", "at least one center function required")
        lams = _rats(obj.get("lambda", [1]), f"{path}/lambda")
        return macintyre_family(F, C, lams, n, p_, param_dim)
    if kind == "valuation-laff":
        p_ = obj.get("prime")
        m, n = obj.get("m"), obj.get("n")
        if not isinstance(p_, int) or p_ < 3 or p_ % 2 == 0:
            raise SpecError(f"{path}/prime", "odd prime >= 3 required")
        if not isinstance(m, int) or m < 1 or not isinstance(n, int) or n < 1:
            raise SpecError(f"{path}/m", "integers m, n >= 1 required")
        C = [_affine(a, f"{path}/C/{i}") for i, a in enumerate(obj.get("C", []))]
        if not C:
            raise SpecError(f"{path}/C", "at least one center function required")
        lams = _rats(obj.get("lambda", [1]), f"{path}/lambda")
        return laff_family(C, m, n, lams, p_, param_dim)
    raise SpecError(f"{path}/kind", f"unknown family kind {kind!r}")


STRUCTURES = {
    "rationals-order": ("omin1d", ("semilinear", "interval")),
    "vector-linear": ("conj-cells", ("vector-linear",)),
    "presburger": ("conj-cells", ("congruence",)),
    "padic-macintyre": ("padic", ("valuation-macintyre",)),
    "padic-laff": ("padic", ("valuation-laff",)),
    "semilinear-plane": ("dim-induction", ("semilinear",)),
}


@dataclass
class ExperimentSpec:
    experiment_id: str
    structure: str
    engine: str
    family: ParamFamily
    sizes: list[int]
    trials: int
    seed: int
    verify_instances: int = 2
    expected_slope: Optional[float] = None
    generator: dict = field(default_factory=dict)


def load_experiment(obj: dict) -> ExperimentSpec:
    if not isinstance(obj, dict):
        raise SpecError("/", "experiment spec must be an object")
    structure = obj.get("structure")
    if structure not in STRUCTURES:
        raise SpecError("/structure", f"unknown structure {structure!r}")
    default_engine, kinds = STRUCTURES[structure]
    engine = obj.get("engine", default_engine)
    if engine != default_engine:
        raise SpecError("/engine", f"engine {engine!r} incompatible with {structure!r}")
    family = load_family(obj.get("family"), "/family")
    if family.kind not in kinds:
        raise SpecError("/family/kind", f"kind {family.kind!r} incompatible with {structure!r}")
    if engine == "dim-induction" and family.point_dim < 2:
        raise SpecError("/family/point_dim", "dim-induction needs |x| >= 2")
    if engine in ("omin1d", "padic") and family.point_dim != 1:
        raise SpecError("/family/point_dim", f"{engine} needs |x| = 1")
    sizes = obj.get("sizes")
    if not isinstance(sizes, list) or not sizes or not all(
        isinstance(n, int) and n >= 1 for n in sizes
    ):
        raise SpecError("/sizes", "nonempty list of positive sizes required")
    trials = obj.get("trials", 5)
    if not isinstance(trials, int) or trials < 1:
        raise SpecError("/trials", "positive trial count required")
    seed = obj.get("seed")
    if not isinstance(seed, int):
        raise SpecError("/seed", "an integer seed is mandatory")
    expected = obj.get("expected_slope")
    if expected is not None and not isinstance(expected, (int, float)):
        raise SpecError("/expected_slope", "number expected")
    return ExperimentSpec(
        experiment_id=str(obj.get("experiment_id", "experiment")),
        structure=structure,
        engine=engine,
        family=family,
        sizes=sizes,
        trials=trials,
        seed=seed,
        verify_instances=int(obj.get("verify_instances", 2)),
        expected_slope=expected,
        generator=obj.get("generator", {}) or {},
    )
