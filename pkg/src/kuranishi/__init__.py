"""Finite-dimensional Kuranishi charts and atlases, virtual counts in dimension zero,
and SU(2) representation counts of finitely presented groups."""
from importlib.resources import files

from .atlas import (
    ChartMorphism,
    FamilyHomotopy,
    KHomRep,
    KuranishiAtlas,
    Report,
    StrictMorphism,
    Transition,
    check_2morphism,
    check_atlas,
    check_family_homotopy,
    check_homotopy,
    check_morphism,
    check_strict_morphism,
    compose,
    khom_equal,
)
from .charts import KuranishiChart, LinfChart, find_zeros, from_linf, new_chart, potential, vdim
from .polycore import Box, BoxUnion, PolyMap, jacobian, sample
from .tangent import ThreeTermComplex, check_embedding, check_weak_cocycle, cohomology_ranks, cone, cone_transition
from .vfc import SignedCount, deformation_sweep, fiber_product, intersection_number, perturb_and_count, virtual_count


def data_path(name):
    """Path of a JSON input shipped with the package."""
    return files("kuranishi") / "data" / name


__all__ = [
    "Box",
    "BoxUnion",
    "ChartMorphism",
    "FamilyHomotopy",
    "KHomRep",
    "KuranishiAtlas",
    "KuranishiChart",
    "LinfChart",
    "PolyMap",
    "Report",
    "SignedCount",
    "StrictMorphism",
    "ThreeTermComplex",
    "Transition",
    "check_2morphism",
    "check_atlas",
    "check_embedding",
    "check_family_homotopy",
    "check_homotopy",
    "check_morphism",
    "check_strict_morphism",
    "check_weak_cocycle",
    "cohomology_ranks",
    "compose",
    "cone",
    "cone_transition",
    "data_path",
    "deformation_sweep",
    "fiber_product",
    "find_zeros",
    "from_linf",
    "intersection_number",
    "jacobian",
    "khom_equal",
    "new_chart",
    "perturb_and_count",
    "potential",
    "sample",
    "vdim",
    "virtual_count",
]
