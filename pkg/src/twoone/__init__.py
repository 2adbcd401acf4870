"""Executable (2,1):1 structures: lazy functional graphs, tree isomorphism,
stagewise isomorphism building and stage constructions."""

from .constructions import (
    Registry,
    StageTrace,
    StepFunction,
    construct_prop31,
    construct_prop32,
    construct_prop33B,
    prop33a_f,
    simulate,
    structure_prop33A,
)
from .core import (
    CycleInfo,
    OracleSet,
    Origin,
    StructureHandle,
    TreeSlice,
    check_region,
    detect_cycle,
    extree_slice,
    is_cyclic,
    orbit_sample,
    region_report,
    tree_slice,
)
from .errors import TwoOneError
from .families import ShapeStructure, conjugate, finite_map, random_permutation, shifted, table, zchain
from .isobuilder import (
    IsoConfig,
    PartialIso,
    build_extree_iso,
    build_structure_iso,
    build_tree_iso,
    match_cycles,
    verify_partial_iso,
)
from .specfile import build_structure, load_structure
from .treeiso import (
    brute_force_isomorphic,
    canonical_code,
    is_isomorphic,
    separating_level,
    tree_from_children,
)

__version__ = "0.1.0"
