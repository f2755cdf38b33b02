"""Matrix-free P2 stencil kernels on triangular grids with an ECM performance model."""

from . import codegen, ecm, fields, grid, kernels, sparse, stencils
from .codegen import GeneratedKernel, execute_plan, generate, index_expression
from .errors import (GridIndexError, IndexOverflowError, InvalidLevelError, MachineFileError, P2EcmError,
                     ShapeError, SpecError)
from .fields import EdgeField, P2Function, P2Operator, VertexField, allocate
from .grid import IterationDomain, dof_counts, interior_domain
from .kernels import apply_etv, apply_ete, apply_p2, apply_vte, apply_vtv, reference_apply
from .sparse import assemble, footprint_model, index_overflow_level, spmv
from .stencils import BUILTIN_SPECS, KERNEL_NAMES, StencilAccessSpec, get_spec

__version__ = "0.1.0"

__all__ = [
    "BUILTIN_SPECS", "EdgeField", "GeneratedKernel", "GridIndexError", "IndexOverflowError", "InvalidLevelError",
    "IterationDomain", "KERNEL_NAMES", "MachineFileError", "P2EcmError", "P2Function", "P2Operator", "ShapeError",
    "SpecError", "StencilAccessSpec", "VertexField", "allocate", "apply_etv", "apply_ete", "apply_p2", "apply_vte",
    "apply_vtv", "assemble", "codegen", "dof_counts", "ecm", "execute_plan", "fields", "footprint_model",
    "generate", "get_spec", "grid", "index_expression", "index_overflow_level", "interior_domain", "kernels",
    "reference_apply", "sparse", "spmv", "stencils",
]
