"""Global sparse stiffness matrix construction for the 3D Poisson equation
on 8-node hexahedral meshes: batched data-parallel numerical integration,
then sequential triplet -> lower-triangular CSC assembly."""

from .assemble import (
    DirectAssembler,
    LowerCscMatrix,
    TripletMatrix,
    assemble_direct,
    build_triplet,
    connectivity_index_arrays,
    map_local_to_global,
    nnz_compression,
    triplet_to_csc,
)
from .cli import BuildReport, run_build
from .element import (
    ElementGeometry,
    GaussRule,
    PackedLowerStiffness,
    element_geometry,
    gauss_rule,
    jacobian,
    local_stiffness,
    pack_lower,
    set_worker_threads,
    shape_functions,
    shape_gradients,
    stiffness_batch,
    unpack_lower,
)
from .errors import (
    ConfigurationError,
    DegenerateElementError,
    HexFemError,
    MeshFormatError,
    MeshValidationError,
    StagingError,
)
from .integrate import (
    BatchPlan,
    ComputeBackend,
    HostBackend,
    LocalValuesBatch,
    integrate_all,
    plan_batches,
    required_bytes,
)
from .mesh import (
    Mesh,
    StructuredGridSpec,
    generate_cube_mesh,
    load_mesh,
    save_mesh,
    validate_mesh,
)
from .sparseio import (
    MemoryModel,
    csc_memory,
    export_matrix_market,
    format_mb,
    format_percent,
    import_matrix_market,
    memory_saving,
    triplet_memory,
)

__version__ = "0.1.0"

__all__ = [
    "Mesh",
    "StructuredGridSpec",
    "generate_cube_mesh",
    "save_mesh",
    "load_mesh",
    "validate_mesh",
    "GaussRule",
    "ElementGeometry",
    "PackedLowerStiffness",
    "shape_functions",
    "shape_gradients",
    "gauss_rule",
    "jacobian",
    "local_stiffness",
    "stiffness_batch",
    "set_worker_threads",
    "pack_lower",
    "unpack_lower",
    "element_geometry",
    "ComputeBackend",
    "HostBackend",
    "BatchPlan",
    "LocalValuesBatch",
    "required_bytes",
    "plan_batches",
    "integrate_all",
    "TripletMatrix",
    "LowerCscMatrix",
    "map_local_to_global",
    "connectivity_index_arrays",
    "build_triplet",
    "triplet_to_csc",
    "DirectAssembler",
    "assemble_direct",
    "nnz_compression",
    "MemoryModel",
    "triplet_memory",
    "csc_memory",
    "memory_saving",
    "format_mb",
    "format_percent",
    "export_matrix_market",
    "import_matrix_market",
    "BuildReport",
    "run_build",
    "HexFemError",
    "MeshFormatError",
    "MeshValidationError",
    "DegenerateElementError",
    "ConfigurationError",
    "StagingError",
]
