"""roomfem: reconstruct a room from a surface scan, mesh it as a prism of
tetrahedra, and solve Poisson problems with point sources on it."""

from .errors import (
    DegeneratePolygon,
    DegenerateTet,
    DimensionMismatch,
    EmptyFootprint,
    EmptyScan,
    LengthMismatch,
    MissingCeiling,
    MissingFloor,
    NaNDetected,
    NoDirichletData,
    NoPlanesFound,
    NonpositiveDiagonal,
    NotSimple,
    ParseError,
    PointOutsideDomain,
    RoomFemError,
    SolverDiverged,
    StageConflict,
    TooFewWalls,
    UnboundedFootprint,
    UnknownBoundaryTag,
    UnsupportedFormat,
)
from .fem import (
    PointSource,
    PoissonProblem,
    SolutionField,
    apply_dirichlet,
    assemble_point_sources,
    assemble_stiffness,
    local_stiffness,
    locate_point,
    lumped_mass,
    solve_poisson,
)
from .geometry import (
    ClassifiedPlanes,
    Plane,
    Space,
    SurfaceMesh,
    build_space,
    classify_planes,
    extract_planes,
)
from .io import (
    mesh_checksum,
    read_mesh,
    read_problem,
    read_solution,
    read_space,
    read_surface_scan,
    write_mesh,
    write_problem,
    write_solution,
    write_space,
    write_surface_scan,
)
from .meshgen import (
    MeshQuality,
    TetMesh,
    extrude_to_tets,
    extrude_triangulation,
    mesh_quality,
    triangulate_footprint,
)
from .solver import (
    CsrMatrix,
    JacobiPreconditioner,
    SolveStats,
    jacobi_preconditioner,
    matvec,
    pcg_solve,
)

__version__ = "0.1.0"

__all__ = [
    "ClassifiedPlanes", "CsrMatrix", "DegeneratePolygon", "DegenerateTet",
    "DimensionMismatch", "EmptyFootprint", "EmptyScan", "JacobiPreconditioner",
    "LengthMismatch", "MeshQuality", "MissingCeiling", "MissingFloor",
    "NaNDetected", "NoDirichletData", "NoPlanesFound", "NonpositiveDiagonal",
    "NotSimple", "ParseError", "Plane", "PointOutsideDomain", "PointSource",
    "PoissonProblem", "RoomFemError", "SolutionField", "SolveStats",
    "SolverDiverged", "Space", "StageConflict", "SurfaceMesh", "TetMesh",
    "TooFewWalls", "UnboundedFootprint", "UnknownBoundaryTag",
    "UnsupportedFormat", "apply_dirichlet", "assemble_point_sources",
    "assemble_stiffness", "build_space", "classify_planes", "extract_planes",
    "extrude_to_tets", "extrude_triangulation", "jacobi_preconditioner",
    "local_stiffness", "locate_point", "lumped_mass", "matvec", "mesh_checksum",
    "mesh_quality", "pcg_solve", "read_mesh", "read_problem", "read_solution",
    "read_space", "read_surface_scan", "solve_poisson", "triangulate_footprint",
    "write_mesh", "write_problem", "write_solution", "write_space",
    "write_surface_scan",
]
