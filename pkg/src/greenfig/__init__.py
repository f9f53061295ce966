"""Figure integrals of additive rectangle functions, with Green and Gauss checks
for continuous (not necessarily differentiable) vector fields."""
from .errors import DomainError, GreenfigError, IndeterminateError, ValidationError
from .fields import (CONTINUOUS_ONLY, SMOOTH, ScalarField2, VectorField2, VectorField3, catalog,
                     const2, const3, field_from_spec, grad, radial, rot, weier2, weier3,
                     weierstrass)
from .gauss3d import (Box3, TriMesh, VoxelGrid, classify_voxels, cube_mesh, flux_function,
                      gauss_verify, icosphere, jordan_volume, mesh_checks, read_mesh,
                      surface_flux)
from .geom2d import DyadicGrid, Figure, GridFigure, Rect, rect_area, rect_perimeter, split_rect
from .integral import ConvergenceReport, figure_integral, jordan_content, line_integral
from .rectfn import (QuadratureSpec, RectangleFunction, additivity_defect, area_function,
                     circulation_function, evaluate_on_figure, riemann_function)
from .region2d import (Curve, Label, classify_cells, disk_curve, lshape_curve, point_in_region,
                       read_curve, square_curve)
from .verify import GreenReport, divergence_oracle, green_verify, perimeter_bound_audit

__version__ = "0.1.0"

__all__ = [
    "GreenfigError", "ValidationError", "DomainError", "IndeterminateError",
    "Rect", "Figure", "DyadicGrid", "GridFigure", "rect_area", "rect_perimeter", "split_rect",
    "Curve", "Label", "classify_cells", "point_in_region", "square_curve", "disk_curve",
    "lshape_curve", "read_curve",
    "ScalarField2", "VectorField2", "VectorField3", "SMOOTH", "CONTINUOUS_ONLY", "catalog",
    "const2", "rot", "grad", "weier2", "const3", "radial", "weier3", "weierstrass",
    "field_from_spec",
    "QuadratureSpec", "RectangleFunction", "area_function", "riemann_function",
    "circulation_function", "evaluate_on_figure", "additivity_defect",
    "ConvergenceReport", "figure_integral", "jordan_content", "line_integral",
    "GreenReport", "green_verify", "divergence_oracle", "perimeter_bound_audit",
    "Box3", "TriMesh", "VoxelGrid", "mesh_checks", "icosphere", "cube_mesh", "read_mesh",
    "classify_voxels", "flux_function", "surface_flux", "gauss_verify", "jordan_volume",
]
