"""Dirichlet stereohedra: certified Voronoi-cell facet enumeration and
facet-count bounds for crystallographic groups in 2D and 3D."""

from .bounds import BoundRecord, corollary_bound, delone_bound, group_report, table_verify
from .geometry import (
    CellPolytope,
    HalfSpace,
    Isometry,
    TolerancePolicy,
    bisector,
    build_cell,
    facet_test,
)
from .groups3d import (
    Band,
    GroupSpec,
    OrbitPoint,
    band_of,
    horizontal_plane_count,
    make_group,
    orbit_in_region,
    stabilizer_check,
)
from .planar import (
    InfluenceRegion,
    PlanarGroupSpec,
    SubdomainLabel,
    coset_label,
    extended_region,
    influence_region,
    make_planar_group,
    overlap_count,
    planar_cell,
    randomized_bound_probe,
    reduced_influence_region,
)
from .screw import HelixSpec, f_eval, helix_point, tangent_center, verify_screw_neighbors
from .stereohedron import (
    NeighborReport,
    candidate_set,
    enumerate_neighbors,
    export_cell,
    neighbor_height_signature,
    report_from_json,
    report_to_json,
)

__version__ = "0.1.0"
