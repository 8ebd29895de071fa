"""Mixed stress-displacement virtual element solver on polygonal meshes."""

try:
    # installed layout: the extension lives inside the package
    from ._core import (
        MeshFamily,
        PolygonMesh,
        check_commuting_diagram,
        fit_rate,
        generate_mesh,
        parse_family,
        patch_test,
        run_study,
        solve_case,
        validate_mesh,
    )
except ImportError:  # build-tree layout: _core sits next to the package dir
    from _core import (
        MeshFamily,
        PolygonMesh,
        check_commuting_diagram,
        fit_rate,
        generate_mesh,
        parse_family,
        patch_test,
        run_study,
        solve_case,
        validate_mesh,
    )

__all__ = [
    "MeshFamily",
    "PolygonMesh",
    "check_commuting_diagram",
    "fit_rate",
    "generate_mesh",
    "parse_family",
    "patch_test",
    "run_study",
    "solve_case",
    "validate_mesh",
]
