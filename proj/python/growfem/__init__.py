"""Finite-element simulation of reaction-diffusion systems on growing 2D domains."""

from ._growfem import (
    Curve,
    CurveSegment,
    DisplacementField,
    GrowfemError,
    HillParams,
    JunctionRecord,
    Keying,
    LoopPiece,
    Mesh,
    Mode,
    NetworkSpec,
    Params,
    Point2,
    QualityReport,
    RateParams,
    RunConfig,
    SegmentedGeometry,
    SolverConfig,
    StagedGeometry,
    StageFields,
    StageResult,
    build_segment_fields,
    build_whole_curve_fields,
    config_to_json,
    curve_length,
    format_double,
    generate_fixture,
    hill_act,
    hill_inh,
    labeled_areas,
    load_config,
    move_mesh,
    outer_boundary_polygon,
    parse_config,
    polygon_area,
    quality_report,
    read_displacement_csv,
    read_geometry,
    resample_uniform,
    run_stage,
    segment_at_intersections,
    subdomain_loop_polygon,
    triangulate,
    write_displacement_csv,
    write_geometry,
)

__all__ = [
    "Curve",
    "CurveSegment",
    "DisplacementField",
    "GrowfemError",
    "HillParams",
    "JunctionRecord",
    "Keying",
    "LoopPiece",
    "Mesh",
    "Mode",
    "NetworkSpec",
    "Params",
    "Point2",
    "QualityReport",
    "RateParams",
    "RunConfig",
    "SegmentedGeometry",
    "SolverConfig",
    "StagedGeometry",
    "StageFields",
    "StageResult",
    "build_segment_fields",
    "build_whole_curve_fields",
    "config_to_json",
    "curve_length",
    "format_double",
    "generate_fixture",
    "hill_act",
    "hill_inh",
    "labeled_areas",
    "load_config",
    "move_mesh",
    "outer_boundary_polygon",
    "parse_config",
    "polygon_area",
    "quality_report",
    "read_displacement_csv",
    "read_geometry",
    "resample_uniform",
    "run_stage",
    "segment_at_intersections",
    "subdomain_loop_polygon",
    "triangulate",
    "write_geometry",
    "write_displacement_csv",
]
