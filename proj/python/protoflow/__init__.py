"""Prompt + wireframe to editable SVG prototypes."""

from ._core import (
    Error,
    GenerationError,
    NotFoundError,
    Pipeline,
    ValidationError,
    component_types,
    cosine_similarity,
    dominant_color,
    fid,
    fid_from_stats,
    fit_gaussian,
    gd,
    import_project,
    knowledge_record_to_text,
    load_icon_base,
    load_knowledge_base,
    mock_embed,
    perceptual_hash,
    rasterize_svg,
)

__all__ = [
    "Error",
    "GenerationError",
    "NotFoundError",
    "Pipeline",
    "ValidationError",
    "component_types",
    "cosine_similarity",
    "dominant_color",
    "fid",
    "fid_from_stats",
    "fit_gaussian",
    "gd",
    "import_project",
    "knowledge_record_to_text",
    "load_icon_base",
    "load_knowledge_base",
    "mock_embed",
    "perceptual_hash",
    "rasterize_svg",
]
