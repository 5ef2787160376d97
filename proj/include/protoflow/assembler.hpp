#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "protoflow/pipeline_types.hpp"

namespace protoflow {

inline constexpr std::string_view kExportVersion = "protoflow.project/1";

/// Histogram mode over 16 levels per channel (4096 buckets), ties to the
/// lowest bucket index, reported as the rounded mean RGB of that bucket.
std::string dominant_color(const RasterImage& region);

/// clamp(h * 0.6, 8, 72)
double font_size_for_height(int height);

/// Single self-contained SVG 1.1 document: a background rect in the theme
/// color, then one <g id="cmp-i"> per component in layout order carrying
/// data-kind, data-index and data-x/-y/-width/-height equal to the bbox.
std::string assemble_svg(const DesignInput& input, const ThemeDescription& theme,
                         const std::vector<ComponentContent>& contents);

struct Prototype {
    DesignInput input;
    ThemeDescription theme;
    std::vector<ComponentContent> contents;
    std::string svg;
    std::string export_version{kExportVersion};

    friend bool operator==(const Prototype&, const Prototype&) = default;
};

Prototype build_prototype(const DesignInput& input, const GenerationTrace& trace);

/// {"version","input","theme","contents","svg"}; images as base64 PNG.
nlohmann::json export_project(const Prototype& prototype);
/// Inverse of export_project. Throws ValidationError on a missing or empty theme.
Prototype import_project(const nlohmann::json& document);

}  // namespace protoflow
