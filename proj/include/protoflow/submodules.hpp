#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "protoflow/backends.hpp"
#include "protoflow/pipeline_types.hpp"
#include "protoflow/retrieval.hpp"

namespace protoflow {

/// Default sub-module templates. "[bbox]" is replaced with "[x,y,w,h]".
inline constexpr std::string_view kDefaultTextTemplate =
    "Based on the theme description and relevant details, provide a text content recommendation for the "
    "designated position at [bbox].";
inline constexpr std::string_view kDefaultIconTemplate =
    "In reference to relevant information and taking into account its positioning at [bbox], and based on the "
    "theme description, propose an indicative phrase like \"msg\" for the \"Icon\".";
inline constexpr std::string_view kDefaultImageTemplate =
    "Generate the image content for the designated position at [bbox], cropped from the theme image.";
inline constexpr std::string_view kDefaultFillTemplate =
    "Fill the component at [bbox] with the dominant colour of its theme image region.";

/// Substitutes the bbox into `templ` and appends "\nContent hint: <hint>"
/// when the hint is non-empty.
std::string render_sub_prompt(std::string_view templ, const BBox& bbox, std::string_view hint);

/// Lowercases, turns punctuation into spaces, keeps at most six words.
std::string sanitize_icon_phrase(std::string_view raw);

/// Trimmed first line of the completion for call.prompt.
ComponentContent text_content(const SubModuleCall& call, TextGenerator& text, int max_tokens);

struct ImageContentOptions {
    std::string prompt;
    double strength = 0.6;
    std::uint64_t seed = 0;
    /// When false the theme image is not a real render: no init image is
    /// sent and the backend generates the crop-sized region from scratch.
    bool use_theme_crop = true;
};

/// Crops the theme image at the canvas bbox scaled to image space, then asks
/// the image backend for a crop-sized image initialised from it. Never sets a
/// layout condition.
ComponentContent image_content(const SubModuleCall& call, const ThemePackage& theme, const BBox& bbox,
                               const Canvas& canvas, ImageGenerator& images, const ImageContentOptions& options);

/// Asks for a phrase, sanitizes it and returns the nearest icon verbatim.
ComponentContent icon_content(const SubModuleCall& call, const IconIndex& icons, TextGenerator& text,
                              TextEmbedder& embedder, int max_tokens);

/// Dominant color of the bbox's theme-image region.
ComponentContent color_fill_content(int component_index, const BBox& bbox, const RasterImage& theme_image,
                                    const Canvas& canvas);

}  // namespace protoflow
