#pragma once

#include <map>
#include <string>
#include <variant>
#include <vector>

#include "protoflow/image.hpp"
#include "protoflow/kb.hpp"

namespace protoflow {

/// The designer's prompt plus wireframe.
struct DesignInput {
    std::string prompt;
    Layout layout;

    friend bool operator==(const DesignInput&, const DesignInput&) = default;
};

/// Throws ValidationError: empty prompt, no components, or a bad layout.
void validate_design_input(const DesignInput& input);

/// The amalgamated theme-description prompt and the parts it was built from.
/// text == in_p + "\n" + in_l + "\n" + refer[0] + "\n" + ... + "\n" + p_theme.
struct ThemePrompt {
    std::string text;
    std::string in_p;
    std::string in_l_serialized;
    std::vector<std::string> refer;
    std::string p_theme;

    friend bool operator==(const ThemePrompt&, const ThemePrompt&) = default;
};

enum class PlanKind { text, image, icon, other };

std::string_view to_string(PlanKind kind);
PlanKind parse_plan_kind(std::string_view text);

struct PlanEntry {
    PlanKind kind = PlanKind::other;
    std::string content_hint;

    friend bool operator==(const PlanEntry&, const PlanEntry&) = default;
};

struct ThemeDescription {
    std::string theme_color;
    std::string primary_color;
    std::string app_category;
    std::string theme_text;
    /// Aligned with the layout's components.
    std::vector<PlanEntry> component_plan;

    friend bool operator==(const ThemeDescription&, const ThemeDescription&) = default;
};

/// Throws ValidationError for non-#rrggbb colors or a plan of the wrong length.
void validate_theme_description(const ThemeDescription& theme, std::size_t component_count);

struct ThemePackage {
    ThemeDescription description;
    RasterImage theme_image;
    ThemePrompt prompt_used;
    /// Prompt sent to the image backend for the theme image.
    std::string image_prompt;
    /// False when the theme image is a flat fill of the theme color rather
    /// than a backend render (theme-image stage disabled).
    bool theme_image_generated = true;

    friend bool operator==(const ThemePackage&, const ThemePackage&) = default;
};

enum class ModuleId { text, image, icon, color_fill };

std::string_view to_string(ModuleId module);
ModuleId parse_module_id(std::string_view text);

struct SubModuleCall {
    int component_index = 0;
    ComponentType component_type = ComponentType::Text;
    ModuleId module = ModuleId::text;
    std::string template_id;
    /// The sub-module template with the bbox (and hint) substituted.
    std::string p_sub;
    /// p_sub + "\n" + the cache text at this step.
    std::string prompt;

    friend bool operator==(const SubModuleCall&, const SubModuleCall&) = default;
};

struct TextPayload {
    std::string text;
    friend bool operator==(const TextPayload&, const TextPayload&) = default;
};

struct ImagePayload {
    RasterImage image;
    std::string prompt_used;
    friend bool operator==(const ImagePayload&, const ImagePayload&) = default;
};

struct IconPayload {
    std::string icon_id;
    std::string svg;
    std::string phrase;
    friend bool operator==(const IconPayload&, const IconPayload&) = default;
};

struct FillPayload {
    std::string fill;
    friend bool operator==(const FillPayload&, const FillPayload&) = default;
};

using ContentPayload = std::variant<TextPayload, ImagePayload, IconPayload, FillPayload>;

struct ComponentContent {
    int component_index = 0;
    ModuleId kind = ModuleId::color_fill;
    ContentPayload payload;

    friend bool operator==(const ComponentContent&, const ComponentContent&) = default;
};

/// Throws if `kind` does not match the payload alternative.
void validate_content(const ComponentContent& content);

/// One-line rendering of a result as it is folded into the cache pool.
std::string summarize_content(const ComponentContent& content, const LayoutComponent& component);

/// Backend call tally keyed by call site: theme_text, theme_image, text, image, icon.
using CallCounts = std::map<std::string, int>;

struct GenerationTrace {
    ThemePackage theme;
    std::vector<SubModuleCall> calls;
    std::vector<ComponentContent> results;
    /// Cache pool after the last step: seed followed by one entry per result.
    std::vector<std::string> cache;
    /// Cumulative over the lifetime of the trace, including regenerations.
    CallCounts backend_call_counts;
    std::vector<std::string> warnings;

    friend bool operator==(const GenerationTrace&, const GenerationTrace&) = default;
};

/// Equality ignoring backend_call_counts (which accumulate across edits).
bool same_content(const GenerationTrace& a, const GenerationTrace& b);

}  // namespace protoflow
