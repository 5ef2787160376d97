#include "protoflow/pipeline_types.hpp"

#include "protoflow/error.hpp"

namespace protoflow {

void validate_design_input(const DesignInput& input) {
    if (input.prompt.empty()) throw ValidationError("prompt must be non-empty", "prompt");
    if (input.layout.components.empty()) throw ValidationError("layout needs at least one component", "layout.components");
    try {
        validate_layout(input.layout);
    } catch (const ValidationError& e) {
        throw ValidationError(e.what(), "layout." + e.field());
    }
}

std::string_view to_string(PlanKind kind) {
    switch (kind) {
        case PlanKind::text: return "text";
        case PlanKind::image: return "image";
        case PlanKind::icon: return "icon";
        case PlanKind::other: return "other";
    }
    return "other";
}

PlanKind parse_plan_kind(std::string_view text) {
    if (text == "text") return PlanKind::text;
    if (text == "image") return PlanKind::image;
    if (text == "icon") return PlanKind::icon;
    if (text == "other") return PlanKind::other;
    throw ValidationError("unknown plan kind '" + std::string(text) + "'");
}

void validate_theme_description(const ThemeDescription& theme, std::size_t component_count) {
    if (!is_hex_color(theme.theme_color)) throw ValidationError("theme_color must be #rrggbb", "theme.theme_color");
    if (!is_hex_color(theme.primary_color)) throw ValidationError("primary_color must be #rrggbb", "theme.primary_color");
    if (theme.component_plan.size() != component_count)
        throw ValidationError("component_plan has " + std::to_string(theme.component_plan.size()) +
                                  " entries for " + std::to_string(component_count) + " components",
                              "theme.component_plan");
}

std::string_view to_string(ModuleId module) {
    switch (module) {
        case ModuleId::text: return "text";
        case ModuleId::image: return "image";
        case ModuleId::icon: return "icon";
        case ModuleId::color_fill: return "color_fill";
    }
    return "color_fill";
}

ModuleId parse_module_id(std::string_view text) {
    if (text == "text") return ModuleId::text;
    if (text == "image") return ModuleId::image;
    if (text == "icon") return ModuleId::icon;
    if (text == "color_fill") return ModuleId::color_fill;
    throw ValidationError("unknown module kind '" + std::string(text) + "'");
}

void validate_content(const ComponentContent& content) {
    const bool ok = (content.kind == ModuleId::text && std::holds_alternative<TextPayload>(content.payload)) ||
                    (content.kind == ModuleId::image && std::holds_alternative<ImagePayload>(content.payload)) ||
                    (content.kind == ModuleId::icon && std::holds_alternative<IconPayload>(content.payload)) ||
                    (content.kind == ModuleId::color_fill && std::holds_alternative<FillPayload>(content.payload));
    if (!ok) throw ValidationError("content kind does not match its payload", "contents[" + std::to_string(content.component_index) + "]");
}

std::string summarize_content(const ComponentContent& content, const LayoutComponent& component) {
    std::string out = "Res[" + std::to_string(content.component_index) + "] " + std::string(to_string(component.type)) +
                      " " + format_bbox(component.bbox) + " -> ";
    std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, TextPayload>) {
                out += "text: " + p.text;
            } else if constexpr (std::is_same_v<T, ImagePayload>) {
                out += "image: " + p.prompt_used;
            } else if constexpr (std::is_same_v<T, IconPayload>) {
                out += "icon: " + p.phrase + " (" + p.icon_id + ")";
            } else {
                out += "fill: " + p.fill;
            }
        },
        content.payload);
    return out;
}

bool same_content(const GenerationTrace& a, const GenerationTrace& b) {
    return a.theme == b.theme && a.calls == b.calls && a.results == b.results && a.cache == b.cache &&
           a.warnings == b.warnings;
}

}  // namespace protoflow
