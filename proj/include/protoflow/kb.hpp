#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "protoflow/geometry.hpp"

namespace protoflow {

/// The closed set of component labels a wireframe may use.
enum class ComponentType {
    Text,
    TextButton,
    Icon,
    Image,
    BackgroundImage,
    Toolbar,
    ListItem,
    Input,
    Card,
    WebView,
    Checkbox,
    RadioButton,
    Slider,
};

inline constexpr std::array<ComponentType, 13> kAllComponentTypes{
    ComponentType::Text,     ComponentType::TextButton, ComponentType::Icon,        ComponentType::Image,
    ComponentType::BackgroundImage, ComponentType::Toolbar, ComponentType::ListItem, ComponentType::Input,
    ComponentType::Card,     ComponentType::WebView,    ComponentType::Checkbox,    ComponentType::RadioButton,
    ComponentType::Slider,
};

std::string_view to_string(ComponentType type);
/// Case-insensitive; throws ValidationError for anything outside the 13 labels.
ComponentType parse_component_type(std::string_view label);

struct LayoutComponent {
    ComponentType type = ComponentType::Text;
    BBox bbox;

    friend bool operator==(const LayoutComponent&, const LayoutComponent&) = default;
};

/// Components are kept in generation order.
struct Layout {
    Canvas canvas;
    std::vector<LayoutComponent> components;

    friend bool operator==(const Layout&, const Layout&) = default;
};

/// Throws ValidationError naming e.g. "components[2].bbox".
void validate_layout(const Layout& layout);

/// "<Type> [x,y,w,h]", one line per component, newline-joined.
std::string serialize_layout_lines(const Layout& layout);
std::string format_bbox(const BBox& box);

struct ThemeAttrs {
    std::string theme_color;
    std::string primary_color;
    std::string theme_description;
    std::string app_category;

    friend bool operator==(const ThemeAttrs&, const ThemeAttrs&) = default;
};

struct KnowledgeRecord {
    std::string id;
    Layout layout;
    /// Index-aligned with layout.components; nullopt where a component has no text.
    std::vector<std::optional<std::string>> component_texts;
    std::string ui_description;
    ThemeAttrs theme_attrs;

    friend bool operator==(const KnowledgeRecord&, const KnowledgeRecord&) = default;
};

struct IconRecord {
    std::string id;
    std::string phrase;
    std::string svg_source;

    friend bool operator==(const IconRecord&, const IconRecord&) = default;
};

enum class ThemeAttribute { theme_color, primary_color, theme_description, app_category };

struct VqaTemplate {
    ThemeAttribute attribute;
    std::string question;
};

/// The four visual question templates used to derive ThemeAttrs.
std::vector<VqaTemplate> default_vqa_templates();
std::vector<VqaTemplate> load_vqa_templates(const std::filesystem::path& path);
/// Throws unless every attribute appears exactly once.
void validate_vqa_templates(const std::vector<VqaTemplate>& templates);

KnowledgeRecord parse_knowledge_record(const nlohmann::json& line, std::size_t record_index);
nlohmann::json knowledge_record_to_json(const KnowledgeRecord& record);
/// Compact single-line form, the on-disk representation.
std::string serialize_knowledge_record(const KnowledgeRecord& record);

Layout parse_layout(const nlohmann::json& doc);
nlohmann::json layout_to_json(const Layout& layout);

/// Loads a .jsonl file, or every *.jsonl file of a directory in filename
/// order. Blank lines are skipped; record indices count records, not lines.
std::vector<KnowledgeRecord> load_knowledge_base(const std::filesystem::path& path);

IconRecord parse_icon_record(const nlohmann::json& line, std::size_t record_index);
std::vector<IconRecord> load_icon_base(const std::filesystem::path& path);

/// Text that gets embedded and injected as a reference: layout lines, the
/// non-empty component texts, the UI description, the theme attributes in
/// fixed key order, then "canvas: WxH". Newlines and backslashes in free text
/// are escaped, and texts that follow a text-less component are prefixed with
/// "[i] ", so distinct contents give distinct strings. The record id is not
/// part of the text.
std::string knowledge_record_to_text(const KnowledgeRecord& record);

struct KnowledgeBaseStats {
    std::size_t records = 0;
    std::size_t components = 0;
    std::array<std::size_t, kAllComponentTypes.size()> per_type{};
    std::vector<std::pair<std::string, std::size_t>> categories;
};

KnowledgeBaseStats compute_stats(const std::vector<KnowledgeRecord>& records);

}  // namespace protoflow
