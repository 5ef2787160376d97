#include "protoflow/assembler.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "protoflow/error.hpp"
#include "protoflow/serde.hpp"
#include "protoflow/xml.hpp"

namespace protoflow {

using nlohmann::json;

std::string dominant_color(const RasterImage& region) {
    if (region.empty()) throw ValidationError("dominant_color needs at least one pixel");
    std::vector<std::uint32_t> counts(4096, 0);
    std::vector<std::array<std::uint64_t, 3>> sums(4096, {0, 0, 0});
    const auto px = region.pixels();
    for (std::size_t i = 0; i < px.size(); i += 3) {
        const auto bucket = (static_cast<std::size_t>(px[i] >> 4) << 8) | (static_cast<std::size_t>(px[i + 1] >> 4) << 4) |
                            static_cast<std::size_t>(px[i + 2] >> 4);
        ++counts[bucket];
        sums[bucket][0] += px[i];
        sums[bucket][1] += px[i + 1];
        sums[bucket][2] += px[i + 2];
    }
    // max_element returns the first maximum, i.e. the lowest bucket index on ties.
    const auto best = static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
    const std::uint64_t n = counts[best];
    auto mean = [&](int c) { return static_cast<std::uint8_t>((sums[best][static_cast<std::size_t>(c)] + n / 2) / n); };
    return to_hex({mean(0), mean(1), mean(2)});
}

double font_size_for_height(int height) { return std::clamp(height * 0.6, 8.0, 72.0); }

namespace {

std::string num(double v) {
    if (v == std::floor(v)) return std::to_string(static_cast<long long>(v));
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string rect_attrs(const BBox& b) {
    return "x=\"" + std::to_string(b.x) + "\" y=\"" + std::to_string(b.y) + "\" width=\"" + std::to_string(b.w) +
           "\" height=\"" + std::to_string(b.h) + "\"";
}

std::string data_attrs(const ComponentContent& c) {
    return "data-kind=\"" + std::string(to_string(c.kind)) + "\" data-index=\"" + std::to_string(c.component_index) + "\"";
}

// The wrapper viewport the icon is scaled into: the icon's own viewBox, or
// its width/height, or the 24-unit Material grid.
std::string icon_view_box(const std::string& svg) {
    try {
        const auto root = parse_xml(svg);
        if (const auto* vb = root.attribute("viewBox")) return *vb;
        const auto* w = root.attribute("width");
        const auto* h = root.attribute("height");
        if (w && h) return "0 0 " + *w + " " + *h;
    } catch (const ValidationError&) {
    }
    return "0 0 24 24";
}

}  // namespace

std::string assemble_svg(const DesignInput& input, const ThemeDescription& theme,
                         const std::vector<ComponentContent>& contents) {
    const auto& layout = input.layout;
    if (contents.size() != layout.components.size())
        throw ValidationError("contents (" + std::to_string(contents.size()) + ") not aligned with layout (" +
                              std::to_string(layout.components.size()) + ")", "contents");
    const auto w = std::to_string(layout.canvas.width), h = std::to_string(layout.canvas.height);
    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" xmlns:xlink=\"http://www.w3.org/1999/xlink\" version=\"1.1\" "
        << "width=\"" << w << "\" height=\"" << h << "\" viewBox=\"0 0 " << w << ' ' << h << "\">\n";
    svg << "<rect id=\"background\" data-kind=\"background\" x=\"0\" y=\"0\" width=\"" << w << "\" height=\"" << h
        << "\" fill=\"" << xml_escape(theme.theme_color) << "\"/>\n";

    for (std::size_t i = 0; i < contents.size(); ++i) {
        const auto& content = contents[i];
        const auto& comp = layout.components[i];
        if (content.component_index != static_cast<int>(i))
            throw ValidationError("content " + std::to_string(i) + " carries index " +
                                  std::to_string(content.component_index), "contents[" + std::to_string(i) + "]");
        validate_content(content);
        const auto& b = comp.bbox;
        svg << "<g id=\"cmp-" << i << "\" " << data_attrs(content) << " data-type=\"" << to_string(comp.type)
            << "\" data-x=\"" << b.x << "\" data-y=\"" << b.y << "\" data-width=\"" << b.w << "\" data-height=\""
            << b.h << "\">";
        std::visit(
            [&](const auto& p) {
                using T = std::decay_t<decltype(p)>;
                if constexpr (std::is_same_v<T, TextPayload>) {
                    svg << "<text " << data_attrs(content) << " x=\"" << b.x << "\" y=\"" << num(b.y + b.h / 2.0)
                        << "\" font-size=\"" << num(font_size_for_height(b.h))
                        << "\" font-family=\"sans-serif\" dominant-baseline=\"central\" fill=\""
                        << xml_escape(theme.primary_color) << "\">" << xml_escape(p.text) << "</text>";
                } else if constexpr (std::is_same_v<T, ImagePayload>) {
                    svg << "<image " << data_attrs(content) << ' ' << rect_attrs(b)
                        << " preserveAspectRatio=\"none\" xlink:href=\"data:image/png;base64," << png_base64(p.image)
                        << "\"/>";
                } else if constexpr (std::is_same_v<T, IconPayload>) {
                    svg << "<svg " << data_attrs(content) << ' ' << rect_attrs(b) << " viewBox=\""
                        << xml_escape(icon_view_box(p.svg)) << "\" preserveAspectRatio=\"xMidYMid meet\" fill=\""
                        << xml_escape(theme.primary_color) << "\">" << p.svg << "</svg>";
                } else {
                    svg << "<rect " << data_attrs(content) << ' ' << rect_attrs(b) << " rx=\"4\" ry=\"4\" fill=\""
                        << xml_escape(p.fill) << "\"/>";
                }
            },
            content.payload);
        svg << "</g>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

Prototype build_prototype(const DesignInput& input, const GenerationTrace& trace) {
    Prototype p;
    p.input = input;
    p.theme = trace.theme.description;
    p.contents = trace.results;
    p.svg = assemble_svg(input, p.theme, p.contents);
    return p;
}

json export_project(const Prototype& prototype) {
    json contents = json::array();
    for (const auto& c : prototype.contents) contents.push_back(to_json(c));
    return {{"version", prototype.export_version},
            {"input", to_json(prototype.input)},
            {"theme", to_json(prototype.theme)},
            {"contents", contents},
            {"svg", prototype.svg}};
}

Prototype import_project(const json& document) {
    if (!document.is_object()) throw ValidationError("project export must be an object");
    const auto version = document.value("version", std::string{});
    if (version != kExportVersion) throw ValidationError("unsupported export version '" + version + "'", "version");
    const auto theme = document.find("theme");
    if (theme == document.end() || !theme->is_object() || theme->empty())
        throw ValidationError("project export has no theme", "theme");
    Prototype p;
    p.export_version = version;
    p.input = design_input_from_json(document.at("input"));
    p.theme = theme_description_from_json(*theme);
    validate_theme_description(p.theme, p.input.layout.components.size());
    for (const auto& c : document.at("contents")) p.contents.push_back(component_content_from_json(c));
    p.svg = document.value("svg", std::string{});
    return p;
}

}  // namespace protoflow
