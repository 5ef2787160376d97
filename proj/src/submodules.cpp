#include "protoflow/submodules.hpp"

#include <cctype>
#include <sstream>

#include "protoflow/assembler.hpp"
#include "protoflow/error.hpp"

namespace protoflow {

namespace {

std::string trim(std::string_view s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string_view::npos) return {};
    const auto end = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(begin, end - begin + 1));
}

// First non-blank line, trimmed.
std::string first_line(std::string_view text) {
    std::istringstream in{std::string(text)};
    for (std::string line; std::getline(in, line);) {
        auto t = trim(line);
        if (!t.empty()) return t;
    }
    return {};
}

BBox scaled_crop(const BBox& bbox, const Canvas& canvas, const RasterImage& image, int component_index) {
    const auto rect = scale_to_image(bbox, canvas, image.width(), image.height());
    if (rect.w < 1 || rect.h < 1)
        throw ValidationError("component " + std::to_string(component_index) +
                                  " maps to an empty region of the theme image",
                              "components[" + std::to_string(component_index) + "].bbox");
    return rect;
}

}  // namespace

std::string render_sub_prompt(std::string_view templ, const BBox& bbox, std::string_view hint) {
    std::string out(templ);
    const std::string placeholder = "[bbox]";
    for (auto pos = out.find(placeholder); pos != std::string::npos; pos = out.find(placeholder, pos)) {
        const auto box = format_bbox(bbox);
        out.replace(pos, placeholder.size(), box);
        pos += box.size();
    }
    if (!hint.empty()) {
        out += "\nContent hint: ";
        out += hint;
    }
    return out;
}

std::string sanitize_icon_phrase(std::string_view raw) {
    std::string cleaned;
    cleaned.reserve(raw.size());
    for (char c : raw) {
        const auto u = static_cast<unsigned char>(c);
        if (std::isalnum(u)) cleaned += static_cast<char>(std::tolower(u));
        else cleaned += ' ';
    }
    std::istringstream words(cleaned);
    std::string out;
    int count = 0;
    for (std::string w; count < 6 && words >> w; ++count) {
        if (!out.empty()) out += ' ';
        out += w;
    }
    return out;
}

ComponentContent text_content(const SubModuleCall& call, TextGenerator& text, int max_tokens) {
    const auto completion = text.generate_text({call.prompt, 0.0, max_tokens});
    auto line = first_line(completion);
    if (line.empty()) throw BackendError("empty text completion for component " + std::to_string(call.component_index), false);
    return {call.component_index, ModuleId::text, TextPayload{std::move(line)}};
}

ComponentContent image_content(const SubModuleCall& call, const ThemePackage& theme, const BBox& bbox,
                               const Canvas& canvas, ImageGenerator& images, const ImageContentOptions& options) {
    const auto rect = scaled_crop(bbox, canvas, theme.theme_image, call.component_index);
    ImageGenRequest request;
    request.prompt = options.prompt;
    request.strength = options.strength;
    request.seed = options.seed;
    request.size = {rect.w, rect.h};
    if (options.use_theme_crop) request.init_image = theme.theme_image.crop(rect);
    auto image = images.generate_image(request);
    if (image.width() != rect.w || image.height() != rect.h)
        throw BackendError("image backend ignored the requested size", false);
    return {call.component_index, ModuleId::image, ImagePayload{std::move(image), options.prompt}};
}

ComponentContent icon_content(const SubModuleCall& call, const IconIndex& icons, TextGenerator& text,
                              TextEmbedder& embedder, int max_tokens) {
    if (icons.icons().empty()) throw ValidationError("icon base is empty");
    const auto completion = text.generate_text({call.prompt, 0.0, max_tokens});
    auto phrase = sanitize_icon_phrase(first_line(completion));
    if (phrase.empty()) throw BackendError("empty icon phrase for component " + std::to_string(call.component_index), false);
    const auto& icon = retrieve_icon(icons, phrase, embedder);
    return {call.component_index, ModuleId::icon, IconPayload{icon.id, icon.svg_source, std::move(phrase)}};
}

ComponentContent color_fill_content(int component_index, const BBox& bbox, const RasterImage& theme_image,
                                    const Canvas& canvas) {
    const auto rect = scaled_crop(bbox, canvas, theme_image, component_index);
    return {component_index, ModuleId::color_fill, FillPayload{dominant_color(theme_image.crop(rect))}};
}

}  // namespace protoflow
