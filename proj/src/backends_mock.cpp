#include <algorithm>
#include <array>
#include <cmath>
#include <regex>
#include <sstream>

#include "protoflow/backends.hpp"
#include "protoflow/error.hpp"
#include "protoflow/hash.hpp"

namespace protoflow {

namespace {

Rgb color_from_hash(std::uint64_t h) {
    return {static_cast<std::uint8_t>(h >> 16), static_cast<std::uint8_t>(h >> 8), static_cast<std::uint8_t>(h)};
}

constexpr std::array<std::string_view, 8> kMockCategories{
    "shopping", "travel", "finance", "health", "social", "music", "education", "productivity",
};

std::string_view mock_kind(ComponentType type) {
    switch (type) {
        case ComponentType::Text:
        case ComponentType::TextButton: return "text";
        case ComponentType::Image:
        case ComponentType::BackgroundImage: return "image";
        case ComponentType::Icon: return "icon";
        default: return "other";
    }
}

// Answers a theme-description prompt with the labeled block the parser
// expects. Component slots are read back from the "SLOT[i] = <Type> [..]"
// lines the template renders.
std::string mock_theme_block(const std::string& prompt) {
    const auto digest = fnv1a64(prompt);
    const auto category = kMockCategories[mix64(digest ^ 3) % kMockCategories.size()];
    const auto theme = to_hex(color_from_hash(mix64(digest ^ 1)));
    const auto primary = to_hex(color_from_hash(mix64(digest ^ 2)));
    std::ostringstream out;
    out << "THEME_COLOR: " << theme << '\n'
        << "PRIMARY_COLOR: " << primary << '\n'
        << "APP_CATEGORY: " << category << '\n'
        << "THEME: A " << category << " app with a " << theme << " background and " << primary
        << " accents (mock " << hex16(digest) << ")";

    static const std::regex slot_re(R"(^SLOT\[(\d+)\] = (\w+) \[)");
    std::istringstream lines(prompt);
    for (std::string line; std::getline(lines, line);) {
        std::smatch m;
        if (!std::regex_search(line, m, slot_re)) continue;
        const auto index = std::stoul(m[1].str());
        std::string_view kind = "other";
        try {
            kind = mock_kind(parse_component_type(m[2].str()));
        } catch (const ValidationError&) {
        }
        out << "\nCOMPONENT[" << index << "]: " << kind << " | " << category << ' ' << kind << " content "
            << hex16(hash_values(prompt, {index})).substr(0, 8);
    }
    return out.str();
}

RasterImage blend(const RasterImage& init, const RasterImage& painted, double strength) {
    std::vector<std::uint8_t> out(painted.pixels().size());
    const auto a = init.pixels();
    const auto b = painted.pixels();
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = static_cast<std::uint8_t>(std::lround((1.0 - strength) * a[i] + strength * b[i]));
    return RasterImage(painted.width(), painted.height(), std::move(out));
}

}  // namespace

Rgb mock_background_color(std::string_view prompt, std::uint64_t seed) {
    return color_from_hash(hash_values(prompt, {seed, 0xb6}));
}

Rgb mock_component_color(std::string_view prompt, std::size_t component_index, std::uint64_t seed) {
    return color_from_hash(hash_values(prompt, {seed, 0xc0, component_index}));
}

Rgb mock_gradient_bottom_color(std::string_view prompt, std::uint64_t seed) {
    return color_from_hash(hash_values(prompt, {seed, 0x6d}));
}

std::string MockTextGenerator::generate_text(const TextGenRequest& request) {
    if (request.prompt.empty()) throw ValidationError("text prompt must be non-empty", "prompt");
    if (request.prompt.find(kThemeFormatMarker) != std::string::npos) return mock_theme_block(request.prompt);
    return "MOCK:" + hex16(fnv1a64(request.prompt));
}

EmbeddingVector MockEmbedder::embed_text(std::string_view text) {
    if (text.empty()) throw ValidationError("embedding input must be non-empty", "text");
    EmbeddingVector v;
    v.values.resize(dimension_);
    double norm2 = 0.0;
    for (std::size_t i = 0; i < dimension_; ++i) {
        const auto h = hash_values(text, {seed_, i});
        const double unit = static_cast<double>(h >> 11) * 0x1.0p-53;  // [0,1)
        v.values[i] = 2.0 * unit - 1.0;
        norm2 += v.values[i] * v.values[i];
    }
    const double norm = std::sqrt(norm2);
    for (auto& x : v.values) x /= norm;
    return v;
}

RasterImage MockImageGenerator::generate_image(const ImageGenRequest& request) {
    const auto [width, height] = request.size;
    if (width < 1 || height < 1) throw ValidationError("image size must be positive", "size");
    if (!(request.strength > 0.0 && request.strength <= 1.0)) throw ValidationError("strength must be in (0,1]", "strength");
    const auto background = mock_background_color(request.prompt, request.seed);
    RasterImage image(width, height, background);

    if (request.layout_condition) {
        const auto& layout = *request.layout_condition;
        for (std::size_t i = 0; i < layout.components.size(); ++i) {
            const auto rect = scale_to_image(layout.components[i].bbox, layout.canvas, width, height);
            image.fill_rect(rect, mock_component_color(request.prompt, i, request.seed));
        }
    } else {
        const auto bottom = mock_gradient_bottom_color(request.prompt, request.seed);
        for (int y = 0; y < height; ++y) {
            const double t = height > 1 ? static_cast<double>(y) / (height - 1) : 0.0;
            const Rgb row{static_cast<std::uint8_t>(std::lround(background.r + t * (bottom.r - background.r))),
                          static_cast<std::uint8_t>(std::lround(background.g + t * (bottom.g - background.g))),
                          static_cast<std::uint8_t>(std::lround(background.b + t * (bottom.b - background.b)))};
            image.fill_rect({0, y, width, 1}, row);
        }
    }

    if (request.init_image) {
        if (request.init_image->width() != width || request.init_image->height() != height)
            throw ValidationError("init image size does not match requested size", "init_image");
        return blend(*request.init_image, image, request.strength);
    }
    return image;
}

}  // namespace protoflow
