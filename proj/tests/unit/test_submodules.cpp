#include "doctest.h"

#include "protoflow/assembler.hpp"
#include "protoflow/submodules.hpp"
#include "support.hpp"

using namespace protoflow;

namespace {

SubModuleCall call_for(int index, std::string prompt) {
    SubModuleCall c;
    c.component_index = index;
    c.prompt = std::move(prompt);
    return c;
}

struct FixedText final : TextGenerator {
    std::string reply;
    explicit FixedText(std::string r) : reply(std::move(r)) {}
    std::string generate_text(const TextGenRequest&) override { return reply; }
};

struct RecordingImage final : ImageGenerator {
    std::optional<ImageGenRequest> last;
    RasterImage generate_image(const ImageGenRequest& r) override {
        last = r;
        return MockImageGenerator{}.generate_image(r);
    }
};

}  // namespace

TEST_SUITE("submodules") {
    TEST_CASE("sub prompts substitute the bbox and append the hint") {
        CHECK(render_sub_prompt("at [bbox] and [bbox]", {1, 2, 3, 4}, "") == "at [1,2,3,4] and [1,2,3,4]");
        CHECK(render_sub_prompt("at [bbox]", {1, 2, 3, 4}, "Sign in") == "at [1,2,3,4]\nContent hint: Sign in");
        CHECK(render_sub_prompt(kDefaultTextTemplate, {16, 72, 200, 32}, "").find("at [16,72,200,32].") !=
              std::string::npos);
    }

    TEST_CASE("icon phrases are normalized") {
        CHECK(sanitize_icon_phrase("  \"Shopping-Cart\"!! ") == "shopping cart");
        CHECK(sanitize_icon_phrase("one two three four five six seven") == "one two three four five six");
        CHECK(sanitize_icon_phrase("...") == "");
    }

    TEST_CASE("text content is the first non-blank line") {
        FixedText gen("\n  Welcome back  \nsecond line");
        const auto c = text_content(call_for(3, "p"), gen, 16);
        CHECK(c.component_index == 3);
        CHECK(c.kind == ModuleId::text);
        CHECK(std::get<TextPayload>(c.payload).text == "Welcome back");
        FixedText blank(" \n\t");
        CHECK_THROWS_AS(text_content(call_for(0, "p"), blank, 16), BackendError);
    }

    TEST_CASE("image content crops the theme image and never sends a layout") {
        ThemePackage theme;
        theme.theme_image = RasterImage(64, 64, Rgb{10, 20, 30});
        theme.theme_image.fill_rect({0, 0, 32, 32}, Rgb{200, 0, 0});
        RecordingImage gen;
        ImageContentOptions opts;
        opts.prompt = "a cat";
        opts.seed = 5;
        const auto c = image_content(call_for(1, "p"), theme, {0, 0, 180, 320}, {360, 640}, gen, opts);
        REQUIRE(gen.last);
        CHECK_FALSE(gen.last->layout_condition);
        REQUIRE(gen.last->init_image);
        CHECK(gen.last->init_image->width() == 32);
        CHECK(gen.last->init_image->height() == 32);
        CHECK(gen.last->init_image->at(0, 0) == Rgb{200, 0, 0});
        CHECK(gen.last->seed == 5);
        const auto& payload = std::get<ImagePayload>(c.payload);
        CHECK(payload.image.width() == 32);
        CHECK(payload.prompt_used == "a cat");

        opts.use_theme_crop = false;
        image_content(call_for(1, "p"), theme, {0, 0, 180, 320}, {360, 640}, gen, opts);
        CHECK_FALSE(gen.last->init_image);

        CHECK_THROWS_AS(image_content(call_for(1, "p"), theme, {0, 0, 1, 1}, {360, 640}, gen, opts), ValidationError);
    }

    TEST_CASE("icon content returns the nearest icon verbatim") {
        MockEmbedder embedder;
        IconIndex icons(testing_support::small_icon_base(), embedder);
        FixedText gen("\"Bookmark\"\nextra");
        const auto c = icon_content(call_for(2, "p"), icons, gen, embedder, 16);
        const auto& p = std::get<IconPayload>(c.payload);
        CHECK(p.phrase == "bookmark");
        CHECK(p.icon_id == "bookmark");
        CHECK(p.svg == icons.icon("bookmark").svg_source);
        FixedText empty("!!!");
        CHECK_THROWS_AS(icon_content(call_for(2, "p"), icons, empty, embedder, 16), BackendError);
    }

    TEST_CASE("color fill uses the dominant color of the region") {
        RasterImage img(10, 10, Rgb{255, 255, 255});
        img.fill_rect({0, 0, 5, 10}, Rgb{0, 0, 255});
        const auto c = color_fill_content(4, {0, 0, 50, 100}, img, {100, 100});
        CHECK(c.kind == ModuleId::color_fill);
        CHECK(std::get<FillPayload>(c.payload).fill == "#0000ff");
    }

    TEST_CASE("content validation checks kind against payload") {
        CHECK_NOTHROW(validate_content({0, ModuleId::text, TextPayload{"x"}}));
        CHECK_THROWS_AS(validate_content({0, ModuleId::icon, TextPayload{"x"}}), ValidationError);
    }
}
