#include "doctest.h"

#include <fstream>
#include <random>

#include "protoflow/hash.hpp"
#include "protoflow/orchestrator.hpp"
#include "protoflow/serde.hpp"
#include "support.hpp"

using namespace protoflow;
using testing_support::CountingBackends;
using testing_support::Fixture;
using testing_support::small_config;

namespace {

DesignInput sample_input() {
    return {"A shopping app home page",
            {{360, 640},
             {{ComponentType::Toolbar, {0, 0, 360, 56}},
              {ComponentType::Text, {16, 72, 200, 32}},
              {ComponentType::Image, {16, 120, 328, 180}},
              {ComponentType::Icon, {300, 12, 32, 32}},
              {ComponentType::TextButton, {16, 560, 328, 48}}}}};
}

std::string join_prefix(const std::vector<std::string>& cache, std::size_t n) {
    std::string out;
    for (std::size_t i = 0; i < n; ++i) out += (i ? "\n" : "") + cache[i];
    return out;
}

// Checks the fold law on a finished trace.
void check_cache_law(const GenerationTrace& t, const DesignInput& input) {
    const auto n = input.layout.components.size();
    REQUIRE(t.cache.size() == n + 1);
    REQUIRE(t.calls.size() == n);
    CHECK(t.cache[0] == format_theme_block(t.theme.description));
    for (std::size_t i = 0; i < n; ++i) {
        CHECK(t.calls[i].prompt == t.calls[i].p_sub + "\n" + join_prefix(t.cache, i + 1));
        CHECK(t.cache[i + 1] == summarize_content(t.results[i], input.layout.components[i]));
    }
}

// Text generator that answers with a scripted sequence, then the mock.
struct ScriptedText final : TextGenerator {
    std::vector<std::string> replies;
    std::vector<std::string> prompts;
    std::string generate_text(const TextGenRequest& r) override {
        prompts.push_back(r.prompt);
        if (prompts.size() <= replies.size()) return replies[prompts.size() - 1];
        return MockTextGenerator{}.generate_text(r);
    }
};

struct FailingImage final : ImageGenerator {
    bool fail_plain = true;
    RasterImage generate_image(const ImageGenRequest& r) override {
        if (!r.layout_condition && fail_plain) throw BackendError("image server down", true);
        return MockImageGenerator{}.generate_image(r);
    }
};

}  // namespace

TEST_SUITE("orchestrator") {
    TEST_CASE("flags parse by name and round trip") {
        const std::vector<std::string> names{"no_icon_module", "no_retrieval"};
        const auto f = parse_flags(names);
        CHECK(f.no_icon_module);
        CHECK(f.no_retrieval);
        CHECK_FALSE(f.no_text_module);
        CHECK(flag_names(f) == std::vector<std::string>{"no_retrieval", "no_icon_module"});
        const std::vector<std::string> bad{"no_everything"};
        CHECK_THROWS_AS(parse_flags(bad), ValidationError);
    }

    TEST_CASE("dispatch is a total function over component types") {
        CHECK(dispatch(ComponentType::Text) == ModuleId::text);
        CHECK(dispatch(ComponentType::TextButton) == ModuleId::text);
        CHECK(dispatch(ComponentType::Image) == ModuleId::image);
        CHECK(dispatch(ComponentType::BackgroundImage) == ModuleId::image);
        CHECK(dispatch(ComponentType::Icon) == ModuleId::icon);
        for (auto t : {ComponentType::Toolbar, ComponentType::ListItem, ComponentType::Input, ComponentType::Card,
                       ComponentType::WebView, ComponentType::Checkbox, ComponentType::RadioButton, ComponentType::Slider})
            CHECK(dispatch(t) == ModuleId::color_fill);
        PipelineFlags f;
        f.no_image_module = true;
        CHECK(dispatch(ComponentType::Image, f) == ModuleId::color_fill);
        CHECK(dispatch(ComponentType::Text, f) == ModuleId::text);
    }

    TEST_CASE("theme prompt concatenates its parts") {
        const auto input = sample_input();
        const auto p = assemble_theme_prompt(input, {"ref one", "ref two"}, "TEMPLATE {slots}");
        CHECK(p.in_l_serialized == serialize_layout_lines(input.layout));
        CHECK(p.p_theme.rfind("TEMPLATE SLOT[0] = Toolbar [0,0,360,56]\nSLOT[1] = Text", 0) == 0);
        CHECK(p.text == p.in_p + "\n" + p.in_l_serialized + "\nref one\nref two\n" + p.p_theme);
        CHECK(assemble_theme_prompt(input, {}, "T").text ==
              p.in_p + "\n" + p.in_l_serialized + "\n" + render_theme_template("T", input.layout));
        CHECK(render_theme_template("T", input.layout).rfind("T\nSLOT[0] = ", 0) == 0);
        Fixture fx;
        CHECK_THROWS_AS(assemble_theme_prompt(input, RetrievalResult{}, *fx.knowledge, "T"), ValidationError);
        CHECK_THROWS_AS(assemble_theme_prompt(input, RetrievalResult{{{"missing", 1.0}}}, *fx.knowledge, "T"),
                        NotFoundError);
        const auto from_hits = assemble_theme_prompt(input, RetrievalResult{{{"ui-b", 0.9}}}, *fx.knowledge, "T");
        CHECK(from_hits.refer == std::vector<std::string>{knowledge_record_to_text(fx.knowledge->record("ui-b"))});
    }

    TEST_CASE("theme blocks round trip and parse leniently") {
        ThemeDescription d{"#aabbcc", "#010203", "shopping", "A bright store", {{PlanKind::text, "Welcome back"},
                                                                               {PlanKind::icon, "cart"}}};
        CHECK(parse_theme_block(format_theme_block(d), 2) == d);

        const auto loose = parse_theme_block(
            "Sure! Here it is.\n  theme_color : #AABBCC\nPrimary_Color: #010203\nApp_Category: shopping\n"
            "Theme: A bright store\ncomponent[1]: ICON | cart\nComponent [0]: widget | Welcome back\n",
            2);
        CHECK(loose.theme_color == "#aabbcc");
        CHECK(loose.component_plan[0].kind == PlanKind::other);
        CHECK(loose.component_plan[1] == PlanEntry{PlanKind::icon, "cart"});

        CHECK_THROWS_AS(parse_theme_block("THEME_COLOR: red\nPRIMARY_COLOR: #000000\nAPP_CATEGORY: a\nTHEME: b", 0),
                        ValidationError);
        CHECK_THROWS_AS(parse_theme_block("THEME_COLOR: #ffffff\nAPP_CATEGORY: a\nTHEME: b", 0), ValidationError);
        CHECK_THROWS_AS(parse_theme_block(format_theme_block(d), 3), ValidationError);
        CHECK_THROWS_AS(parse_theme_block(format_theme_block(d), 1), ValidationError);
    }

    TEST_CASE("a full run satisfies the cache law and dispatch accounting") {
        CountingBackends counting;
        Fixture fx(counting.backends());
        const auto input = sample_input();
        const auto trace = fx.orchestrator().generate_prototype(input);
        check_cache_law(trace, input);

        const std::vector<ModuleId> modules{ModuleId::color_fill, ModuleId::text, ModuleId::image, ModuleId::icon,
                                            ModuleId::text};
        for (std::size_t i = 0; i < modules.size(); ++i) {
            CHECK(trace.calls[i].module == modules[i]);
            CHECK(trace.results[i].kind == modules[i]);
            CHECK(trace.calls[i].component_index == static_cast<int>(i));
        }
        CHECK(trace.backend_call_counts == CallCounts{{"theme_text", 1}, {"theme_image", 1}, {"text", 2}, {"image", 1},
                                                      {"icon", 1}});
        CHECK(counting.text->theme == 1);
        CHECK(counting.text->other == 3);
        CHECK(counting.image->layout_conditioned == 1);
        CHECK(counting.image->plain == 1);
        CHECK(trace.theme.prompt_used.refer.size() == 2);
        CHECK(trace.theme.theme_image.width() == 128);
        CHECK(trace.theme.image_prompt == input.prompt + "\n" + format_theme_block(trace.theme.description));
        CHECK(trace.warnings.empty());
    }

    TEST_CASE("icon results are verbatim icon base entries") {
        Fixture fx;
        const auto trace = fx.orchestrator().generate_prototype(sample_input());
        const auto& icon = std::get<IconPayload>(trace.results[3].payload);
        CHECK(icon.svg == fx.icons->icon(icon.icon_id).svg_source);
    }

    TEST_CASE("image results are crop-sized") {
        Fixture fx;
        const auto input = sample_input();
        const auto trace = fx.orchestrator().generate_prototype(input);
        const auto& img = std::get<ImagePayload>(trace.results[2].payload).image;
        const auto rect = scale_to_image(input.layout.components[2].bbox, input.layout.canvas, 128, 128);
        CHECK(img.width() == rect.w);
        CHECK(img.height() == rect.h);
    }

    TEST_CASE("runs are deterministic for a fixed seed") {
        Fixture fx;
        const auto input = sample_input();
        const auto a = fx.orchestrator().generate_prototype(input);
        const auto b = fx.orchestrator().generate_prototype(input);
        CHECK(a == b);
        CHECK(to_json(a) == to_json(b));
        auto config = small_config();
        config.seed = 99;
        const auto c = fx.orchestrator(config).generate_prototype(input);
        CHECK_FALSE(c.theme.theme_image == a.theme.theme_image);
    }

    TEST_CASE("the trace survives a JSON round trip") {
        Fixture fx;
        const auto trace = fx.orchestrator().generate_prototype(sample_input());
        CHECK(generation_trace_from_json(to_json(trace)) == trace);
    }

    TEST_CASE("randomized layouts obey the cache law") {
        Fixture fx;
        const auto orch = fx.orchestrator();
        std::mt19937_64 rng(21);
        for (int trial = 0; trial < 25; ++trial) {
            const auto input = testing_support::random_input(rng, 1, 8);
            check_cache_law(orch.generate_prototype(input), input);
        }
    }

    TEST_CASE("an unparseable theme is re-asked twice") {
        auto scripted = std::make_shared<ScriptedText>();
        scripted->replies = {"nonsense", "still nonsense"};
        auto backends = Backends::mock();
        backends.text = scripted;
        Fixture fx(backends);
        const auto trace = fx.orchestrator().generate_prototype(sample_input());
        CHECK(trace.backend_call_counts.at("theme_text") == 3);
        CHECK(scripted->prompts[1].find("REMINDER") != std::string::npos);
        CHECK(scripted->prompts[0].find("REMINDER") == std::string::npos);

        auto always_bad = std::make_shared<ScriptedText>();
        always_bad->replies = {"x", "y", "z"};
        backends.text = always_bad;
        Fixture fx2(backends);
        try {
            fx2.orchestrator().generate_prototype(sample_input());
            FAIL("expected failure");
        } catch (const GenerationError& e) {
            CHECK(e.stage() == "theme_description");
            CHECK_FALSE(e.backend_failure());
            CHECK(std::string(e.what()).find("z") != std::string::npos);
            REQUIRE(e.partial_trace());
            CHECK(e.partial_trace()->backend_call_counts.at("theme_text") == 3);
        }
    }

    TEST_CASE("a backend failure names the component and keeps the partial trace") {
        auto backends = Backends::mock();
        backends.image = std::make_shared<FailingImage>();
        Fixture fx(backends);
        try {
            fx.orchestrator().generate_prototype(sample_input());
            FAIL("expected failure");
        } catch (const GenerationError& e) {
            CHECK(e.stage() == "component[2]:image");
            CHECK(e.backend_failure());
            REQUIRE(e.partial_trace());
            CHECK(e.partial_trace()->results.size() == 2);
            CHECK(e.partial_trace()->cache.size() == 3);
        }
    }

    TEST_CASE("regenerating one component re-runs only that module") {
        CountingBackends counting;
        Fixture fx(counting.backends());
        const auto orch = fx.orchestrator();
        const auto input = sample_input();
        const auto trace = orch.generate_prototype(input);
        const int text_before = counting.text->other, image_before = counting.image->plain;

        const auto next = orch.regenerate_component(trace, input, 2, std::string("a sunny beach"));
        CHECK(counting.image->plain == image_before + 1);
        CHECK(counting.text->other == text_before);
        CHECK(counting.text->theme == 1);
        CHECK(next.backend_call_counts.at("image") == 2);
        for (std::size_t i = 0; i < 5; ++i) {
            if (i == 2) continue;
            CHECK(next.results[i] == trace.results[i]);
            CHECK(next.calls[i] == trace.calls[i]);
        }
        CHECK(next.theme.theme_image == trace.theme.theme_image);
        CHECK(next.theme.description.component_plan[2].content_hint == "a sunny beach");
        CHECK(std::get<ImagePayload>(next.results[2].payload).prompt_used == "a sunny beach");
        CHECK(next.calls[2].prompt == next.calls[2].p_sub + "\n" + join_prefix(trace.cache, 3));
        CHECK(next.cache[3] == summarize_content(next.results[2], input.layout.components[2]));

        const auto text_again = orch.regenerate_component(trace, input, 1, std::nullopt);
        CHECK(counting.text->other == text_before + 1);
        CHECK(text_again.results == trace.results);

        CHECK_THROWS_AS(orch.regenerate_component(trace, input, 99, std::nullopt), ValidationError);
    }

    TEST_CASE("editing the theme regenerates the image and every component") {
        CountingBackends counting;
        Fixture fx(counting.backends());
        const auto orch = fx.orchestrator();
        const auto input = sample_input();
        const auto trace = orch.generate_prototype(input);
        auto edited = trace.theme.description;
        edited.theme_color = "#102030";
        const auto next = orch.regenerate_all(trace, input, edited);
        CHECK(counting.text->theme == 1);
        CHECK(counting.image->layout_conditioned == 2);
        CHECK(next.theme.description == edited);
        CHECK(next.theme.prompt_used == trace.theme.prompt_used);
        CHECK_FALSE(next.theme.theme_image == trace.theme.theme_image);
        CHECK(next.cache[0] == format_theme_block(edited));
        check_cache_law(next, input);
        CHECK(next.backend_call_counts.at("theme_image") == 2);
        CHECK(next.backend_call_counts.at("theme_text") == 1);

        CHECK(same_content(orch.regenerate_all(trace, input, trace.theme.description), trace));

        edited.theme_color = "blue";
        CHECK_THROWS_AS(orch.regenerate_all(trace, input, edited), ValidationError);
    }

    TEST_CASE("ablation flags switch stages off") {
        CountingBackends counting;
        Fixture fx(counting.backends());
        const auto input = sample_input();
        auto config = small_config();
        config.flags.no_text_module = true;
        config.flags.no_icon_module = true;
        auto trace = fx.orchestrator(config).generate_prototype(input);
        CHECK(trace.results[1].kind == ModuleId::color_fill);
        CHECK(trace.results[3].kind == ModuleId::color_fill);
        CHECK(trace.results[2].kind == ModuleId::image);
        CHECK(counting.text->other == 0);

        config = small_config();
        config.flags.no_retrieval = true;
        trace = fx.orchestrator(config).generate_prototype(input);
        CHECK(trace.theme.prompt_used.refer.empty());

        config = small_config();
        config.flags.no_theme_description = true;
        const int theme_calls = counting.text->theme;
        trace = fx.orchestrator(config).generate_prototype(input);
        CHECK(counting.text->theme == theme_calls);
        CHECK(trace.theme.description.theme_color == "#ffffff");
        CHECK(trace.theme.description.component_plan[3].kind == PlanKind::icon);
        CHECK_FALSE(trace.backend_call_counts.count("theme_text"));

        config = small_config();
        config.flags.no_theme_image = true;
        const int conditioned = counting.image->layout_conditioned;
        trace = fx.orchestrator(config).generate_prototype(input);
        CHECK(counting.image->layout_conditioned == conditioned);
        CHECK_FALSE(trace.theme.theme_image_generated);
        CHECK(trace.theme.theme_image.at(0, 0) == parse_hex(trace.theme.description.theme_color));
    }

    TEST_CASE("invalid inputs are rejected before any backend call") {
        CountingBackends counting;
        Fixture fx(counting.backends());
        DesignInput empty_prompt = sample_input();
        empty_prompt.prompt.clear();
        CHECK_THROWS_AS(fx.orchestrator().generate_prototype(empty_prompt), ValidationError);
        DesignInput no_components{"p", {{360, 640}, {}}};
        CHECK_THROWS_AS(fx.orchestrator().generate_prototype(no_components), ValidationError);
        CHECK(counting.text->theme == 0);
        CHECK(counting.image->layout_conditioned == 0);
    }

    TEST_CASE("config files load with relative template paths") {
        const auto dir = testing_support::temp_dir("config");
        std::ofstream(dir / "theme.txt") << "MY THEME\n" << kThemeFormatMarker << "\n{slots}";
        std::ofstream(dir / "text.txt") << "Write text at [bbox].\n";
        std::ofstream(dir / "config.json")
            << R"({"k": 3, "seed": 42, "image_size": 256, "p_theme": "theme.txt", "p_text": "text.txt", "flags": ["no_icon_module"]})";
        const auto config = PipelineConfig::load(dir / "config.json");
        CHECK(config.k == 3);
        CHECK(config.seed == 42);
        CHECK(config.image_size == 256);
        CHECK(config.p_theme.rfind("MY THEME", 0) == 0);
        CHECK(config.p_text == "Write text at [bbox].");
        CHECK(config.p_icon == kDefaultIconTemplate);
        CHECK(config.flags.no_icon_module);

        std::ofstream(dir / "bad.json") << R"({"k": 0})";
        CHECK_THROWS_AS(PipelineConfig::load(dir / "bad.json"), ValidationError);
        std::ofstream(dir / "bad2.json") << R"({"strength": 1.5})";
        CHECK_THROWS_AS(PipelineConfig::load(dir / "bad2.json"), ValidationError);
        CHECK_THROWS_AS(PipelineConfig::load(dir / "missing.json"), NotFoundError);
    }

    TEST_CASE("cache pool joins entries with newlines") {
        CachePool pool("seed");
        pool.append("a");
        pool.append("b");
        CHECK(pool.text() == "seed\na\nb");
        CHECK(pool.size() == 3);
        CHECK_THROWS_AS(CachePool(std::vector<std::string>{}), ValidationError);
    }
}
