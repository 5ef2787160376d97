#include "protoflow/serde.hpp"

#include "protoflow/error.hpp"

namespace protoflow {

using nlohmann::json;

namespace {

// nlohmann's type/out_of_range errors become ValidationError for callers.
template <typename F>
auto guarded(const char* what, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed ") + what + ": " + e.what());
    }
}

}  // namespace

json to_json(const DesignInput& input) { return {{"prompt", input.prompt}, {"layout", layout_to_json(input.layout)}}; }

DesignInput design_input_from_json(const json& doc) {
    return guarded("design input", [&] {
        DesignInput input;
        if (!doc.is_object()) throw ValidationError("design input must be an object");
        input.prompt = doc.value("prompt", std::string{});
        if (!doc.contains("layout")) throw ValidationError("missing layout", "layout");
        try {
            input.layout = parse_layout(doc.at("layout"));
        } catch (const ValidationError& e) {
            throw ValidationError(e.what(), "layout." + e.field());
        }
        validate_design_input(input);
        return input;
    });
}

json to_json(const ThemeDescription& theme) {
    json plan = json::array();
    for (const auto& p : theme.component_plan) plan.push_back({{"kind", to_string(p.kind)}, {"content_hint", p.content_hint}});
    return {{"theme_color", theme.theme_color},
            {"primary_color", theme.primary_color},
            {"app_category", theme.app_category},
            {"theme_text", theme.theme_text},
            {"component_plan", plan}};
}

ThemeDescription theme_description_from_json(const json& doc) {
    return guarded("theme description", [&] {
        ThemeDescription theme;
        theme.theme_color = doc.at("theme_color").get<std::string>();
        theme.primary_color = doc.at("primary_color").get<std::string>();
        theme.app_category = doc.value("app_category", std::string{});
        theme.theme_text = doc.value("theme_text", std::string{});
        for (const auto& p : doc.at("component_plan"))
            theme.component_plan.push_back({parse_plan_kind(p.at("kind").get<std::string>()),
                                            p.value("content_hint", std::string{})});
        return theme;
    });
}

json to_json(const ThemePrompt& prompt) {
    return {{"text", prompt.text},
            {"in_p", prompt.in_p},
            {"in_l_serialized", prompt.in_l_serialized},
            {"refer", prompt.refer},
            {"p_theme", prompt.p_theme}};
}

ThemePrompt theme_prompt_from_json(const json& doc) {
    return guarded("theme prompt", [&] {
        return ThemePrompt{doc.at("text").get<std::string>(), doc.at("in_p").get<std::string>(),
                           doc.at("in_l_serialized").get<std::string>(),
                           doc.at("refer").get<std::vector<std::string>>(), doc.at("p_theme").get<std::string>()};
    });
}

json to_json(const ThemePackage& theme) {
    return {{"description", to_json(theme.description)},
            {"theme_image_png_base64", png_base64(theme.theme_image)},
            {"prompt_used", to_json(theme.prompt_used)},
            {"image_prompt", theme.image_prompt},
            {"theme_image_generated", theme.theme_image_generated}};
}

ThemePackage theme_package_from_json(const json& doc) {
    return guarded("theme package", [&] {
        ThemePackage theme;
        theme.description = theme_description_from_json(doc.at("description"));
        theme.theme_image = image_from_png_base64(doc.at("theme_image_png_base64").get<std::string>());
        theme.prompt_used = theme_prompt_from_json(doc.at("prompt_used"));
        theme.image_prompt = doc.value("image_prompt", std::string{});
        theme.theme_image_generated = doc.value("theme_image_generated", true);
        return theme;
    });
}

json to_json(const SubModuleCall& call) {
    return {{"component_index", call.component_index},
            {"component_type", to_string(call.component_type)},
            {"module", to_string(call.module)},
            {"template_id", call.template_id},
            {"p_sub", call.p_sub},
            {"prompt", call.prompt}};
}

SubModuleCall sub_module_call_from_json(const json& doc) {
    return guarded("sub-module call", [&] {
        return SubModuleCall{doc.at("component_index").get<int>(),
                             parse_component_type(doc.at("component_type").get<std::string>()),
                             parse_module_id(doc.at("module").get<std::string>()),
                             doc.at("template_id").get<std::string>(),
                             doc.at("p_sub").get<std::string>(),
                             doc.at("prompt").get<std::string>()};
    });
}

json to_json(const ComponentContent& content) {
    json doc = {{"component_index", content.component_index}, {"kind", to_string(content.kind)}};
    std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, TextPayload>) {
                doc["text"] = p.text;
            } else if constexpr (std::is_same_v<T, ImagePayload>) {
                doc["image_png_base64"] = png_base64(p.image);
                doc["prompt_used"] = p.prompt_used;
            } else if constexpr (std::is_same_v<T, IconPayload>) {
                doc["icon_id"] = p.icon_id;
                doc["svg"] = p.svg;
                doc["phrase"] = p.phrase;
            } else {
                doc["fill"] = p.fill;
            }
        },
        content.payload);
    return doc;
}

ComponentContent component_content_from_json(const json& doc) {
    return guarded("component content", [&] {
        ComponentContent content;
        content.component_index = doc.at("component_index").get<int>();
        content.kind = parse_module_id(doc.at("kind").get<std::string>());
        switch (content.kind) {
            case ModuleId::text: content.payload = TextPayload{doc.at("text").get<std::string>()}; break;
            case ModuleId::image:
                content.payload = ImagePayload{image_from_png_base64(doc.at("image_png_base64").get<std::string>()),
                                               doc.at("prompt_used").get<std::string>()};
                break;
            case ModuleId::icon:
                content.payload = IconPayload{doc.at("icon_id").get<std::string>(), doc.at("svg").get<std::string>(),
                                              doc.at("phrase").get<std::string>()};
                break;
            case ModuleId::color_fill: content.payload = FillPayload{doc.at("fill").get<std::string>()}; break;
        }
        return content;
    });
}

json to_json(const GenerationTrace& trace) {
    json calls = json::array();
    for (const auto& c : trace.calls) calls.push_back(to_json(c));
    json results = json::array();
    for (const auto& r : trace.results) results.push_back(to_json(r));
    return {{"theme", to_json(trace.theme)},
            {"calls", calls},
            {"results", results},
            {"cache", trace.cache},
            {"backend_call_counts", trace.backend_call_counts},
            {"warnings", trace.warnings}};
}

GenerationTrace generation_trace_from_json(const json& doc) {
    return guarded("generation trace", [&] {
        GenerationTrace trace;
        trace.theme = theme_package_from_json(doc.at("theme"));
        for (const auto& c : doc.at("calls")) trace.calls.push_back(sub_module_call_from_json(c));
        for (const auto& r : doc.at("results")) trace.results.push_back(component_content_from_json(r));
        trace.cache = doc.at("cache").get<std::vector<std::string>>();
        trace.backend_call_counts = doc.at("backend_call_counts").get<CallCounts>();
        trace.warnings = doc.value("warnings", std::vector<std::string>{});
        return trace;
    });
}

}  // namespace protoflow
