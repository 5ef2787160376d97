#include "protoflow/orchestrator.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include "json.hpp"
#include "protoflow/hash.hpp"

namespace protoflow {

const std::string kDefaultThemeTemplate =
    "Write a theme description for the screen above. Use the design prompt, the wireframe layout and the reference "
    "UIs to choose a theme colour (the background), a primary colour (the dominant colour besides the background), "
    "an app category, a one-line theme narrative, and a content plan for every component: the text it shows, what "
    "its image depicts, or the icon it needs.\n"
    "RESPONSE FORMAT (theme block)\n"
    "THEME_COLOR: #rrggbb\n"
    "PRIMARY_COLOR: #rrggbb\n"
    "APP_CATEGORY: <category>\n"
    "THEME: <one-line theme narrative>\n"
    "COMPONENT[i]: <text|image|icon|other> | <content hint>\n"
    "Write exactly one COMPONENT line per slot, in slot order:\n"
    "{slots}";

namespace {

constexpr std::array<std::string_view, 6> kFlagNames{
    "no_retrieval", "no_theme_description", "no_theme_image", "no_text_module", "no_image_module", "no_icon_module",
};

std::array<bool*, 6> flag_fields(PipelineFlags& f) {
    return {&f.no_retrieval,   &f.no_theme_description, &f.no_theme_image,
            &f.no_text_module, &f.no_image_module,      &f.no_icon_module};
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    return std::string(s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1));
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw NotFoundError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

PlanKind plan_kind_for(ModuleId module) {
    switch (module) {
        case ModuleId::text: return PlanKind::text;
        case ModuleId::image: return PlanKind::image;
        case ModuleId::icon: return PlanKind::icon;
        case ModuleId::color_fill: return PlanKind::other;
    }
    return PlanKind::other;
}

std::string component_stage(std::size_t index) { return "component[" + std::to_string(index) + "]"; }

// Decorators that tally backend calls under a call-site key.
class CountingText final : public TextGenerator {
public:
    CountingText(TextGenerator& inner, CallCounts& counts, std::string key)
        : inner_(inner), counts_(counts), key_(std::move(key)) {}
    std::string generate_text(const TextGenRequest& request) override {
        ++counts_[key_];
        return inner_.generate_text(request);
    }

private:
    TextGenerator& inner_;
    CallCounts& counts_;
    std::string key_;
};

class CountingImage final : public ImageGenerator {
public:
    CountingImage(ImageGenerator& inner, CallCounts& counts, std::string key)
        : inner_(inner), counts_(counts), key_(std::move(key)) {}
    RasterImage generate_image(const ImageGenRequest& request) override {
        ++counts_[key_];
        return inner_.generate_image(request);
    }

private:
    ImageGenerator& inner_;
    CallCounts& counts_;
    std::string key_;
};

std::string format_reminder(std::size_t n) {
    return "\nREMINDER: reply only with the labeled lines THEME_COLOR, PRIMARY_COLOR, APP_CATEGORY, THEME and exactly " +
           std::to_string(n) + " COMPONENT[i] lines (i = 0.." + std::to_string(n == 0 ? 0 : n - 1) +
           "); colours must be #rrggbb.";
}

void drop_warnings_with_prefix(std::vector<std::string>& warnings, const std::string& prefix) {
    std::erase_if(warnings, [&](const std::string& w) { return w.rfind(prefix, 0) == 0; });
}

}  // namespace

PipelineFlags parse_flags(std::span<const std::string> names) {
    PipelineFlags flags;
    auto fields = flag_fields(flags);
    for (const auto& name : names) {
        const auto it = std::find(kFlagNames.begin(), kFlagNames.end(), name);
        if (it == kFlagNames.end()) throw ValidationError("unknown pipeline flag '" + name + "'", "flags");
        *fields[static_cast<std::size_t>(it - kFlagNames.begin())] = true;
    }
    return flags;
}

std::vector<std::string> flag_names(const PipelineFlags& flags) {
    auto copy = flags;
    const auto fields = flag_fields(copy);
    std::vector<std::string> out;
    for (std::size_t i = 0; i < fields.size(); ++i)
        if (*fields[i]) out.emplace_back(kFlagNames[i]);
    return out;
}

PipelineConfig PipelineConfig::load(const std::filesystem::path& path) {
    const auto doc = nlohmann::json::parse(read_file(path));
    PipelineConfig config;
    const auto base = path.parent_path();
    auto resolve = [&](const std::string& p) { const std::filesystem::path fp(p); return fp.is_absolute() ? fp : base / fp; };
    config.k = doc.value("k", config.k);
    config.image_size = doc.value("image_size", config.image_size);
    config.seed = doc.value("seed", config.seed);
    config.max_tokens = doc.value("max_tokens", config.max_tokens);
    config.strength = doc.value("strength", config.strength);
    if (doc.contains("p_theme")) config.p_theme = read_file(resolve(doc["p_theme"].get<std::string>()));
    if (doc.contains("p_text")) config.p_text = trim(read_file(resolve(doc["p_text"].get<std::string>())));
    if (doc.contains("p_icon")) config.p_icon = trim(read_file(resolve(doc["p_icon"].get<std::string>())));
    if (doc.contains("flags")) {
        const auto names = doc["flags"].get<std::vector<std::string>>();
        config.flags = parse_flags(names);
    }
    if (config.k < 1) throw ValidationError("k must be >= 1", "k");
    if (config.image_size < 8) throw ValidationError("image_size must be >= 8", "image_size");
    if (config.max_tokens < 1) throw ValidationError("max_tokens must be positive", "max_tokens");
    if (!(config.strength > 0.0 && config.strength <= 1.0)) throw ValidationError("strength must be in (0,1]", "strength");
    return config;
}

CachePool::CachePool(std::vector<std::string> entries) : entries_(std::move(entries)) {
    if (entries_.empty()) throw ValidationError("cache pool needs a seed entry");
}

std::string CachePool::text() const {
    std::string out;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (i) out += '\n';
        out += entries_[i];
    }
    return out;
}

ModuleId dispatch(ComponentType type) {
    switch (type) {
        case ComponentType::Text:
        case ComponentType::TextButton: return ModuleId::text;
        case ComponentType::Image:
        case ComponentType::BackgroundImage: return ModuleId::image;
        case ComponentType::Icon: return ModuleId::icon;
        default: return ModuleId::color_fill;
    }
}

ModuleId dispatch(ComponentType type, const PipelineFlags& flags) {
    const auto module = dispatch(type);
    if ((module == ModuleId::text && flags.no_text_module) || (module == ModuleId::image && flags.no_image_module) ||
        (module == ModuleId::icon && flags.no_icon_module))
        return ModuleId::color_fill;
    return module;
}

std::string render_theme_template(const std::string& theme_template, const Layout& layout) {
    std::string slots;
    for (std::size_t i = 0; i < layout.components.size(); ++i) {
        if (i) slots += '\n';
        slots += "SLOT[" + std::to_string(i) + "] = " + std::string(to_string(layout.components[i].type)) + " " +
                 format_bbox(layout.components[i].bbox);
    }
    std::string out = theme_template;
    const std::string placeholder = "{slots}";
    if (const auto pos = out.find(placeholder); pos != std::string::npos) {
        out.replace(pos, placeholder.size(), slots);
    } else {
        out += "\n" + slots;
    }
    return out;
}

ThemePrompt assemble_theme_prompt(const DesignInput& input, std::vector<std::string> refer,
                                  const std::string& theme_template) {
    ThemePrompt prompt;
    prompt.in_p = input.prompt;
    prompt.in_l_serialized = serialize_layout_lines(input.layout);
    prompt.refer = std::move(refer);
    prompt.p_theme = render_theme_template(theme_template, input.layout);
    prompt.text = prompt.in_p + "\n" + prompt.in_l_serialized;
    for (const auto& r : prompt.refer) prompt.text += "\n" + r;
    prompt.text += "\n" + prompt.p_theme;
    return prompt;
}

ThemePrompt assemble_theme_prompt(const DesignInput& input, const RetrievalResult& hits,
                                  const KnowledgeIndex& knowledge, const std::string& theme_template) {
    if (hits.hits.empty()) throw ValidationError("theme prompt needs at least one retrieved reference", "hits");
    std::vector<std::string> refer;
    for (const auto& hit : hits.hits) refer.push_back(knowledge_record_to_text(knowledge.record(hit.record_id)));
    return assemble_theme_prompt(input, std::move(refer), theme_template);
}

std::string format_theme_block(const ThemeDescription& theme) {
    std::string out = "THEME_COLOR: " + theme.theme_color + "\nPRIMARY_COLOR: " + theme.primary_color +
                      "\nAPP_CATEGORY: " + theme.app_category + "\nTHEME: " + theme.theme_text;
    for (std::size_t i = 0; i < theme.component_plan.size(); ++i)
        out += "\nCOMPONENT[" + std::to_string(i) + "]: " + std::string(to_string(theme.component_plan[i].kind)) +
               " | " + theme.component_plan[i].content_hint;
    return out;
}

ThemeDescription parse_theme_block(const std::string& text, std::size_t component_count) {
    static const std::regex line_re(R"(^\s*([A-Za-z_]+)\s*(?:\[\s*(\d+)\s*\])?\s*:\s*(.*)$)");
    ThemeDescription theme;
    std::set<std::string> seen;
    std::vector<std::optional<PlanEntry>> plan(component_count);
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) {
        std::smatch m;
        if (!std::regex_match(line, m, line_re)) continue;
        const auto key = lower(m[1].str());
        const auto value = trim(m[3].str());
        if (key == "component") {
            if (!m[2].matched) continue;
            const auto index = std::stoul(m[2].str());
            if (index >= component_count)
                throw ValidationError("COMPONENT[" + std::to_string(index) + "] exceeds the " +
                                      std::to_string(component_count) + " layout components");
            PlanEntry entry;
            const auto bar = value.find('|');
            const auto kind = lower(trim(value.substr(0, bar)));
            entry.kind = (kind == "text" || kind == "image" || kind == "icon") ? parse_plan_kind(kind) : PlanKind::other;
            entry.content_hint = bar == std::string::npos ? std::string{} : trim(value.substr(bar + 1));
            plan[index] = std::move(entry);
            continue;
        }
        if (key == "theme_color" || key == "primary_color") {
            const auto color = lower(value);
            if (!is_hex_color(color)) throw ValidationError(m[1].str() + " is not a #rrggbb color: '" + value + "'");
            (key == "theme_color" ? theme.theme_color : theme.primary_color) = color;
        } else if (key == "app_category") {
            theme.app_category = value;
        } else if (key == "theme") {
            theme.theme_text = value;
        } else {
            continue;
        }
        seen.insert(key);
    }
    for (const char* required : {"theme_color", "primary_color", "app_category", "theme"})
        if (!seen.count(required)) throw ValidationError(std::string("theme block lacks ") + required);
    for (std::size_t i = 0; i < component_count; ++i) {
        if (!plan[i]) throw ValidationError("theme block lacks COMPONENT[" + std::to_string(i) + "]");
        theme.component_plan.push_back(std::move(*plan[i]));
    }
    return theme;
}

Orchestrator::Orchestrator(Backends backends, std::shared_ptr<const KnowledgeIndex> knowledge,
                           std::shared_ptr<const IconIndex> icons, PipelineConfig config)
    : backends_(std::move(backends)), knowledge_(std::move(knowledge)), icons_(std::move(icons)),
      config_(std::move(config)) {
    if (!backends_.text || !backends_.embedder || !backends_.image)
        throw ValidationError("all three backends are required");
}

ThemePackage Orchestrator::theme_from_description(const DesignInput& input, ThemeDescription description,
                                                  ThemePrompt prompt, CallCounts& counts) const {
    ThemePackage theme;
    theme.prompt_used = std::move(prompt);
    theme.image_prompt = input.prompt + "\n" + format_theme_block(description);
    const ImageSize size{config_.image_size, config_.image_size};
    if (config_.flags.no_theme_image) {
        theme.theme_image = RasterImage(size.width, size.height, parse_hex(description.theme_color));
        theme.theme_image_generated = false;
    } else {
        ImageGenRequest request;
        request.prompt = theme.image_prompt;
        request.layout_condition = input.layout;
        request.seed = config_.seed;
        request.size = size;
        CountingImage images(*backends_.image, counts, "theme_image");
        theme.theme_image = images.generate_image(request);
        if (theme.theme_image.width() != size.width || theme.theme_image.height() != size.height)
            throw BackendError("theme image has the wrong size", false);
    }
    theme.description = std::move(description);
    return theme;
}

ThemePackage Orchestrator::generate_theme(const DesignInput& input, CallCounts& counts,
                                          std::vector<std::string>& warnings) const {
    validate_design_input(input);
    std::vector<std::string> refer;
    if (!config_.flags.no_retrieval) {
        if (!knowledge_ || knowledge_->index().size() == 0) {
            warnings.push_back("theme: knowledge base is empty; no references retrieved");
        } else {
            const auto query = backends_.embedder->embed_text(retrieval_query_text(input.prompt, input.layout));
            const auto hits = knowledge_->index().top_k(query, RetrievalConfig{config_.k});
            if (hits.hits.size() < static_cast<std::size_t>(config_.k))
                warnings.push_back("theme: retrieval returned " + std::to_string(hits.hits.size()) + " of " +
                                   std::to_string(config_.k) + " references");
            for (const auto& hit : hits.hits) refer.push_back(knowledge_record_to_text(knowledge_->record(hit.record_id)));
        }
    }
    auto prompt = assemble_theme_prompt(input, std::move(refer), config_.p_theme);
    const auto n = input.layout.components.size();

    ThemeDescription description;
    if (config_.flags.no_theme_description) {
        description.theme_color = "#ffffff";
        description.primary_color = "#212121";
        description.theme_text = input.prompt;
        for (const auto& c : input.layout.components)
            description.component_plan.push_back({plan_kind_for(dispatch(c.type)), {}});
    } else {
        CountingText text(*backends_.text, counts, "theme_text");
        std::string raw;
        std::string last_error;
        bool parsed = false;
        for (int attempt = 0; attempt < 3 && !parsed; ++attempt) {
            const auto request_prompt = attempt == 0 ? prompt.text : prompt.text + format_reminder(n);
            raw = text.generate_text({request_prompt, 0.0, config_.max_tokens});
            try {
                description = parse_theme_block(raw, n);
                parsed = true;
            } catch (const ValidationError& e) {
                last_error = e.what();
            }
        }
        if (!parsed)
            throw GenerationError("unparseable theme description after 2 re-asks (" + last_error + "); raw text:\n" + raw,
                                  "theme_description", nullptr, false);
    }
    return theme_from_description(input, std::move(description), std::move(prompt), counts);
}

StepOutcome Orchestrator::step(const CachePool& cache, const DesignInput& input, std::size_t component_index,
                               const ThemePackage& theme, const std::string& hint, CallCounts& counts,
                               std::vector<std::string>& warnings) const {
    const auto& component = input.layout.components.at(component_index);
    const auto module = dispatch(component.type, config_.flags);
    const auto index = static_cast<int>(component_index);

    SubModuleCall call;
    call.component_index = index;
    call.component_type = component.type;
    call.module = module;
    std::string_view templ;
    switch (module) {
        case ModuleId::text: templ = config_.p_text; call.template_id = "p_text"; break;
        case ModuleId::icon: templ = config_.p_icon; call.template_id = "p_icon"; break;
        case ModuleId::image: templ = kDefaultImageTemplate; call.template_id = "p_image"; break;
        case ModuleId::color_fill: templ = kDefaultFillTemplate; call.template_id = "p_fill"; break;
    }
    call.p_sub = render_sub_prompt(templ, component.bbox, hint);
    call.prompt = call.p_sub + "\n" + cache.text();

    const auto stage = component_stage(component_index);
    try {
        ComponentContent content;
        switch (module) {
            case ModuleId::text: {
                CountingText text(*backends_.text, counts, "text");
                content = text_content(call, text, config_.max_tokens);
                break;
            }
            case ModuleId::image: {
                ImageContentOptions options;
                options.prompt = hint;
                if (options.prompt.empty()) {
                    options.prompt = theme.description.theme_text.empty() ? input.prompt : theme.description.theme_text;
                    warnings.push_back(stage + ": empty image hint, using the theme text as prompt");
                }
                options.strength = config_.strength;
                options.seed = hash_combine(config_.seed, component_index + 1);
                options.use_theme_crop = theme.theme_image_generated;
                CountingImage images(*backends_.image, counts, "image");
                content = image_content(call, theme, component.bbox, input.layout.canvas, images, options);
                break;
            }
            case ModuleId::icon: {
                if (!icons_ || icons_->icons().empty()) throw ValidationError("icon base is empty");
                CountingText text(*backends_.text, counts, "icon");
                content = icon_content(call, *icons_, text, *backends_.embedder, config_.max_tokens);
                break;
            }
            case ModuleId::color_fill:
                content = color_fill_content(index, component.bbox, theme.theme_image, input.layout.canvas);
                break;
        }
        CachePool next = cache;
        next.append(summarize_content(content, component));
        return {std::move(call), std::move(content), std::move(next)};
    } catch (const BackendError& e) {
        throw GenerationError(stage + " (" + std::string(to_string(module)) + "): " + e.what(),
                              stage + ":" + std::string(to_string(module)), nullptr, true);
    } catch (const GenerationError&) {
        throw;
    } catch (const Error& e) {
        throw GenerationError(stage + " (" + std::string(to_string(module)) + "): " + e.what(),
                              stage + ":" + std::string(to_string(module)), nullptr, false);
    }
}

void Orchestrator::run_components(GenerationTrace& trace, const DesignInput& input) const {
    CachePool cache(format_theme_block(trace.theme.description));
    trace.calls.clear();
    trace.results.clear();
    drop_warnings_with_prefix(trace.warnings, "component[");
    for (std::size_t i = 0; i < input.layout.components.size(); ++i) {
        try {
            auto outcome = step(cache, input, i, trace.theme, trace.theme.description.component_plan[i].content_hint,
                                trace.backend_call_counts, trace.warnings);
            trace.calls.push_back(std::move(outcome.call));
            trace.results.push_back(std::move(outcome.content));
            cache = std::move(outcome.cache);
        } catch (const GenerationError& e) {
            trace.cache = cache.entries();
            throw GenerationError(e.what(), e.stage(), std::make_shared<GenerationTrace>(trace), e.backend_failure());
        }
    }
    trace.cache = cache.entries();
}

GenerationTrace Orchestrator::generate_prototype(const DesignInput& input) const {
    validate_design_input(input);
    GenerationTrace trace;
    try {
        trace.theme = generate_theme(input, trace.backend_call_counts, trace.warnings);
    } catch (const GenerationError& e) {
        throw GenerationError(e.what(), e.stage(), std::make_shared<GenerationTrace>(trace), e.backend_failure());
    } catch (const BackendError& e) {
        throw GenerationError(std::string("theme stage: ") + e.what(), "theme",
                              std::make_shared<GenerationTrace>(trace), true);
    } catch (const ValidationError&) {
        throw;
    } catch (const Error& e) {
        throw GenerationError(std::string("theme stage: ") + e.what(), "theme",
                              std::make_shared<GenerationTrace>(trace), false);
    }
    run_components(trace, input);
    return trace;
}

GenerationTrace Orchestrator::regenerate_component(const GenerationTrace& trace, const DesignInput& input,
                                                   std::size_t component_index,
                                                   const std::optional<std::string>& edited_hint) const {
    const auto n = input.layout.components.size();
    if (component_index >= n)
        throw ValidationError("component index " + std::to_string(component_index) + " out of range (layout has " +
                              std::to_string(n) + " components)", "index");
    if (trace.results.size() != n || trace.calls.size() != n || trace.cache.size() != n + 1 ||
        trace.theme.description.component_plan.size() != n)
        throw ValidationError("trace is incomplete for this layout", "trace");

    GenerationTrace next = trace;
    if (edited_hint) next.theme.description.component_plan[component_index].content_hint = *edited_hint;
    const auto& hint = next.theme.description.component_plan[component_index].content_hint;
    const CachePool prefix(std::vector<std::string>(trace.cache.begin(),
                                                    trace.cache.begin() + static_cast<std::ptrdiff_t>(component_index) + 1));
    drop_warnings_with_prefix(next.warnings, component_stage(component_index) + ":");
    auto outcome = step(prefix, input, component_index, next.theme, hint, next.backend_call_counts, next.warnings);
    next.calls[component_index] = std::move(outcome.call);
    next.results[component_index] = std::move(outcome.content);
    next.cache[component_index + 1] = outcome.cache.entries().back();
    return next;
}

GenerationTrace Orchestrator::regenerate_all(const GenerationTrace& trace, const DesignInput& input,
                                             const ThemeDescription& edited_theme) const {
    validate_design_input(input);
    validate_theme_description(edited_theme, input.layout.components.size());
    GenerationTrace next;
    next.backend_call_counts = trace.backend_call_counts;
    for (const auto& w : trace.warnings)
        if (w.rfind("theme:", 0) == 0) next.warnings.push_back(w);
    try {
        next.theme = theme_from_description(input, edited_theme, trace.theme.prompt_used, next.backend_call_counts);
    } catch (const BackendError& e) {
        throw GenerationError(std::string("theme image: ") + e.what(), "theme_image",
                              std::make_shared<GenerationTrace>(next), true);
    }
    run_components(next, input);
    return next;
}

}  // namespace protoflow
