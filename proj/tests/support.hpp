#pragma once

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "protoflow/backends.hpp"
#include "protoflow/kb.hpp"
#include "protoflow/orchestrator.hpp"
#include "protoflow/retrieval.hpp"

namespace testing_support {

using namespace protoflow;

inline std::filesystem::path data_dir() { return PROTOFLOW_DATA_DIR; }

inline std::filesystem::path temp_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("protoflow-test-" + name + "-" + std::to_string(::getpid()));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline Layout random_layout(std::mt19937_64& rng, int min_components, int max_components, Canvas canvas = {360, 640}) {
    Layout layout;
    layout.canvas = canvas;
    const int n = std::uniform_int_distribution<int>(min_components, max_components)(rng);
    for (int i = 0; i < n; ++i) {
        LayoutComponent c;
        c.type = kAllComponentTypes[std::uniform_int_distribution<std::size_t>(0, kAllComponentTypes.size() - 1)(rng)];
        const int w = std::uniform_int_distribution<int>(8, canvas.width)(rng);
        const int h = std::uniform_int_distribution<int>(8, canvas.height / 3)(rng);
        c.bbox = {std::uniform_int_distribution<int>(0, canvas.width - w)(rng),
                  std::uniform_int_distribution<int>(0, canvas.height - h)(rng), w, h};
        layout.components.push_back(c);
    }
    return layout;
}

inline DesignInput random_input(std::mt19937_64& rng, int min_components, int max_components) {
    static const char* prompts[] = {"A shopping app home page", "A travel booking screen", "A fitness dashboard",
                                    "A recipe detail page", "A banking overview"};
    return {prompts[rng() % 5], random_layout(rng, min_components, max_components)};
}

inline KnowledgeRecord make_record(const std::string& id, const std::string& description, const std::string& category) {
    KnowledgeRecord r;
    r.id = id;
    r.layout.canvas = {360, 640};
    r.layout.components = {{ComponentType::Text, {0, 0, 100, 40}}, {ComponentType::Icon, {300, 0, 40, 40}}};
    r.component_texts = {std::string("Welcome"), std::string("menu")};
    r.ui_description = description;
    r.theme_attrs = {"#ffffff", "#1e88e5", "A clean " + category + " screen", category};
    return r;
}

inline std::vector<IconRecord> small_icon_base() {
    const char* phrases[] = {"alarm", "bookmark", "add shopping cart", "home", "search", "settings"};
    std::vector<IconRecord> icons;
    for (const char* p : phrases) {
        std::string id = p;
        std::replace(id.begin(), id.end(), ' ', '_');
        icons.push_back({id, p, "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 24 24\"><rect x=\"4\" y=\"4\" "
                                "width=\"16\" height=\"16\"/></svg>"});
    }
    return icons;
}

/// Counts every call that reaches the mocks, independently of the
/// orchestrator's own tally.
struct CountingBackends {
    struct Text final : TextGenerator {
        std::atomic<int> theme{0}, other{0};
        MockTextGenerator inner;
        std::string generate_text(const TextGenRequest& r) override {
            (r.prompt.find(kThemeFormatMarker) != std::string::npos ? theme : other)++;
            return inner.generate_text(r);
        }
    };
    struct Image final : ImageGenerator {
        std::atomic<int> layout_conditioned{0}, plain{0};
        MockImageGenerator inner;
        RasterImage generate_image(const ImageGenRequest& r) override {
            (r.layout_condition ? layout_conditioned : plain)++;
            return inner.generate_image(r);
        }
    };
    struct Embed final : TextEmbedder {
        std::atomic<int> calls{0};
        MockEmbedder inner;
        EmbeddingVector embed_text(std::string_view t) override {
            ++calls;
            return inner.embed_text(t);
        }
    };

    std::shared_ptr<Text> text = std::make_shared<Text>();
    std::shared_ptr<Image> image = std::make_shared<Image>();
    std::shared_ptr<Embed> embed = std::make_shared<Embed>();

    Backends backends() const { return {text, embed, image}; }
};

/// Default config with a 128px theme image to keep tests fast.
inline PipelineConfig small_config() {
    PipelineConfig c;
    c.image_size = 128;
    return c;
}

struct Fixture {
    Backends backends = Backends::mock();
    std::shared_ptr<const KnowledgeIndex> knowledge;
    std::shared_ptr<const IconIndex> icons;

    explicit Fixture(Backends b = Backends::mock()) : backends(std::move(b)) {
        knowledge = std::make_shared<KnowledgeIndex>(
            std::vector<KnowledgeRecord>{make_record("ui-a", "login screen", "Social"),
                                         make_record("ui-b", "product list", "Shopping"),
                                         make_record("ui-c", "flight search", "Travel")},
            *backends.embedder);
        icons = std::make_shared<IconIndex>(small_icon_base(), *backends.embedder);
    }

    Orchestrator orchestrator(PipelineConfig config = small_config()) const {
        return Orchestrator(backends, knowledge, icons, config);
    }
};

}  // namespace testing_support
