#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "protoflow/backends.hpp"
#include "protoflow/error.hpp"
#include "protoflow/pipeline_types.hpp"
#include "protoflow/retrieval.hpp"
#include "protoflow/submodules.hpp"

namespace protoflow {

/// Default theme-description template. "{slots}" expands to one
/// "SLOT[i] = <Type> [x,y,w,h]" line per component.
extern const std::string kDefaultThemeTemplate;

/// Pipeline stages that can be switched off for ablation runs.
struct PipelineFlags {
    bool no_retrieval = false;
    bool no_theme_description = false;
    bool no_theme_image = false;
    bool no_text_module = false;
    bool no_image_module = false;
    bool no_icon_module = false;

    friend bool operator==(const PipelineFlags&, const PipelineFlags&) = default;
};

/// Throws ValidationError on an unknown flag name.
PipelineFlags parse_flags(std::span<const std::string> names);
std::vector<std::string> flag_names(const PipelineFlags& flags);

struct PipelineConfig {
    int k = 2;
    int image_size = 512;
    std::uint64_t seed = 0;
    int max_tokens = 512;
    double strength = 0.6;
    std::string p_theme = kDefaultThemeTemplate;
    std::string p_text{kDefaultTextTemplate};
    std::string p_icon{kDefaultIconTemplate};
    PipelineFlags flags;

    /// JSON keys: k, image_size, seed, max_tokens, strength, p_theme, p_text,
    /// p_icon (template file paths, relative to the config file), flags.
    static PipelineConfig load(const std::filesystem::path& path);
};

/// Append-only memory of the run: the seed (theme description text) followed
/// by one entry per completed component.
class CachePool {
public:
    explicit CachePool(std::string seed) { entries_.push_back(std::move(seed)); }
    explicit CachePool(std::vector<std::string> entries);

    void append(std::string result) { entries_.push_back(std::move(result)); }
    /// Newline-join of all entries.
    std::string text() const;
    const std::vector<std::string>& entries() const noexcept { return entries_; }
    std::size_t size() const noexcept { return entries_.size(); }

private:
    std::vector<std::string> entries_;
};

ModuleId dispatch(ComponentType type);
/// dispatch() with disabled modules falling back to color_fill.
ModuleId dispatch(ComponentType type, const PipelineFlags& flags);

/// Builds P from the input, the layout lines, the referenced knowledge texts
/// in hit order and the rendered theme template. Throws NotFoundError if a
/// hit is missing from the knowledge base, ValidationError for zero hits.
ThemePrompt assemble_theme_prompt(const DesignInput& input, const RetrievalResult& hits,
                                  const KnowledgeIndex& knowledge, const std::string& theme_template);
/// Same, from already-resolved reference texts (may be empty).
ThemePrompt assemble_theme_prompt(const DesignInput& input, std::vector<std::string> refer,
                                  const std::string& theme_template);

std::string render_theme_template(const std::string& theme_template, const Layout& layout);

/// Labeled block: THEME_COLOR / PRIMARY_COLOR / APP_CATEGORY / THEME /
/// COMPONENT[i]: kind | hint. This is also the cache seed.
std::string format_theme_block(const ThemeDescription& theme);
/// Line-oriented parse of a labeled block. Keys are case-insensitive and
/// colors are lowercased. Throws ValidationError describing what is missing.
ThemeDescription parse_theme_block(const std::string& text, std::size_t component_count);

/// Raised when a run aborts. Carries the stage that failed and whatever
/// trace had been built up to that point.
class GenerationError : public Error {
public:
    GenerationError(const std::string& message, std::string stage, std::shared_ptr<GenerationTrace> partial,
                    bool backend_failure)
        : Error(message), stage_(std::move(stage)), partial_(std::move(partial)), backend_failure_(backend_failure) {}

    const std::string& stage() const noexcept { return stage_; }
    const std::shared_ptr<GenerationTrace>& partial_trace() const noexcept { return partial_; }
    bool backend_failure() const noexcept { return backend_failure_; }

private:
    std::string stage_;
    std::shared_ptr<GenerationTrace> partial_;
    bool backend_failure_;
};

struct StepOutcome {
    SubModuleCall call;
    ComponentContent content;
    CachePool cache;
};

/// The central coordinator. Holds only immutable shared state (backends,
/// knowledge and icon indices, config), so one instance may serve
/// concurrent runs; each run is strictly sequential.
class Orchestrator {
public:
    Orchestrator(Backends backends, std::shared_ptr<const KnowledgeIndex> knowledge,
                 std::shared_ptr<const IconIndex> icons, PipelineConfig config);

    const PipelineConfig& config() const noexcept { return config_; }
    const Backends& backends() const noexcept { return backends_; }

    ThemePackage generate_theme(const DesignInput& input, CallCounts& counts, std::vector<std::string>& warnings) const;

    /// One fold of the cache pool: builds p_sub + cache text, runs the
    /// dispatched sub-module, appends the result summary to the cache.
    StepOutcome step(const CachePool& cache, const DesignInput& input, std::size_t component_index,
                     const ThemePackage& theme, const std::string& hint, CallCounts& counts,
                     std::vector<std::string>& warnings) const;

    GenerationTrace generate_prototype(const DesignInput& input) const;

    /// Re-runs one component against the cache prefix it originally saw.
    GenerationTrace regenerate_component(const GenerationTrace& trace, const DesignInput& input,
                                         std::size_t component_index,
                                         const std::optional<std::string>& edited_hint) const;

    /// Keeps the edited theme description, re-renders the theme image and
    /// every component.
    GenerationTrace regenerate_all(const GenerationTrace& trace, const DesignInput& input,
                                   const ThemeDescription& edited_theme) const;

private:
    ThemePackage theme_from_description(const DesignInput& input, ThemeDescription description, ThemePrompt prompt,
                                        CallCounts& counts) const;
    void run_components(GenerationTrace& trace, const DesignInput& input) const;

    Backends backends_;
    std::shared_ptr<const KnowledgeIndex> knowledge_;
    std::shared_ptr<const IconIndex> icons_;
    PipelineConfig config_;
};

}  // namespace protoflow
