#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "protoflow/image.hpp"
#include "protoflow/kb.hpp"

namespace protoflow {

struct EmbeddingVector {
    std::vector<double> values;

    std::size_t dimension() const noexcept { return values.size(); }
    friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;
};

struct TextGenRequest {
    std::string prompt;
    double temperature = 0.0;
    int max_tokens = 512;
};

struct ImageSize {
    int width = 512;
    int height = 512;

    friend bool operator==(const ImageSize&, const ImageSize&) = default;
};

/// The theme-image path sets `layout_condition`; the per-component image
/// path sets `init_image`. The pipeline never sets both.
struct ImageGenRequest {
    std::string prompt;
    std::optional<Layout> layout_condition;
    std::optional<RasterImage> init_image;
    double strength = 0.6;
    std::uint64_t seed = 0;
    ImageSize size;
};

class TextGenerator {
public:
    virtual ~TextGenerator() = default;
    virtual std::string generate_text(const TextGenRequest& request) = 0;
};

class TextEmbedder {
public:
    virtual ~TextEmbedder() = default;
    virtual EmbeddingVector embed_text(std::string_view text) = 0;
};

class ImageGenerator {
public:
    virtual ~ImageGenerator() = default;
    virtual RasterImage generate_image(const ImageGenRequest& request) = 0;
};

// Mock backends: stateless, deterministic, offline.

/// Marker the theme-description template carries; the mock answers such
/// prompts with a well-formed labeled block instead of a digest.
inline constexpr std::string_view kThemeFormatMarker = "RESPONSE FORMAT (theme block)";

class MockTextGenerator final : public TextGenerator {
public:
    /// "MOCK:" + 16-hex FNV-1a digest of the prompt, or a theme block when
    /// the prompt carries kThemeFormatMarker.
    std::string generate_text(const TextGenRequest& request) override;
};

class MockEmbedder final : public TextEmbedder {
public:
    explicit MockEmbedder(std::size_t dimension = 64, std::uint64_t seed = 0x70726f746f666c6fULL)
        : dimension_(dimension), seed_(seed) {}

    EmbeddingVector embed_text(std::string_view text) override;
    std::size_t dimension() const noexcept { return dimension_; }

private:
    std::size_t dimension_;
    std::uint64_t seed_;
};

class MockImageGenerator final : public ImageGenerator {
public:
    RasterImage generate_image(const ImageGenRequest& request) override;
};

/// Colors the mock image generator paints; exposed so tests can predict pixels.
Rgb mock_background_color(std::string_view prompt, std::uint64_t seed);
Rgb mock_component_color(std::string_view prompt, std::size_t component_index, std::uint64_t seed);
Rgb mock_gradient_bottom_color(std::string_view prompt, std::uint64_t seed);

// Remote backends speaking the JSON-over-HTTP contract.

struct RetryPolicy {
    int attempts = 3;
    std::chrono::milliseconds initial_backoff{500};
    std::chrono::seconds timeout{60};
};

class RemoteTextGenerator final : public TextGenerator {
public:
    explicit RemoteTextGenerator(std::string base_url, RetryPolicy retry = {});
    std::string generate_text(const TextGenRequest& request) override;

private:
    std::string base_url_;
    RetryPolicy retry_;
};

class RemoteEmbedder final : public TextEmbedder {
public:
    explicit RemoteEmbedder(std::string base_url, RetryPolicy retry = {});
    EmbeddingVector embed_text(std::string_view text) override;

private:
    std::string base_url_;
    RetryPolicy retry_;
};

class RemoteImageGenerator final : public ImageGenerator {
public:
    explicit RemoteImageGenerator(std::string base_url, RetryPolicy retry = {});
    RasterImage generate_image(const ImageGenRequest& request) override;

private:
    std::string base_url_;
    RetryPolicy retry_;
};

/// Wire bodies for the remote contract, shared with tests and fake servers.
nlohmann::json text_request_to_json(const TextGenRequest& request);
nlohmann::json image_request_to_json(const ImageGenRequest& request);

struct Backends {
    std::shared_ptr<TextGenerator> text;
    std::shared_ptr<TextEmbedder> embedder;
    std::shared_ptr<ImageGenerator> image;

    static Backends mock();
    /// PROTOFLOW_TEXT_URL / PROTOFLOW_EMBED_URL / PROTOFLOW_IMAGE_URL; each
    /// unset variable falls back to the corresponding mock.
    static Backends from_env();
};

/// Runs `op` up to `policy.attempts` times, sleeping initial_backoff * 2^i
/// between attempts, retrying only BackendError::retryable() failures.
template <typename Op>
auto with_retries(const RetryPolicy& policy, Op&& op) -> decltype(op());

}  // namespace protoflow

#include "protoflow/detail/retry.hpp"
