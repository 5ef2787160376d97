#include <cstdlib>

#include "httplib.h"

#include "protoflow/backends.hpp"
#include "protoflow/error.hpp"

namespace protoflow {

using nlohmann::json;

namespace {

json post_json(const std::string& base_url, const std::string& path, const json& body, const RetryPolicy& retry) {
    return with_retries(retry, [&]() -> json {
        httplib::Client client(base_url);
        client.set_connection_timeout(retry.timeout);
        client.set_read_timeout(retry.timeout);
        client.set_write_timeout(retry.timeout);
        auto result = client.Post(path, body.dump(), "application/json");
        if (!result)
            throw BackendError("POST " + base_url + path + " failed: " + httplib::to_string(result.error()), true);
        if (result->status >= 500 || result->status == 429)
            throw BackendError("POST " + base_url + path + " returned " + std::to_string(result->status), true);
        if (result->status >= 400)
            throw BackendError("POST " + base_url + path + " rejected with " + std::to_string(result->status), false);
        try {
            return json::parse(result->body);
        } catch (const json::parse_error&) {
            throw BackendError("POST " + base_url + path + " returned malformed JSON", false);
        }
    });
}

}  // namespace

json text_request_to_json(const TextGenRequest& request) {
    return {{"prompt", request.prompt}, {"temperature", request.temperature}, {"max_tokens", request.max_tokens}};
}

json image_request_to_json(const ImageGenRequest& request) {
    json body = {
        {"prompt", request.prompt},
        {"size", {{"width", request.size.width}, {"height", request.size.height}}},
        {"seed", request.seed},
    };
    if (request.init_image) {
        body["strength"] = request.strength;
        body["init_image_png_base64"] = png_base64(*request.init_image);
    }
    if (request.layout_condition) {
        json layout = json::array();
        const auto& lc = *request.layout_condition;
        for (const auto& c : lc.components)
            layout.push_back({{"type", to_string(c.type)}, {"bbox", {c.bbox.x, c.bbox.y, c.bbox.w, c.bbox.h}}});
        body["layout"] = std::move(layout);
        body["canvas"] = {{"width", lc.canvas.width}, {"height", lc.canvas.height}};
    }
    return body;
}

RemoteTextGenerator::RemoteTextGenerator(std::string base_url, RetryPolicy retry)
    : base_url_(std::move(base_url)), retry_(retry) {}

std::string RemoteTextGenerator::generate_text(const TextGenRequest& request) {
    if (request.prompt.empty()) throw ValidationError("text prompt must be non-empty", "prompt");
    const auto reply = post_json(base_url_, "/v1/complete", text_request_to_json(request), retry_);
    const auto text = reply.value("text", std::string{});
    if (text.empty()) throw BackendError("empty completion from " + base_url_, false);
    return text;
}

RemoteEmbedder::RemoteEmbedder(std::string base_url, RetryPolicy retry)
    : base_url_(std::move(base_url)), retry_(retry) {}

EmbeddingVector RemoteEmbedder::embed_text(std::string_view text) {
    if (text.empty()) throw ValidationError("embedding input must be non-empty", "text");
    const auto reply = post_json(base_url_, "/v1/embed", {{"text", text}}, retry_);
    const auto vector = reply.find("vector");
    if (vector == reply.end() || !vector->is_array() || vector->empty())
        throw BackendError("embedding response lacks a vector", false);
    EmbeddingVector out;
    for (const auto& v : *vector) {
        if (!v.is_number()) throw BackendError("embedding response has non-numeric entries", false);
        out.values.push_back(v.get<double>());
    }
    return out;
}

RemoteImageGenerator::RemoteImageGenerator(std::string base_url, RetryPolicy retry)
    : base_url_(std::move(base_url)), retry_(retry) {}

RasterImage RemoteImageGenerator::generate_image(const ImageGenRequest& request) {
    const auto reply = post_json(base_url_, "/v1/image", image_request_to_json(request), retry_);
    const auto png = reply.value("png_base64", std::string{});
    if (png.empty()) throw BackendError("image response lacks png_base64", false);
    RasterImage image;
    try {
        image = image_from_png_base64(png);
    } catch (const ValidationError& e) {
        throw BackendError(std::string("undecodable image from backend: ") + e.what(), false);
    }
    if (image.width() != request.size.width || image.height() != request.size.height)
        throw BackendError("image backend returned " + std::to_string(image.width()) + "x" +
                               std::to_string(image.height()) + ", requested " + std::to_string(request.size.width) +
                               "x" + std::to_string(request.size.height),
                           false);
    return image;
}

Backends Backends::mock() {
    return {std::make_shared<MockTextGenerator>(), std::make_shared<MockEmbedder>(),
            std::make_shared<MockImageGenerator>()};
}

Backends Backends::from_env() {
    auto backends = mock();
    if (const char* url = std::getenv("PROTOFLOW_TEXT_URL"); url && *url)
        backends.text = std::make_shared<RemoteTextGenerator>(url);
    if (const char* url = std::getenv("PROTOFLOW_EMBED_URL"); url && *url)
        backends.embedder = std::make_shared<RemoteEmbedder>(url);
    if (const char* url = std::getenv("PROTOFLOW_IMAGE_URL"); url && *url)
        backends.image = std::make_shared<RemoteImageGenerator>(url);
    return backends;
}

}  // namespace protoflow
