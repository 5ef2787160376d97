#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "protoflow/orchestrator.hpp"

namespace httplib {
class Server;
}

namespace protoflow::service {

struct Project {
    std::string id;
    DesignInput input;
    std::optional<GenerationTrace> trace;
    std::string created;
    std::string updated;
    std::int64_t revision = 1;

    friend bool operator==(const Project&, const Project&) = default;
};

nlohmann::json to_json(const Project& project);
Project project_from_json(const nlohmann::json& doc);

/// One JSON document per project under a data directory, written atomically.
/// All projects are loaded at construction.
class ProjectStore {
public:
    explicit ProjectStore(std::filesystem::path data_dir);

    const std::filesystem::path& data_dir() const noexcept { return dir_; }

    Project create(const DesignInput& input);
    Project get(const std::string& id) const;
    std::vector<std::string> ids() const;

    /// Runs `change` on a copy under the project's lock, bumps the revision
    /// and persists. A stale `expected_revision` is a ConflictError and writes
    /// nothing; so is a busy project when `wait` is false.
    Project mutate(const std::string& id, std::optional<std::int64_t> expected_revision,
                   const std::function<void(Project&)>& change, bool wait = false);

private:
    struct Slot {
        std::mutex operation;
        std::mutex data;
        Project project;
    };

    std::shared_ptr<Slot> slot(const std::string& id) const;
    void persist(const Project& project) const;

    std::filesystem::path dir_;
    mutable std::mutex index_lock_;
    std::map<std::string, std::shared_ptr<Slot>> slots_;
};

/// Transport-independent project operations.
class ProjectService {
public:
    ProjectService(std::shared_ptr<ProjectStore> store, std::shared_ptr<const Orchestrator> orchestrator);

    Project create(const DesignInput& input);
    Project get(const std::string& id) const;
    std::vector<std::string> list() const;
    /// Replaces the input; any existing trace is dropped.
    Project update_input(const std::string& id, const DesignInput& input, std::optional<std::int64_t> expected);
    Project generate(const std::string& id, std::optional<std::int64_t> expected);
    Project update_theme(const std::string& id, const ThemeDescription& edited, std::optional<std::int64_t> expected);
    Project update_component(const std::string& id, std::size_t index, const std::optional<std::string>& hint,
                             std::optional<std::int64_t> expected);

    std::string export_svg(const std::string& id) const;
    nlohmann::json export_json(const std::string& id) const;

    const Orchestrator& orchestrator() const noexcept { return *orchestrator_; }

private:
    std::shared_ptr<ProjectStore> store_;
    std::shared_ptr<const Orchestrator> orchestrator_;
};

struct HttpResponse {
    int status = 200;
    std::string content_type = "application/json";
    std::string body;
};

/// Replays the first response for a repeated idempotency key; rejects a key
/// reused for a different request.
class IdempotencyCache {
public:
    explicit IdempotencyCache(std::size_t capacity = 1024) : capacity_(capacity) {}

    HttpResponse run(const std::string& key, const std::string& fingerprint, const std::function<HttpResponse()>& fn);

private:
    struct Entry {
        std::string fingerprint;
        std::shared_future<HttpResponse> response;
    };

    std::size_t capacity_;
    std::mutex lock_;
    std::map<std::string, Entry> entries_;
    std::deque<std::string> order_;
};

/// Maps an exception to a JSON error body and HTTP status:
/// validation 422, not found 404, conflict 409, generation 502, other 500.
HttpResponse error_response(const std::exception& error);

class HttpServer {
public:
    explicit HttpServer(std::shared_ptr<ProjectService> service, std::optional<std::filesystem::path> static_dir = {});
    ~HttpServer();
    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    /// Blocks until stop().
    bool listen(const std::string& host, int port);
    /// Binds an ephemeral port and returns it; follow with listen_after_bind().
    int bind_to_any_port(const std::string& host);
    bool listen_after_bind();
    void wait_until_ready() const;
    void stop();

private:
    void install_routes();

    std::shared_ptr<ProjectService> service_;
    std::unique_ptr<httplib::Server> server_;
    IdempotencyCache idempotency_;
};

}  // namespace protoflow::service
