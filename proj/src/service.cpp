#include "protoflow/service.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <random>
#include <sstream>

#include "httplib.h"
#include "protoflow/assembler.hpp"
#include "protoflow/error.hpp"
#include "protoflow/hash.hpp"
#include "protoflow/serde.hpp"

namespace protoflow::service {

using nlohmann::json;

namespace {

std::string now_iso8601() {
    const auto now = std::chrono::system_clock::now();
    const auto secs = std::chrono::system_clock::to_time_t(now);
    const auto millis =
        std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
    std::tm tm{};
    gmtime_r(&secs, &tm);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday,
                  tm.tm_hour, tm.tm_min, tm.tm_sec, static_cast<int>(millis));
    return buf;
}

std::uint64_t random_u64() {
    static std::mutex lock;
    static std::mt19937_64 engine{(static_cast<std::uint64_t>(std::random_device{}()) << 32) ^ std::random_device{}() ^
                                  static_cast<std::uint64_t>(std::chrono::steady_clock::now().time_since_epoch().count())};
    std::lock_guard guard(lock);
    return engine();
}

std::string new_project_id() { return "p" + hex16(random_u64()).substr(0, 12); }

}  // namespace

json to_json(const Project& project) {
    return {{"id", project.id},
            {"revision", project.revision},
            {"created", project.created},
            {"updated", project.updated},
            {"input", protoflow::to_json(project.input)},
            {"trace", project.trace ? protoflow::to_json(*project.trace) : json(nullptr)}};
}

Project project_from_json(const json& doc) {
    try {
        Project p;
        p.id = doc.at("id").get<std::string>();
        p.revision = doc.at("revision").get<std::int64_t>();
        p.created = doc.value("created", std::string{});
        p.updated = doc.value("updated", std::string{});
        p.input = design_input_from_json(doc.at("input"));
        if (doc.contains("trace") && !doc["trace"].is_null()) p.trace = generation_trace_from_json(doc["trace"]);
        if (p.id.empty()) throw ValidationError("project id is empty", "id");
        if (p.revision < 1) throw ValidationError("project revision must be >= 1", "revision");
        return p;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed project document: ") + e.what());
    }
}

ProjectStore::ProjectStore(std::filesystem::path data_dir) : dir_(std::move(data_dir)) {
    std::filesystem::create_directories(dir_);
    for (const auto& entry : std::filesystem::directory_iterator(dir_)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".json") continue;
        std::ifstream in(entry.path());
        json doc;
        try {
            doc = json::parse(in);
        } catch (const json::exception& e) {
            throw ValidationError(entry.path().string() + ": " + e.what());
        }
        auto project = project_from_json(doc);
        auto s = std::make_shared<Slot>();
        const auto id = project.id;
        s->project = std::move(project);
        slots_.emplace(id, std::move(s));
    }
}

std::shared_ptr<ProjectStore::Slot> ProjectStore::slot(const std::string& id) const {
    std::lock_guard guard(index_lock_);
    const auto it = slots_.find(id);
    if (it == slots_.end()) throw NotFoundError("no project '" + id + "'");
    return it->second;
}

void ProjectStore::persist(const Project& project) const {
    const auto target = dir_ / (project.id + ".json");
    const auto temp = dir_ / (project.id + ".json.tmp-" + hex16(random_u64()));
    {
        std::ofstream out(temp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + temp.string());
        out << to_json(project).dump();
        out.flush();
        if (!out) throw Error("short write to " + temp.string());
    }
    std::error_code ec;
    std::filesystem::rename(temp, target, ec);
    if (ec) {
        std::filesystem::remove(temp);
        throw Error("cannot replace " + target.string() + ": " + ec.message());
    }
}

Project ProjectStore::create(const DesignInput& input) {
    validate_design_input(input);
    Project project;
    project.input = input;
    project.created = project.updated = now_iso8601();
    project.revision = 1;
    auto s = std::make_shared<Slot>();
    std::lock_guard guard(index_lock_);
    do {
        project.id = new_project_id();
    } while (slots_.count(project.id));
    persist(project);
    s->project = project;
    slots_.emplace(project.id, std::move(s));
    return project;
}

Project ProjectStore::get(const std::string& id) const {
    const auto s = slot(id);
    std::lock_guard guard(s->data);
    return s->project;
}

std::vector<std::string> ProjectStore::ids() const {
    std::lock_guard guard(index_lock_);
    std::vector<std::string> out;
    for (const auto& [id, _] : slots_) out.push_back(id);
    return out;
}

Project ProjectStore::mutate(const std::string& id, std::optional<std::int64_t> expected_revision,
                             const std::function<void(Project&)>& change, bool wait) {
    const auto s = slot(id);
    std::unique_lock operation(s->operation, std::defer_lock);
    if (wait) {
        operation.lock();
    } else if (!operation.try_lock()) {
        throw ConflictError("project '" + id + "' has an operation in progress");
    }
    Project next;
    {
        std::lock_guard guard(s->data);
        next = s->project;
    }
    if (expected_revision && *expected_revision != next.revision)
        throw ConflictError("stale revision " + std::to_string(*expected_revision) + "; project '" + id +
                            "' is at revision " + std::to_string(next.revision));
    change(next);
    next.id = id;
    next.revision += 1;
    next.updated = now_iso8601();
    persist(next);
    std::lock_guard guard(s->data);
    s->project = next;
    return next;
}

ProjectService::ProjectService(std::shared_ptr<ProjectStore> store, std::shared_ptr<const Orchestrator> orchestrator)
    : store_(std::move(store)), orchestrator_(std::move(orchestrator)) {
    if (!store_ || !orchestrator_) throw ValidationError("project service needs a store and an orchestrator");
}

Project ProjectService::create(const DesignInput& input) { return store_->create(input); }

Project ProjectService::get(const std::string& id) const { return store_->get(id); }

std::vector<std::string> ProjectService::list() const { return store_->ids(); }

Project ProjectService::update_input(const std::string& id, const DesignInput& input,
                                     std::optional<std::int64_t> expected) {
    validate_design_input(input);
    return store_->mutate(id, expected, [&](Project& p) {
        p.input = input;
        p.trace.reset();
    });
}

Project ProjectService::generate(const std::string& id, std::optional<std::int64_t> expected) {
    return store_->mutate(id, expected, [&](Project& p) { p.trace = orchestrator_->generate_prototype(p.input); });
}

namespace {

const GenerationTrace& require_trace(const Project& p) {
    if (!p.trace) throw ConflictError("project '" + p.id + "' has not been generated yet");
    return *p.trace;
}

}  // namespace

Project ProjectService::update_theme(const std::string& id, const ThemeDescription& edited,
                                     std::optional<std::int64_t> expected) {
    return store_->mutate(id, expected, [&](Project& p) {
        p.trace = orchestrator_->regenerate_all(require_trace(p), p.input, edited);
    });
}

Project ProjectService::update_component(const std::string& id, std::size_t index,
                                         const std::optional<std::string>& hint,
                                         std::optional<std::int64_t> expected) {
    return store_->mutate(id, expected, [&](Project& p) {
        p.trace = orchestrator_->regenerate_component(require_trace(p), p.input, index, hint);
    });
}

std::string ProjectService::export_svg(const std::string& id) const {
    const auto p = store_->get(id);
    return build_prototype(p.input, require_trace(p)).svg;
}

json ProjectService::export_json(const std::string& id) const {
    const auto p = store_->get(id);
    return export_project(build_prototype(p.input, require_trace(p)));
}

HttpResponse IdempotencyCache::run(const std::string& key, const std::string& fingerprint,
                                   const std::function<HttpResponse()>& fn) {
    std::promise<HttpResponse> promise;
    {
        std::unique_lock guard(lock_);
        const auto it = entries_.find(key);
        if (it != entries_.end()) {
            if (it->second.fingerprint != fingerprint)
                return error_response(ValidationError("idempotency key reused for a different request", "Idempotency-Key"));
            auto pending = it->second.response;
            guard.unlock();
            return pending.get();
        }
        entries_.emplace(key, Entry{fingerprint, promise.get_future().share()});
        order_.push_back(key);
        while (order_.size() > capacity_) {
            entries_.erase(order_.front());
            order_.pop_front();
        }
    }
    HttpResponse response;
    try {
        response = fn();
    } catch (const std::exception& e) {
        response = error_response(e);
    }
    // Busy or failed attempts are not remembered so a retry can succeed.
    if (response.status >= 500 || response.status == 409) {
        std::lock_guard guard(lock_);
        entries_.erase(key);
        std::erase(order_, key);
    }
    promise.set_value(response);
    return response;
}

HttpResponse error_response(const std::exception& error) {
    json body = {{"message", error.what()}};
    int status = 500;
    if (const auto* v = dynamic_cast<const ValidationError*>(&error)) {
        status = 422;
        body["type"] = "validation";
        if (!v->field().empty()) body["field"] = v->field();
    } else if (dynamic_cast<const NotFoundError*>(&error)) {
        status = 404;
        body["type"] = "not_found";
    } else if (dynamic_cast<const ConflictError*>(&error)) {
        status = 409;
        body["type"] = "conflict";
    } else if (const auto* g = dynamic_cast<const GenerationError*>(&error)) {
        status = 502;
        body["type"] = "generation";
        body["stage"] = g->stage();
        body["backend_failure"] = g->backend_failure();
        if (g->partial_trace()) body["partial_trace"] = protoflow::to_json(*g->partial_trace());
    } else if (dynamic_cast<const BackendError*>(&error)) {
        status = 502;
        body["type"] = "backend";
    } else {
        body["type"] = "internal";
    }
    return {status, "application/json", json{{"error", body}}.dump()};
}

namespace {

json parse_body(const httplib::Request& req) {
    if (req.body.empty()) return json::object();
    try {
        return json::parse(req.body);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("request body is not JSON: ") + e.what(), "body");
    }
}

std::optional<std::int64_t> parse_revision(const std::string& text, const std::string& source) {
    std::string t = text;
    if (t.rfind("W/", 0) == 0) t = t.substr(2);
    if (t.size() >= 2 && t.front() == '"' && t.back() == '"') t = t.substr(1, t.size() - 2);
    try {
        std::size_t used = 0;
        const auto v = std::stoll(t, &used);
        if (used != t.size()) throw std::invalid_argument(t);
        return v;
    } catch (const std::exception&) {
        throw ValidationError("expected revision must be an integer", source);
    }
}

// From If-Match, ?revision= or an "expected_revision" body field.
std::optional<std::int64_t> expected_revision(const httplib::Request& req, const json& body) {
    if (req.has_header("If-Match")) return parse_revision(req.get_header_value("If-Match"), "If-Match");
    if (req.has_param("revision")) return parse_revision(req.get_param_value("revision"), "revision");
    if (body.is_object() && body.contains("expected_revision")) {
        if (!body["expected_revision"].is_number_integer())
            throw ValidationError("expected_revision must be an integer", "expected_revision");
        return body["expected_revision"].get<std::int64_t>();
    }
    return std::nullopt;
}

const json& unwrap(const json& body, const char* key) {
    if (body.is_object() && body.contains(key) && body[key].is_object()) return body[key];
    return body;
}

HttpResponse json_response(const json& doc, int status = 200) { return {status, "application/json", doc.dump()}; }

HttpResponse trace_response(const Project& p) {
    json out = {{"id", p.id}, {"revision", p.revision}, {"trace", nullptr}, {"svg", nullptr}};
    if (p.trace) {
        out["trace"] = protoflow::to_json(*p.trace);
        out["svg"] = build_prototype(p.input, *p.trace).svg;
    }
    return json_response(out);
}

std::size_t parse_index(const std::string& text) {
    try {
        return static_cast<std::size_t>(std::stoull(text));
    } catch (const std::exception&) {
        throw ValidationError("component index '" + text + "' is not a number", "index");
    }
}

}  // namespace

HttpServer::HttpServer(std::shared_ptr<ProjectService> service, std::optional<std::filesystem::path> static_dir)
    : service_(std::move(service)), server_(std::make_unique<httplib::Server>()) {
    if (static_dir && !server_->set_mount_point("/", static_dir->string()))
        throw NotFoundError("static directory " + static_dir->string() + " does not exist");
    install_routes();
}

HttpServer::~HttpServer() { stop(); }

bool HttpServer::listen(const std::string& host, int port) { return server_->listen(host, port); }
int HttpServer::bind_to_any_port(const std::string& host) { return server_->bind_to_any_port(host); }
bool HttpServer::listen_after_bind() { return server_->listen_after_bind(); }
void HttpServer::wait_until_ready() const { server_->wait_until_ready(); }
void HttpServer::stop() {
    if (server_) server_->stop();
}

void HttpServer::install_routes() {
    using httplib::Request;
    using httplib::Response;
    auto& srv = *server_;
    srv.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                             {"Access-Control-Allow-Headers", "Content-Type, If-Match, Idempotency-Key"},
                             {"Access-Control-Allow-Methods", "GET, POST, PUT, OPTIONS"}});
    srv.Options(R"(/api/.*)", [](const Request&, Response& res) { res.status = 204; });

    auto reply = [](Response& res, const HttpResponse& out) {
        res.status = out.status;
        res.set_content(out.body, out.content_type);
    };
    auto safe = [](const std::function<HttpResponse()>& fn) {
        try {
            return fn();
        } catch (const std::exception& e) {
            return error_response(e);
        }
    };
    auto read = [=](const std::function<HttpResponse(const Request&)>& fn) {
        return [=](const Request& req, Response& res) { reply(res, safe([&] { return fn(req); })); };
    };
    auto mutation = [this, reply, safe](const std::function<HttpResponse(const Request&)>& fn) {
        return [=, this](const Request& req, Response& res) {
            auto run = [&] { return safe([&] { return fn(req); }); };
            if (req.has_header("Idempotency-Key")) {
                const auto fingerprint = req.method + " " + req.path + "\n" + req.get_header_value("If-Match") + "\n" + req.body;
                reply(res, idempotency_.run(req.get_header_value("Idempotency-Key"), fingerprint, run));
            } else {
                reply(res, run());
            }
        };
    };

    const std::string id = "([A-Za-z0-9_-]+)";
    srv.Get("/api/projects", read([this](const Request&) { return json_response({{"projects", service_->list()}}); }));
    srv.Post("/api/projects", mutation([this](const Request& req) {
                 const auto body = parse_body(req);
                 const auto project = service_->create(design_input_from_json(unwrap(body, "input")));
                 return json_response(to_json(project), 201);
             }));
    srv.Get("/api/projects/" + id, read([this](const Request& req) {
                return json_response(to_json(service_->get(req.matches[1])));
            }));
    srv.Put("/api/projects/" + id, mutation([this](const Request& req) {
                const auto body = parse_body(req);
                const auto input = design_input_from_json(unwrap(body, "input"));
                return json_response(to_json(service_->update_input(req.matches[1], input, expected_revision(req, body))));
            }));
    srv.Post("/api/projects/" + id + "/generate", mutation([this](const Request& req) {
                 const auto body = parse_body(req);
                 return trace_response(service_->generate(req.matches[1], expected_revision(req, body)));
             }));
    srv.Put("/api/projects/" + id + "/theme", mutation([this](const Request& req) {
                const auto body = parse_body(req);
                const auto theme = theme_description_from_json(unwrap(body, "theme"));
                return trace_response(service_->update_theme(req.matches[1], theme, expected_revision(req, body)));
            }));
    srv.Put("/api/projects/" + id + "/components/([0-9]+)", mutation([this](const Request& req) {
                const auto body = parse_body(req);
                std::optional<std::string> hint;
                if (body.contains("content_hint") && !body["content_hint"].is_null()) {
                    if (!body["content_hint"].is_string())
                        throw ValidationError("content_hint must be a string", "content_hint");
                    hint = body["content_hint"].get<std::string>();
                }
                return trace_response(service_->update_component(req.matches[1], parse_index(req.matches[2]), hint,
                                                                 expected_revision(req, body)));
            }));
    srv.Get("/api/projects/" + id + "/export\\.svg", [this, reply, safe](const Request& req, Response& res) {
        const auto out = safe([&] { return HttpResponse{200, "image/svg+xml", service_->export_svg(req.matches[1])}; });
        if (out.status == 200)
            res.set_header("Content-Disposition", "attachment; filename=\"" + std::string(req.matches[1]) + ".svg\"");
        reply(res, out);
    });
    srv.Get("/api/projects/" + id + "/export\\.json", [this, reply, safe](const Request& req, Response& res) {
        const auto out = safe([&] { return json_response(service_->export_json(req.matches[1])); });
        if (out.status == 200)
            res.set_header("Content-Disposition", "attachment; filename=\"" + std::string(req.matches[1]) + ".json\"");
        reply(res, out);
    });
    srv.Get("/api/projects/" + id + "/trace", read([this](const Request& req) {
                const auto project = service_->get(req.matches[1]);
                if (!project.trace) throw NotFoundError("project '" + project.id + "' has no trace yet");
                return json_response(protoflow::to_json(*project.trace));
            }));
}

}  // namespace protoflow::service
