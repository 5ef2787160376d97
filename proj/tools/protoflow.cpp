#include <csignal>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "protoflow/assembler.hpp"
#include "protoflow/evalkit.hpp"
#include "protoflow/kb.hpp"
#include "protoflow/orchestrator.hpp"
#include "protoflow/serde.hpp"
#include "protoflow/service.hpp"

#ifndef PROTOFLOW_DEFAULT_DATA_DIR
#define PROTOFLOW_DEFAULT_DATA_DIR "data"
#endif

using namespace protoflow;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct PipelineOptions {
    std::string kb = std::string(PROTOFLOW_DEFAULT_DATA_DIR) + "/knowledge.jsonl";
    std::string icons = std::string(PROTOFLOW_DEFAULT_DATA_DIR) + "/icons.jsonl";
    std::string config;
    std::optional<std::uint64_t> seed;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--kb", kb, "Knowledge base file or directory")->capture_default_str();
        cmd->add_option("--icons", icons, "Icon base file or directory")->capture_default_str();
        cmd->add_option("--config", config, "Pipeline config JSON");
        cmd->add_option("--seed", seed, "Generation seed (overrides the config)");
    }

    PipelineConfig pipeline_config() const {
        auto c = config.empty() ? PipelineConfig{} : PipelineConfig::load(config);
        if (seed) c.seed = *seed;
        return c;
    }
};

struct Environment {
    Backends backends;
    std::shared_ptr<const KnowledgeIndex> knowledge;
    std::shared_ptr<const IconIndex> icons;
    PipelineConfig config;
};

Environment load_environment(const PipelineOptions& options) {
    Environment env;
    env.backends = Backends::from_env();
    env.config = options.pipeline_config();
    env.knowledge = std::make_shared<KnowledgeIndex>(load_knowledge_base(options.kb), *env.backends.embedder);
    env.icons = std::make_shared<IconIndex>(load_icon_base(options.icons), *env.backends.embedder);
    return env;
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw NotFoundError("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ValidationError(path + ": " + e.what());
    }
}

// Accepts a bare layout or a whole design input; --prompt wins over a stored prompt.
DesignInput read_design_input(const std::string& layout_path, const std::string& prompt) {
    const auto doc = read_json_file(layout_path);
    DesignInput input;
    if (doc.contains("layout")) {
        input.prompt = doc.value("prompt", std::string{});
        input.layout = parse_layout(doc["layout"]);
    } else {
        input.layout = parse_layout(doc);
    }
    if (!prompt.empty()) input.prompt = prompt;
    validate_design_input(input);
    return input;
}

void write_text(const std::string& path, const std::string& text) {
    if (path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out << text;
}

std::string dotted(const std::string& message, const std::string& field) {
    return field.empty() ? message : message + " (at " + field + ")";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"protoflow: prompt + wireframe to editable SVG prototypes"};
    app.require_subcommand(1);

    // kb
    auto* kb = app.add_subcommand("kb", "Knowledge base tools");
    kb->require_subcommand(1);
    std::string kb_path;
    bool kb_icons = false;
    auto* kb_validate = kb->add_subcommand("validate", "Validate a knowledge or icon base");
    kb_validate->add_option("path", kb_path, "Record file or directory")->required();
    kb_validate->add_flag("--icons", kb_icons, "Treat the path as an icon base");
    auto* kb_stats = kb->add_subcommand("stats", "Summarize a knowledge base");
    kb_stats->add_option("path", kb_path, "Record file or directory")->required();

    std::string prompt, layout_path;
    int k = 2;
    PipelineOptions query_opts;
    auto* kb_query = kb->add_subcommand("query", "Retrieve the top-k references for an input");
    kb_query->add_option("--prompt", prompt, "Design prompt");
    kb_query->add_option("--layout", layout_path, "Layout or design input JSON")->required();
    kb_query->add_option("-k", k, "Number of references")->capture_default_str()->check(CLI::PositiveNumber);
    kb_query->add_option("--kb", query_opts.kb, "Knowledge base")->capture_default_str();

    // generate
    PipelineOptions gen_opts;
    std::string out_path, trace_path;
    auto* generate = app.add_subcommand("generate", "Generate a prototype");
    generate->add_option("--prompt", prompt, "Design prompt");
    generate->add_option("--layout", layout_path, "Layout or design input JSON")->required();
    generate->add_option("--out", out_path, "Output file: .svg, or .json for the project export")->required();
    generate->add_option("--trace", trace_path, "Also write the full generation trace here");
    gen_opts.add_to(generate);

    // serve
    PipelineOptions serve_opts;
    std::string host = "127.0.0.1", data_dir = "projects", static_dir;
    int port = 8080;
    auto* serve = app.add_subcommand("serve", "Run the HTTP service");
    serve->add_option("--port", port, "Port")->capture_default_str();
    serve->add_option("--host", host, "Bind address")->capture_default_str();
    serve->add_option("--data-dir", data_dir, "Project directory")->capture_default_str();
    serve->add_option("--static-dir", static_dir, "Serve these files at /");
    serve_opts.add_to(serve);

    // export
    std::string project_id, format = "svg";
    auto* exporter = app.add_subcommand("export", "Export a stored project");
    exporter->add_option("--project", project_id, "Project id")->required();
    exporter->add_option("--format", format, "svg or json")->check(CLI::IsMember({"svg", "json"}))->capture_default_str();
    exporter->add_option("--out", out_path, "Output path ('-' for stdout)")->required();
    exporter->add_option("--data-dir", data_dir, "Project directory")->capture_default_str();

    // eval
    auto* eval = app.add_subcommand("eval", "Metrics and ablation");
    eval->require_subcommand(1);
    std::string real_path, gen_path, features_path, gd_metric = "euclidean";
    auto* eval_fid = eval->add_subcommand("fid", "FID between two feature files");
    eval_fid->add_option("--real", real_path, "Reference features")->required();
    eval_fid->add_option("--gen", gen_path, "Generated features")->required();
    auto* eval_gd = eval->add_subcommand("gd", "Generation diversity of a feature file");
    eval_gd->add_option("--features", features_path, "Feature file")->required();

    PipelineOptions feat_opts;
    std::string inputs_path;
    int raster_size = 512;
    auto* eval_features = eval->add_subcommand("features", "Generate inputs and write their feature file");
    eval_features->add_option("--inputs", inputs_path, "Design input file or directory")->required();
    eval_features->add_option("--out", out_path, "Feature file")->required();
    eval_features->add_option("--size", raster_size, "Raster size")->capture_default_str();
    feat_opts.add_to(eval_features);

    PipelineOptions ablate_opts;
    std::string configs_path, reference_path, report_path;
    std::uint64_t reference_seed = 1;
    auto* eval_ablate = eval->add_subcommand("ablate", "Run the ablation table");
    eval_ablate->add_option("--configs", configs_path, "Ablation config JSON")->required();
    eval_ablate->add_option("--inputs", inputs_path, "Design input file or directory")->required();
    eval_ablate->add_option("--reference", reference_path,
                            "Reference feature file (default: full pipeline at --reference-seed)");
    eval_ablate->add_option("--reference-seed", reference_seed, "Seed for the generated reference set")
        ->capture_default_str();
    eval_ablate->add_option("--gd-metric", gd_metric, "euclidean or phash_hamming")
        ->check(CLI::IsMember({"euclidean", "phash_hamming"}))
        ->capture_default_str();
    eval_ablate->add_option("--size", raster_size, "Raster size")->capture_default_str();
    eval_ablate->add_option("--out", report_path, "Also write the report as JSON");
    ablate_opts.add_to(eval_ablate);

    CLI11_PARSE(app, argc, argv);

    try {
        if (kb_validate->parsed()) {
            if (kb_icons) {
                std::cout << "ok: " << load_icon_base(kb_path).size() << " icons\n";
            } else {
                std::cout << "ok: " << load_knowledge_base(kb_path).size() << " records\n";
            }
        } else if (kb_stats->parsed()) {
            const auto stats = compute_stats(load_knowledge_base(kb_path));
            std::cout << "records: " << stats.records << "\ncomponents: " << stats.components << "\n";
            for (std::size_t i = 0; i < kAllComponentTypes.size(); ++i)
                std::cout << "  " << to_string(kAllComponentTypes[i]) << ": " << stats.per_type[i] << "\n";
            std::cout << "categories:\n";
            for (const auto& [name, n] : stats.categories) std::cout << "  " << name << ": " << n << "\n";
        } else if (kb_query->parsed()) {
            const auto input = read_design_input(layout_path, prompt);
            auto backends = Backends::from_env();
            const KnowledgeIndex index(load_knowledge_base(query_opts.kb), *backends.embedder);
            const auto query = backends.embedder->embed_text(retrieval_query_text(input.prompt, input.layout));
            for (const auto& hit : index.index().top_k(query, RetrievalConfig{k}).hits)
                std::cout << hit.record_id << '\t' << hit.score << '\n';
        } else if (generate->parsed()) {
            const auto input = read_design_input(layout_path, prompt);
            const auto env = load_environment(gen_opts);
            const Orchestrator orchestrator(env.backends, env.knowledge, env.icons, env.config);
            const auto trace = orchestrator.generate_prototype(input);
            const auto prototype = build_prototype(input, trace);
            for (const auto& w : trace.warnings) std::cerr << "warning: " << w << '\n';
            if (fs::path(out_path).extension() == ".json") {
                write_text(out_path, export_project(prototype).dump(2) + "\n");
            } else {
                write_text(out_path, prototype.svg);
            }
            if (!trace_path.empty()) write_text(trace_path, to_json(trace).dump(2) + "\n");
        } else if (serve->parsed()) {
            const auto env = load_environment(serve_opts);
            auto orchestrator = std::make_shared<Orchestrator>(env.backends, env.knowledge, env.icons, env.config);
            auto store = std::make_shared<service::ProjectStore>(data_dir);
            auto svc = std::make_shared<service::ProjectService>(store, orchestrator);
            service::HttpServer server(svc, static_dir.empty() ? std::nullopt : std::optional<fs::path>(static_dir));
            std::cerr << "listening on http://" << host << ':' << port << " (" << store->ids().size()
                      << " projects in " << data_dir << ")\n";
            if (!server.listen(host, port)) throw Error("cannot listen on " + host + ":" + std::to_string(port));
        } else if (exporter->parsed()) {
            auto store = std::make_shared<service::ProjectStore>(data_dir);
            const auto project = store->get(project_id);
            if (!project.trace) throw ConflictError("project '" + project_id + "' has not been generated yet");
            const auto prototype = build_prototype(project.input, *project.trace);
            write_text(out_path, format == "svg" ? prototype.svg : export_project(prototype).dump(2) + "\n");
        } else if (eval_fid->parsed()) {
            const auto real = eval::read_feature_file(real_path);
            const auto gen = eval::read_feature_file(gen_path);
            if (real.extractor_id != gen.extractor_id)
                std::cerr << "warning: extractor ids differ ('" << real.extractor_id << "' vs '" << gen.extractor_id
                          << "')\n";
            std::printf("%.10g\n", eval::fid(real, gen));
        } else if (eval_gd->parsed()) {
            std::printf("%.10g\n", eval::gd(eval::read_feature_file(features_path)));
        } else if (eval_features->parsed()) {
            const auto env = load_environment(feat_opts);
            eval::AblationSetup setup{env.backends, env.knowledge, env.icons, env.config};
            setup.raster_size = raster_size;
            const auto features = eval::prototype_features(eval::load_design_inputs(inputs_path), setup, env.config);
            eval::write_feature_file(out_path, features);
            std::cerr << "wrote " << features.size() << " vectors (" << features.extractor_id << ")\n";
        } else if (eval_ablate->parsed()) {
            const auto configs = eval::load_ablation_configs(configs_path);
            const auto inputs = eval::load_design_inputs(inputs_path);
            const auto env = load_environment(ablate_opts);
            eval::AblationSetup setup{env.backends, env.knowledge, env.icons, env.config};
            setup.raster_size = raster_size;
            setup.gd_metric = eval::parse_gd_metric(gd_metric);
            eval::FeatureSet reference;
            if (!reference_path.empty()) {
                reference = eval::read_feature_file(reference_path);
            } else {
                auto reference_config = env.config;
                reference_config.seed = reference_seed;
                reference_config.flags = {};
                reference = eval::prototype_features(inputs, setup, reference_config);
            }
            const auto report = eval::run_ablation(configs, inputs, setup, reference);
            std::cout << report.table();
            if (!report_path.empty()) write_text(report_path, report.to_json().dump(2) + "\n");
        }
    } catch (const ValidationError& e) {
        std::cerr << "error: " << dotted(e.what(), e.field()) << '\n';
        return 1;
    } catch (const GenerationError& e) {
        std::cerr << "error: generation failed at stage " << e.stage() << ": " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
