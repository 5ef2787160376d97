#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "json.hpp"
#include "protoflow/assembler.hpp"
#include "protoflow/evalkit.hpp"
#include "protoflow/kb.hpp"
#include "protoflow/orchestrator.hpp"
#include "protoflow/serde.hpp"

namespace py = pybind11;
using namespace protoflow;
using nlohmann::json;

namespace {

// Documents cross the boundary as JSON text; the Python side wraps them
// with json.loads / json.dumps.
json from_py(const py::object& obj) {
    return json::parse(py::module_::import("json").attr("dumps")(obj).cast<std::string>());
}

py::object to_py(const json& doc) { return py::module_::import("json").attr("loads")(doc.dump()); }

RasterImage image_from_array(const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 3 || a.shape(2) != 3) throw ValidationError("expected an HxWx3 uint8 array");
    const auto h = static_cast<int>(a.shape(0)), w = static_cast<int>(a.shape(1));
    return RasterImage(w, h, std::vector<std::uint8_t>(a.data(), a.data() + a.size()));
}

py::array_t<std::uint8_t> image_to_array(const RasterImage& img) {
    py::array_t<std::uint8_t> out({img.height(), img.width(), 3});
    std::copy(img.pixels().begin(), img.pixels().end(), out.mutable_data());
    return out;
}

eval::FeatureSet features_from(const Eigen::MatrixXd& m) { return {m, "python"}; }

class Pipeline {
public:
    Pipeline(const std::string& kb, const std::string& icons, std::uint64_t seed, int k, int image_size,
             const std::vector<std::string>& flags) {
        backends_ = Backends::from_env();
        PipelineConfig config;
        config.seed = seed;
        config.k = k;
        config.image_size = image_size;
        config.flags = parse_flags(flags);
        auto knowledge = std::make_shared<KnowledgeIndex>(load_knowledge_base(kb), *backends_.embedder);
        auto icon_index = std::make_shared<IconIndex>(load_icon_base(icons), *backends_.embedder);
        orchestrator_ = std::make_unique<Orchestrator>(backends_, knowledge, icon_index, config);
    }

    py::dict generate(const py::object& input) {
        const auto design = design_input_from_json(from_py(input));
        GenerationTrace trace;
        {
            py::gil_scoped_release release;
            trace = orchestrator_->generate_prototype(design);
        }
        return result(design, trace);
    }

    py::dict regenerate_component(const py::object& trace, const py::object& input, std::size_t index,
                                  const std::optional<std::string>& hint) {
        const auto design = design_input_from_json(from_py(input));
        const auto next = orchestrator_->regenerate_component(generation_trace_from_json(from_py(trace)), design, index, hint);
        return result(design, next);
    }

    py::dict regenerate_all(const py::object& trace, const py::object& input, const py::object& theme) {
        const auto design = design_input_from_json(from_py(input));
        const auto next = orchestrator_->regenerate_all(generation_trace_from_json(from_py(trace)), design,
                                                        theme_description_from_json(from_py(theme)));
        return result(design, next);
    }

private:
    static py::dict result(const DesignInput& design, const GenerationTrace& trace) {
        const auto prototype = build_prototype(design, trace);
        py::dict out;
        out["trace"] = to_py(to_json(trace));
        out["svg"] = prototype.svg;
        out["export"] = to_py(export_project(prototype));
        return out;
    }

    Backends backends_;
    std::unique_ptr<Orchestrator> orchestrator_;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "protoflow core bindings";

    // Translators run newest first, so the base class goes in first.
    py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<NotFoundError>(m, "NotFoundError", PyExc_KeyError);
    py::register_exception<GenerationError>(m, "GenerationError", PyExc_RuntimeError);

    m.def("load_knowledge_base", [](const std::string& path) {
        py::list out;
        for (const auto& r : load_knowledge_base(path)) out.append(to_py(knowledge_record_to_json(r)));
        return out;
    }, py::arg("path"));
    m.def("load_icon_base", [](const std::string& path) {
        py::list out;
        for (const auto& icon : load_icon_base(path))
            out.append(py::dict(py::arg("id") = icon.id, py::arg("phrase") = icon.phrase, py::arg("svg") = icon.svg_source));
        return out;
    }, py::arg("path"));
    m.def("knowledge_record_to_text", [](const py::object& record) {
        return knowledge_record_to_text(parse_knowledge_record(from_py(record), 0));
    }, py::arg("record"));
    m.def("component_types", [] {
        std::vector<std::string> out;
        for (auto t : kAllComponentTypes) out.emplace_back(to_string(t));
        return out;
    });

    m.def("cosine_similarity", [](const std::vector<double>& a, const std::vector<double>& b) {
        return cosine_similarity(std::span<const double>(a), std::span<const double>(b));
    }, py::arg("a"), py::arg("b"));
    m.def("mock_embed", [](const std::string& text) { return MockEmbedder{}.embed_text(text).values; }, py::arg("text"));

    py::class_<Pipeline>(m, "Pipeline")
        .def(py::init<const std::string&, const std::string&, std::uint64_t, int, int, const std::vector<std::string>&>(),
             py::arg("kb"), py::arg("icons"), py::arg("seed") = 0, py::arg("k") = 2, py::arg("image_size") = 512,
             py::arg("flags") = std::vector<std::string>{})
        .def("generate", &Pipeline::generate, py::arg("input"))
        .def("regenerate_component", &Pipeline::regenerate_component, py::arg("trace"), py::arg("input"),
             py::arg("index"), py::arg("hint") = py::none())
        .def("regenerate_all", &Pipeline::regenerate_all, py::arg("trace"), py::arg("input"), py::arg("theme"));

    m.def("import_project", [](const py::object& doc) {
        const auto p = import_project(from_py(doc));
        return to_py(export_project(p));
    }, py::arg("document"));

    m.def("dominant_color", [](const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& a) {
        return dominant_color(image_from_array(a));
    }, py::arg("image"));
    m.def("perceptual_hash", [](const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& a) {
        return eval::perceptual_hash(image_from_array(a));
    }, py::arg("image"));
    m.def("rasterize_svg", [](const std::string& svg, int width, int height) {
        return image_to_array(eval::rasterize_svg(svg, width, height));
    }, py::arg("svg"), py::arg("width") = 512, py::arg("height") = 512);

    m.def("fit_gaussian", [](const Eigen::MatrixXd& features) {
        const auto stats = eval::fit_gaussian(features_from(features));
        return py::make_tuple(stats.mean, stats.cov);
    }, py::arg("features"));
    m.def("fid", [](const Eigen::MatrixXd& real, const Eigen::MatrixXd& gen) {
        return eval::fid(features_from(real), features_from(gen));
    }, py::arg("real"), py::arg("gen"));
    m.def("fid_from_stats", [](const Eigen::VectorXd& mu_r, const Eigen::MatrixXd& cov_r, const Eigen::VectorXd& mu_g,
                               const Eigen::MatrixXd& cov_g) {
        return eval::fid(eval::GaussianStats{mu_r, cov_r}, eval::GaussianStats{mu_g, cov_g});
    }, py::arg("mean_real"), py::arg("cov_real"), py::arg("mean_gen"), py::arg("cov_gen"));
    m.def("gd", [](const Eigen::MatrixXd& features) { return eval::gd(features_from(features)); }, py::arg("features"));
}
