#include "protoflow/evalkit.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "protoflow/assembler.hpp"
#include "protoflow/error.hpp"
#include "protoflow/hash.hpp"
#include "protoflow/serde.hpp"
#include "protoflow/xml.hpp"

namespace protoflow::eval {

using nlohmann::json;

void validate_features(const FeatureSet& features) {
    if (features.dimension() < 1) throw ValidationError("feature vectors have zero dimension", "d");
    if (!features.vectors.allFinite()) throw ValidationError("feature set contains non-finite entries", "vectors");
}

GaussianStats fit_gaussian(const FeatureSet& features) {
    validate_features(features);
    const auto n = features.size();
    if (n < 2) throw ValidationError("fit_gaussian needs at least 2 feature vectors, got " + std::to_string(n), "vectors");
    GaussianStats stats;
    stats.mean = features.vectors.colwise().mean().transpose();
    const Eigen::MatrixXd centered = features.vectors.rowwise() - stats.mean.transpose();
    const Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(n - 1);
    stats.cov = (cov + cov.transpose()) / 2.0;
    return stats;
}

namespace {

// Symmetric PSD square root; small negative eigenvalues are treated as zero.
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m, const char* which) {
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
        throw ValidationError(std::string(which) + " covariance is not symmetric", which);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
    if (solver.info() != Eigen::Success) throw Error("eigendecomposition did not converge");
    if (solver.eigenvalues().minCoeff() < -1e-8 * scale)
        throw ValidationError(std::string(which) + " covariance is not positive semi-definite", which);
    const Eigen::VectorXd roots = solver.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return solver.eigenvectors() * roots.asDiagonal() * solver.eigenvectors().transpose();
}

}  // namespace

double fid(const GaussianStats& real, const GaussianStats& gen) {
    const auto d = real.mean.size();
    if (gen.mean.size() != d || real.cov.rows() != d || real.cov.cols() != d || gen.cov.rows() != d ||
        gen.cov.cols() != d)
        throw ValidationError("fid dimension mismatch: " + std::to_string(d) + " vs " + std::to_string(gen.mean.size()));
    psd_sqrt(gen.cov, "gen");
    const Eigen::MatrixXd sqrt_real = psd_sqrt(real.cov, "real");
    Eigen::MatrixXd inner = sqrt_real * gen.cov * sqrt_real;
    inner = (inner + inner.transpose()) / 2.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(inner, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw Error("eigendecomposition did not converge");
    const double trace_sqrt = solver.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
    const double value =
        (real.mean - gen.mean).squaredNorm() + real.cov.trace() + gen.cov.trace() - 2.0 * trace_sqrt;
    if (value < -1e-6 * std::max(1.0, real.cov.trace() + gen.cov.trace()))
        throw Error("fid came out negative (" + std::to_string(value) + "); covariances are ill-conditioned");
    return std::max(value, 0.0);
}

double fid(const FeatureSet& real, const FeatureSet& gen) {
    if (real.dimension() != gen.dimension())
        throw ValidationError("feature dimensions differ: " + std::to_string(real.dimension()) + " vs " +
                              std::to_string(gen.dimension()));
    return fid(fit_gaussian(real), fit_gaussian(gen));
}

double gd(const FeatureSet& features) {
    validate_features(features);
    const auto n = features.size();
    if (n < 2) throw ValidationError("gd needs at least 2 feature vectors, got " + std::to_string(n), "vectors");
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            if (i != j) total += (features.vectors.row(i) - features.vectors.row(j)).norm();
    return total / (static_cast<double>(n) * static_cast<double>(n - 1));
}

namespace {

// Overlap of source pixel [p, p+1) with output cell [c*n/cells, (c+1)*n/cells),
// both scaled by `cells` so the result is an integer.
std::uint64_t overlap(int p, int c, int n, int cells) {
    const std::int64_t lo = std::max<std::int64_t>(static_cast<std::int64_t>(p) * cells, static_cast<std::int64_t>(c) * n);
    const std::int64_t hi =
        std::min<std::int64_t>(static_cast<std::int64_t>(p + 1) * cells, static_cast<std::int64_t>(c + 1) * n);
    return hi > lo ? static_cast<std::uint64_t>(hi - lo) : 0;
}

// Cells touched by pixel p on an axis of length n split into `cells`.
std::pair<int, int> cell_span(int p, int n, int cells) {
    const int first = static_cast<int>(static_cast<std::int64_t>(p) * cells / n);
    const int last = static_cast<int>((static_cast<std::int64_t>(p + 1) * cells - 1) / n);
    return {first, std::min(last, cells - 1)};
}

std::uint64_t luma1000(Rgb c) { return 299ULL * c.r + 587ULL * c.g + 114ULL * c.b; }

}  // namespace

std::uint64_t perceptual_hash(const RasterImage& image) {
    const int w = image.width(), h = image.height();
    if (w < 8 || h < 8) throw ValidationError("perceptual_hash needs at least 8x8 pixels");
    std::array<std::uint64_t, 64> cells{};
    for (int y = 0; y < h; ++y) {
        const auto [r0, r1] = cell_span(y, h, 8);
        for (int x = 0; x < w; ++x) {
            const auto [c0, c1] = cell_span(x, w, 8);
            const auto luma = luma1000(image.at(x, y));
            for (int r = r0; r <= r1; ++r)
                for (int c = c0; c <= c1; ++c)
                    cells[static_cast<std::size_t>(r * 8 + c)] += luma * overlap(y, r, h, 8) * overlap(x, c, w, 8);
        }
    }
    // Every cell has the same area, so sums compare like means.
    std::uint64_t total = 0;
    for (auto s : cells) total += s;
    std::uint64_t hash = 0;
    for (std::size_t i = 0; i < 64; ++i)
        if (cells[i] * 64 > total) hash |= 1ULL << (63 - i);
    return hash;
}

int hamming_distance(std::uint64_t a, std::uint64_t b) { return std::popcount(a ^ b); }

double gd_hamming(std::span<const std::uint64_t> hashes) {
    const auto n = hashes.size();
    if (n < 2) throw ValidationError("gd needs at least 2 hashes, got " + std::to_string(n));
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j) total += hamming_distance(hashes[i], hashes[j]);
    return total / (static_cast<double>(n) * static_cast<double>(n - 1));
}

std::string_view to_string(GdMetric metric) {
    return metric == GdMetric::euclidean ? "euclidean" : "phash_hamming";
}

GdMetric parse_gd_metric(std::string_view name) {
    if (name == "euclidean") return GdMetric::euclidean;
    if (name == "phash_hamming" || name == "phash") return GdMetric::phash_hamming;
    throw ValidationError("unknown gd metric '" + std::string(name) + "'", "gd_metric");
}

ProjectionExtractor::ProjectionExtractor(int dimension, int grid, std::uint64_t seed) : grid_(grid), seed_(seed) {
    if (dimension < 1 || grid < 1) throw ValidationError("projection extractor needs positive dimension and grid");
    const int inputs = grid * grid;
    const double scale = std::sqrt(3.0 / inputs);
    projection_.resize(dimension, inputs);
    for (int r = 0; r < dimension; ++r)
        for (int c = 0; c < inputs; ++c) {
            const auto h = hash_values("projection", {seed, static_cast<std::uint64_t>(r), static_cast<std::uint64_t>(c)});
            const double unit = static_cast<double>(h >> 11) * 0x1.0p-53;
            projection_(r, c) = (2.0 * unit - 1.0) * scale;
        }
}

std::string ProjectionExtractor::id() const {
    return "projection-g" + std::to_string(grid_) + "-d" + std::to_string(dimension()) + "-s" + hex16(seed_);
}

Eigen::VectorXd ProjectionExtractor::gray_grid(const RasterImage& image) const {
    const int w = image.width(), h = image.height();
    if (w < 1 || h < 1) throw ValidationError("cannot extract features from an empty image");
    Eigen::VectorXd sums = Eigen::VectorXd::Zero(grid_ * grid_);
    for (int y = 0; y < h; ++y) {
        const auto [r0, r1] = cell_span(y, h, grid_);
        for (int x = 0; x < w; ++x) {
            const auto [c0, c1] = cell_span(x, w, grid_);
            const double luma = static_cast<double>(luma1000(image.at(x, y))) / (1000.0 * 255.0);
            for (int r = r0; r <= r1; ++r)
                for (int c = c0; c <= c1; ++c)
                    sums[r * grid_ + c] +=
                        luma * static_cast<double>(overlap(y, r, h, grid_) * overlap(x, c, w, grid_));
        }
    }
    return sums / (static_cast<double>(w) * static_cast<double>(h));
}

Eigen::VectorXd ProjectionExtractor::extract(const RasterImage& image) const { return projection_ * gray_grid(image); }

FeatureSet extract_features(std::span<const RasterImage> images, const FeatureExtractor& extractor) {
    FeatureSet set;
    set.extractor_id = extractor.id();
    set.vectors.resize(static_cast<Eigen::Index>(images.size()), extractor.dimension());
    for (std::size_t i = 0; i < images.size(); ++i)
        set.vectors.row(static_cast<Eigen::Index>(i)) = extractor.extract(images[i]).transpose();
    return set;
}

namespace {

struct Viewport {
    double sx = 1, sy = 1, ox = 0, oy = 0;

    BBox map(double x, double y, double w, double h) const {
        const int x0 = static_cast<int>(std::lround(ox + x * sx));
        const int y0 = static_cast<int>(std::lround(oy + y * sy));
        const int x1 = static_cast<int>(std::lround(ox + (x + w) * sx));
        const int y1 = static_cast<int>(std::lround(oy + (y + h) * sy));
        return {x0, y0, x1 - x0, y1 - y0};
    }
};

double number_attr(const XmlElement& e, std::string_view key, double fallback = 0.0) {
    const auto* v = e.attribute(key);
    if (!v) return fallback;
    try {
        return std::stod(*v);
    } catch (const std::exception&) {
        return fallback;
    }
}

std::optional<Rgb> fill_of(const XmlElement& e, std::optional<Rgb> inherited) {
    const auto* f = e.attribute("fill");
    if (!f) return inherited;
    if (*f == "none") return std::nullopt;
    std::string lowered = *f;
    std::transform(lowered.begin(), lowered.end(), lowered.begin(), [](unsigned char c) { return std::tolower(c); });
    if (is_hex_color(lowered)) return parse_hex(lowered);
    return inherited;
}

std::uint64_t element_hash(const XmlElement& e) {
    auto h = fnv1a64(e.name);
    for (const auto& [k, v] : e.attributes) h = hash_combine(hash_combine(h, fnv1a64(k)), fnv1a64(v));
    h = hash_combine(h, fnv1a64(e.text));
    for (const auto& child : e.children) h = hash_combine(h, element_hash(child));
    return h;
}

void draw_image(RasterImage& canvas, const BBox& dest, const RasterImage& src) {
    if (dest.w < 1 || dest.h < 1 || src.empty()) return;
    for (int y = std::max(0, dest.y); y < std::min(canvas.height(), dest.y + dest.h); ++y)
        for (int x = std::max(0, dest.x); x < std::min(canvas.width(), dest.x + dest.w); ++x) {
            const int sx = static_cast<int>((static_cast<std::int64_t>(x - dest.x) * src.width()) / dest.w);
            const int sy = static_cast<int>((static_cast<std::int64_t>(y - dest.y) * src.height()) / dest.h);
            canvas.set(x, y, src.at(sx, sy));
        }
}

void draw(RasterImage& canvas, const XmlElement& e, const Viewport& vp, std::optional<Rgb> fill) {
    fill = fill_of(e, fill);
    if (e.name == "rect") {
        if (fill)
            canvas.fill_rect(vp.map(number_attr(e, "x"), number_attr(e, "y"), number_attr(e, "width"),
                                    number_attr(e, "height")),
                             *fill);
    } else if (e.name == "image") {
        const auto* href = e.attribute("xlink:href");
        if (!href) href = e.attribute("href");
        const std::string prefix = "data:image/png;base64,";
        if (href && href->rfind(prefix, 0) == 0) {
            const auto img = image_from_png_base64(std::string_view(*href).substr(prefix.size()));
            draw_image(canvas,
                       vp.map(number_attr(e, "x"), number_attr(e, "y"), number_attr(e, "width"),
                              number_attr(e, "height")),
                       img);
        }
    } else if (e.name == "text") {
        if (!fill) return;
        const double size = number_attr(e, "font-size", 16.0);
        const double x = number_attr(e, "x"), y = number_attr(e, "y");
        double pen = x;
        for (unsigned char c : e.text) {
            if ((c & 0xC0) == 0x80) continue;
            if (!std::isspace(c)) canvas.fill_rect(vp.map(pen, y - 0.35 * size, 0.5 * size, 0.7 * size), *fill);
            pen += 0.6 * size;
        }
    } else if (e.name == "svg") {
        // Nested viewport: an icon. Drawn as a 4×4 glyph keyed by its markup.
        if (!fill) return;
        const auto box = vp.map(number_attr(e, "x"), number_attr(e, "y"), number_attr(e, "width"),
                                number_attr(e, "height"));
        const auto h = element_hash(e);
        for (int i = 0; i < 16; ++i) {
            if (!((h >> i) & 1ULL)) continue;
            const int r = i / 4, c = i % 4;
            const int x0 = box.x + box.w * c / 4, x1 = box.x + box.w * (c + 1) / 4;
            const int y0 = box.y + box.h * r / 4, y1 = box.y + box.h * (r + 1) / 4;
            canvas.fill_rect({x0, y0, x1 - x0, y1 - y0}, *fill);
        }
    } else {
        for (const auto& child : e.children) draw(canvas, child, vp, fill);
    }
}

}  // namespace

RasterImage rasterize_svg(const std::string& svg, int width, int height) {
    if (width < 1 || height < 1) throw ValidationError("raster size must be positive");
    const auto root = parse_xml(svg);
    if (root.name != "svg") throw ValidationError("root element is <" + root.name + ">, expected <svg>");
    double vb_w = number_attr(root, "width", width), vb_h = number_attr(root, "height", height);
    double vb_x = 0, vb_y = 0;
    if (const auto* vb = root.attribute("viewBox")) {
        std::istringstream in(*vb);
        double a, b, c, d;
        if (in >> a >> b >> c >> d && c > 0 && d > 0) vb_x = a, vb_y = b, vb_w = c, vb_h = d;
    }
    if (!(vb_w > 0 && vb_h > 0)) throw ValidationError("svg has no usable viewBox");
    Viewport vp;
    vp.sx = width / vb_w;
    vp.sy = height / vb_h;
    vp.ox = -vb_x * vp.sx;
    vp.oy = -vb_y * vp.sy;
    RasterImage canvas(width, height, Rgb{255, 255, 255});
    for (const auto& child : root.children) draw(canvas, child, vp, std::nullopt);
    return canvas;
}

void write_feature_file(const std::filesystem::path& path, const FeatureSet& features) {
    validate_features(features);
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << json{{"d", features.dimension()}, {"extractor_id", features.extractor_id}}.dump() << '\n';
    char buf[32];
    for (Eigen::Index i = 0; i < features.size(); ++i) {
        for (Eigen::Index j = 0; j < features.dimension(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", features.vectors(i, j));
            out << (j ? " " : "") << buf;
        }
        out << '\n';
    }
}

FeatureSet read_feature_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw NotFoundError("cannot open feature file " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw ValidationError(path.string() + ": missing header line");
    json header;
    try {
        header = json::parse(line);
    } catch (const json::exception& e) {
        throw ValidationError(path.string() + ": header is not JSON: " + e.what(), "header");
    }
    if (!header.contains("d") || !header["d"].is_number_integer() || header["d"].get<long>() < 1)
        throw ValidationError(path.string() + ": header lacks a positive integer d", "d");
    const auto d = header["d"].get<Eigen::Index>();
    FeatureSet set;
    set.extractor_id = header.value("extractor_id", std::string{});
    std::vector<double> values;
    Eigen::Index rows = 0;
    for (int line_no = 2; std::getline(in, line); ++line_no) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::vector<double> row;
        if (line.find('[') != std::string::npos) {
            try {
                row = json::parse(line).get<std::vector<double>>();
            } catch (const json::exception& e) {
                throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
            }
        } else {
            std::istringstream fields(line);
            std::string token;
            while (fields >> token) {
                try {
                    std::size_t used = 0;
                    row.push_back(std::stod(token, &used));
                    if (used != token.size()) throw std::invalid_argument(token);
                } catch (const std::exception&) {
                    throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": bad number '" + token + "'");
                }
            }
        }
        if (static_cast<Eigen::Index>(row.size()) != d)
            throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": expected " + std::to_string(d) +
                                  " values, got " + std::to_string(row.size()));
        values.insert(values.end(), row.begin(), row.end());
        ++rows;
    }
    set.vectors = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(values.data(), rows, d);
    validate_features(set);
    return set;
}

std::vector<AblationConfig> standard_ablation_configs() {
    auto single = [](std::string name, bool PipelineFlags::*flag) {
        AblationConfig c{std::move(name), {}};
        c.flags.*flag = true;
        return c;
    };
    return {
        {"full", {}},
        single("-retrieved knowledge", &PipelineFlags::no_retrieval),
        single("-theme description", &PipelineFlags::no_theme_description),
        single("-theme image", &PipelineFlags::no_theme_image),
        single("-text module", &PipelineFlags::no_text_module),
        single("-image module", &PipelineFlags::no_image_module),
        single("-icon module", &PipelineFlags::no_icon_module),
    };
}

std::vector<AblationConfig> load_ablation_configs(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw NotFoundError("cannot open ablation config " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
    const json& list = doc.is_array() ? doc : doc.value("configs", json::array());
    if (!list.is_array() || list.empty()) throw ValidationError(path.string() + ": no configs", "configs");
    std::vector<AblationConfig> configs;
    for (std::size_t i = 0; i < list.size(); ++i) {
        const auto& entry = list[i];
        const auto field = "configs[" + std::to_string(i) + "]";
        if (!entry.is_object()) throw ValidationError(field + " is not an object", field);
        std::vector<std::string> names;
        try {
            names = entry.value("flags", std::vector<std::string>{});
        } catch (const json::exception&) {
            throw ValidationError(field + ".flags must be a list of strings", field + ".flags");
        }
        AblationConfig c;
        c.flags = parse_flags(names);
        c.name = entry.value("name", names.empty() ? std::string("full") : "-" + names.front());
        configs.push_back(std::move(c));
    }
    return configs;
}

namespace {

void append_inputs(const json& doc, const std::string& source, std::vector<DesignInput>& out) {
    if (doc.is_array()) {
        for (const auto& item : doc) append_inputs(item, source, out);
        return;
    }
    try {
        out.push_back(design_input_from_json(doc));
    } catch (const ValidationError& e) {
        throw ValidationError(source + ": " + e.what(), e.field());
    }
}

}  // namespace

std::vector<DesignInput> load_design_inputs(const std::filesystem::path& path) {
    std::vector<std::filesystem::path> files;
    if (std::filesystem::is_directory(path)) {
        for (const auto& entry : std::filesystem::directory_iterator(path))
            if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
        std::sort(files.begin(), files.end());
    } else if (std::filesystem::exists(path)) {
        files.push_back(path);
    } else {
        throw NotFoundError("no such input path " + path.string());
    }
    std::vector<DesignInput> inputs;
    for (const auto& file : files) {
        std::ifstream in(file);
        json doc;
        try {
            doc = json::parse(in);
        } catch (const json::exception& e) {
            throw ValidationError(file.string() + ": " + e.what());
        }
        append_inputs(doc, file.string(), inputs);
    }
    return inputs;
}

FeatureSet prototype_features(const std::vector<DesignInput>& inputs, const AblationSetup& setup,
                              const PipelineConfig& config, std::vector<std::string>* svgs,
                              std::map<std::string, int>* payload_kinds, std::vector<RasterImage>* rasters) {
    const Orchestrator orchestrator(setup.backends, setup.knowledge, setup.icons, config);
    std::vector<RasterImage> images;
    for (const auto& input : inputs) {
        const auto trace = orchestrator.generate_prototype(input);
        const auto prototype = build_prototype(input, trace);
        if (payload_kinds)
            for (const auto& c : trace.results) ++(*payload_kinds)[std::string(to_string(c.kind))];
        images.push_back(rasterize_svg(prototype.svg, setup.raster_size, setup.raster_size));
        if (svgs) svgs->push_back(prototype.svg);
    }
    auto features = extract_features(images, *setup.extractor);
    if (rasters) *rasters = std::move(images);
    return features;
}

AblationReport run_ablation(const std::vector<AblationConfig>& configs, const std::vector<DesignInput>& inputs,
                            const AblationSetup& setup, const FeatureSet& reference) {
    if (configs.empty()) throw ValidationError("no ablation configs", "configs");
    if (inputs.size() < 2) throw ValidationError("ablation needs at least 2 inputs", "inputs");
    if (!setup.extractor) throw ValidationError("ablation needs a feature extractor", "extractor");
    if (reference.dimension() != setup.extractor->dimension())
        throw ValidationError("reference features have d=" + std::to_string(reference.dimension()) +
                              ", extractor produces d=" + std::to_string(setup.extractor->dimension()), "reference");
    const auto reference_stats = fit_gaussian(reference);

    std::vector<std::future<AblationRow>> jobs;
    for (const auto& config : configs) {
        jobs.push_back(std::async(std::launch::async, [&, config] {
            PipelineConfig pipeline = setup.base;
            pipeline.flags = config.flags;
            AblationRow row;
            row.name = config.name;
            row.flags = flag_names(config.flags);
            std::vector<RasterImage> rasters;
            const auto features = prototype_features(inputs, setup, pipeline, nullptr, &row.payload_kinds, &rasters);
            row.prototypes = static_cast<int>(features.size());
            row.fid = fid(reference_stats, fit_gaussian(features));
            if (setup.gd_metric == GdMetric::euclidean) {
                row.gd = gd(features);
            } else {
                std::vector<std::uint64_t> hashes;
                for (const auto& r : rasters) hashes.push_back(perceptual_hash(r));
                row.gd = gd_hamming(hashes);
            }
            return row;
        }));
    }
    AblationReport report;
    report.extractor_id = setup.extractor->id();
    report.gd_metric = setup.gd_metric;
    report.reference_size = static_cast<int>(reference.size());
    for (auto& job : jobs) report.rows.push_back(job.get());
    return report;
}

std::string AblationReport::table() const {
    std::ostringstream out;
    char line[256];
    std::snprintf(line, sizeof line, "%-24s %12s %12s %6s %6s %6s %10s\n", "config", "FID", "GD", "text", "image",
                  "icon", "color_fill");
    out << line;
    for (const auto& row : rows) {
        auto count = [&](const char* k) {
            const auto it = row.payload_kinds.find(k);
            return it == row.payload_kinds.end() ? 0 : it->second;
        };
        std::snprintf(line, sizeof line, "%-24s %12.4f %12.4f %6d %6d %6d %10d\n", row.name.c_str(), row.fid, row.gd,
                      count("text"), count("image"), count("icon"), count("color_fill"));
        out << line;
    }
    out << "extractor: " << extractor_id << ", gd metric: " << to_string(gd_metric)
        << ", reference size: " << reference_size << '\n';
    return out.str();
}

json AblationReport::to_json() const {
    json out = {{"extractor_id", extractor_id},
                {"gd_metric", std::string(to_string(gd_metric))},
                {"reference_size", reference_size},
                {"rows", json::array()}};
    for (const auto& row : rows)
        out["rows"].push_back({{"name", row.name},
                               {"flags", row.flags},
                               {"fid", row.fid},
                               {"gd", row.gd},
                               {"prototypes", row.prototypes},
                               {"payload_kinds", row.payload_kinds}});
    return out;
}

}  // namespace protoflow::eval
