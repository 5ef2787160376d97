#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "protoflow/image.hpp"
#include "protoflow/orchestrator.hpp"

namespace protoflow::eval {

/// N×d feature matrix, one row per image.
struct FeatureSet {
    Eigen::MatrixXd vectors;
    std::string extractor_id;

    Eigen::Index size() const noexcept { return vectors.rows(); }
    Eigen::Index dimension() const noexcept { return vectors.cols(); }
};

/// Throws ValidationError on non-finite entries or an empty dimension.
void validate_features(const FeatureSet& features);

struct GaussianStats {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
};

GaussianStats fit_gaussian(const FeatureSet& features);

/// Fréchet distance between two Gaussians, clamped at zero. Covariances must
/// be symmetric and positive semi-definite up to rounding.
double fid(const GaussianStats& real, const GaussianStats& gen);
double fid(const FeatureSet& real, const FeatureSet& gen);

/// Mean Euclidean distance over ordered pairs of distinct rows.
double gd(const FeatureSet& features);

/// Average hash: 8×8 area-averaged luma; cell i = row*8+col sets bit 63-i
/// when it exceeds the mean, so the top-left cell is the most significant.
std::uint64_t perceptual_hash(const RasterImage& image);
int hamming_distance(std::uint64_t a, std::uint64_t b);
/// Mean pairwise Hamming distance between hashes.
double gd_hamming(std::span<const std::uint64_t> hashes);

enum class GdMetric { euclidean, phash_hamming };
std::string_view to_string(GdMetric metric);
GdMetric parse_gd_metric(std::string_view name);

class FeatureExtractor {
public:
    virtual ~FeatureExtractor() = default;
    virtual std::string id() const = 0;
    virtual int dimension() const = 0;
    virtual Eigen::VectorXd extract(const RasterImage& image) const = 0;
};

/// Downsamples to a grid×grid gray image and applies a fixed random
/// projection.
class ProjectionExtractor final : public FeatureExtractor {
public:
    explicit ProjectionExtractor(int dimension = 64, int grid = 16, std::uint64_t seed = 0x5eed0f1d);

    std::string id() const override;
    int dimension() const override { return static_cast<int>(projection_.rows()); }
    Eigen::VectorXd extract(const RasterImage& image) const override;

    /// Box-averaged luma in [0,1], row-major.
    Eigen::VectorXd gray_grid(const RasterImage& image) const;

private:
    int grid_;
    std::uint64_t seed_;
    Eigen::MatrixXd projection_;
};

FeatureSet extract_features(std::span<const RasterImage> images, const FeatureExtractor& extractor);

/// Rasterizes the SVG dialect produced by the assembler (rects, embedded PNG
/// images, text runs drawn as glyph blocks, nested icon viewports drawn as a
/// hashed glyph) into a width×height image.
RasterImage rasterize_svg(const std::string& svg, int width = 512, int height = 512);

/// Header line {"d","extractor_id"} then one whitespace-separated vector per line.
void write_feature_file(const std::filesystem::path& path, const FeatureSet& features);
FeatureSet read_feature_file(const std::filesystem::path& path);

struct AblationConfig {
    std::string name;
    PipelineFlags flags;
};

/// The full pipeline followed by the six single-stage ablations.
std::vector<AblationConfig> standard_ablation_configs();
/// {"configs":[{"name","flags":[...]}]}; unknown flags are rejected.
std::vector<AblationConfig> load_ablation_configs(const std::filesystem::path& path);

/// A JSON file holding one DesignInput, an array of them, or a directory of such files.
std::vector<DesignInput> load_design_inputs(const std::filesystem::path& path);

struct AblationSetup {
    Backends backends;
    std::shared_ptr<const KnowledgeIndex> knowledge;
    std::shared_ptr<const IconIndex> icons;
    PipelineConfig base;
    std::shared_ptr<const FeatureExtractor> extractor = std::make_shared<ProjectionExtractor>();
    GdMetric gd_metric = GdMetric::euclidean;
    int raster_size = 512;
};

struct AblationRow {
    std::string name;
    std::vector<std::string> flags;
    double fid = 0.0;
    double gd = 0.0;
    int prototypes = 0;
    /// Payload-kind histogram over all generated components.
    std::map<std::string, int> payload_kinds;
};

struct AblationReport {
    std::string extractor_id;
    GdMetric gd_metric = GdMetric::euclidean;
    int reference_size = 0;
    std::vector<AblationRow> rows;

    std::string table() const;
    nlohmann::json to_json() const;
};

/// Generates every input under `config`, rasterizes the SVGs and extracts features.
FeatureSet prototype_features(const std::vector<DesignInput>& inputs, const AblationSetup& setup,
                              const PipelineConfig& config, std::vector<std::string>* svgs = nullptr,
                              std::map<std::string, int>* payload_kinds = nullptr,
                              std::vector<RasterImage>* rasters = nullptr);

/// Runs each configuration concurrently; rows keep the order of `configs`.
AblationReport run_ablation(const std::vector<AblationConfig>& configs, const std::vector<DesignInput>& inputs,
                            const AblationSetup& setup, const FeatureSet& reference);

}  // namespace protoflow::eval
