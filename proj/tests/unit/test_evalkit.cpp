#include "doctest.h"

#include <Eigen/Eigenvalues>
#include <fstream>
#include <random>

#include "protoflow/assembler.hpp"
#include "protoflow/evalkit.hpp"
#include "support.hpp"

using namespace protoflow;
using namespace protoflow::eval;

namespace {

FeatureSet rows(std::initializer_list<std::initializer_list<double>> values) {
    const auto n = static_cast<Eigen::Index>(values.size());
    const auto d = static_cast<Eigen::Index>(values.begin()->size());
    Eigen::MatrixXd m(n, d);
    Eigen::Index i = 0;
    for (const auto& row : values) {
        Eigen::Index j = 0;
        for (double v : row) m(i, j++) = v;
        ++i;
    }
    return {m, "test"};
}

Eigen::MatrixXd random_spd(std::mt19937_64& rng, int d) {
    std::normal_distribution<double> n;
    Eigen::MatrixXd a(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) a(i, j) = n(rng);
    return a * a.transpose() + 0.1 * Eigen::MatrixXd::Identity(d, d);
}

Eigen::VectorXd random_vector(std::mt19937_64& rng, int d) {
    std::normal_distribution<double> n;
    Eigen::VectorXd v(d);
    for (int i = 0; i < d; ++i) v(i) = n(rng);
    return v;
}

// tr(sqrt(A B)) from the eigenvalues of the (non-symmetric) product.
double fid_oracle(const GaussianStats& r, const GaussianStats& g) {
    Eigen::EigenSolver<Eigen::MatrixXd> solver(r.cov * g.cov);
    double tr_sqrt = 0.0;
    for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i)
        tr_sqrt += std::sqrt(std::complex<double>(solver.eigenvalues()(i))).real();
    return (r.mean - g.mean).squaredNorm() + r.cov.trace() + g.cov.trace() - 2.0 * tr_sqrt;
}

// Two-pass sample covariance.
Eigen::MatrixXd two_pass_cov(const Eigen::MatrixXd& x) {
    const Eigen::VectorXd mean = x.colwise().mean();
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(x.cols(), x.cols());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const Eigen::VectorXd c = x.row(i).transpose() - mean;
        cov += c * c.transpose();
    }
    return cov / static_cast<double>(x.rows() - 1);
}

}  // namespace

TEST_SUITE("evalkit") {
    TEST_CASE("gaussian fit matches the worked example") {
        const auto s = fit_gaussian(rows({{0, 0}, {2, 0}}));
        CHECK(s.mean(0) == 1.0);
        CHECK(s.mean(1) == 0.0);
        CHECK(s.cov(0, 0) == doctest::Approx(2.0));
        CHECK(s.cov(0, 1) == 0.0);
        CHECK(s.cov(1, 1) == 0.0);
        CHECK_THROWS_AS(fit_gaussian(rows({{1, 2}})), ValidationError);
    }

    TEST_CASE("gaussian fit agrees with a two-pass covariance") {
        std::mt19937_64 rng(1);
        for (int trial = 0; trial < 10; ++trial) {
            Eigen::MatrixXd x(20, 5);
            for (Eigen::Index i = 0; i < x.rows(); ++i) x.row(i) = random_vector(rng, 5).transpose() * 3.0;
            const auto s = fit_gaussian({x, "t"});
            CHECK((s.cov - two_pass_cov(x)).cwiseAbs().maxCoeff() < 1e-12);
            CHECK(s.cov.isApprox(s.cov.transpose()));
        }
    }

    TEST_CASE("fid of identical statistics is zero") {
        std::mt19937_64 rng(2);
        for (int trial = 0; trial < 20; ++trial) {
            const GaussianStats s{random_vector(rng, 6), random_spd(rng, 6)};
            CHECK(fid(s, s) <= 1e-8);
            CHECK(fid(s, s) >= 0.0);
        }
    }

    TEST_CASE("fid with equal covariances is the squared mean distance") {
        std::mt19937_64 rng(3);
        const auto cov = random_spd(rng, 4);
        const GaussianStats a{random_vector(rng, 4), cov}, b{random_vector(rng, 4), cov};
        CHECK(fid(a, b) == doctest::Approx((a.mean - b.mean).squaredNorm()).epsilon(1e-9));
    }

    TEST_CASE("fid has the closed form for diagonal covariances") {
        Eigen::VectorXd s1(3), s2(3);
        s1 << 1.0, 4.0, 9.0;
        s2 << 4.0, 1.0, 0.25;
        const GaussianStats a{Eigen::VectorXd::Zero(3), s1.asDiagonal()}, b{Eigen::VectorXd::Ones(3), s2.asDiagonal()};
        double expected = 3.0;
        for (int i = 0; i < 3; ++i) expected += std::pow(std::sqrt(s1(i)) - std::sqrt(s2(i)), 2);
        CHECK(fid(a, b) == doctest::Approx(expected).epsilon(1e-12));
    }

    TEST_CASE("fid is symmetric and matches the eigenvalue oracle") {
        std::mt19937_64 rng(4);
        for (int trial = 0; trial < 10; ++trial) {
            const GaussianStats a{random_vector(rng, 8), random_spd(rng, 8)}, b{random_vector(rng, 8), random_spd(rng, 8)};
            const double v = fid(a, b);
            CHECK(v == doctest::Approx(fid(b, a)).epsilon(1e-9));
            CHECK(std::abs(v - fid_oracle(a, b)) <= 1e-6 * std::max(1.0, std::abs(v)));
        }
    }

    TEST_CASE("fid handles singular covariances and rejects mismatched dimensions") {
        const auto a = fit_gaussian(rows({{0, 0}, {2, 0}}));
        const auto b = fit_gaussian(rows({{0, 1}, {0, 3}}));
        CHECK(fid(a, b) == doctest::Approx(1 + 4 + 2 + 2).epsilon(1e-9));
        CHECK_THROWS_AS(fid(rows({{1, 2}, {3, 4}}), rows({{1, 2, 3}, {4, 5, 6}})), ValidationError);
        Eigen::MatrixXd indefinite(2, 2);
        indefinite << 1, 0, 0, -1;
        CHECK_THROWS_AS(fid(GaussianStats{Eigen::VectorXd::Zero(2), indefinite}, a), ValidationError);
        Eigen::MatrixXd skew(2, 2);
        skew << 1, 0.5, 0, 1;
        CHECK_THROWS_AS(fid(a, GaussianStats{Eigen::VectorXd::Zero(2), skew}), ValidationError);
    }

    TEST_CASE("gd averages pairwise distances") {
        CHECK(gd(rows({{0, 0}, {3, 0}})) == doctest::Approx(3.0));
        CHECK(gd(rows({{0, 0}, {3, 0}, {0, 4}})) == doctest::Approx(4.0));
        CHECK(gd(rows({{1, 1}, {1, 1}})) == 0.0);
        CHECK_THROWS_AS(gd(rows({{1, 1}})), ValidationError);
    }

    TEST_CASE("perceptual hash bit layout") {
        CHECK(perceptual_hash(RasterImage(16, 16, Rgb{90, 90, 90})) == 0);
        RasterImage half(16, 16, Rgb{0, 0, 0});
        half.fill_rect({8, 0, 8, 16}, Rgb{255, 255, 255});
        CHECK(perceptual_hash(half) == 0x0F0F0F0F0F0F0F0FULL);
        RasterImage top(8, 8, Rgb{0, 0, 0});
        top.set(0, 0, Rgb{255, 255, 255});
        CHECK(perceptual_hash(top) == 0x8000000000000000ULL);
        CHECK_THROWS_AS(perceptual_hash(RasterImage(7, 8)), ValidationError);
    }

    TEST_CASE("perceptual hash is invariant under integer upscaling") {
        std::mt19937_64 rng(6);
        for (int trial = 0; trial < 20; ++trial) {
            RasterImage small(16, 24);
            for (int y = 0; y < 24; ++y)
                for (int x = 0; x < 16; ++x)
                    small.set(x, y, Rgb{static_cast<std::uint8_t>(rng()), static_cast<std::uint8_t>(rng()),
                                        static_cast<std::uint8_t>(rng())});
            RasterImage big(32, 48);
            for (int y = 0; y < 48; ++y)
                for (int x = 0; x < 32; ++x) big.set(x, y, small.at(x / 2, y / 2));
            CHECK(perceptual_hash(small) == perceptual_hash(big));
        }
    }

    TEST_CASE("hamming helpers") {
        CHECK(hamming_distance(0, 0xFF) == 8);
        const std::vector<std::uint64_t> hashes{0, 0xF, 0xFF};
        CHECK(gd_hamming(hashes) == doctest::Approx((4 + 8 + 4) / 3.0));
        CHECK(parse_gd_metric("phash_hamming") == GdMetric::phash_hamming);
        CHECK(to_string(GdMetric::euclidean) == "euclidean");
        CHECK_THROWS_AS(parse_gd_metric("cosine"), ValidationError);
    }

    TEST_CASE("the projection extractor is deterministic") {
        ProjectionExtractor ex;
        CHECK(ex.dimension() == 64);
        CHECK(ex.id() == ProjectionExtractor().id());
        CHECK(ex.id() != ProjectionExtractor(64, 16, 1).id());
        const RasterImage img(40, 30, Rgb{255, 255, 255});
        const auto grid = ex.gray_grid(img);
        CHECK(grid.size() == 256);
        CHECK(grid.minCoeff() == doctest::Approx(1.0));
        CHECK(ex.extract(img) == ex.extract(img));
        const std::vector<RasterImage> images{img, RasterImage(40, 30)};
        const auto fs = extract_features(images, ex);
        CHECK(fs.size() == 2);
        CHECK(fs.dimension() == 64);
        CHECK(fs.extractor_id == ex.id());
    }

    TEST_CASE("feature files round trip exactly") {
        const auto dir = testing_support::temp_dir("features");
        std::mt19937_64 rng(7);
        Eigen::MatrixXd m(5, 3);
        for (Eigen::Index i = 0; i < 5; ++i) m.row(i) = random_vector(rng, 3).transpose() / 3.0;
        write_feature_file(dir / "f.txt", {m, "proj"});
        const auto back = read_feature_file(dir / "f.txt");
        CHECK(back.vectors == m);
        CHECK(back.extractor_id == "proj");

        std::ofstream(dir / "json.txt") << "{\"d\": 2}\n[1, 2]\n\n[3.5, 4]\n";
        const auto j = read_feature_file(dir / "json.txt");
        CHECK(j.size() == 2);
        CHECK(j.vectors(1, 0) == 3.5);

        std::ofstream(dir / "bad.txt") << "{\"d\": 2}\n1 2 3\n";
        CHECK_THROWS_AS(read_feature_file(dir / "bad.txt"), ValidationError);
        std::ofstream(dir / "nan.txt") << "{\"d\": 1}\n1\nx\n";
        CHECK_THROWS_AS(read_feature_file(dir / "nan.txt"), ValidationError);
        CHECK_THROWS_AS(read_feature_file(dir / "missing.txt"), NotFoundError);
    }

    TEST_CASE("the rasterizer draws rects, images, text and icons") {
        const std::string svg =
            "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 100 100\">"
            "<rect x=\"0\" y=\"0\" width=\"100\" height=\"100\" fill=\"#ff0000\"/>"
            "<g><rect x=\"50\" y=\"50\" width=\"50\" height=\"50\" fill=\"#0000ff\"/></g></svg>";
        const auto img = rasterize_svg(svg, 10, 10);
        CHECK(img.at(0, 0) == Rgb{255, 0, 0});
        CHECK(img.at(9, 9) == Rgb{0, 0, 255});
        CHECK_THROWS_AS(rasterize_svg("<div/>", 10, 10), ValidationError);

        testing_support::Fixture fx;
        const DesignInput input{"p", {{360, 640}, {{ComponentType::Image, {0, 0, 360, 320}},
                                                   {ComponentType::Text, {0, 400, 360, 60}},
                                                   {ComponentType::Icon, {100, 500, 48, 48}}}}};
        const auto proto = build_prototype(input, fx.orchestrator().generate_prototype(input));
        const auto raster = rasterize_svg(proto.svg, 90, 160);
        CHECK(raster.width() == 90);
        CHECK(raster.height() == 160);
        const auto& photo = std::get<ImagePayload>(proto.contents[0].payload).image;
        CHECK(raster.at(0, 0) == photo.at(0, 0));
        CHECK(to_hex(raster.at(89, 159)) == proto.theme.theme_color);
        CHECK(rasterize_svg(proto.svg, 90, 160) == raster);
    }

    TEST_CASE("ablation configs and inputs load") {
        const auto configs = load_ablation_configs(testing_support::data_dir() / "ablation.json");
        CHECK(configs.size() == 7);
        CHECK(configs[0].flags == PipelineFlags{});
        CHECK(standard_ablation_configs().size() == 7);
        const auto dir = testing_support::temp_dir("ablation-configs");
        std::ofstream(dir / "bad.json") << R"({"configs":[{"name":"x","flags":["no_magic"]}]})";
        CHECK_THROWS_AS(load_ablation_configs(dir / "bad.json"), ValidationError);
        CHECK(load_design_inputs(testing_support::data_dir() / "samples").size() == 12);
    }

    TEST_CASE("a small ablation run produces one finite row per config") {
        testing_support::Fixture fx;
        AblationSetup setup{fx.backends, fx.knowledge, fx.icons, testing_support::small_config()};
        setup.raster_size = 64;
        std::mt19937_64 rng(12);
        std::vector<DesignInput> inputs;
        for (int i = 0; i < 4; ++i) inputs.push_back(testing_support::random_input(rng, 2, 6));
        const auto reference = prototype_features(inputs, setup, setup.base);
        const auto report = run_ablation(standard_ablation_configs(), inputs, setup, reference);
        REQUIRE(report.rows.size() == 7);
        CHECK(report.rows[0].name == "full");
        CHECK(report.rows[0].fid <= 1e-6);
        for (const auto& row : report.rows) {
            CHECK(std::isfinite(row.fid));
            CHECK(std::isfinite(row.gd));
            CHECK(row.prototypes == 4);
        }
        for (const auto& row : report.rows) {
            if (row.name == "-text module") CHECK_FALSE(row.payload_kinds.count("text"));
            if (row.name == "-image module") CHECK_FALSE(row.payload_kinds.count("image"));
            if (row.name == "-icon module") CHECK_FALSE(row.payload_kinds.count("icon"));
        }
        CHECK(report.table().find("-theme image") != std::string::npos);
        CHECK(report.to_json()["rows"].size() == 7);
    }
}
