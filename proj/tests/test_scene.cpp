#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "doctest.h"
#include "sgs/scene.hpp"

using namespace sgs;

namespace {

Vec4 random_unit_quat(std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    Vec4 q{g(rng), g(rng), g(rng), g(rng)};
    return quat_normalize(q);
}

SpectralScene random_scene(size_t n, uint64_t seed, int n_spectral = 2) {
    std::vector<std::pair<double, double>> bands;
    for (int i = 0; i < n_spectral; ++i) bands.push_back({460.0 + 40.0 * i, 40.0});
    SpectralScene scene;
    scene.band_table = BandTable::with_full(bands);
    scene.resize(n);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    for (size_t i = 0; i < n; ++i) {
        scene.means[i] = {g(rng), g(rng), g(rng)};
        scene.log_scales[i] = {0.3 * g(rng) - 1.5, 0.3 * g(rng) - 1.5, 0.3 * g(rng) - 1.5};
        scene.rotations[i] = random_unit_quat(rng);
        scene.opacity_logits[i] = g(rng);
        scene.normal_params[i] = {0.2 * g(rng), 0.2 * g(rng)};
        for (int b = 0; b < scene.n_bands(); ++b) {
            scene.diffuse_logits[b][i] = {g(rng), g(rng), g(rng)};
            scene.tint_logits[b][i] = {g(rng), g(rng), g(rng)};
            scene.roughness_logits[b][i] = g(rng);
            for (int c = 0; c < kEncodingDim; ++c) scene.encodings[b][i][c] = g(rng);
        }
    }
    scene.env.init(scene.n_bands(), 16, 8, 3, false);
    for (auto& im : scene.env.base)
        for (auto& v : im.data) v = 0.2 + 0.5 * std::abs(g(rng));
    scene.env.rebuild();
    scene.classifiers.resize(scene.n_bands());
    for (auto& clf : scene.classifiers) {
        clf.init(3);
        for (auto& v : clf.weight) v = g(rng);
        for (auto& v : clf.bias) v = g(rng);
    }
    return scene;
}

}  // namespace

TEST_CASE("covariance of axis-aligned gaussians") {
    SpectralGaussian g;
    g.rotation = {1, 0, 0, 0};
    g.log_scale = {0, 0, 0};
    Mat3 cov = covariance(g);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) CHECK(cov(i, j) == doctest::Approx(i == j ? 1.0 : 0.0));

    g.log_scale = {std::log(2.0), 0, 0};
    cov = covariance(g);
    CHECK(cov(0, 0) == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(cov(1, 1) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(cov(2, 2) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("covariance eigenvalues match exp(2 log_scale) under rotation") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        SpectralGaussian sg;
        sg.rotation = random_unit_quat(rng);
        sg.log_scale = {g(rng), g(rng), g(rng)};
        const Mat3 cov = covariance(sg);

        Eigen::Matrix3d m;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) m(i, j) = cov(i, j);
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(m);
        std::array<double, 3> want = {std::exp(2 * sg.log_scale.x), std::exp(2 * sg.log_scale.y),
                                      std::exp(2 * sg.log_scale.z)};
        std::sort(want.begin(), want.end());
        for (int i = 0; i < 3; ++i)
            CHECK(es.eigenvalues()[i] == doctest::Approx(want[i]).epsilon(1e-9));
        CHECK(es.eigenvalues()[0] > 0.0);  // SPD
    }
}

TEST_CASE("splat normal base axis and sign flip") {
    SpectralGaussian g;
    g.rotation = {1, 0, 0, 0};
    g.log_scale = {0.0, 0.0, -1.0};  // z axis is the smallest
    g.normal_params = {0.0, 0.0};

    Vec3 n = splat_normal(g, {0, 0, 1});
    CHECK(n.x == doctest::Approx(0.0));
    CHECK(n.y == doctest::Approx(0.0));
    CHECK(n.z == doctest::Approx(1.0));

    n = splat_normal(g, {0, 0, -1});
    CHECK(n.z == doctest::Approx(-1.0));
}

TEST_CASE("perturbed splat normal stays unit") {
    std::mt19937_64 rng(6);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        SpectralGaussian sg;
        sg.rotation = random_unit_quat(rng);
        sg.log_scale = {g(rng), g(rng), g(rng)};
        sg.normal_params = {g(rng), g(rng)};
        const Vec3 dir = normalize(Vec3{g(rng), g(rng), g(rng)});
        const Vec3 n = splat_normal(sg, dir);
        CHECK(std::abs(norm(n) - 1.0) < 1e-12);
        CHECK(dot(n, dir) >= 0.0);
    }
}

TEST_CASE("decode keeps parameters strictly inside their ranges") {
    CHECK(decode_unit(0.0) == doctest::Approx(0.5));
    CHECK(decode_unit(1e9) == 1.0 - kDecodeEps);
    CHECK(decode_unit(-1e9) == kDecodeEps);
    for (double x : {0.011, 0.2, 0.5, 0.8, 0.989}) {
        CHECK(decode_unit(encode_unit(x)) == doctest::Approx(x).epsilon(1e-9));
    }
    // Strictly inside for any finite logit.
    for (double logit : {-745.0, -60.0, 0.0, 60.0, 745.0}) {
        const double v = decode_unit(logit);
        CHECK(v > 0.0);
        CHECK(v < 1.0);
    }
}

TEST_CASE("decode_params rejects unknown bands") {
    SpectralScene scene = random_scene(3, 9);
    CHECK_THROWS_AS(scene.decode_params(0, scene.n_bands()), std::out_of_range);
    const DecodedAppearance d = scene.decode_params(0, 1);
    CHECK(d.roughness > 0.0);
    CHECK(d.roughness < 1.0);
    CHECK(d.alpha > 0.0);
    CHECK(d.alpha < 1.0);
}

TEST_CASE("scene checkpoint round-trips bit-exactly") {
    const SpectralScene scene = random_scene(7, 10);
    const std::string p1 = "test_scene_a.ckpt", p2 = "test_scene_b.ckpt";
    save_scene(scene, p1);
    const SpectralScene loaded = load_scene(p1);
    save_scene(loaded, p2);

    std::ifstream f1(p1, std::ios::binary), f2(p2, std::ios::binary);
    const std::string b1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
    const std::string b2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
    CHECK(b1 == b2);
    CHECK(!b1.empty());

    CHECK(loaded.size() == scene.size());
    CHECK(loaded.band_table == scene.band_table);
    for (size_t i = 0; i < scene.size(); ++i) {
        CHECK(loaded.means[i].x == scene.means[i].x);
        CHECK(loaded.rotations[i].w == scene.rotations[i].w);
        CHECK(loaded.encodings[2][i][15] == scene.encodings[2][i][15]);
    }
    CHECK(loaded.env.base[0].data == scene.env.base[0].data);
    CHECK(loaded.classifiers[0].weight == scene.classifiers[0].weight);
    std::remove(p1.c_str());
    std::remove(p2.c_str());
}

TEST_CASE("environment mip zero equals the non-negative base map") {
    SpectralScene scene = random_scene(3, 11);
    scene.env.base[0].data[5] = -0.25;  // raw values may go negative
    scene.env.rebuild();
    const Image& mip0 = scene.env.mips[0][0];
    for (size_t i = 0; i < mip0.data.size(); ++i) {
        const double raw = scene.env.base[0].data[i];
        CHECK(mip0.data[i] == (raw > 0.0 ? raw : 0.0));
    }
    scene.env.validate();
}
