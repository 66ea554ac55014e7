#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "sgs/losses.hpp"

using namespace sgs;

namespace {

Image random_image(int w, int h, int c, uint64_t seed, double lo = 0.0, double hi = 1.0) {
    Image img(w, h, c);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(lo, hi);
    for (auto& v : img.data) v = dist(rng);
    return img;
}

SpectralScene tiny_scene(size_t n, int seed) {
    SpectralScene scene;
    scene.band_table = BandTable::with_full({{500.0, 40.0}});
    scene.resize(n);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (size_t i = 0; i < n; ++i) {
        scene.means[i] = {gauss(rng), gauss(rng), gauss(rng)};
        for (int b = 0; b < scene.n_bands(); ++b)
            for (int c = 0; c < kEncodingDim; ++c) scene.encodings[b][i][c] = gauss(rng);
    }
    scene.classifiers.resize(scene.n_bands());
    for (auto& clf : scene.classifiers) clf.init(3);
    return scene;
}

}  // namespace

TEST_CASE("l1 loss basics and scalar oracle") {
    const Image a = random_image(8, 6, 3, 1);
    CHECK(l1_loss(a, a) == 0.0);

    Image zeros(4, 4, 3, 0.0), ones(4, 4, 3, 1.0);
    CHECK(l1_loss(zeros, ones) == doctest::Approx(1.0));

    const Image b = random_image(8, 6, 3, 2);
    double acc = 0.0;
    for (size_t i = 0; i < a.data.size(); ++i) acc += std::abs(a.data[i] - b.data[i]);
    CHECK(l1_loss(a, b) == doctest::Approx(acc / a.data.size()).epsilon(1e-15));

    Image wrong(3, 3, 3);
    CHECK_THROWS_AS(l1_loss(a, wrong), std::runtime_error);
}

TEST_CASE("l1 backward matches finite differences") {
    Image a = random_image(6, 6, 3, 3);
    const Image b = random_image(6, 6, 3, 4);
    const Image g = l1_loss_backward(a, b);
    const double h = 1e-7;
    for (size_t i = 0; i < a.data.size(); i += 7) {
        const double x0 = a.data[i];
        a.data[i] = x0 + h;
        const double fp = l1_loss(a, b);
        a.data[i] = x0 - h;
        const double fm = l1_loss(a, b);
        a.data[i] = x0;
        CHECK(g.data[i] == doctest::Approx((fp - fm) / (2 * h)).epsilon(1e-4));
    }
}

TEST_CASE("dssim basics") {
    const Image a = random_image(16, 16, 3, 5);
    CHECK(dssim_loss(a, a) == doctest::Approx(0.0).epsilon(1e-12));

    // Inverted checkerboard is structurally dissimilar.
    Image cb(16, 16, 1), inv(16, 16, 1);
    for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 16; ++x) {
            cb.at(x, y, 0) = (x + y) % 2 ? 1.0 : 0.0;
            inv.at(x, y, 0) = 1.0 - cb.at(x, y, 0);
        }
    CHECK(dssim_loss(cb, inv) > 0.5);

    const Image b = random_image(16, 16, 3, 6);
    CHECK(dssim_loss(a, b) == doctest::Approx(dssim_loss(b, a)).epsilon(1e-12));

    Image small(8, 8, 1);
    CHECK_THROWS_AS(dssim_loss(small, small), std::runtime_error);
}

TEST_CASE("dssim backward matches finite differences") {
    Image a = random_image(14, 13, 3, 7);
    const Image b = random_image(14, 13, 3, 8);
    const Image g = dssim_loss_backward(a, b);
    const double h = 1e-6;
    for (size_t i = 0; i < a.data.size(); i += 11) {
        const double x0 = a.data[i];
        a.data[i] = x0 + h;
        const double fp = dssim_loss(a, b);
        a.data[i] = x0 - h;
        const double fm = dssim_loss(a, b);
        a.data[i] = x0;
        const double fd = (fp - fm) / (2 * h);
        CHECK(g.data[i] == doctest::Approx(fd).epsilon(1e-5));
    }
}

TEST_CASE("identity_logits basics") {
    IdentityClassifier clf;
    clf.init(4);
    Encoding e{};
    for (int i = 0; i < kEncodingDim; ++i) e[i] = 0.3 * i;

    auto logits = identity_logits(e, clf);
    for (double v : logits) CHECK(v == 0.0);

    // A dominant row wins the argmax.
    for (int j = 0; j < kEncodingDim; ++j) clf.weight[2 * kEncodingDim + j] = 1.0;
    logits = identity_logits(e, clf);
    CHECK(std::max_element(logits.begin(), logits.end()) - logits.begin() == 2);
}

TEST_CASE("identity_2d loss values") {
    IdentityClassifier clf;
    clf.init(3);
    const int w = 4, h = 4;
    Image feat(w, h, kEncodingDim);
    Image alpha(w, h, 1, 1.0);
    std::vector<uint8_t> mask(w * h, 1);

    // Uniform logits -> ln K.
    CHECK(identity_2d_loss(feat, mask, alpha, clf, 0.5) == doctest::Approx(std::log(3.0)));

    // Confident correct logits -> near zero.
    for (int j = 0; j < kEncodingDim; ++j) clf.weight[1 * kEncodingDim + j] = 10.0;
    for (auto& v : feat.data) v = 1.0;
    CHECK(identity_2d_loss(feat, mask, alpha, clf, 0.5) < 1e-6);

    // Excluded pixels are ignored.
    alpha.at(0, 0, 0) = 0.0;
    mask[0] = 2;  // would be wrong, but the pixel is excluded
    CHECK(identity_2d_loss(feat, mask, alpha, clf, 0.5) < 1e-6);

    // Mask id out of range.
    mask.assign(w * h, 7);
    CHECK_THROWS_AS(identity_2d_loss(feat, mask, alpha, clf, 0.5), std::runtime_error);
}

TEST_CASE("identity_2d random case equals a scalar oracle and matches FD") {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> gauss(0.0, 1.0);
    IdentityClassifier clf;
    clf.init(4);
    for (auto& v : clf.weight) v = gauss(rng);
    for (auto& v : clf.bias) v = 0.3 * gauss(rng);

    const int w = 8, h = 8;
    Image feat = random_image(w, h, kEncodingDim, 10, -1.0, 1.0);
    Image alpha = random_image(w, h, 1, 11);
    std::vector<uint8_t> mask(w * h);
    for (auto& m : mask) m = static_cast<uint8_t>(rng() % 4);

    // Independent scalar recomputation.
    double want = 0.0;
    size_t count = 0;
    for (int pix = 0; pix < w * h; ++pix) {
        if (alpha.data[pix] < 0.5) continue;
        std::vector<double> lg(4);
        for (int c = 0; c < 4; ++c) {
            lg[c] = clf.bias[c];
            for (int j = 0; j < kEncodingDim; ++j)
                lg[c] += clf.weight[c * kEncodingDim + j] * feat.data[pix * kEncodingDim + j];
        }
        double mx = *std::max_element(lg.begin(), lg.end()), sum = 0.0;
        for (double& v : lg) sum += std::exp(v - mx);
        want += -(lg[mask[pix]] - mx - std::log(sum));
        ++count;
    }
    want /= count;
    CHECK(identity_2d_loss(feat, mask, alpha, clf, 0.5) == doctest::Approx(want).epsilon(1e-12));

    // FD on features, weights and biases.
    Identity2dGrads grads;
    identity_2d_loss_backward(feat, mask, alpha, clf, 0.5, grads);
    const double h_fd = 1e-6;
    for (size_t i = 0; i < feat.data.size(); i += 37) {
        const double x0 = feat.data[i];
        feat.data[i] = x0 + h_fd;
        const double fp = identity_2d_loss(feat, mask, alpha, clf, 0.5);
        feat.data[i] = x0 - h_fd;
        const double fm = identity_2d_loss(feat, mask, alpha, clf, 0.5);
        feat.data[i] = x0;
        CHECK(grads.feature.data[i] == doctest::Approx((fp - fm) / (2 * h_fd)).epsilon(1e-5));
    }
    for (size_t i = 0; i < clf.weight.size(); i += 13) {
        const double x0 = clf.weight[i];
        clf.weight[i] = x0 + h_fd;
        const double fp = identity_2d_loss(feat, mask, alpha, clf, 0.5);
        clf.weight[i] = x0 - h_fd;
        const double fm = identity_2d_loss(feat, mask, alpha, clf, 0.5);
        clf.weight[i] = x0;
        CHECK(grads.weight[i] == doctest::Approx((fp - fm) / (2 * h_fd)).epsilon(1e-5));
    }
    for (size_t i = 0; i < clf.bias.size(); ++i) {
        const double x0 = clf.bias[i];
        clf.bias[i] = x0 + h_fd;
        const double fp = identity_2d_loss(feat, mask, alpha, clf, 0.5);
        clf.bias[i] = x0 - h_fd;
        const double fm = identity_2d_loss(feat, mask, alpha, clf, 0.5);
        clf.bias[i] = x0;
        CHECK(grads.bias[i] == doctest::Approx((fp - fm) / (2 * h_fd)).epsilon(1e-5));
    }
}

TEST_CASE("identity_3d loss properties") {
    SpectralScene scene = tiny_scene(12, 21);

    // All-identical encodings give zero loss.
    for (int b = 0; b < scene.n_bands(); ++b)
        for (auto& e : scene.encodings[b])
            for (int c = 0; c < kEncodingDim; ++c) e[c] = 0.25 * c;
    CHECK(identity_3d_loss(scene, 0, 3, 100, 5) == doctest::Approx(0.0).epsilon(1e-14));

    // Softmax shift invariance.
    scene = tiny_scene(12, 22);
    const double base = identity_3d_loss(scene, 0, 3, 100, 5);
    for (auto& e : scene.encodings[0])
        for (int c = 0; c < kEncodingDim; ++c) e[c] += 3.7;
    CHECK(identity_3d_loss(scene, 0, 3, 100, 5) == doctest::Approx(base).epsilon(1e-10));

    // Reproducible for a fixed seed (bitwise).
    const double l1v = identity_3d_loss(scene, 0, 3, 5, 77);
    const double l2v = identity_3d_loss(scene, 0, 3, 5, 77);
    CHECK(l1v == l2v);

    // N <= k rejected.
    CHECK_THROWS_AS(identity_3d_loss(scene, 0, 12, 100, 5), std::runtime_error);
}

TEST_CASE("identity_3d equals an exhaustive oracle on 10 splats") {
    SpectralScene scene = tiny_scene(10, 23);
    const int k = 3;
    const double got = identity_3d_loss(scene, 0, k, 1000, 9);  // m >= N: all points

    // Independent oracle: full sort kNN and direct KL.
    auto softmax = [](const Encoding& e) {
        Encoding p;
        double mx = *std::max_element(e.begin(), e.end()), sum = 0;
        for (int i = 0; i < kEncodingDim; ++i) sum += (p[i] = std::exp(e[i] - mx));
        for (auto& v : p) v /= sum;
        return p;
    };
    double want = 0.0;
    const size_t n = scene.size();
    for (size_t j = 0; j < n; ++j) {
        std::vector<std::pair<double, int>> d;
        for (size_t i = 0; i < n; ++i) {
            if (i == j) continue;
            const Vec3 diff = scene.means[i] - scene.means[j];
            d.push_back({dot(diff, diff), int(i)});
        }
        std::sort(d.begin(), d.end());
        const Encoding p = softmax(scene.encodings[0][j]);
        for (int t = 0; t < k; ++t) {
            const Encoding q = softmax(scene.encodings[0][d[t].second]);
            for (int c = 0; c < kEncodingDim; ++c) want += p[c] * std::log(p[c] / q[c]);
        }
    }
    want /= double(n) * k;
    CHECK(got == doctest::Approx(want).epsilon(1e-10));
}

TEST_CASE("identity_3d backward matches finite differences") {
    SpectralScene scene = tiny_scene(9, 24);
    std::vector<Encoding> grads;
    identity_3d_loss_backward(scene, 0, 3, 5, 13, grads);
    const double h = 1e-6;
    for (size_t i = 0; i < scene.size(); ++i) {
        for (int c = 0; c < kEncodingDim; c += 5) {
            const double x0 = scene.encodings[0][i][c];
            scene.encodings[0][i][c] = x0 + h;
            const double fp = identity_3d_loss(scene, 0, 3, 5, 13);
            scene.encodings[0][i][c] = x0 - h;
            const double fm = identity_3d_loss(scene, 0, 3, 5, 13);
            scene.encodings[0][i][c] = x0;
            const double fd = (fp - fm) / (2 * h);
            CHECK(grads[i][c] == doctest::Approx(fd).epsilon(1e-5));
        }
    }
}

TEST_CASE("render_loss_band gates terms by weight") {
    SpectralScene scene = tiny_scene(8, 25);
    RenderOutput r;
    r.color = random_image(16, 16, 3, 30);
    r.id_feature = random_image(16, 16, kEncodingDim, 31, -1, 1);
    r.alpha = random_image(16, 16, 1, 32);
    const Image ref = random_image(16, 16, 3, 33);
    std::vector<uint8_t> mask(16 * 16, 1);

    LossWeights w;
    w.gamma = 0.0;
    w.gamma_2d = 0.0;
    w.gamma_3d = 0.0;
    CHECK(render_loss_band(r, ref, mask, scene, 0, w, 3).total ==
          doctest::Approx(l1_loss(r.color, ref)).epsilon(1e-14));

    w.gamma = 1.0;
    CHECK(render_loss_band(r, ref, mask, scene, 0, w, 3).total ==
          doctest::Approx(dssim_loss(r.color, ref)).epsilon(1e-14));

    w.gamma = 0.3;
    w.gamma_2d = 0.7;
    w.gamma_3d = 1.1;
    w.knn_k = 3;
    const BandLossTerms t = render_loss_band(r, ref, mask, scene, 0, w, 3);
    const double manual =
        0.7 * l1_loss(r.color, ref) + 0.3 * dssim_loss(r.color, ref) +
        0.7 * identity_2d_loss(r.id_feature, mask, r.alpha, scene.classifiers[0], 0.5) +
        1.1 * identity_3d_loss(scene, 0, 3, w.sample_m, 3);
    CHECK(t.total == doctest::Approx(manual).epsilon(1e-12));
}

TEST_CASE("total_loss sums per-band losses") {
    CHECK(total_loss({0.5}) == 0.5);
    CHECK(total_loss({0.1, 0.2, 0.3}) == doctest::Approx(0.6));
    CHECK(total_loss({0.3, 0.1, 0.2}) == doctest::Approx(total_loss({0.1, 0.2, 0.3})));
}
