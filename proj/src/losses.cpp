#include "sgs/losses.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "sgs/parallel.hpp"

namespace sgs {

void LossWeights::validate() const {
    if (gamma < 0.0 || gamma > 1.0) throw std::runtime_error("gamma must lie in [0, 1]");
    if (gamma_2d < 0.0 || gamma_3d < 0.0) throw std::runtime_error("loss weights must be >= 0");
    if (knn_k < 1) throw std::runtime_error("knn_k must be >= 1");
    if (sample_m < 1) throw std::runtime_error("sample_m must be >= 1");
}

double l1_loss(const Image& img, const Image& ref) {
    if (!img.same_shape(ref)) throw std::runtime_error("l1_loss: shape mismatch");
    double acc = 0.0;
    for (size_t i = 0; i < img.data.size(); ++i) acc += std::abs(img.data[i] - ref.data[i]);
    return acc / double(img.data.size());
}

Image l1_loss_backward(const Image& img, const Image& ref) {
    if (!img.same_shape(ref)) throw std::runtime_error("l1_loss: shape mismatch");
    Image g(img.width, img.height, img.channels);
    const double inv = 1.0 / double(img.data.size());
    for (size_t i = 0; i < img.data.size(); ++i) {
        const double d = img.data[i] - ref.data[i];
        g.data[i] = d > 0.0 ? inv : (d < 0.0 ? -inv : 0.0);  // subgradient 0 at ties
    }
    return g;
}

namespace {

std::vector<double> gaussian_kernel(int window, double sigma) {
    std::vector<double> k(window);
    const int half = window / 2;
    double sum = 0.0;
    for (int i = 0; i < window; ++i) {
        k[i] = std::exp(-0.5 * (i - half) * (i - half) / (sigma * sigma));
        sum += k[i];
    }
    for (double& v : k) v /= sum;
    return k;
}

// Separable valid convolution of a single-channel plane.
struct Plane {
    int w = 0, h = 0;
    std::vector<double> v;
    Plane() = default;
    Plane(int w_, int h_) : w(w_), h(h_), v(static_cast<size_t>(w_) * h_, 0.0) {}
    double& at(int x, int y) { return v[static_cast<size_t>(y) * w + x]; }
    double at(int x, int y) const { return v[static_cast<size_t>(y) * w + x]; }
};

Plane conv_valid(const Plane& in, const std::vector<double>& k) {
    const int n = static_cast<int>(k.size());
    Plane mid(in.w - n + 1, in.h);
    for (int y = 0; y < in.h; ++y)
        for (int x = 0; x < mid.w; ++x) {
            double acc = 0.0;
            for (int i = 0; i < n; ++i) acc += k[i] * in.at(x + i, y);
            mid.at(x, y) = acc;
        }
    Plane out(mid.w, in.h - n + 1);
    for (int y = 0; y < out.h; ++y)
        for (int x = 0; x < out.w; ++x) {
            double acc = 0.0;
            for (int i = 0; i < n; ++i) acc += k[i] * mid.at(x, y + i);
            out.at(x, y) = acc;
        }
    return out;
}

// Transpose of conv_valid (kernel is symmetric): zero-pad and run valid.
Plane conv_valid_transpose(const Plane& in, const std::vector<double>& k, int out_w, int out_h) {
    const int n = static_cast<int>(k.size());
    Plane padded(in.w + 2 * (n - 1), in.h + 2 * (n - 1));
    for (int y = 0; y < in.h; ++y)
        for (int x = 0; x < in.w; ++x) padded.at(x + n - 1, y + n - 1) = in.at(x, y);
    Plane out = conv_valid(padded, k);
    if (out.w != out_w || out.h != out_h) throw std::logic_error("conv transpose shape bug");
    return out;
}

Plane extract_channel(const Image& img, int c) {
    Plane p(img.width, img.height);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) p.at(x, y) = img.at(x, y, c);
    return p;
}

struct SsimStats {
    Plane mu_x, mu_y, sxx, syy, sxy;
};

SsimStats ssim_stats(const Plane& x, const Plane& y, const std::vector<double>& k) {
    SsimStats s;
    s.mu_x = conv_valid(x, k);
    s.mu_y = conv_valid(y, k);
    Plane x2(x.w, x.h), y2(x.w, x.h), xy(x.w, x.h);
    for (size_t i = 0; i < x.v.size(); ++i) {
        x2.v[i] = x.v[i] * x.v[i];
        y2.v[i] = y.v[i] * y.v[i];
        xy.v[i] = x.v[i] * y.v[i];
    }
    s.sxx = conv_valid(x2, k);
    s.syy = conv_valid(y2, k);
    s.sxy = conv_valid(xy, k);
    for (size_t i = 0; i < s.mu_x.v.size(); ++i) {
        s.sxx.v[i] -= s.mu_x.v[i] * s.mu_x.v[i];
        s.syy.v[i] -= s.mu_y.v[i] * s.mu_y.v[i];
        s.sxy.v[i] -= s.mu_x.v[i] * s.mu_y.v[i];
    }
    return s;
}

void check_ssim_inputs(const Image& a, const Image& b, const SsimParams& p) {
    if (!a.same_shape(b)) throw std::runtime_error("ssim: shape mismatch");
    if (a.width < p.window || a.height < p.window)
        throw std::runtime_error("ssim: image smaller than the filter window");
}

}  // namespace

double ssim_mean(const Image& a, const Image& b, const SsimParams& p) {
    check_ssim_inputs(a, b, p);
    const auto k = gaussian_kernel(p.window, p.sigma);
    double total = 0.0;
    for (int c = 0; c < a.channels; ++c) {
        const Plane x = extract_channel(a, c), y = extract_channel(b, c);
        const SsimStats s = ssim_stats(x, y, k);
        double acc = 0.0;
        for (size_t i = 0; i < s.mu_x.v.size(); ++i) {
            const double a1 = 2.0 * s.mu_x.v[i] * s.mu_y.v[i] + p.c1;
            const double a2 = 2.0 * s.sxy.v[i] + p.c2;
            const double b1 = s.mu_x.v[i] * s.mu_x.v[i] + s.mu_y.v[i] * s.mu_y.v[i] + p.c1;
            const double b2 = s.sxx.v[i] + s.syy.v[i] + p.c2;
            acc += (a1 * a2) / (b1 * b2);
        }
        total += acc / double(s.mu_x.v.size());
    }
    return total / a.channels;
}

double dssim_loss(const Image& img, const Image& ref, const SsimParams& p) {
    return 1.0 - ssim_mean(img, ref, p);
}

Image dssim_loss_backward(const Image& img, const Image& ref, const SsimParams& p) {
    check_ssim_inputs(img, ref, p);
    const auto k = gaussian_kernel(p.window, p.sigma);
    Image grad(img.width, img.height, img.channels);

    for (int c = 0; c < img.channels; ++c) {
        const Plane x = extract_channel(img, c), y = extract_channel(ref, c);
        const SsimStats s = ssim_stats(x, y, k);
        const int mw = s.mu_x.w, mh = s.mu_x.h;
        // d(loss)/d(ssim_p); loss = 1 - mean over windows and channels
        const double dldw = -1.0 / (double(mw) * mh * img.channels);

        Plane k0(mw, mh), k1(mw, mh), k2(mw, mh);
        for (size_t i = 0; i < s.mu_x.v.size(); ++i) {
            const double mux = s.mu_x.v[i], muy = s.mu_y.v[i];
            const double a1 = 2.0 * mux * muy + p.c1;
            const double a2 = 2.0 * s.sxy.v[i] + p.c2;
            const double b1 = mux * mux + muy * muy + p.c1;
            const double b2 = s.sxx.v[i] + s.syy.v[i] + p.c2;
            const double inv = 1.0 / (b1 * b2);
            const double ssim = a1 * a2 * inv;
            const double d_a1 = a2 * inv;
            const double d_a2 = a1 * inv;
            const double d_b1 = -ssim / b1;
            const double d_b2 = -ssim / b2;
            // dS/dx_q = w * (K0 + K1 * y_q + K2 * x_q)
            k0.v[i] = dldw * 2.0 * (d_a1 * muy + d_b1 * mux - d_a2 * muy - d_b2 * mux);
            k1.v[i] = dldw * 2.0 * d_a2;
            k2.v[i] = dldw * 2.0 * d_b2;
        }
        const Plane g0 = conv_valid_transpose(k0, k, img.width, img.height);
        const Plane g1 = conv_valid_transpose(k1, k, img.width, img.height);
        const Plane g2 = conv_valid_transpose(k2, k, img.width, img.height);
        for (int yy = 0; yy < img.height; ++yy)
            for (int xx = 0; xx < img.width; ++xx)
                grad.at(xx, yy, c) =
                    g0.at(xx, yy) + g1.at(xx, yy) * y.at(xx, yy) + g2.at(xx, yy) * x.at(xx, yy);
    }
    return grad;
}

std::vector<double> identity_logits(const Encoding& e, const IdentityClassifier& clf) {
    clf.validate();
    std::vector<double> out(clf.categories);
    for (int c = 0; c < clf.categories; ++c) {
        double acc = clf.bias[c];
        for (int j = 0; j < kEncodingDim; ++j) acc += clf.weight[c * kEncodingDim + j] * e[j];
        out[c] = acc;
    }
    return out;
}

namespace {

// Stable softmax in place; returns log-sum-exp offset pieces unused by callers.
void softmax_inplace(std::vector<double>& v) {
    const double mx = *std::max_element(v.begin(), v.end());
    double sum = 0.0;
    for (double& x : v) {
        x = std::exp(x - mx);
        sum += x;
    }
    for (double& x : v) x /= sum;
}

}  // namespace

double identity_2d_loss(const Image& id_feature, const std::vector<uint8_t>& mask,
                        const Image& alpha, const IdentityClassifier& clf, double alpha_threshold) {
    Identity2dGrads scratch;  // unused; forward shares the backward walk
    return identity_2d_loss_backward(id_feature, mask, alpha, clf, alpha_threshold, scratch);
}

double identity_2d_loss_backward(const Image& id_feature, const std::vector<uint8_t>& mask,
                                 const Image& alpha, const IdentityClassifier& clf,
                                 double alpha_threshold, Identity2dGrads& grads) {
    clf.validate();
    if (mask.size() != id_feature.pixel_count())
        throw std::runtime_error("identity_2d_loss: mask size mismatch");
    if (alpha.width != id_feature.width || alpha.height != id_feature.height)
        throw std::runtime_error("identity_2d_loss: alpha size mismatch");
    if (id_feature.channels != kEncodingDim)
        throw std::runtime_error("identity_2d_loss: feature image must have 16 channels");

    const int k = clf.categories;
    grads.feature = Image(id_feature.width, id_feature.height, kEncodingDim);
    grads.weight.assign(static_cast<size_t>(k) * kEncodingDim, 0.0);
    grads.bias.assign(k, 0.0);

    // First pass: count included pixels (the mean needs the count up front).
    size_t included = 0;
    for (size_t pix = 0; pix < id_feature.pixel_count(); ++pix) {
        if (alpha.data[pix] < alpha_threshold) continue;
        if (mask[pix] >= k) throw std::runtime_error("identity_2d_loss: mask id exceeds categories");
        ++included;
    }
    if (included == 0) return 0.0;
    const double inv_n = 1.0 / double(included);

    double loss = 0.0;
    std::vector<double> logits(k);
    Encoding e;
    for (size_t pix = 0; pix < id_feature.pixel_count(); ++pix) {
        if (alpha.data[pix] < alpha_threshold) continue;
        const double* f = &id_feature.data[pix * kEncodingDim];
        for (int j = 0; j < kEncodingDim; ++j) e[j] = f[j];
        logits = identity_logits(e, clf);
        softmax_inplace(logits);
        const int y = mask[pix];
        loss -= std::log(std::max(logits[y], 1e-300)) * inv_n;

        // d(loss)/d(logit_c) = (p_c - [c == y]) / n
        for (int c = 0; c < k; ++c) {
            const double gl = (logits[c] - (c == y ? 1.0 : 0.0)) * inv_n;
            grads.bias[c] += gl;
            for (int j = 0; j < kEncodingDim; ++j) {
                grads.weight[c * kEncodingDim + j] += gl * f[j];
                grads.feature.data[pix * kEncodingDim + j] += gl * clf.weight[c * kEncodingDim + j];
            }
        }
    }
    return loss;
}

namespace {

std::vector<int> sample_indices(size_t n, int m, uint64_t seed) {
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    if (m >= static_cast<int>(n)) return idx;
    std::mt19937_64 rng(seed);
    // Partial Fisher-Yates: the first m entries become the sample.
    for (int i = 0; i < m; ++i) {
        std::uniform_int_distribution<size_t> pick(i, n - 1);
        std::swap(idx[i], idx[pick(rng)]);
    }
    idx.resize(m);
    return idx;
}

std::vector<int> knn_of(const std::vector<Vec3>& means, int j, int k) {
    std::vector<std::pair<double, int>> d;
    d.reserve(means.size() - 1);
    for (int i = 0; i < static_cast<int>(means.size()); ++i) {
        if (i == j) continue;
        const Vec3 diff = means[i] - means[j];
        d.push_back({dot(diff, diff), i});
    }
    std::partial_sort(d.begin(), d.begin() + k, d.end());
    std::vector<int> out(k);
    for (int i = 0; i < k; ++i) out[i] = d[i].second;
    return out;
}

Encoding softmax_encoding(const Encoding& e) {
    Encoding p;
    double mx = e[0];
    for (double v : e) mx = std::max(mx, v);
    double sum = 0.0;
    for (int i = 0; i < kEncodingDim; ++i) {
        p[i] = std::exp(e[i] - mx);
        sum += p[i];
    }
    for (double& v : p) v /= sum;
    return p;
}

}  // namespace

double identity_3d_loss(const SpectralScene& scene, int band, int k, int m, uint64_t seed) {
    std::vector<Encoding> scratch;
    return identity_3d_loss_backward(scene, band, k, m, seed, scratch);
}

double identity_3d_loss_backward(const SpectralScene& scene, int band, int k, int m, uint64_t seed,
                                 std::vector<Encoding>& grad_encodings) {
    const size_t n = scene.size();
    if (static_cast<int>(n) <= k)
        throw std::runtime_error("identity_3d_loss: need more gaussians than neighbors");
    if (band < 0 || band >= scene.n_bands()) throw std::out_of_range("unknown band index");

    grad_encodings.assign(n, Encoding{});
    const auto sample = sample_indices(n, m, seed);
    const auto& enc = scene.encodings[band];
    const double inv_mk = 1.0 / (double(sample.size()) * k);

    double loss = 0.0;
    for (const int j : sample) {
        const Encoding p = softmax_encoding(enc[j]);
        const auto neighbors = knn_of(scene.means, j, k);
        for (const int i : neighbors) {
            const Encoding q = softmax_encoding(enc[i]);
            double kl = 0.0;
            Encoding lpq;
            for (int c = 0; c < kEncodingDim; ++c) {
                lpq[c] = std::log(p[c]) - std::log(q[c]);
                kl += p[c] * lpq[c];
            }
            loss += kl * inv_mk;
            for (int c = 0; c < kEncodingDim; ++c) {
                grad_encodings[j][c] += p[c] * (lpq[c] - kl) * inv_mk;
                grad_encodings[i][c] += (q[c] - p[c]) * inv_mk;
            }
        }
    }
    return loss;
}

BandLossTerms render_loss_band(const RenderOutput& render, const Image& ref,
                               const std::vector<uint8_t>& mask, const SpectralScene& scene,
                               int band, const LossWeights& w, uint64_t knn_seed) {
    w.validate();
    BandLossTerms t;
    t.l1 = l1_loss(render.color, ref);
    t.dssim = dssim_loss(render.color, ref);
    t.l2d = w.gamma_2d > 0.0
                ? identity_2d_loss(render.id_feature, mask, render.alpha,
                                   scene.classifiers[band], w.alpha_exclude_threshold)
                : 0.0;
    t.l3d = w.gamma_3d > 0.0 ? identity_3d_loss(scene, band, w.knn_k, w.sample_m, knn_seed) : 0.0;
    t.total = (1.0 - w.gamma) * t.l1 + w.gamma * t.dssim + w.gamma_2d * t.l2d + w.gamma_3d * t.l3d;
    return t;
}

double total_loss(const std::vector<double>& per_band_losses) {
    double acc = 0.0;
    for (double v : per_band_losses) acc += v;
    return acc;
}

}  // namespace sgs
