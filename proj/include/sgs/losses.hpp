#pragma once

#include <cstdint>
#include <vector>

#include "sgs/image.hpp"
#include "sgs/rasterizer.hpp"
#include "sgs/scene.hpp"

namespace sgs {

struct LossWeights {
    double gamma = 0.2;     // D-SSIM mixing weight
    double gamma_2d = 1.0;  // 2D identity weight
    double gamma_3d = 2.0;  // 3D regularizer weight
    int knn_k = 5;
    int sample_m = 1000;
    double alpha_exclude_threshold = 0.5;

    void validate() const;
};

struct SsimParams {
    int window = 11;
    double sigma = 1.5;
    double c1 = 0.01 * 0.01;
    double c2 = 0.03 * 0.03;
};

double l1_loss(const Image& img, const Image& ref);
Image l1_loss_backward(const Image& img, const Image& ref);  // d(loss)/d(img)

// Mean single-scale SSIM over valid windows, channels averaged.
double ssim_mean(const Image& a, const Image& b, const SsimParams& p = {});

double dssim_loss(const Image& img, const Image& ref, const SsimParams& p = {});
Image dssim_loss_backward(const Image& img, const Image& ref, const SsimParams& p = {});

std::vector<double> identity_logits(const Encoding& e, const IdentityClassifier& clf);

// Mean cross-entropy of classified composited features over pixels whose
// accumulated alpha reaches the threshold. Mask ids must be < clf.categories.
double identity_2d_loss(const Image& id_feature, const std::vector<uint8_t>& mask,
                        const Image& alpha, const IdentityClassifier& clf,
                        double alpha_threshold = 0.5);

struct Identity2dGrads {
    Image feature;                 // H x W x 16
    std::vector<double> weight;    // K x 16
    std::vector<double> bias;      // K
};

double identity_2d_loss_backward(const Image& id_feature, const std::vector<uint8_t>& mask,
                                 const Image& alpha, const IdentityClassifier& clf,
                                 double alpha_threshold, Identity2dGrads& grads);

// Mean KL between the softmax of each sampled encoding and its k nearest
// neighbors' softmaxes, sampled by seed.
double identity_3d_loss(const SpectralScene& scene, int band, int k, int m, uint64_t seed);
double identity_3d_loss_backward(const SpectralScene& scene, int band, int k, int m, uint64_t seed,
                                 std::vector<Encoding>& grad_encodings);

struct BandLossTerms {
    double l1 = 0, dssim = 0, l2d = 0, l3d = 0, total = 0;
};

BandLossTerms render_loss_band(const RenderOutput& render, const Image& ref,
                               const std::vector<uint8_t>& mask, const SpectralScene& scene,
                               int band, const LossWeights& w, uint64_t knn_seed);

double total_loss(const std::vector<double>& per_band_losses);

}  // namespace sgs
