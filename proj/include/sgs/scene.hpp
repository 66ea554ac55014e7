#pragma once

#include <array>
#include <string>
#include <vector>

#include "sgs/autodiff.hpp"
#include "sgs/color.hpp"
#include "sgs/envmap.hpp"
#include "sgs/math.hpp"

namespace sgs {

constexpr int kEncodingDim = 16;
using Encoding = std::array<double, kEncodingDim>;

// Decoded constrained parameters stay strictly inside (0, 1).
constexpr double kDecodeEps = 1e-7;

template <class T>
T decode_unit(const T& logit) {
    using sgs::ad::sigmoid;
    using sgs::sigmoid;
    return clamp(sigmoid(logit), kDecodeEps, 1.0 - kDecodeEps);
}

inline double encode_unit(double v) { return logit(v); }

// Per-band appearance of one splat.
struct BandAppearance {
    Vec3 diffuse_logit{};
    Vec3 tint_logit{};
    double roughness_logit = 0.0;
    Encoding encoding{};
};

// Value type for single-splat operations; the scene stores the same fields
// struct-of-arrays for the optimizer.
struct SpectralGaussian {
    Vec3 mean{};
    Vec3 log_scale{};
    Vec4 rotation{1, 0, 0, 0};
    double opacity_logit = 0.0;
    Vec2 normal_params{};
    std::vector<BandAppearance> bands;
};

struct DecodedAppearance {
    Vec3 diffuse;
    Vec3 tint;
    double roughness;
    double alpha;
};

struct IdentityClassifier {
    int categories = 0;                 // K
    std::vector<double> weight;        // K x 16, row-major
    std::vector<double> bias;          // K

    void init(int k) {
        categories = k;
        weight.assign(static_cast<size_t>(k) * kEncodingDim, 0.0);
        bias.assign(k, 0.0);
    }
    void validate() const;
};

struct SpectralScene {
    BandTable band_table;

    // Shared geometry.
    std::vector<Vec3> means;
    std::vector<Vec3> log_scales;
    std::vector<Vec4> rotations;       // unit quaternions
    std::vector<double> opacity_logits;
    std::vector<Vec2> normal_params;

    // Per band [band][splat].
    std::vector<std::vector<Vec3>> diffuse_logits;
    std::vector<std::vector<Vec3>> tint_logits;
    std::vector<std::vector<double>> roughness_logits;
    std::vector<std::vector<Encoding>> encodings;

    EnvironmentLight env;
    std::vector<IdentityClassifier> classifiers;  // per band
    bool full_prior_initialized = false;

    size_t size() const { return means.size(); }
    int n_bands() const { return band_table.size(); }

    void resize(size_t n_splats);
    void validate() const;

    SpectralGaussian gaussian(size_t i) const;
    void set_gaussian(size_t i, const SpectralGaussian& g);

    DecodedAppearance decode_params(size_t i, int band) const;
};

// Sigma = R diag(exp(log_scale))^2 R^T; SPD by construction.
template <class T>
Mat3T<T> covariance_t(const Vec3T<T>& log_scale, const Vec4T<T>& rotation) {
    using std::exp;
    const Mat3T<T> r = quat_to_mat(quat_normalize(rotation));
    const Vec3T<T> s{exp(log_scale.x), exp(log_scale.y), exp(log_scale.z)};
    Mat3T<T> m;  // R * diag(s)
    for (int i = 0; i < 3; ++i) {
        m(i, 0) = r(i, 0) * s.x;
        m(i, 1) = r(i, 1) * s.y;
        m(i, 2) = r(i, 2) * s.z;
    }
    return mat_mul(m, transpose(m));
}

Mat3 covariance(const SpectralGaussian& g);

// Splat normal: the rotated axis of the smallest scale plus a learnable
// tangent-plane offset, renormalized, then flipped toward the camera.
template <class T>
Vec3T<T> splat_normal_t(const Vec3T<T>& log_scale, const Vec4T<T>& rotation,
                        const Vec2T<T>& normal_params, const Vec3T<T>& view_dir) {
    // Axis selection is a discrete choice on the values.
    int k = 0;
    double best = val(log_scale.x);
    if (val(log_scale.y) < best) { best = val(log_scale.y); k = 1; }
    if (val(log_scale.z) < best) { k = 2; }
    const int u = (k + 1) % 3, w = (k + 2) % 3;

    Vec3T<T> local{};
    local[k] = T(1.0);
    local[u] = normal_params.x;
    local[w] = normal_params.y;

    const Mat3T<T> r = quat_to_mat(quat_normalize(rotation));
    Vec3T<T> n = normalize(mat_vec(r, local));
    if (val(dot(n, view_dir)) < 0.0) n = T(-1.0) * n;
    return n;
}

Vec3 splat_normal(const SpectralGaussian& g, const Vec3& view_dir);

// Checkpoint: versioned little-endian binary, bit-exact round trip.
void save_scene(const SpectralScene& scene, const std::string& path);
SpectralScene load_scene(const std::string& path);

}  // namespace sgs
