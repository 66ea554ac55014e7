#pragma once

#include <vector>

#include "sgs/camera.hpp"
#include "sgs/scene.hpp"
#include "sgs/shading.hpp"

namespace sgs {

struct RasterConfig {
    int tile_size = 16;
    double cov2d_reg = 0.3;
    double alpha_cutoff = 1.0 / 255.0;
    double alpha_clamp = 0.999;
    double term_transmittance = 1e-4;
    double sigma_cull = 3.0;
};

struct Projected2D {
    Vec2 mean2d;
    double cov_a = 0, cov_b = 0, cov_c = 0;        // 2x2 covariance [[a, b], [b, c]]
    double conic_a = 0, conic_b = 0, conic_c = 0;  // inverse covariance
    double depth = 0;
    Vec3 view_dir;                                  // unit, splat toward camera
    double radius = 0;                              // 3-sigma screen bound
    bool culled = true;
};

struct PixelContribution {
    int gaussian = -1;
    double alpha = 0.0;  // effective alpha after falloff
};

struct RenderOutput {
    Image color;       // H x W x 3
    Image id_feature;  // H x W x 16
    Image alpha;       // H x W x 1
    std::vector<std::vector<PixelContribution>> contributions;  // per pixel, optional
};

Projected2D project(const SpectralGaussian& g, const CameraView& cam, const RasterConfig& cfg = {});

double alpha_at_pixel(const Projected2D& p, double opacity, const Vec2& pixel,
                      const RasterConfig& cfg = {});

struct Contribution {
    Vec3 color;
    Encoding encoding;
    double alpha = 0.0;
    double depth = 0.0;
};

// Front-to-back alpha compositing of depth-sorted contributions.
void composite(const std::vector<Contribution>& sorted, const RasterConfig& cfg, Vec3& color_out,
               Encoding& encoding_out, double& alpha_out);

RenderOutput render(const SpectralScene& scene, const CameraView& cam, int band,
                    const RasterConfig& rcfg = {}, const ShadingConfig& scfg = {},
                    bool record_contributions = false);

// ---------------------------------------------------------------------------
// Shared forward math, templated so the training pass can record it on a
// tape. Camera and config stay in doubles; splat parameters are T.

template <class T>
struct ProjectedT {
    bool culled = true;
    double depth = 0.0;
    double radius = 0.0;
    Vec2T<T> mean2d;
    T cov_a, cov_b, cov_c;
    T conic_a, conic_b, conic_c;
    Vec3T<T> view_dir;
};

template <class T>
ProjectedT<T> project_t(const Vec3T<T>& mean, const Vec3T<T>& log_scale, const Vec4T<T>& rotation,
                        const CameraView& cam, const RasterConfig& rcfg) {
    ProjectedT<T> out;

    Vec3T<T> xc;
    for (int r = 0; r < 3; ++r)
        xc[r] = T(cam.rot_w2c(r, 0)) * mean.x + T(cam.rot_w2c(r, 1)) * mean.y +
                T(cam.rot_w2c(r, 2)) * mean.z + T(cam.trans_w2c[r]);
    out.depth = val(xc.z);
    if (out.depth <= cam.near || out.depth >= cam.far) return out;

    const T inv_z = T(1.0) / xc.z;
    out.mean2d.x = T(cam.focal_x) * xc.x * inv_z + T(cam.cx);
    out.mean2d.y = T(cam.focal_y) * xc.y * inv_z + T(cam.cy);

    // cov2d = J W Sigma W^T J^T + reg I.
    const Mat3T<T> sigma = covariance_t(log_scale, rotation);
    Mat3T<T> rot;
    for (int i = 0; i < 9; ++i) rot.m[i] = T(cam.rot_w2c.m[i]);
    const Mat3T<T> m = mat_mul(mat_mul(rot, sigma), transpose(rot));

    const T jx0 = T(cam.focal_x) * inv_z;
    const T jx2 = -T(cam.focal_x) * xc.x * inv_z * inv_z;
    const T jy1 = T(cam.focal_y) * inv_z;
    const T jy2 = -T(cam.focal_y) * xc.y * inv_z * inv_z;

    // Rows of J * M.
    const T r0x = jx0 * m(0, 0) + jx2 * m(2, 0);
    const T r0z = jx0 * m(0, 2) + jx2 * m(2, 2);
    const T r1y = jy1 * m(1, 1) + jy2 * m(2, 1);
    const T r1x = jy1 * m(1, 0) + jy2 * m(2, 0);
    const T r1z = jy1 * m(1, 2) + jy2 * m(2, 2);

    out.cov_a = r0x * jx0 + r0z * jx2 + T(rcfg.cov2d_reg);
    out.cov_b = r1x * jx0 + r1z * jx2;
    out.cov_c = r1y * jy1 + r1z * jy2 + T(rcfg.cov2d_reg);

    const T det = out.cov_a * out.cov_c - out.cov_b * out.cov_b;
    out.conic_a = out.cov_c / det;
    out.conic_b = -out.cov_b / det;
    out.conic_c = out.cov_a / det;

    // 3-sigma viewport cull on the values.
    const double a = val(out.cov_a), b = val(out.cov_b), c = val(out.cov_c);
    const double eig_max =
        0.5 * (a + c) + std::sqrt(std::max(0.0, 0.25 * (a - c) * (a - c) + b * b));
    out.radius = rcfg.sigma_cull * std::sqrt(eig_max);
    const double mx = val(out.mean2d.x), my = val(out.mean2d.y);
    if (mx + out.radius < 0.0 || mx - out.radius > cam.width || my + out.radius < 0.0 ||
        my - out.radius > cam.height)
        return out;

    const Vec3 cam_pos = cam.camera_position();
    const Vec3T<T> to_cam{T(cam_pos.x) - mean.x, T(cam_pos.y) - mean.y, T(cam_pos.z) - mean.z};
    out.view_dir = normalize(to_cam);
    out.culled = false;
    return out;
}

template <class T>
struct SplatForwardT {
    ProjectedT<T> proj;
    T alpha{};
    Vec3T<T> color;
};

template <class T, class Fetch>
SplatForwardT<T> splat_forward(const Vec3T<T>& mean, const Vec3T<T>& log_scale,
                               const Vec4T<T>& rotation, const T& opacity_logit,
                               const Vec2T<T>& normal_par, const Vec3T<T>& diffuse_logit,
                               const Vec3T<T>& tint_logit, const T& roughness_logit,
                               const CameraView& cam, const Fetch& fetch, int env_w, int env_h,
                               int env_levels, const RasterConfig& rcfg,
                               const ShadingConfig& scfg) {
    SplatForwardT<T> out;
    out.proj = project_t(mean, log_scale, rotation, cam, rcfg);
    if (out.proj.culled) return out;

    out.alpha = decode_unit(opacity_logit);

    const Vec3T<T> n = splat_normal_t(log_scale, rotation, normal_par, out.proj.view_dir);
    const Vec3T<T> diffuse{decode_unit(diffuse_logit.x), decode_unit(diffuse_logit.y),
                           decode_unit(diffuse_logit.z)};
    const Vec3T<T> tint{decode_unit(tint_logit.x), decode_unit(tint_logit.y),
                        decode_unit(tint_logit.z)};
    const T rough = decode_unit(roughness_logit);
    out.color = shade_splat_t(out.proj.view_dir, n, diffuse, tint, rough, fetch, env_w, env_h,
                              env_levels, scfg);
    return out;
}

// Depth order (ties by index) and per-tile bins; identical for the forward
// and backward passes.
struct RenderPlan {
    int tiles_x = 0, tiles_y = 0;
    std::vector<int> order;                   // splat indices, globally depth-sorted
    std::vector<std::vector<int>> tile_bins;  // per tile, positions into `order`
};

RenderPlan build_render_plan(const std::vector<Projected2D>& projected, const CameraView& cam,
                             const RasterConfig& cfg);

// Value summary of a templated projection (for plan building).
template <class T>
Projected2D projected_values(const ProjectedT<T>& p) {
    Projected2D out;
    out.culled = p.culled;
    out.depth = p.depth;
    out.radius = p.radius;
    if (!p.culled) {
        out.mean2d = {val(p.mean2d.x), val(p.mean2d.y)};
        out.cov_a = val(p.cov_a);
        out.cov_b = val(p.cov_b);
        out.cov_c = val(p.cov_c);
        out.conic_a = val(p.conic_a);
        out.conic_b = val(p.conic_b);
        out.conic_c = val(p.conic_c);
        out.view_dir = {val(p.view_dir.x), val(p.view_dir.y), val(p.view_dir.z)};
    }
    return out;
}

}  // namespace sgs
