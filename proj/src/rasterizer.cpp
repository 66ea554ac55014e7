#include "sgs/rasterizer.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>

#include "sgs/parallel.hpp"

namespace sgs {

Projected2D project(const SpectralGaussian& g, const CameraView& cam, const RasterConfig& cfg) {
    return projected_values(project_t<double>(g.mean, g.log_scale, g.rotation, cam, cfg));
}

double alpha_at_pixel(const Projected2D& p, double opacity, const Vec2& pixel,
                      const RasterConfig& cfg) {
    const double dx = pixel.x - p.mean2d.x, dy = pixel.y - p.mean2d.y;
    const double q = p.conic_a * dx * dx + 2.0 * p.conic_b * dx * dy + p.conic_c * dy * dy;
    double a = opacity * std::exp(-0.5 * q);
    if (a >= cfg.alpha_clamp) a = cfg.alpha_clamp;
    if (a < cfg.alpha_cutoff) return 0.0;
    return a;
}

void composite(const std::vector<Contribution>& sorted, const RasterConfig& cfg, Vec3& color_out,
               Encoding& encoding_out, double& alpha_out) {
#ifndef NDEBUG
    for (size_t i = 1; i < sorted.size(); ++i)
        assert(sorted[i - 1].depth <= sorted[i].depth && "contributions must be depth-sorted");
#endif
    color_out = {0, 0, 0};
    encoding_out.fill(0.0);
    double transmittance = 1.0;
    for (const auto& c : sorted) {
        if (transmittance < cfg.term_transmittance) break;
        const double w = c.alpha * transmittance;
        color_out.x += w * c.color.x;
        color_out.y += w * c.color.y;
        color_out.z += w * c.color.z;
        for (int k = 0; k < kEncodingDim; ++k) encoding_out[k] += w * c.encoding[k];
        transmittance *= (1.0 - c.alpha);
    }
    alpha_out = 1.0 - transmittance;
}

RenderPlan build_render_plan(const std::vector<Projected2D>& projected, const CameraView& cam,
                             const RasterConfig& cfg) {
    RenderPlan plan;
    const int ts = cfg.tile_size;
    plan.tiles_x = (cam.width + ts - 1) / ts;
    plan.tiles_y = (cam.height + ts - 1) / ts;
    plan.tile_bins.assign(static_cast<size_t>(plan.tiles_x) * plan.tiles_y, {});

    plan.order.reserve(projected.size());
    for (int i = 0; i < static_cast<int>(projected.size()); ++i)
        if (!projected[i].culled) plan.order.push_back(i);
    std::sort(plan.order.begin(), plan.order.end(), [&](int a, int b) {
        if (projected[a].depth != projected[b].depth) return projected[a].depth < projected[b].depth;
        return a < b;
    });

    for (int pos = 0; pos < static_cast<int>(plan.order.size()); ++pos) {
        const Projected2D& p = projected[plan.order[pos]];
        const int x0 = std::max(0, static_cast<int>(std::floor((p.mean2d.x - p.radius) / ts)));
        const int x1 = std::min(plan.tiles_x - 1,
                                static_cast<int>(std::floor((p.mean2d.x + p.radius) / ts)));
        const int y0 = std::max(0, static_cast<int>(std::floor((p.mean2d.y - p.radius) / ts)));
        const int y1 = std::min(plan.tiles_y - 1,
                                static_cast<int>(std::floor((p.mean2d.y + p.radius) / ts)));
        for (int ty = y0; ty <= y1; ++ty)
            for (int tx = x0; tx <= x1; ++tx)
                plan.tile_bins[static_cast<size_t>(ty) * plan.tiles_x + tx].push_back(pos);
    }
    return plan;
}

RenderOutput render(const SpectralScene& scene, const CameraView& cam, int band,
                    const RasterConfig& rcfg, const ShadingConfig& scfg,
                    bool record_contributions) {
    if (band < 0 || band >= scene.n_bands()) throw std::out_of_range("unknown band index");
    cam.validate();
    const size_t n = scene.size();
    const int map = scene.env.map_index(band);

    std::vector<SplatForwardT<double>> fwd(n);
    std::vector<Projected2D> proj(n);
    parallel_for(n, [&](size_t i) {
        if (scfg.use_quadrature) {
            // Reference shading path: geometry from the shared projector,
            // color via hemisphere quadrature.
            SplatForwardT<double> f;
            f.proj = project_t<double>(scene.means[i], scene.log_scales[i], scene.rotations[i],
                                       cam, rcfg);
            if (!f.proj.culled) {
                f.alpha = decode_unit(scene.opacity_logits[i]);
                SpectralGaussian g = scene.gaussian(i);
                ShadingSample s;
                s.omega_o = f.proj.view_dir;
                s.n = splat_normal(g, f.proj.view_dir);
                s.band = band;
                const DecodedAppearance d = scene.decode_params(i, band);
                s.diffuse = d.diffuse;
                s.tint = d.tint;
                s.roughness = d.roughness;
                f.color = shade(s, scene.env, true, scfg);
            }
            fwd[i] = f;
        } else {
            const EnvFetch fetch{&scene.env, map};
            fwd[i] = splat_forward<double>(scene.means[i], scene.log_scales[i], scene.rotations[i],
                                           scene.opacity_logits[i], scene.normal_params[i],
                                           scene.diffuse_logits[band][i],
                                           scene.tint_logits[band][i],
                                           scene.roughness_logits[band][i], cam, fetch,
                                           scene.env.width, scene.env.height, scene.env.levels,
                                           rcfg, scfg);
        }
        proj[i] = projected_values(fwd[i].proj);
    });

    const RenderPlan plan = build_render_plan(proj, cam, rcfg);

    RenderOutput out;
    out.color = Image(cam.width, cam.height, 3);
    out.id_feature = Image(cam.width, cam.height, kEncodingDim);
    out.alpha = Image(cam.width, cam.height, 1);
    if (record_contributions) out.contributions.resize(static_cast<size_t>(cam.width) * cam.height);

    const double sigma_sq = rcfg.sigma_cull * rcfg.sigma_cull;
    const auto& enc = scene.encodings[band];

    parallel_for(plan.tile_bins.size(), [&](size_t tile) {
        const int tx = static_cast<int>(tile) % plan.tiles_x;
        const int ty = static_cast<int>(tile) / plan.tiles_x;
        const auto& bin = plan.tile_bins[tile];
        if (bin.empty()) return;
        const int px0 = tx * rcfg.tile_size, px1 = std::min(cam.width, px0 + rcfg.tile_size);
        const int py0 = ty * rcfg.tile_size, py1 = std::min(cam.height, py0 + rcfg.tile_size);

        for (int py = py0; py < py1; ++py) {
            for (int px = px0; px < px1; ++px) {
                const double cxp = px + 0.5, cyp = py + 0.5;
                double transmittance = 1.0;
                double acc_color[3] = {0, 0, 0};
                double acc_enc[kEncodingDim] = {0};
                auto* rec = record_contributions
                                ? &out.contributions[static_cast<size_t>(py) * cam.width + px]
                                : nullptr;

                for (const int pos : bin) {
                    if (transmittance < rcfg.term_transmittance) break;
                    const int idx = plan.order[pos];
                    const Projected2D& p = proj[idx];
                    const double dx = cxp - p.mean2d.x, dy = cyp - p.mean2d.y;
                    const double q =
                        p.conic_a * dx * dx + 2.0 * p.conic_b * dx * dy + p.conic_c * dy * dy;
                    if (q > sigma_sq) continue;
                    double a = fwd[idx].alpha * std::exp(-0.5 * q);
                    if (a >= rcfg.alpha_clamp) a = rcfg.alpha_clamp;
                    if (a < rcfg.alpha_cutoff) continue;

                    const double w = a * transmittance;
                    acc_color[0] += w * fwd[idx].color.x;
                    acc_color[1] += w * fwd[idx].color.y;
                    acc_color[2] += w * fwd[idx].color.z;
                    const Encoding& e = enc[idx];
                    for (int k = 0; k < kEncodingDim; ++k) acc_enc[k] += w * e[k];
                    transmittance *= (1.0 - a);
                    if (rec) rec->push_back({idx, a});
                }
                out.color.at(px, py, 0) = acc_color[0];
                out.color.at(px, py, 1) = acc_color[1];
                out.color.at(px, py, 2) = acc_color[2];
                for (int k = 0; k < kEncodingDim; ++k) out.id_feature.at(px, py, k) = acc_enc[k];
                out.alpha.at(px, py, 0) = 1.0 - transmittance;
            }
        }
    });
    return out;
}

}  // namespace sgs
