#include "sgs/envmap.hpp"

#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>

#include "sgs/ggx.hpp"
#include "sgs/parallel.hpp"

namespace sgs {

Vec3 equirect_texel_dir(int ix, int iy, int width, int height) {
    const double theta = kPi * (iy + 0.5) / height;
    const double phi = 2.0 * kPi * (ix + 0.5) / width - kPi;
    const double st = std::sin(theta);
    return {st * std::cos(phi), st * std::sin(phi), std::cos(theta)};
}

double equirect_texel_solid_angle(int iy, int width, int height) {
    const double c0 = std::cos(kPi * iy / height);
    const double c1 = std::cos(kPi * (iy + 1) / height);
    return (2.0 * kPi / width) * (c0 - c1);
}

const PrefilterOp& PrefilterOp::get(int width, int height, int levels) {
    static std::mutex mtx;
    static std::map<std::tuple<int, int, int>, std::unique_ptr<PrefilterOp>> cache;
    std::lock_guard<std::mutex> lock(mtx);
    auto& slot = cache[{width, height, levels}];
    if (slot) return *slot;

    auto op = std::make_unique<PrefilterOp>();
    op->width = width;
    op->height = height;
    op->levels = levels;

    const int n_base = width * height;
    std::vector<Vec3> base_dirs(n_base);
    std::vector<double> base_sa(n_base);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            base_dirs[y * width + x] = equirect_texel_dir(x, y, width, height);
            base_sa[y * width + x] = equirect_texel_solid_angle(y, width, height);
        }

    for (int k = 1; k < levels; ++k) {
        Level lvl;
        env_level_dims(width, height, k, lvl.width, lvl.height);
        lvl.rho = double(k) / double(levels - 1);
        const int n = lvl.width * lvl.height;

        lvl.offsets.assign(n + 1, 0);
        std::vector<std::vector<std::pair<uint32_t, float>>> rows(n);
        parallel_for(n, [&](size_t o) {
            const Vec3 d = equirect_texel_dir(static_cast<int>(o) % lvl.width,
                                              static_cast<int>(o) / lvl.width, lvl.width,
                                              lvl.height);
            std::vector<double> w(n_base);
            double wmax = 0.0;
            for (int j = 0; j < n_base; ++j) {
                const double c = dot(d, base_dirs[j]);
                const double v = c > 0.0 ? ggx_ndf_t(c, lvl.rho) * c * base_sa[j] : 0.0;
                w[j] = v;
                if (v > wmax) wmax = v;
            }
            const double cutoff = 1e-4 * wmax;
            double sum = 0.0;
            for (int j = 0; j < n_base; ++j)
                if (w[j] >= cutoff) sum += w[j];
            auto& row = rows[o];
            for (int j = 0; j < n_base; ++j)
                if (w[j] >= cutoff) row.push_back({static_cast<uint32_t>(j), float(w[j] / sum)});
        });
        for (int o = 0; o < n; ++o) {
            lvl.offsets[o] = static_cast<uint32_t>(lvl.entries.size());
            lvl.entries.insert(lvl.entries.end(), rows[o].begin(), rows[o].end());
        }
        lvl.offsets[n] = static_cast<uint32_t>(lvl.entries.size());
        op->conv.push_back(std::move(lvl));
    }
    slot = std::move(op);
    return *slot;
}

void EnvironmentLight::init(int n_bands, int w, int h, int n_levels, bool shared) {
    if (w < 4 || h < 2) throw std::runtime_error("environment map too small");
    width = w;
    height = h;
    levels = n_levels;
    shared_across_bands = shared;
    base.assign(shared ? 1 : n_bands, Image(w, h, 3, 0.0));
    mips.clear();
    rebuild();
}

void EnvironmentLight::rebuild() {
    const PrefilterOp& op = PrefilterOp::get(width, height, levels);
    mips.resize(base.size());
    for (size_t m = 0; m < base.size(); ++m) {
        auto& chain = mips[m];
        chain.assign(levels, Image());
        chain[0] = Image(width, height, 3);
        for (size_t i = 0; i < base[m].data.size(); ++i)
            chain[0].data[i] = base[m].data[i] > 0.0 ? base[m].data[i] : 0.0;
        for (int k = 1; k < levels; ++k) chain[k] = Image(op.conv[k - 1].width, op.conv[k - 1].height, 3);
    }
    // One task per (map, level): each gathers from the shared level 0.
    parallel_for(base.size() * (levels - 1), [&](size_t task) {
        const size_t m = task / (levels - 1);
        const int k = static_cast<int>(task % (levels - 1)) + 1;
        const auto& lvl = op.conv[k - 1];
        const Image& base_mip = mips[m][0];
        Image& out = mips[m][k];
        const int n = lvl.width * lvl.height;
        for (int o = 0; o < n; ++o) {
            double acc[3] = {0, 0, 0};
            for (uint32_t e = lvl.offsets[o]; e < lvl.offsets[o + 1]; ++e) {
                const auto& [j, w] = lvl.entries[e];
                acc[0] += w * base_mip.data[j * 3 + 0];
                acc[1] += w * base_mip.data[j * 3 + 1];
                acc[2] += w * base_mip.data[j * 3 + 2];
            }
            out.data[o * 3 + 0] = acc[0];
            out.data[o * 3 + 1] = acc[1];
            out.data[o * 3 + 2] = acc[2];
        }
    });
}

void EnvironmentLight::validate() const {
    if (mips.size() != base.size()) throw std::runtime_error("environment mips not built");
    for (const auto& chain : mips) {
        if (static_cast<int>(chain.size()) != levels)
            throw std::runtime_error("environment mip chain incomplete");
        for (const auto& im : chain)
            for (double v : im.data)
                if (v < 0.0 || !std::isfinite(v))
                    throw std::runtime_error("environment radiance must be finite and non-negative");
    }
}

void EnvMapGrad::init(const EnvironmentLight& env) {
    level_grads.assign(env.levels, {});
    for (int k = 0; k < env.levels; ++k) {
        int w, h;
        env_level_dims(env.width, env.height, k, w, h);
        level_grads[k].assign(static_cast<size_t>(w) * h * 3, 0.0);
    }
}

std::vector<double> EnvMapGrad::fold_to_base(const EnvironmentLight& env, int map) const {
    const PrefilterOp& op = PrefilterOp::get(env.width, env.height, env.levels);

    // Transposed GGX gathers push every level's adjoints onto level 0.
    std::vector<double> gmip0 = level_grads[0];
    for (int k = env.levels - 1; k >= 1; --k) {
        const auto& lvl = op.conv[k - 1];
        const int n = lvl.width * lvl.height;
        for (int o = 0; o < n; ++o) {
            const double* g = &level_grads[k][o * 3];
            if (g[0] == 0.0 && g[1] == 0.0 && g[2] == 0.0) continue;
            for (uint32_t e = lvl.offsets[o]; e < lvl.offsets[o + 1]; ++e) {
                const auto& [j, w] = lvl.entries[e];
                gmip0[j * 3 + 0] += w * g[0];
                gmip0[j * 3 + 1] += w * g[1];
                gmip0[j * 3 + 2] += w * g[2];
            }
        }
    }

    std::vector<double> gbase(static_cast<size_t>(env.width) * env.height * 3, 0.0);
    for (size_t i = 0; i < gbase.size(); ++i)
        gbase[i] = env.base[map].data[i] > 0.0 ? gmip0[i] : 0.0;  // relu mask
    return gbase;
}

}  // namespace sgs
