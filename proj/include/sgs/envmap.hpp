#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "sgs/autodiff.hpp"
#include "sgs/image.hpp"
#include "sgs/math.hpp"

namespace sgs {

// Equirectangular direction mapping. v runs with the polar angle from +Z,
// u with atan2(y, x); u wraps, v clamps.
template <class T>
void dir_to_equirect(const Vec3T<T>& d, T& u, T& v) {
    using std::acos;
    using std::atan2;
    const T phi = atan2(d.y, d.x);
    const T theta = acos(clamp(d.z, -1.0 + 1e-12, 1.0 - 1e-12));
    u = (phi + T(kPi)) * T(1.0 / (2.0 * kPi));
    v = theta * T(1.0 / kPi);
}

Vec3 equirect_texel_dir(int ix, int iy, int width, int height);
// Exact solid angle of one texel in the given row.
double equirect_texel_solid_angle(int iy, int width, int height);

// Mip level resolution: 2^level-downsampled with a floor that keeps deep
// levels bilinear-faithful.
inline void env_level_dims(int width, int height, int level, int& w, int& h) {
    w = std::max(std::min(width, 16), width >> level);
    h = std::max(std::min(height, 8), height >> level);
}

// Normalized GGX-weighted gather from the full-resolution base map to each
// texel of the 2^k-downsampled level, stored sparsely. Shared per
// (width, height, levels).
struct PrefilterOp {
    struct Level {
        int width = 0, height = 0;
        double rho = 0.0;
        std::vector<uint32_t> offsets;                 // per output texel, into entries
        std::vector<std::pair<uint32_t, float>> entries;  // (base texel, weight)
    };
    int width = 0, height = 0, levels = 0;
    std::vector<Level> conv;  // levels 1..levels-1

    static const PrefilterOp& get(int width, int height, int levels);
};

// Per-band environment light: raw learnable texels plus the derived mip
// chain (level 0 is the non-negative base radiance).
struct EnvironmentLight {
    int width = 0, height = 0, levels = 0;
    bool shared_across_bands = false;
    std::vector<Image> base;                // raw, one per band (or one when shared)
    std::vector<std::vector<Image>> mips;   // [map][level]

    void init(int n_bands, int w, int h, int n_levels, bool shared);
    int map_count() const { return static_cast<int>(base.size()); }
    int map_index(int band) const { return shared_across_bands ? 0 : band; }

    // Rebuild every mip chain from the raw base maps. Must be called after
    // any mutation of base.
    void rebuild();

    void validate() const;
};

// Gradient buffers for one environment map, per mip level; fold_to_base
// applies the transposed prefilter and the relu mask.
struct EnvMapGrad {
    std::vector<std::vector<double>> level_grads;  // [level][texel*3 + ch]

    void init(const EnvironmentLight& env);
    void accumulate(int level, int texel, int ch, double g) { level_grads[level][texel * 3 + ch] += g; }
    // Returns d(loss)/d(base raw texels) as a flat W*H*3 vector.
    std::vector<double> fold_to_base(const EnvironmentLight& env, int map) const;
};

// Fetch adaptors for the templated samplers below. The double version reads
// mip texels; the tape version creates tracked leaves and logs their node
// ids so adjoints can be routed back to (level, texel) slots.
struct EnvFetch {
    const EnvironmentLight* env;
    int map;

    Vec3 operator()(int level, int texel) const {
        const Image& im = env->mips[map][level];
        return {im.data[texel * 3 + 0], im.data[texel * 3 + 1], im.data[texel * 3 + 2]};
    }
};

struct EnvFetchTape {
    const EnvironmentLight* env;
    int map;
    // (level, texel, channel, leaf node index)
    std::vector<std::array<int, 4>>* log;

    Vec3T<ad::Var> operator()(int level, int texel) const {
        const Image& im = env->mips[map][level];
        Vec3T<ad::Var> out;
        for (int c = 0; c < 3; ++c) {
            ad::Var leaf = ad::Var::leaf(im.data[texel * 3 + c]);
            log->push_back({level, texel, c, leaf.i});
            out[c] = leaf;
        }
        return out;
    }
};

// Bilinear sample of one mip level at (u, v); u wraps, v clamps.
template <class T, class Fetch>
Vec3T<T> env_bilerp(const Fetch& fetch, int width, int height, int level, const T& u, const T& v) {
    int w, h;
    env_level_dims(width, height, level, w, h);

    const T fu = u * T(double(w)) - T(0.5);
    const T fv = v * T(double(h)) - T(0.5);
    const int iu0 = static_cast<int>(std::floor(val(fu)));
    const int iv0f = static_cast<int>(std::floor(val(fv)));
    T tu = fu - T(double(iu0));
    T tv = fv - T(double(iv0f));

    const int u0 = ((iu0 % w) + w) % w;
    const int u1 = (u0 + 1) % w;
    int v0 = iv0f, v1 = iv0f + 1;
    if (v0 < 0) { v0 = 0; v1 = 0; tv = T(0.0); }
    else if (v1 > h - 1) { v0 = h - 1; v1 = h - 1; tv = T(0.0); }

    const Vec3T<T> c00 = fetch(level, v0 * w + u0);
    const Vec3T<T> c10 = fetch(level, v0 * w + u1);
    const Vec3T<T> c01 = fetch(level, v1 * w + u0);
    const Vec3T<T> c11 = fetch(level, v1 * w + u1);

    const T one(1.0);
    Vec3T<T> out;
    for (int c = 0; c < 3; ++c)
        out[c] = (one - tv) * ((one - tu) * c00[c] + tu * c10[c]) +
                 tv * ((one - tu) * c01[c] + tu * c11[c]);
    return out;
}

// Trilinear sample: bilinear on the two mip levels bracketing `level`.
template <class T, class Fetch>
Vec3T<T> env_trilerp(const Fetch& fetch, int width, int height, int levels, const Vec3T<T>& dir,
                     const T& level) {
    T u, v;
    dir_to_equirect(dir, u, v);
    const T lv = clamp(level, 0.0, double(levels - 1));
    int l0 = static_cast<int>(std::floor(val(lv)));
    if (l0 > levels - 2) l0 = levels - 2;
    if (levels == 1) l0 = 0;
    const T tl = lv - T(double(l0));

    const Vec3T<T> a = env_bilerp(fetch, width, height, l0, u, v);
    if (levels == 1) return a;
    const Vec3T<T> b = env_bilerp(fetch, width, height, l0 + 1, u, v);
    Vec3T<T> out;
    const T one(1.0);
    for (int c = 0; c < 3; ++c) out[c] = (one - tl) * a[c] + tl * b[c];
    return out;
}

}  // namespace sgs
