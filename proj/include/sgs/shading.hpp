#pragma once

#include "sgs/color.hpp"
#include "sgs/envmap.hpp"
#include "sgs/ggx.hpp"
#include "sgs/math.hpp"

namespace sgs {

struct ShadingConfig {
    double roughness_floor = 0.02;
    GammaMode gamma = GammaMode::srgb;
    bool use_quadrature = false;
    int quad_theta = 32;
    int quad_phi = 64;
    // Lobe axis for the quadrature NDF argument; the prefiltered path always
    // uses the reflection direction.
    bool half_vector_lobe = false;
    // Skip tone mapping and clipping (linear radiance output).
    bool linear_output = false;
};

struct ShadingSample {
    Vec3 omega_o;  // unit, toward camera
    Vec3 n;        // unit
    int band = 0;
    Vec3 diffuse;
    Vec3 tint;
    double roughness = 0.5;

    void validate() const;
};

template <class T>
Vec3T<T> reflect_t(const Vec3T<T>& omega_o, const Vec3T<T>& n) {
    const T two_cos = T(2.0) * dot(omega_o, n);
    return {two_cos * n.x - omega_o.x, two_cos * n.y - omega_o.y, two_cos * n.z - omega_o.z};
}

Vec3 reflect(const Vec3& omega_o, const Vec3& n);

// Moment tables of the clipped specular lobe D(w.r; rho)(w.n)+ over the
// hemisphere around n, indexed by (rho, mu = r.n):
//   scale   - total integral (the specular magnitude),
//   theta   - angle of the lobe centroid from the normal,
//   rho_eff - roughness whose unclipped lobe matches the in-plane spread,
//   beta_a  - azimuthal half-angle carrying the excess horizon-parallel
//             spread of the clipped lobe (two-tap correction),
//   tap_p1/tap_p2/tap_w1 - asymmetric in-plane tap offsets and first-tap
//             weight matching the spread and skew left over by the ladder.
// Row-major [rho][mu].
constexpr int kSpecTableRes = 65;
constexpr double kSpecTableRhoMin = 0.02;

struct SpecLobeTables {
    std::vector<double> scale, theta, rho_eff, beta_a, tap_p1, tap_p2, tap_w1;
};
const SpecLobeTables& spec_lobe_tables();

template <class T>
T spec_table_lookup(const double* tab, const T& rho, const T& mu) {
    constexpr int n = kSpecTableRes;
    const T x = (clamp(rho, kSpecTableRhoMin, 1.0) - T(kSpecTableRhoMin)) *
                T((n - 1) / (1.0 - kSpecTableRhoMin));
    const T y = clamp(mu, 0.0, 1.0) * T(double(n - 1));
    int ix = static_cast<int>(std::floor(val(x)));
    int iy = static_cast<int>(std::floor(val(y)));
    if (ix > n - 2) ix = n - 2;
    if (iy > n - 2) iy = n - 2;
    if (ix < 0) ix = 0;
    if (iy < 0) iy = 0;
    const T tx = x - T(double(ix));
    const T ty = y - T(double(iy));
    const double c00 = tab[ix * n + iy], c10 = tab[(ix + 1) * n + iy];
    const double c01 = tab[ix * n + iy + 1], c11 = tab[(ix + 1) * n + iy + 1];
    const T one(1.0);
    return (one - tx) * ((one - ty) * T(c00) + ty * T(c01)) +
           tx * ((one - ty) * T(c10) + ty * T(c11));
}

template <class T>
T spec_scale_lookup(const T& rho, const T& mu) {
    return spec_table_lookup(spec_lobe_tables().scale.data(), rho, mu);
}

// Split-sum specular: normalized prefiltered radiance looked up along the
// clipped-lobe centroid at a spread-matched mip, scaled by the lobe's
// projected-hemisphere integral.
template <class T, class Fetch>
Vec3T<T> specular_prefiltered_t(const Vec3T<T>& omega_o, const Vec3T<T>& n, const T& rough,
                                const Fetch& fetch, int env_w, int env_h, int env_levels,
                                const ShadingConfig& cfg) {
    using sgs::ad::max;
    using std::cos;
    using std::max;
    using std::sin;
    const T mu = dot(omega_o, n);
    if (val(mu) <= 0.0) return {T(0.0), T(0.0), T(0.0)};
    const Vec3T<T> r = reflect_t(omega_o, n);

    const SpecLobeTables& tabs = spec_lobe_tables();
    const T rho_s = max(rough, T(cfg.roughness_floor));
    const T s = spec_table_lookup(tabs.scale.data(), rho_s, mu);
    const T theta = spec_table_lookup(tabs.theta.data(), rho_s, mu);
    const T rho_eff = spec_table_lookup(tabs.rho_eff.data(), rho_s, mu);
    const T beta_a = spec_table_lookup(tabs.beta_a.data(), rho_s, mu);
    const T tap_p1 = spec_table_lookup(tabs.tap_p1.data(), rho_s, mu);
    const T tap_p2 = spec_table_lookup(tabs.tap_p2.data(), rho_s, mu);
    const T tap_w1 = spec_table_lookup(tabs.tap_w1.data(), rho_s, mu);

    const T level = (rho_eff - T(kSpecTableRhoMin)) *
                    T(double(env_levels - 1) / (1.0 - kSpecTableRhoMin));

    // Centroid direction inside the (n, r) plane, plus the in-plane and
    // horizon-parallel axes for the extra taps.
    const Vec3T<T> rp{r.x - mu * n.x, r.y - mu * n.y, r.z - mu * n.z};
    const T rp_len = norm(rp);
    Vec3T<T> dir, in_plane, az;
    bool have_frame = false;
    if (val(rp_len) < 1e-12) {
        dir = n;
    } else {
        const T cs = cos(theta);
        const T sn = sin(theta);
        const T inv = T(1.0) / rp_len;
        Vec3T<T> th{rp.x * inv, rp.y * inv, rp.z * inv};
        dir = {cs * n.x + sn * th.x, cs * n.y + sn * th.y, cs * n.z + sn * th.z};
        in_plane = {cs * th.x - sn * n.x, cs * th.y - sn * n.y, cs * th.z - sn * n.z};
        az = cross(n, th);
        have_frame = true;
    }

    const bool split_p = have_frame && (val(tap_p1) != 0.0 || val(tap_p2) != 0.0);
    const bool split_a = have_frame && val(beta_a) > 1e-4;
    const T ca = split_a ? cos(beta_a) : T(1.0);
    const T sa = split_a ? sin(beta_a) : T(0.0);
    const int np = split_p ? 2 : 1, na = split_a ? 2 : 1;

    Vec3T<T> p{T(0.0), T(0.0), T(0.0)};
    for (int ip = 0; ip < np; ++ip) {
        Vec3T<T> e = dir;
        T wp(1.0);
        if (split_p) {
            const T o = ip == 0 ? tap_p1 : tap_p2;
            wp = ip == 0 ? tap_w1 : T(1.0) - tap_w1;
            const T co = cos(o), so = sin(o);
            e = {co * dir.x + so * in_plane.x, co * dir.y + so * in_plane.y,
                 co * dir.z + so * in_plane.z};
        }
        for (int ia = 0; ia < na; ++ia) {
            const T sgn_a(ia == 0 ? 1.0 : -1.0);
            Vec3T<T> f = e;
            if (split_a)
                f = {ca * e.x + sgn_a * sa * az.x, ca * e.y + sgn_a * sa * az.y,
                     ca * e.z + sgn_a * sa * az.z};
            const Vec3T<T> tap = env_trilerp(fetch, env_w, env_h, env_levels, f, level);
            const T w = wp * T(1.0 / na);
            for (int c = 0; c < 3; ++c) p[c] += w * tap[c];
        }
    }
    return {p.x * s, p.y * s, p.z * s};
}

// Tone-mapped splat color: gamma(c_d + s * L_s), clipped to [0, 1].
template <class T, class Fetch>
Vec3T<T> shade_splat_t(const Vec3T<T>& omega_o, const Vec3T<T>& n, const Vec3T<T>& diffuse,
                       const Vec3T<T>& tint, const T& rough, const Fetch& fetch, int env_w,
                       int env_h, int env_levels, const ShadingConfig& cfg) {
    const Vec3T<T> ls =
        specular_prefiltered_t(omega_o, n, rough, fetch, env_w, env_h, env_levels, cfg);
    Vec3T<T> out;
    for (int c = 0; c < 3; ++c) {
        const T lin = diffuse[c] + tint[c] * ls[c];
        out[c] = cfg.linear_output ? lin
                                   : clamp(gamma_encode_scalar(lin, cfg.gamma), 0.0, 1.0);
    }
    return out;
}

// Fixed equal-solid-angle hemisphere quadrature of the specular integral;
// reference path for tests and validation of the prefiltered approximation.
Vec3 specular_light_quadrature(const ShadingSample& sample, const EnvironmentLight& env,
                               const ShadingConfig& cfg = {});

Vec3 specular_light_prefiltered(const ShadingSample& sample, const EnvironmentLight& env,
                                const ShadingConfig& cfg = {});

Vec3 shade(const ShadingSample& sample, const EnvironmentLight& env, bool use_quadrature,
           const ShadingConfig& cfg = {});

}  // namespace sgs
