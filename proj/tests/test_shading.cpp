#include <cmath>
#include <random>

#include "doctest.h"
#include "sgs/shading.hpp"

using namespace sgs;

namespace {

Vec3 random_unit(std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    return normalize(Vec3{g(rng), g(rng), g(rng)});
}

// Broad positive lobes plus an ambient floor; low-frequency by construction.
EnvironmentLight smooth_env(uint64_t seed, int w = 32, int h = 16, int levels = 3) {
    EnvironmentLight env;
    env.init(1, w, h, levels, true);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> amp(0.2, 0.6);
    std::vector<Vec3> dirs;
    std::vector<Vec3> colors;
    for (int i = 0; i < 3; ++i) {
        dirs.push_back(random_unit(rng));
        colors.push_back({amp(rng), amp(rng), amp(rng)});
    }
    const double ambient = 0.5 + 0.8 * amp(rng);
    Image& base = env.base[0];
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const Vec3 d = equirect_texel_dir(x, y, w, h);
            Vec3 v{ambient, ambient, ambient};
            for (size_t i = 0; i < dirs.size(); ++i) {
                const double c = std::max(0.0, dot(d, dirs[i]));
                const double f = c * c;
                v.x += colors[i].x * f;
                v.y += colors[i].y * f;
                v.z += colors[i].z * f;
            }
            base.at(x, y, 0) = v.x;
            base.at(x, y, 1) = v.y;
            base.at(x, y, 2) = v.z;
        }
    env.rebuild();
    return env;
}

ShadingSample random_sample(std::mt19937_64& rng, double rho_lo = 0.5, double rho_hi = 1.0) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    ShadingSample s;
    s.n = random_unit(rng);
    // Keep the view above the horizon and away from grazing.
    do {
        s.omega_o = random_unit(rng);
    } while (dot(s.omega_o, s.n) < 0.05);
    s.band = 0;
    s.diffuse = {u(rng), u(rng), u(rng)};
    s.tint = {u(rng), u(rng), u(rng)};
    s.roughness = rho_lo + (rho_hi - rho_lo) * u(rng);
    return s;
}

}  // namespace

TEST_CASE("reflect basics") {
    const Vec3 n{0, 0, 1};
    Vec3 r = reflect(n, n);
    CHECK(r.x == doctest::Approx(0.0));
    CHECK(r.z == doctest::Approx(1.0));

    const Vec3 wo{1, 0, 0};  // perpendicular to n
    r = reflect(wo, n);
    CHECK(r.x == doctest::Approx(-1.0));
    CHECK(r.y == doctest::Approx(0.0));
    CHECK(r.z == doctest::Approx(0.0));
}

TEST_CASE("reflect preserves the incidence angle") {
    std::mt19937_64 rng(31);
    for (int t = 0; t < 100; ++t) {
        const Vec3 n = random_unit(rng);
        const Vec3 wo = random_unit(rng);
        const Vec3 r = reflect(wo, n);
        CHECK(std::abs(norm(r) - 1.0) < 1e-12);
        CHECK(std::abs(dot(r, n) - dot(wo, n)) < 1e-12);
        const double ar = std::acos(clamp(dot(r, n), -1.0, 1.0));
        const double ao = std::acos(clamp(dot(wo, n), -1.0, 1.0));
        CHECK(std::abs(ar - ao) < 1e-9);
    }
}

TEST_CASE("ggx peak and tail values") {
    CHECK(ggx_ndf(1.0, 1.0) == doctest::Approx(1.0 / kPi).epsilon(1e-12));
    // cos = 1 with alpha = rho^2: 1 / (pi alpha^2)
    CHECK(ggx_ndf(1.0, 0.5) == doctest::Approx(1.0 / (kPi * 0.0625)).epsilon(1e-12));
    for (double rho : {0.3, 0.6, 1.0}) {
        const double a2 = rho * rho * rho * rho;
        CHECK(ggx_ndf(0.0, rho) == doctest::Approx(a2 / kPi).epsilon(1e-12));
    }
    CHECK_THROWS_WITH_AS(ggx_ndf(0.5, 0.0), "degenerate lobe", std::invalid_argument);
}

TEST_CASE("ggx integrates to one over the projected hemisphere") {
    // Quadrature on a 100x100 grid, uniform in cos^2(theta) so the lobe is
    // resolved at the roughness values the fixed grid can represent.
    for (double rho : {0.5, 0.7, 0.85, 1.0}) {
        double acc = 0.0;
        const int n = 100;
        for (int i = 0; i < n; ++i) {
            const double s = (i + 0.5) / n;  // s = cos^2(theta)
            const double ct = std::sqrt(s);
            const double d = ggx_ndf(ct, rho);
            // dw = d(cos t) dphi; with s = c^2, d(cos t) = ds / (2 c)
            for (int j = 0; j < n; ++j) acc += d * ct * (1.0 / n) / (2.0 * ct) * (2.0 * kPi / n);
        }
        CHECK(std::abs(acc - 1.0) < 0.02);
    }
}

TEST_CASE("specular quadrature on zero and constant environments") {
    EnvironmentLight env;
    env.init(1, 16, 8, 3, true);

    std::mt19937_64 rng(32);
    ShadingSample s = random_sample(rng);
    CHECK(specular_light_quadrature(s, env).x == 0.0);

    for (auto& v : env.base[0].data) v = 1.0;
    env.rebuild();
    const Vec3 one = specular_light_quadrature(s, env);
    for (auto& v : env.base[0].data) v = 2.5;
    env.rebuild();
    const Vec3 scaled = specular_light_quadrature(s, env);
    CHECK(scaled.x == doctest::Approx(2.5 * one.x).epsilon(1e-12));
    CHECK(scaled.y == doctest::Approx(2.5 * one.y).epsilon(1e-12));
}

TEST_CASE("prefiltered specular selects mip level by roughness") {
    EnvironmentLight env = smooth_env(33);
    std::mt19937_64 rng(34);
    ShadingSample s = random_sample(rng);
    s.roughness = 0.0;  // lower clamp: a sharp lobe reads the base level at r

    const Vec3 got = specular_light_prefiltered(s, env);
    const Vec3 r = reflect(s.omega_o, s.n);
    double u, v;
    dir_to_equirect(r, u, v);
    const EnvFetch fetch{&env, 0};
    const Vec3T<double> base = env_bilerp(fetch, env.width, env.height, 0, u, v);
    const double scale = spec_scale_lookup(0.02, dot(s.omega_o, s.n));
    CHECK(got.x == doctest::Approx(base.x * scale).epsilon(2e-2));
    CHECK(got.y == doctest::Approx(base.y * scale).epsilon(2e-2));

    // On a constant environment every level agrees, so the identity is exact.
    EnvironmentLight flat;
    flat.init(1, 16, 8, 3, true);
    for (auto& v2 : flat.base[0].data) v2 = 0.75;
    flat.rebuild();
    const Vec3 flat_ls = specular_light_prefiltered(s, flat);
    CHECK(flat_ls.x == doctest::Approx(0.75 * scale).epsilon(1e-9));

    EnvironmentLight zero;
    zero.init(1, 16, 8, 3, true);
    CHECK(specular_light_prefiltered(s, zero).x == 0.0);
}

TEST_CASE("prefiltered agrees with quadrature on smooth environments") {
    std::mt19937_64 rng(35);
    int checked = 0;
    for (int e = 0; e < 5; ++e) {
        EnvironmentLight env = smooth_env(100 + e);
        for (int t = 0; t < 20; ++t) {
            ShadingSample s = random_sample(rng);
            const Vec3 quad = specular_light_quadrature(s, env);
            const Vec3 pre = specular_light_prefiltered(s, env);
            for (int c = 0; c < 3; ++c) {
                const double err = std::abs(pre[c] - quad[c]);
                CHECK(err <= 0.10 * std::abs(quad[c]) + 1e-4);
            }
            ++checked;
        }
    }
    CHECK(checked == 100);
}

TEST_CASE("delta lobe concentrates on a single bright texel") {
    // Large texels (8x4 map), small roughness: the quadrature integral over a
    // bright texel at the reflection direction approaches radiance * scale.
    EnvironmentLight env;
    env.init(1, 8, 4, 2, true);
    const ShadingSample base = [] {
        ShadingSample s;
        s.n = {0, 0, 1};
        s.omega_o = {0, 0, 1};  // r = n = +z: the pole texel row
        s.band = 0;
        s.roughness = 0.3;
        return s;
    }();
    // Paint the top row (around +z) bright.
    for (int x = 0; x < 8; ++x)
        for (int c = 0; c < 3; ++c) env.base[0].at(x, 0, c) = 5.0;
    env.rebuild();
    ShadingConfig cfg;
    cfg.quad_theta = 256;  // fine oracle grid resolves the small lobe
    cfg.quad_phi = 512;
    const Vec3 ls = specular_light_quadrature(base, env, cfg);
    const double scale = spec_scale_lookup(0.3, 1.0);
    CHECK(ls.x == doctest::Approx(5.0 * scale).epsilon(0.15));
}

TEST_CASE("shade reduces to gamma(diffuse) without specular") {
    EnvironmentLight dark;
    dark.init(1, 16, 8, 3, true);
    std::mt19937_64 rng(36);
    ShadingSample s = random_sample(rng);

    const Vec3 c = shade(s, dark, false);
    for (int i = 0; i < 3; ++i)
        CHECK(c[i] == doctest::Approx(gamma_encode_scalar(s.diffuse[i])).epsilon(1e-12));

    EnvironmentLight env = smooth_env(37);
    s.tint = {0, 0, 0};
    const Vec3 c2 = shade(s, env, false);
    for (int i = 0; i < 3; ++i)
        CHECK(c2[i] == doctest::Approx(gamma_encode_scalar(s.diffuse[i])).epsilon(1e-12));
}

TEST_CASE("shade with quadrature matches the specular oracle") {
    EnvironmentLight env;
    env.init(1, 16, 8, 3, true);
    for (auto& v : env.base[0].data) v = 0.8;
    env.rebuild();
    std::mt19937_64 rng(38);
    ShadingSample s = random_sample(rng);
    s.diffuse = {0, 0, 0};
    s.tint = {1.0, 1.0, 1.0};
    const Vec3 ls = specular_light_quadrature(s, env);
    const Vec3 c = shade(s, env, true);
    for (int i = 0; i < 3; ++i)
        CHECK(c[i] == doctest::Approx(clamp(gamma_encode_scalar(ls[i]), 0.0, 1.0)).epsilon(1e-12));
}

TEST_CASE("shade is monotone in diffuse and environment radiance") {
    EnvironmentLight env = smooth_env(39);
    std::mt19937_64 rng(40);
    for (int t = 0; t < 25; ++t) {
        ShadingSample s = random_sample(rng, 0.1, 1.0);
        const Vec3 c0 = shade(s, env, false);
        ShadingSample s2 = s;
        s2.diffuse.x = std::min(1.0, s.diffuse.x + 0.05);
        const Vec3 c1 = shade(s2, env, false);
        CHECK(c1.x >= c0.x);

        EnvironmentLight brighter = env;
        for (auto& v : brighter.base[0].data) v *= 1.5;
        brighter.rebuild();
        const Vec3 c2 = shade(s, brighter, false);
        for (int i = 0; i < 3; ++i) CHECK(c2[i] >= c0[i] - 1e-12);
    }
}

TEST_CASE("shading outputs stay finite, including back-facing views") {
    EnvironmentLight env = smooth_env(41);
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 50; ++t) {
        ShadingSample s;
        s.n = random_unit(rng);
        s.omega_o = random_unit(rng);  // any hemisphere, including behind
        s.diffuse = {u(rng), u(rng), u(rng)};
        s.tint = {u(rng), u(rng), u(rng)};
        s.roughness = u(rng);
        for (bool quad : {false, true}) {
            const Vec3 c = shade(s, env, quad);
            for (int i = 0; i < 3; ++i) {
                CHECK(std::isfinite(c[i]));
                CHECK(c[i] >= 0.0);
                CHECK(c[i] <= 1.0);
            }
        }
    }
}
