#include "sgs/shading.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace sgs {

namespace {

void orthonormal_frame(const Vec3& n, Vec3& t1, Vec3& t2) {
    const Vec3 a = std::abs(n.z) < 0.9 ? Vec3{0, 0, 1} : Vec3{1, 0, 0};
    t1 = normalize(cross(a, n));
    t2 = cross(n, t1);
}

}  // namespace

void ShadingSample::validate() const {
    if (std::abs(norm(omega_o) - 1.0) > 1e-9 || std::abs(norm(n) - 1.0) > 1e-9)
        throw std::runtime_error("shading sample directions must be unit vectors");
}

Vec3 reflect(const Vec3& omega_o, const Vec3& n) { return reflect_t(omega_o, n); }

namespace {

// Second moment of the unclipped kernel D(w.d)(w.d)+ along any axis
// perpendicular to d.
double kernel_axis_moment(double rho, int samples = 512) {
    const double alpha = rho * rho;
    const double a2 = alpha * alpha;
    double acc = 0.0;
    for (int a = 0; a < samples; ++a) {
        const double u1 = (a + 0.5) / samples;
        const double c2 = (1.0 - u1) / (1.0 + u1 * (a2 - 1.0));
        acc += c2;  // E_pdf[cos^2], pdf = D cos
    }
    return 0.5 * (1.0 - acc / samples);  // E[sin^2]/2 split across two axes
}

}  // namespace

const SpecLobeTables& spec_lobe_tables() {
    static const SpecLobeTables tables = [] {
        constexpr int n = kSpecTableRes;
        SpecLobeTables t;
        t.scale.resize(n * n);
        t.theta.resize(n * n);
        t.rho_eff.resize(n * n);
        t.beta_a.resize(n * n);
        t.tap_p1.resize(n * n);
        t.tap_p2.resize(n * n);
        t.tap_w1.resize(n * n);

        // Monotone kernel axis-moment curve for the rho_eff inversion.
        constexpr int n_curve = 257;
        std::array<double, n_curve> curve_rho{}, curve_m{};
        for (int i = 0; i < n_curve; ++i) {
            curve_rho[i] = kSpecTableRhoMin + (1.0 - kSpecTableRhoMin) * i / (n_curve - 1);
            curve_m[i] = kernel_axis_moment(curve_rho[i]);
        }
        auto rho_from_moment = [&](double s) {
            if (s <= curve_m.front()) return curve_rho.front();
            if (s >= curve_m.back()) return curve_rho.back();
            const auto it = std::lower_bound(curve_m.begin(), curve_m.end(), s);
            const size_t hi = static_cast<size_t>(it - curve_m.begin());
            const double f = (s - curve_m[hi - 1]) / (curve_m[hi] - curve_m[hi - 1]);
            return curve_rho[hi - 1] + f * (curve_rho[hi] - curve_rho[hi - 1]);
        };
        auto moment_of_rho = [&](double rho) {
            const double x = (rho - kSpecTableRhoMin) / (1.0 - kSpecTableRhoMin) * (n_curve - 1);
            const int i0 = std::min(n_curve - 2, std::max(0, static_cast<int>(x)));
            const double f = x - i0;
            return curve_m[i0] + f * (curve_m[i0 + 1] - curve_m[i0]);
        };

        constexpr int imp = 128;  // importance grid per axis

        for (int i = 0; i < n; ++i) {
            const double rho = kSpecTableRhoMin + (1.0 - kSpecTableRhoMin) * i / (n - 1);
            const double alpha = rho * rho;
            const double a2 = alpha * alpha;
            for (int j = 0; j < n; ++j) {
                const double mu = double(j) / (n - 1);
                const double sa = std::sqrt(std::max(0.0, 1.0 - mu * mu));
                // Normal along +Z, lobe axis r tilted into the XZ plane.
                const Vec3 nrm{0.0, 0.0, 1.0};
                const Vec3 r{sa, 0.0, mu};
                Vec3 t1, t2;
                orthonormal_frame(r, t1, t2);

                // Lobe side: importance grid around r (covers w.r > 0).
                double s_acc = 0.0, cx = 0.0, cz = 0.0;
                double mxx = 0.0, mzz = 0.0, mxz = 0.0, myy = 0.0;
                double mxxx = 0.0, mxxz = 0.0, mxzz = 0.0, mzzz = 0.0;
                auto deposit = [&](const Vec3& w, double wgt) {
                    s_acc += wgt;
                    cx += wgt * w.x;
                    cz += wgt * w.z;
                    mxx += wgt * w.x * w.x;
                    mzz += wgt * w.z * w.z;
                    mxz += wgt * w.x * w.z;
                    myy += wgt * w.y * w.y;
                    mxxx += wgt * w.x * w.x * w.x;
                    mxxz += wgt * w.x * w.x * w.z;
                    mxzz += wgt * w.x * w.z * w.z;
                    mzzz += wgt * w.z * w.z * w.z;
                };
                const double inv_imp = 1.0 / (double(imp) * imp);
                for (int a = 0; a < imp; ++a) {
                    const double u1 = (a + 0.5) / imp;
                    const double c2 = (1.0 - u1) / (1.0 + u1 * (a2 - 1.0));
                    const double ct = std::sqrt(c2);
                    const double st = std::sqrt(std::max(0.0, 1.0 - c2));
                    for (int b = 0; b < imp; ++b) {
                        const double phi = 2.0 * kPi * (b + 0.5) / imp;
                        const Vec3 w = ct * r + st * (std::cos(phi) * t1 + std::sin(phi) * t2);
                        if (w.z <= 0.0) continue;  // clipped by the surface
                        deposit(w, w.z / ct * inv_imp);
                    }
                }


                t.scale[i * n + j] = s_acc;
                const double clen = std::sqrt(cx * cx + cz * cz);
                const double theta_c = clen > 1e-12 ? std::atan2(cx, cz) : 0.0;
                t.theta[i * n + j] = theta_c;
                if (s_acc > 1e-12) {
                    // In-plane axis perpendicular to the centroid, pointing
                    // toward the horizon.
                    const double tc = std::cos(theta_c), ts = std::sin(theta_c);
                    const double m_p = (tc * tc * mxx + ts * ts * mzz - 2.0 * tc * ts * mxz) / s_acc;
                    const double m_a = myy / s_acc;
                    const double m3_p = (tc * tc * tc * mxxx - 3.0 * tc * tc * ts * mxxz +
                                         3.0 * tc * ts * ts * mxzz - ts * ts * ts * mzzz) / s_acc;
                    const double re = rho_from_moment(m_p);
                    t.rho_eff[i * n + j] = re;
                    const double mk = moment_of_rho(re);
                    const double excess_a = m_a - mk;
                    t.beta_a[i * n + j] = excess_a > 0.0 ? std::min(1.3, std::sqrt(excess_a)) : 0.0;

                    // Two asymmetric in-plane taps reproduce the variance and
                    // skew the capped ladder cannot express.
                    const double excess_p = m_p - mk;
                    double o1 = 0.0, o2 = 0.0, w1 = 1.0;
                    if (excess_p > 1e-6) {
                        const double g = std::abs(m3_p) / std::pow(excess_p, 1.5);
                        const double tq = 0.5 * (-g + std::sqrt(g * g + 4.0));
                        const double kappa = tq * tq;
                        o1 = std::sqrt(excess_p / kappa);
                        if (m3_p < 0.0) o1 = -o1;
                        o2 = -kappa * o1;
                        w1 = kappa / (1.0 + kappa);
                        o1 = std::clamp(o1, -1.3, 1.3);
                        o2 = std::clamp(o2, -1.3, 1.3);
                    }
                    t.tap_p1[i * n + j] = o1;
                    t.tap_p2[i * n + j] = o2;
                    t.tap_w1[i * n + j] = w1;
                } else {
                    t.rho_eff[i * n + j] = rho;
                    t.beta_a[i * n + j] = 0.0;
                    t.tap_p1[i * n + j] = 0.0;
                    t.tap_p2[i * n + j] = 0.0;
                    t.tap_w1[i * n + j] = 1.0;
                }
            }
        }
        return t;
    }();
    return tables;
}

Vec3 specular_light_quadrature(const ShadingSample& sample, const EnvironmentLight& env,
                               const ShadingConfig& cfg) {
    sample.validate();
    const Vec3& n = sample.n;
    const Vec3& wo = sample.omega_o;
    if (dot(wo, n) <= 0.0) return {0, 0, 0};

    const double rho = std::max(sample.roughness, cfg.roughness_floor);
    const Vec3 r = reflect(wo, n);
    Vec3 t1, t2;
    orthonormal_frame(n, t1, t2);

    const int map = env.map_index(sample.band);
    const EnvFetch fetch{&env, map};
    const double dw = 2.0 * kPi / (double(cfg.quad_theta) * cfg.quad_phi);

    Vec3 acc{0, 0, 0};
    for (int i = 0; i < cfg.quad_theta; ++i) {
        const double ct = (i + 0.5) / cfg.quad_theta;  // cos(theta), equal solid angle
        const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
        for (int j = 0; j < cfg.quad_phi; ++j) {
            const double phi = 2.0 * kPi * (j + 0.5) / cfg.quad_phi;
            const Vec3 w = ct * n + st * (std::cos(phi) * t1 + std::sin(phi) * t2);
            double cl;  // cosine at the lobe axis
            if (cfg.half_vector_lobe) {
                cl = dot(normalize(w + wo), n);
            } else {
                cl = dot(w, r);
            }
            const double d = ggx_ndf_t(cl, rho);
            double u, v;
            dir_to_equirect(w, u, v);
            const Vec3 radiance = env_bilerp(fetch, env.width, env.height, 0, u, v);
            const double s = d * ct * dw;
            acc.x += radiance.x * s;
            acc.y += radiance.y * s;
            acc.z += radiance.z * s;
        }
    }
    return acc;
}

Vec3 specular_light_prefiltered(const ShadingSample& sample, const EnvironmentLight& env,
                                const ShadingConfig& cfg) {
    sample.validate();
    const EnvFetch fetch{&env, env.map_index(sample.band)};
    const Vec3T<double> ls = specular_prefiltered_t<double>(
        sample.omega_o, sample.n, sample.roughness, fetch, env.width, env.height, env.levels, cfg);
    return {ls.x, ls.y, ls.z};
}

Vec3 shade(const ShadingSample& sample, const EnvironmentLight& env, bool use_quadrature,
           const ShadingConfig& cfg) {
    if (!use_quadrature) {
        const EnvFetch fetch{&env, env.map_index(sample.band)};
        const Vec3T<double> c =
            shade_splat_t<double>(sample.omega_o, sample.n, sample.diffuse, sample.tint,
                                  sample.roughness, fetch, env.width, env.height, env.levels, cfg);
        return {c.x, c.y, c.z};
    }
    const Vec3 ls = specular_light_quadrature(sample, env, cfg);
    Vec3 out;
    for (int c = 0; c < 3; ++c) {
        const double v = sample.diffuse[c] + sample.tint[c] * ls[c];
        out[c] = cfg.linear_output ? v : clamp(gamma_encode_scalar(v, cfg.gamma), 0.0, 1.0);
    }
    return out;
}

}  // namespace sgs
