#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sgs/image.hpp"
#include "sgs/math.hpp"

namespace sgs {

// Color matching functions sampled on an ascending wavelength grid.
struct CmfTable {
    std::vector<double> wavelengths_nm;
    std::vector<double> fx, fy, fz;

    // Bundled CIE 1931 2-degree observer, 380-780nm at 5nm.
    static const CmfTable& cie_1931_2deg_5nm();

    // Plain-text table: one row per wavelength, "lambda_nm fx fy fz".
    static CmfTable from_file(const std::string& path);

    void validate() const;
    double min_wavelength() const { return wavelengths_nm.front(); }
    double max_wavelength() const { return wavelengths_nm.back(); }

    // Linear interpolation. Throws if lambda is outside the table range.
    Vec3 sample(double lambda_nm) const;
};

// Spectral power distribution on a uniform wavelength grid.
struct Spd {
    std::vector<std::pair<double, double>> samples;  // (wavelength_nm, power)
    double delta_lambda_nm = 0.0;

    void validate() const;
};

enum class ColorMatrixKind { xyz_to_linear_rgb, xyz_to_srgb_combined };

struct ColorMatrix {
    Mat3 m;
    ColorMatrixKind kind = ColorMatrixKind::xyz_to_linear_rgb;

    // Standard sRGB/D65 matrix.
    static ColorMatrix srgb_linear();
    static ColorMatrix srgb_combined();

    void validate() const;  // must be invertible
};

struct Band {
    double center_nm = 0.0;
    double delta_nm = 0.0;
    bool is_full = false;

    std::string name() const;
};

// Spectral bands plus the distinguished full-spectra pseudo-band.
struct BandTable {
    std::vector<Band> bands;

    static BandTable with_full(const std::vector<std::pair<double, double>>& spectral);

    void validate() const;
    int size() const { return static_cast<int>(bands.size()); }
    int full_index() const;
    std::vector<int> spectral_indices() const;
    bool operator==(const BandTable& o) const;
};

// xyz = sum over samples of cmf(lambda) * power * delta_lambda.
Vec3 tristimulus(const Spd& spd, const CmfTable& cmf);

Vec3 xyz_to_linear_rgb(const Vec3& xyz, const ColorMatrix& m);

enum class GammaMode { srgb, power22 };

template <class T>
T gamma_encode_scalar(const T& v, GammaMode mode = GammaMode::srgb) {
    using std::pow;
    if (val(v) < 0.0) return T(0.0);
    if (mode == GammaMode::srgb) {
        if (val(v) <= 0.0031308) return T(12.92) * v;
        return T(1.055) * pow(v, 1.0 / 2.4) - T(0.055);
    }
    return pow(v, 1.0 / 2.2);
}

double gamma_decode_scalar(double v, GammaMode mode = GammaMode::srgb);

Vec3 gamma_encode(const Vec3& rgb, GammaMode mode = GammaMode::srgb);
Vec3 gamma_decode(const Vec3& rgb, GammaMode mode = GammaMode::srgb);

Vec3 clip01(const Vec3& rgb);

// Per-band RGB weight: row i = sum_j m[i][j] * f_j(lambda), scaled by
// delta_lambda. The band's display contribution is weight * radiance.
Vec3 band_rgb_weight(double lambda_nm, double delta_lambda_nm, const CmfTable& cmf,
                     const ColorMatrix& m);

// Pixelwise sum of weighted linear band radiance maps, then gamma + clip.
// band_images must hold one image per non-full band, in band-table order.
Image combine_bands(const std::vector<Image>& band_images, const BandTable& table,
                    const CmfTable& cmf, const ColorMatrix& m, GammaMode mode = GammaMode::srgb);

}  // namespace sgs
