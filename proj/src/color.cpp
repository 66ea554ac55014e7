#include "sgs/color.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "sgs/parallel.hpp"

namespace sgs {

namespace {

// CIE 1931 2-degree standard observer, 380-780nm at 5nm steps.
// clang-format off
constexpr double kCie1931[81][4] = {
    {380, 0.001368, 0.000039, 0.006450},
    {385, 0.002236, 0.000064, 0.010550},
    {390, 0.004243, 0.000120, 0.020050},
    {395, 0.007650, 0.000217, 0.036210},
    {400, 0.014310, 0.000396, 0.067850},
    {405, 0.023190, 0.000640, 0.110200},
    {410, 0.043510, 0.001210, 0.207400},
    {415, 0.077630, 0.002180, 0.371300},
    {420, 0.134380, 0.004000, 0.645600},
    {425, 0.214770, 0.007300, 1.039050},
    {430, 0.283900, 0.011600, 1.385600},
    {435, 0.328500, 0.016840, 1.622960},
    {440, 0.348280, 0.023000, 1.747060},
    {445, 0.348060, 0.029800, 1.782600},
    {450, 0.336200, 0.038000, 1.772110},
    {455, 0.318700, 0.048000, 1.744100},
    {460, 0.290800, 0.060000, 1.669200},
    {465, 0.251100, 0.073900, 1.528100},
    {470, 0.195360, 0.090980, 1.287640},
    {475, 0.142100, 0.112600, 1.041900},
    {480, 0.095640, 0.139020, 0.812950},
    {485, 0.057950, 0.169300, 0.616200},
    {490, 0.032010, 0.208020, 0.465180},
    {495, 0.014700, 0.258600, 0.353300},
    {500, 0.004900, 0.323000, 0.272000},
    {505, 0.002400, 0.407300, 0.212300},
    {510, 0.009300, 0.503000, 0.158200},
    {515, 0.029100, 0.608200, 0.111700},
    {520, 0.063270, 0.710000, 0.078250},
    {525, 0.109600, 0.793200, 0.057250},
    {530, 0.165500, 0.862000, 0.042160},
    {535, 0.225750, 0.914850, 0.029840},
    {540, 0.290400, 0.954000, 0.020300},
    {545, 0.359700, 0.980300, 0.013400},
    {550, 0.433450, 0.994950, 0.008750},
    {555, 0.512050, 1.000000, 0.005750},
    {560, 0.594500, 0.995000, 0.003900},
    {565, 0.678400, 0.978600, 0.002750},
    {570, 0.762100, 0.952000, 0.002100},
    {575, 0.842500, 0.915400, 0.001800},
    {580, 0.916300, 0.870000, 0.001650},
    {585, 0.978600, 0.816300, 0.001400},
    {590, 1.026300, 0.757000, 0.001100},
    {595, 1.056700, 0.694900, 0.001000},
    {600, 1.062200, 0.631000, 0.000800},
    {605, 1.045600, 0.566800, 0.000600},
    {610, 1.002600, 0.503000, 0.000340},
    {615, 0.938400, 0.441200, 0.000240},
    {620, 0.854450, 0.381000, 0.000190},
    {625, 0.751400, 0.321000, 0.000100},
    {630, 0.642400, 0.265000, 0.000050},
    {635, 0.541900, 0.217000, 0.000030},
    {640, 0.447900, 0.175000, 0.000020},
    {645, 0.360800, 0.138200, 0.000010},
    {650, 0.283500, 0.107000, 0.000000},
    {655, 0.218700, 0.081600, 0.000000},
    {660, 0.164900, 0.061000, 0.000000},
    {665, 0.121200, 0.044580, 0.000000},
    {670, 0.087400, 0.032000, 0.000000},
    {675, 0.063600, 0.023200, 0.000000},
    {680, 0.046770, 0.017000, 0.000000},
    {685, 0.032900, 0.011920, 0.000000},
    {690, 0.022700, 0.008210, 0.000000},
    {695, 0.015840, 0.005723, 0.000000},
    {700, 0.011359, 0.004102, 0.000000},
    {705, 0.008111, 0.002929, 0.000000},
    {710, 0.005790, 0.002091, 0.000000},
    {715, 0.004109, 0.001484, 0.000000},
    {720, 0.002899, 0.001047, 0.000000},
    {725, 0.002049, 0.000740, 0.000000},
    {730, 0.001440, 0.000520, 0.000000},
    {735, 0.001000, 0.000361, 0.000000},
    {740, 0.000690, 0.000249, 0.000000},
    {745, 0.000476, 0.000172, 0.000000},
    {750, 0.000332, 0.000120, 0.000000},
    {755, 0.000235, 0.000085, 0.000000},
    {760, 0.000166, 0.000060, 0.000000},
    {765, 0.000117, 0.000042, 0.000000},
    {770, 0.000083, 0.000030, 0.000000},
    {775, 0.000059, 0.000021, 0.000000},
    {780, 0.000042, 0.000015, 0.000000},
};
// clang-format on

}  // namespace

const CmfTable& CmfTable::cie_1931_2deg_5nm() {
    static const CmfTable table = [] {
        CmfTable t;
        for (const auto& row : kCie1931) {
            t.wavelengths_nm.push_back(row[0]);
            t.fx.push_back(row[1]);
            t.fy.push_back(row[2]);
            t.fz.push_back(row[3]);
        }
        t.validate();
        return t;
    }();
    return table;
}

CmfTable CmfTable::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open CMF table: " + path);
    CmfTable t;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        double l, x, y, z;
        if (!(ss >> l >> x >> y >> z)) throw std::runtime_error("malformed CMF row: " + line);
        t.wavelengths_nm.push_back(l);
        t.fx.push_back(x);
        t.fy.push_back(y);
        t.fz.push_back(z);
    }
    t.validate();
    return t;
}

void CmfTable::validate() const {
    const size_t n = wavelengths_nm.size();
    if (n < 2) throw std::runtime_error("CMF table too short");
    if (fx.size() != n || fy.size() != n || fz.size() != n)
        throw std::runtime_error("CMF column lengths differ");
    for (size_t i = 1; i < n; ++i)
        if (wavelengths_nm[i] <= wavelengths_nm[i - 1])
            throw std::runtime_error("CMF wavelengths not strictly ascending");
    for (size_t i = 0; i < n; ++i)
        if (fx[i] < 0 || fy[i] < 0 || fz[i] < 0)
            throw std::runtime_error("negative CMF value");
    if (wavelengths_nm.front() > 380.0 || wavelengths_nm.back() < 780.0)
        throw std::runtime_error("CMF table does not cover [380, 780] nm");
}

Vec3 CmfTable::sample(double lambda_nm) const {
    if (lambda_nm < min_wavelength() || lambda_nm > max_wavelength())
        throw std::out_of_range("wavelength out of range: " + std::to_string(lambda_nm) + " nm");
    const auto it = std::upper_bound(wavelengths_nm.begin(), wavelengths_nm.end(), lambda_nm);
    size_t hi = static_cast<size_t>(it - wavelengths_nm.begin());
    if (hi == wavelengths_nm.size()) hi -= 1;
    if (hi == 0) hi = 1;
    const size_t lo = hi - 1;
    const double t = (lambda_nm - wavelengths_nm[lo]) / (wavelengths_nm[hi] - wavelengths_nm[lo]);
    return {fx[lo] + t * (fx[hi] - fx[lo]), fy[lo] + t * (fy[hi] - fy[lo]),
            fz[lo] + t * (fz[hi] - fz[lo])};
}

void Spd::validate() const {
    if (samples.empty()) throw std::runtime_error("empty spectrum");
    for (size_t i = 0; i < samples.size(); ++i) {
        if (samples[i].second < 0) throw std::runtime_error("negative spectral power");
        if (i > 0) {
            const double gap = samples[i].first - samples[i - 1].first;
            if (gap <= 0 || std::abs(gap - delta_lambda_nm) > 1e-9 * delta_lambda_nm + 1e-12)
                throw std::runtime_error("SPD wavelengths not uniformly ascending");
        }
    }
}

ColorMatrix ColorMatrix::srgb_linear() {
    ColorMatrix c;
    c.kind = ColorMatrixKind::xyz_to_linear_rgb;
    c.m.m = {3.2404542, -1.5371385, -0.4985314,
             -0.9692660, 1.8760108,  0.0415560,
             0.0556434,  -0.2040259, 1.0572252};
    return c;
}

ColorMatrix ColorMatrix::srgb_combined() {
    ColorMatrix c = srgb_linear();
    c.kind = ColorMatrixKind::xyz_to_srgb_combined;
    return c;
}

void ColorMatrix::validate() const {
    const Mat3& a = m;
    const double det = a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) -
                       a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
                       a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
    if (std::abs(det) < 1e-12) throw std::runtime_error("color matrix is singular");
}

std::string Band::name() const {
    if (is_full) return "full";
    std::ostringstream ss;
    ss << center_nm;
    return "band_" + ss.str();
}

BandTable BandTable::with_full(const std::vector<std::pair<double, double>>& spectral) {
    BandTable t;
    for (const auto& [c, d] : spectral) t.bands.push_back({c, d, false});
    t.bands.push_back({0.0, 0.0, true});
    t.validate();
    return t;
}

void BandTable::validate() const {
    int fulls = 0;
    for (const auto& b : bands)
        if (b.is_full) ++fulls;
    if (fulls != 1) throw std::runtime_error("band table must contain FULL_SPECTRA exactly once");
    for (size_t i = 0; i < bands.size(); ++i)
        for (size_t j = i + 1; j < bands.size(); ++j)
            if (!bands[i].is_full && !bands[j].is_full &&
                bands[i].center_nm == bands[j].center_nm)
                throw std::runtime_error("duplicate band center");
}

int BandTable::full_index() const {
    for (size_t i = 0; i < bands.size(); ++i)
        if (bands[i].is_full) return static_cast<int>(i);
    throw std::runtime_error("band table has no FULL_SPECTRA band");
}

std::vector<int> BandTable::spectral_indices() const {
    std::vector<int> idx;
    for (size_t i = 0; i < bands.size(); ++i)
        if (!bands[i].is_full) idx.push_back(static_cast<int>(i));
    return idx;
}

bool BandTable::operator==(const BandTable& o) const {
    if (bands.size() != o.bands.size()) return false;
    for (size_t i = 0; i < bands.size(); ++i) {
        if (bands[i].is_full != o.bands[i].is_full) return false;
        if (!bands[i].is_full &&
            (bands[i].center_nm != o.bands[i].center_nm || bands[i].delta_nm != o.bands[i].delta_nm))
            return false;
    }
    return true;
}

Vec3 tristimulus(const Spd& spd, const CmfTable& cmf) {
    spd.validate();
    Vec3 xyz{0, 0, 0};
    for (const auto& [lambda, power] : spd.samples) {
        const Vec3 f = cmf.sample(lambda);  // throws when out of range
        xyz.x += f.x * power * spd.delta_lambda_nm;
        xyz.y += f.y * power * spd.delta_lambda_nm;
        xyz.z += f.z * power * spd.delta_lambda_nm;
    }
    return xyz;
}

Vec3 xyz_to_linear_rgb(const Vec3& xyz, const ColorMatrix& m) {
    if (m.kind != ColorMatrixKind::xyz_to_linear_rgb)
        throw std::runtime_error("xyz_to_linear_rgb requires an xyz_to_linear_rgb matrix");
    return mat_vec(m.m, xyz);
}

double gamma_decode_scalar(double v, GammaMode mode) {
    if (v < 0.0) return 0.0;
    if (mode == GammaMode::srgb) {
        if (v <= 12.92 * 0.0031308) return v / 12.92;
        return std::pow((v + 0.055) / 1.055, 2.4);
    }
    return std::pow(v, 2.2);
}

Vec3 gamma_encode(const Vec3& rgb, GammaMode mode) {
    return {gamma_encode_scalar(rgb.x, mode), gamma_encode_scalar(rgb.y, mode),
            gamma_encode_scalar(rgb.z, mode)};
}

Vec3 gamma_decode(const Vec3& rgb, GammaMode mode) {
    return {gamma_decode_scalar(rgb.x, mode), gamma_decode_scalar(rgb.y, mode),
            gamma_decode_scalar(rgb.z, mode)};
}

Vec3 clip01(const Vec3& rgb) {
    return {clamp(rgb.x, 0.0, 1.0), clamp(rgb.y, 0.0, 1.0), clamp(rgb.z, 0.0, 1.0)};
}

Vec3 band_rgb_weight(double lambda_nm, double delta_lambda_nm, const CmfTable& cmf,
                     const ColorMatrix& m) {
    if (m.kind != ColorMatrixKind::xyz_to_srgb_combined)
        throw std::runtime_error("band_rgb_weight requires an xyz_to_srgb_combined matrix");
    const Vec3 f = cmf.sample(lambda_nm);
    Vec3 w = mat_vec(m.m, f);
    return {w.x * delta_lambda_nm, w.y * delta_lambda_nm, w.z * delta_lambda_nm};
}

Image combine_bands(const std::vector<Image>& band_images, const BandTable& table,
                    const CmfTable& cmf, const ColorMatrix& m, GammaMode mode) {
    const auto spectral = table.spectral_indices();
    if (band_images.size() != spectral.size())
        throw std::runtime_error("combine_bands: expected one image per spectral band");
    for (const auto& img : band_images) {
        if (!img.same_shape(band_images.front()))
            throw std::runtime_error("combine_bands: image dimensions differ");
        if (img.channels != 3) throw std::runtime_error("combine_bands: images must have 3 channels");
    }

    std::vector<Vec3> weights;
    weights.reserve(spectral.size());
    for (int bi : spectral)
        weights.push_back(band_rgb_weight(table.bands[bi].center_nm, table.bands[bi].delta_nm, cmf, m));

    Image out(band_images.front().width, band_images.front().height, 3);
    parallel_for(out.pixel_count(), [&](size_t p) {
        Vec3 acc{0, 0, 0};
        for (size_t b = 0; b < band_images.size(); ++b) {
            const double* px = &band_images[b].data[p * 3];
            acc.x += weights[b].x * px[0];
            acc.y += weights[b].y * px[1];
            acc.z += weights[b].z * px[2];
        }
        const Vec3 res = clip01(gamma_encode(acc, mode));
        out.data[p * 3 + 0] = res.x;
        out.data[p * 3 + 1] = res.y;
        out.data[p * 3 + 2] = res.z;
    });
    return out;
}

}  // namespace sgs
