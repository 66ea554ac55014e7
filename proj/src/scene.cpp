#include "sgs/scene.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <memory>
#include <stdexcept>

namespace sgs {

namespace {

constexpr char kSceneMagic[8] = {'S', 'G', 'S', 'C', 'K', 'P', 'T', '1'};

struct FileCloser {
    void operator()(FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

void put_bytes(FILE* f, const void* p, size_t n) {
    if (n == 0) return;
    if (std::fwrite(p, 1, n, f) != n) throw std::runtime_error("scene write failed");
}
void get_bytes(FILE* f, void* p, size_t n) {
    if (n == 0) return;
    if (std::fread(p, 1, n, f) != n) throw std::runtime_error("truncated scene file");
}
void put_u32(FILE* f, uint32_t v) { put_bytes(f, &v, 4); }
void put_u64(FILE* f, uint64_t v) { put_bytes(f, &v, 8); }
void put_f64(FILE* f, double v) { put_bytes(f, &v, 8); }
uint32_t get_u32(FILE* f) { uint32_t v; get_bytes(f, &v, 4); return v; }
uint64_t get_u64(FILE* f) { uint64_t v; get_bytes(f, &v, 8); return v; }
double get_f64(FILE* f) { double v; get_bytes(f, &v, 8); return v; }

}  // namespace

void IdentityClassifier::validate() const {
    if (categories < 1) throw std::runtime_error("classifier needs at least one category");
    if (weight.size() != static_cast<size_t>(categories) * kEncodingDim ||
        bias.size() != static_cast<size_t>(categories))
        throw std::runtime_error("classifier shape mismatch");
}

void SpectralScene::resize(size_t n) {
    means.resize(n);
    log_scales.resize(n);
    rotations.resize(n, Vec4{1, 0, 0, 0});
    opacity_logits.resize(n, 0.0);
    normal_params.resize(n);
    const int nb = n_bands();
    diffuse_logits.resize(nb);
    tint_logits.resize(nb);
    roughness_logits.resize(nb);
    encodings.resize(nb);
    for (int b = 0; b < nb; ++b) {
        diffuse_logits[b].resize(n);
        tint_logits[b].resize(n);
        roughness_logits[b].resize(n, 0.0);
        encodings[b].resize(n, Encoding{});
    }
}

void SpectralScene::validate() const {
    band_table.validate();
    if (size() < 1) throw std::runtime_error("scene must contain at least one gaussian");
    const size_t n = size();
    if (log_scales.size() != n || rotations.size() != n || opacity_logits.size() != n ||
        normal_params.size() != n)
        throw std::runtime_error("scene geometry arrays disagree in length");
    const int nb = n_bands();
    if (static_cast<int>(diffuse_logits.size()) != nb || static_cast<int>(tint_logits.size()) != nb ||
        static_cast<int>(roughness_logits.size()) != nb ||
        static_cast<int>(encodings.size()) != nb || static_cast<int>(classifiers.size()) != nb)
        throw std::runtime_error("scene per-band arrays must match the band table");
    for (int b = 0; b < nb; ++b) {
        if (diffuse_logits[b].size() != n || tint_logits[b].size() != n ||
            roughness_logits[b].size() != n || encodings[b].size() != n)
            throw std::runtime_error("scene per-band arrays disagree in length");
        classifiers[b].validate();
    }
    for (const auto& q : rotations) {
        const double norm = std::sqrt(q.w * q.w + q.x * q.x + q.y * q.y + q.z * q.z);
        if (std::abs(norm - 1.0) > 1e-9) throw std::runtime_error("rotation quaternion not unit");
    }
    env.validate();
}

SpectralGaussian SpectralScene::gaussian(size_t i) const {
    SpectralGaussian g;
    g.mean = means[i];
    g.log_scale = log_scales[i];
    g.rotation = rotations[i];
    g.opacity_logit = opacity_logits[i];
    g.normal_params = normal_params[i];
    g.bands.resize(n_bands());
    for (int b = 0; b < n_bands(); ++b) {
        g.bands[b].diffuse_logit = diffuse_logits[b][i];
        g.bands[b].tint_logit = tint_logits[b][i];
        g.bands[b].roughness_logit = roughness_logits[b][i];
        g.bands[b].encoding = encodings[b][i];
    }
    return g;
}

void SpectralScene::set_gaussian(size_t i, const SpectralGaussian& g) {
    means[i] = g.mean;
    log_scales[i] = g.log_scale;
    rotations[i] = g.rotation;
    opacity_logits[i] = g.opacity_logit;
    normal_params[i] = g.normal_params;
    for (int b = 0; b < n_bands(); ++b) {
        diffuse_logits[b][i] = g.bands[b].diffuse_logit;
        tint_logits[b][i] = g.bands[b].tint_logit;
        roughness_logits[b][i] = g.bands[b].roughness_logit;
        encodings[b][i] = g.bands[b].encoding;
    }
}

DecodedAppearance SpectralScene::decode_params(size_t i, int band) const {
    if (band < 0 || band >= n_bands()) throw std::out_of_range("unknown band index");
    DecodedAppearance d;
    const Vec3& cd = diffuse_logits[band][i];
    const Vec3& tn = tint_logits[band][i];
    d.diffuse = {decode_unit(cd.x), decode_unit(cd.y), decode_unit(cd.z)};
    d.tint = {decode_unit(tn.x), decode_unit(tn.y), decode_unit(tn.z)};
    d.roughness = decode_unit(roughness_logits[band][i]);
    d.alpha = decode_unit(opacity_logits[i]);
    return d;
}

Mat3 covariance(const SpectralGaussian& g) { return covariance_t(g.log_scale, g.rotation); }

Vec3 splat_normal(const SpectralGaussian& g, const Vec3& view_dir) {
    return splat_normal_t(g.log_scale, g.rotation, g.normal_params, view_dir);
}

void save_scene(const SpectralScene& scene, const std::string& path) {
    FilePtr f(std::fopen(path.c_str(), "wb"));
    if (!f) throw std::runtime_error("cannot open scene file for writing: " + path);
    put_bytes(f.get(), kSceneMagic, 8);
    put_u32(f.get(), 1);  // version

    put_u32(f.get(), static_cast<uint32_t>(scene.band_table.size()));
    for (const auto& b : scene.band_table.bands) {
        put_u32(f.get(), b.is_full ? 1 : 0);
        put_f64(f.get(), b.center_nm);
        put_f64(f.get(), b.delta_nm);
    }

    put_u32(f.get(), scene.env.shared_across_bands ? 1 : 0);
    put_u32(f.get(), static_cast<uint32_t>(scene.env.width));
    put_u32(f.get(), static_cast<uint32_t>(scene.env.height));
    put_u32(f.get(), static_cast<uint32_t>(scene.env.levels));
    put_u32(f.get(), static_cast<uint32_t>(scene.env.base.size()));
    for (const auto& im : scene.env.base)
        put_bytes(f.get(), im.data.data(), im.data.size() * sizeof(double));

    const uint64_t n = scene.size();
    put_u64(f.get(), n);
    put_bytes(f.get(), scene.means.data(), n * sizeof(Vec3));
    put_bytes(f.get(), scene.log_scales.data(), n * sizeof(Vec3));
    put_bytes(f.get(), scene.rotations.data(), n * sizeof(Vec4));
    put_bytes(f.get(), scene.opacity_logits.data(), n * sizeof(double));
    put_bytes(f.get(), scene.normal_params.data(), n * sizeof(Vec2));
    for (int b = 0; b < scene.n_bands(); ++b) {
        put_bytes(f.get(), scene.diffuse_logits[b].data(), n * sizeof(Vec3));
        put_bytes(f.get(), scene.tint_logits[b].data(), n * sizeof(Vec3));
        put_bytes(f.get(), scene.roughness_logits[b].data(), n * sizeof(double));
        put_bytes(f.get(), scene.encodings[b].data(), n * sizeof(Encoding));
    }

    for (int b = 0; b < scene.n_bands(); ++b) {
        const auto& clf = scene.classifiers[b];
        put_u32(f.get(), static_cast<uint32_t>(clf.categories));
        put_bytes(f.get(), clf.weight.data(), clf.weight.size() * sizeof(double));
        put_bytes(f.get(), clf.bias.data(), clf.bias.size() * sizeof(double));
    }
    put_u32(f.get(), scene.full_prior_initialized ? 1 : 0);
}

SpectralScene load_scene(const std::string& path) {
    FilePtr f(std::fopen(path.c_str(), "rb"));
    if (!f) throw std::runtime_error("cannot open scene file: " + path);
    char magic[8];
    get_bytes(f.get(), magic, 8);
    if (std::memcmp(magic, kSceneMagic, 8) != 0)
        throw std::runtime_error("not a scene checkpoint: " + path);
    const uint32_t version = get_u32(f.get());
    if (version != 1) throw std::runtime_error("unsupported scene checkpoint version");

    SpectralScene scene;
    const uint32_t nb = get_u32(f.get());
    for (uint32_t i = 0; i < nb; ++i) {
        Band b;
        b.is_full = get_u32(f.get()) != 0;
        b.center_nm = get_f64(f.get());
        b.delta_nm = get_f64(f.get());
        scene.band_table.bands.push_back(b);
    }
    scene.band_table.validate();

    const bool shared = get_u32(f.get()) != 0;
    const int ew = static_cast<int>(get_u32(f.get()));
    const int eh = static_cast<int>(get_u32(f.get()));
    const int el = static_cast<int>(get_u32(f.get()));
    const uint32_t n_maps = get_u32(f.get());
    scene.env.width = ew;
    scene.env.height = eh;
    scene.env.levels = el;
    scene.env.shared_across_bands = shared;
    scene.env.base.assign(n_maps, Image(ew, eh, 3));
    for (auto& im : scene.env.base)
        get_bytes(f.get(), im.data.data(), im.data.size() * sizeof(double));
    scene.env.rebuild();

    const uint64_t n = get_u64(f.get());
    scene.resize(n);
    get_bytes(f.get(), scene.means.data(), n * sizeof(Vec3));
    get_bytes(f.get(), scene.log_scales.data(), n * sizeof(Vec3));
    get_bytes(f.get(), scene.rotations.data(), n * sizeof(Vec4));
    get_bytes(f.get(), scene.opacity_logits.data(), n * sizeof(double));
    get_bytes(f.get(), scene.normal_params.data(), n * sizeof(Vec2));
    for (uint32_t b = 0; b < nb; ++b) {
        get_bytes(f.get(), scene.diffuse_logits[b].data(), n * sizeof(Vec3));
        get_bytes(f.get(), scene.tint_logits[b].data(), n * sizeof(Vec3));
        get_bytes(f.get(), scene.roughness_logits[b].data(), n * sizeof(double));
        get_bytes(f.get(), scene.encodings[b].data(), n * sizeof(Encoding));
    }

    scene.classifiers.resize(nb);
    for (uint32_t b = 0; b < nb; ++b) {
        auto& clf = scene.classifiers[b];
        clf.init(static_cast<int>(get_u32(f.get())));
        get_bytes(f.get(), clf.weight.data(), clf.weight.size() * sizeof(double));
        get_bytes(f.get(), clf.bias.data(), clf.bias.size() * sizeof(double));
    }
    scene.full_prior_initialized = get_u32(f.get()) != 0;
    return scene;
}

}  // namespace sgs
