#pragma once

#include <string>
#include <utility>
#include <vector>

#include "sgs/camera.hpp"
#include "sgs/rasterizer.hpp"
#include "sgs/scene.hpp"

namespace sgs {

struct DatasetView {
    std::string name;
    std::string split;  // "train" or "test"
    CameraView camera;
    std::vector<std::string> image_paths;  // per band (band-table order)
    std::vector<std::string> mask_paths;   // per band
};

// Multi-view per-band images, masks and poses, loaded eagerly.
struct SpectralDataset {
    BandTable band_table;
    std::string root;
    int mask_categories = 0;  // K
    std::vector<DatasetView> views;
    std::vector<std::vector<Image>> images;               // [view][band], display domain
    std::vector<std::vector<std::vector<uint8_t>>> masks;  // [view][band]

    std::vector<int> train_views() const;
    std::vector<int> test_views() const;
    void validate() const;
};

SpectralDataset load_dataset(const std::string& root);
void save_dataset(const SpectralDataset& data, const std::string& root);

struct SynthSpec {
    int n_groups = 2;
    int splats_per_group = 15;
    std::vector<std::pair<double, double>> bands = {
        {460, 40}, {500, 40}, {540, 40}, {580, 40}, {620, 40}};
    uint64_t seed = 1;
    int train_views = 16;
    int test_views = 4;
    int image_size = 64;
    double fov_x_deg = 50.0;
    double camera_distance = 4.5;
    int env_width = 64;
    int env_height = 32;
    int env_levels = 4;
    bool env_shared = false;
};

// Procedural ground-truth scene plus the dataset rendered from it with this
// engine's own renderer; the scene fits its dataset exactly.
std::pair<SpectralScene, SpectralDataset> synth_scene(const SynthSpec& spec);

struct PerturbMagnitudes {
    double means = 0.05;
    double log_scales = 0.10;
    double rotations = 0.05;
    double opacity = 0.50;
    double normal = 0.10;
    double brdf = 0.50;
    double encodings = 0.50;
    double env = 0.10;
    double classifier = 0.10;
};

SpectralScene perturb_scene(const SpectralScene& scene, const PerturbMagnitudes& mag,
                            uint64_t seed);

// Shared helper: the per-band average used for the full-spectra prior (also
// how synth_scene seeds the ground-truth full band).
void apply_full_spectra_average(SpectralScene& scene);

}  // namespace sgs
