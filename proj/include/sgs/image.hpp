#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace sgs {

// Row-major H x W x C double image. Channel count is 1 (masks, alpha),
// 3 (color) or 16 (identity features).
struct Image {
    int width = 0;
    int height = 0;
    int channels = 0;
    std::vector<double> data;

    Image() = default;
    Image(int w, int h, int c, double fill = 0.0)
        : width(w), height(h), channels(c), data(static_cast<size_t>(w) * h * c, fill) {}

    double& at(int x, int y, int c) { return data[(static_cast<size_t>(y) * width + x) * channels + c]; }
    double at(int x, int y, int c) const { return data[(static_cast<size_t>(y) * width + x) * channels + c]; }

    size_t pixel_count() const { return static_cast<size_t>(width) * height; }
    bool same_shape(const Image& o) const {
        return width == o.width && height == o.height && channels == o.channels;
    }
};

// Lossless double-precision image container ("FIMG"): little-endian header
// (magic, version, width, height, channels) followed by raw float64 samples.
// Used for radiance maps, environment maps and training references.
void save_fimg(const Image& img, const std::string& path);
Image load_fimg(const std::string& path);

// 8-bit PNG. Values are clamped to [0,1] and quantized to the 1/255 grid.
void save_png8(const Image& img, const std::string& path);
Image load_png8(const std::string& path);  // values in [0,1]

// Index masks as palette PNG; pixel value = palette index = mask id.
void save_mask_png(const std::vector<uint8_t>& ids, int width, int height, const std::string& path);
std::vector<uint8_t> load_mask_png(const std::string& path, int& width, int& height);

}  // namespace sgs
