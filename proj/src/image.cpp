#include "sgs/image.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <memory>
#include <stdexcept>

#include "sgs/math.hpp"

namespace sgs {

namespace {

constexpr char kFimgMagic[4] = {'F', 'I', 'M', 'G'};
constexpr uint32_t kFimgVersion = 1;

struct FileCloser {
    void operator()(FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

FilePtr open_file(const std::string& path, const char* mode) {
    FilePtr f(std::fopen(path.c_str(), mode));
    if (!f) throw std::runtime_error("cannot open file: " + path);
    return f;
}

void write_u32(FILE* f, uint32_t v) {
    if (std::fwrite(&v, sizeof(v), 1, f) != 1) throw std::runtime_error("write failed");
}

uint32_t read_u32(FILE* f) {
    uint32_t v;
    if (std::fread(&v, sizeof(v), 1, f) != 1) throw std::runtime_error("truncated file");
    return v;
}

// Fixed palette: id 0 black, then a color wheel. Only used for visualization;
// the mask payload is the palette index itself.
void mask_palette(png_color pal[256]) {
    pal[0] = {0, 0, 0};
    for (int i = 1; i < 256; ++i) {
        const double h = std::fmod(0.61803398875 * i, 1.0) * 6.0;
        const int k = static_cast<int>(h);
        const double f = h - k;
        const double q = 1.0 - f;
        double r = 0, g = 0, b = 0;
        switch (k % 6) {
            case 0: r = 1; g = f; break;
            case 1: r = q; g = 1; break;
            case 2: g = 1; b = f; break;
            case 3: g = q; b = 1; break;
            case 4: r = f; b = 1; break;
            default: r = 1; b = q;
        }
        pal[i] = {static_cast<png_byte>(64 + 191 * r), static_cast<png_byte>(64 + 191 * g),
                  static_cast<png_byte>(64 + 191 * b)};
    }
}

}  // namespace

void save_fimg(const Image& img, const std::string& path) {
    auto f = open_file(path, "wb");
    if (std::fwrite(kFimgMagic, 1, 4, f.get()) != 4) throw std::runtime_error("write failed");
    write_u32(f.get(), kFimgVersion);
    write_u32(f.get(), static_cast<uint32_t>(img.width));
    write_u32(f.get(), static_cast<uint32_t>(img.height));
    write_u32(f.get(), static_cast<uint32_t>(img.channels));
    if (!img.data.empty() &&
        std::fwrite(img.data.data(), sizeof(double), img.data.size(), f.get()) != img.data.size())
        throw std::runtime_error("write failed: " + path);
}

Image load_fimg(const std::string& path) {
    auto f = open_file(path, "rb");
    char magic[4];
    if (std::fread(magic, 1, 4, f.get()) != 4 || std::memcmp(magic, kFimgMagic, 4) != 0)
        throw std::runtime_error("not a FIMG file: " + path);
    const uint32_t version = read_u32(f.get());
    if (version != kFimgVersion) throw std::runtime_error("unsupported FIMG version in " + path);
    Image img;
    img.width = static_cast<int>(read_u32(f.get()));
    img.height = static_cast<int>(read_u32(f.get()));
    img.channels = static_cast<int>(read_u32(f.get()));
    img.data.resize(static_cast<size_t>(img.width) * img.height * img.channels);
    if (!img.data.empty() &&
        std::fread(img.data.data(), sizeof(double), img.data.size(), f.get()) != img.data.size())
        throw std::runtime_error("truncated FIMG file: " + path);
    return img;
}

void save_png8(const Image& img, const std::string& path) {
    if (img.channels != 1 && img.channels != 3)
        throw std::runtime_error("save_png8 supports 1 or 3 channels");
    auto f = open_file(path, "wb");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw std::runtime_error("png write failed: " + path);
    }
    png_init_io(png, f.get());
    png_set_IHDR(png, info, img.width, img.height, 8,
                 img.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);

    std::vector<uint8_t> row(static_cast<size_t>(img.width) * img.channels);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < img.channels; ++c)
                row[x * img.channels + c] =
                    static_cast<uint8_t>(std::lround(clamp(img.at(x, y, c), 0.0, 1.0) * 255.0));
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

Image load_png8(const std::string& path) {
    auto f = open_file(path, "rb");
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error("png read failed: " + path);
    }
    png_init_io(png, f.get());
    png_read_info(png, info);

    if (png_get_bit_depth(png, info) != 8) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error("unsupported bit depth (8-bit PNG required): " + path);
    }
    png_set_palette_to_rgb(png);
    png_set_strip_alpha(png);
    png_read_update_info(png, info);

    Image img;
    img.width = static_cast<int>(png_get_image_width(png, info));
    img.height = static_cast<int>(png_get_image_height(png, info));
    img.channels = static_cast<int>(png_get_channels(png, info));
    if (img.channels != 1 && img.channels != 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error("unsupported channel count in " + path);
    }
    img.data.resize(static_cast<size_t>(img.width) * img.height * img.channels);

    std::vector<uint8_t> row(static_cast<size_t>(img.width) * img.channels);
    for (int y = 0; y < img.height; ++y) {
        png_read_row(png, row.data(), nullptr);
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < img.channels; ++c)
                img.at(x, y, c) = row[x * img.channels + c] / 255.0;
    }
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

void save_mask_png(const std::vector<uint8_t>& ids, int width, int height, const std::string& path) {
    if (ids.size() != static_cast<size_t>(width) * height)
        throw std::runtime_error("mask size mismatch");
    auto f = open_file(path, "wb");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw std::runtime_error("png write failed: " + path);
    }
    png_init_io(png, f.get());
    png_set_IHDR(png, info, width, height, 8, PNG_COLOR_TYPE_PALETTE, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_color pal[256];
    mask_palette(pal);
    png_set_PLTE(png, info, pal, 256);
    png_write_info(png, info);
    for (int y = 0; y < height; ++y)
        png_write_row(png, const_cast<png_bytep>(ids.data() + static_cast<size_t>(y) * width));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

std::vector<uint8_t> load_mask_png(const std::string& path, int& width, int& height) {
    auto f = open_file(path, "rb");
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error("png read failed: " + path);
    }
    png_init_io(png, f.get());
    png_read_info(png, info);
    if (png_get_color_type(png, info) != PNG_COLOR_TYPE_PALETTE ||
        png_get_bit_depth(png, info) > 8) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error("mask must be an 8-bit palette PNG: " + path);
    }
    png_set_packing(png);  // one byte per pixel regardless of stored bit depth
    png_read_update_info(png, info);

    width = static_cast<int>(png_get_image_width(png, info));
    height = static_cast<int>(png_get_image_height(png, info));
    std::vector<uint8_t> ids(static_cast<size_t>(width) * height);
    for (int y = 0; y < height; ++y)
        png_read_row(png, ids.data() + static_cast<size_t>(y) * width, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return ids;
}

}  // namespace sgs
