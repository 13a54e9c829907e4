#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <memory>
#include <vector>

#include <png.h>

#include "slf/errors.h"
#include "slf/io.h"

namespace slf {

namespace {

constexpr double kGamma = 2.2;

uint8_t encode_channel(double linear) {
    double v = std::pow(clamp(linear, 0.0, 1.0), 1.0 / kGamma);
    return uint8_t(std::lround(v * 255.0));
}

double decode_channel(uint8_t v) { return std::pow(v / 255.0, kGamma); }

struct FileCloser {
    void operator()(FILE* f) const { if (f) std::fclose(f); }
};

} // namespace

void write_png(const std::string& path, const ImageRgb& image) {
    std::unique_ptr<FILE, FileCloser> fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw DataError("cannot open " + path + " for writing");

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw DataError("libpng initialization failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw DataError("libpng write failed: " + path);
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, image.width, image.height, 8, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);

    std::vector<uint8_t> row(size_t(image.width) * 3);
    for (int y = 0; y < image.height; ++y) {
        for (int x = 0; x < image.width; ++x) {
            const Rgb& c = image.at(x, y);
            row[size_t(x) * 3 + 0] = encode_channel(c.x);
            row[size_t(x) * 3 + 1] = encode_channel(c.y);
            row[size_t(x) * 3 + 2] = encode_channel(c.z);
        }
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

ImageRgb read_png(const std::string& path) {
    std::unique_ptr<FILE, FileCloser> fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw FileNotFoundError("cannot open " + path);

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw DataError("libpng initialization failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw ParseError("libpng read failed: " + path);
    }
    png_init_io(png, fp.get());
    png_read_info(png, info);

    // Normalize any input (palette, gray, 16-bit, alpha) to 8-bit RGB.
    png_set_expand(png);
    png_set_strip_16(png);
    png_set_strip_alpha(png);
    png_set_gray_to_rgb(png);
    png_read_update_info(png, info);

    const int width = int(png_get_image_width(png, info));
    const int height = int(png_get_image_height(png, info));
    if (png_get_rowbytes(png, info) != size_t(width) * 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw ParseError(path + ": unexpected PNG row layout");
    }

    ImageRgb image(width, height);
    std::vector<uint8_t> row(size_t(width) * 3);
    for (int y = 0; y < height; ++y) {
        png_read_row(png, row.data(), nullptr);
        for (int x = 0; x < width; ++x) {
            image.at(x, y) = {decode_channel(row[size_t(x) * 3 + 0]),
                              decode_channel(row[size_t(x) * 3 + 1]),
                              decode_channel(row[size_t(x) * 3 + 2])};
        }
    }
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return image;
}

} // namespace slf
