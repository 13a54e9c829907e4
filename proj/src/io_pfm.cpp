#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "slf/errors.h"
#include "slf/io.h"

static_assert(std::endian::native == std::endian::little,
              "file formats are written in native byte order and assume little endian");

namespace slf {

namespace {

void write_pfm_impl(const std::string& path, int width, int height, int channels,
                    const float* rows_top_down) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open " + path + " for writing");
    out << (channels == 3 ? "PF" : "Pf") << "\n" << width << " " << height << "\n-1.0\n";
    // Negative scale marks little-endian data; rows are stored bottom to top.
    for (int y = height - 1; y >= 0; --y)
        out.write(reinterpret_cast<const char*>(rows_top_down + size_t(y) * width * channels),
                  std::streamsize(sizeof(float)) * width * channels);
    if (!out) throw DataError("write failed: " + path);
}

struct PfmData {
    int width = 0, height = 0, channels = 0;
    std::vector<float> values; // top-down row order
};

PfmData read_pfm_impl(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FileNotFoundError("cannot open " + path);
    std::string magic;
    int width = 0, height = 0;
    double scale = 0;
    in >> magic >> width >> height >> scale;
    if (!in || (magic != "PF" && magic != "Pf"))
        throw ParseError(path + ": not a PFM file");
    if (width <= 0 || height <= 0) throw ParseError(path + ": bad PFM dimensions");
    in.get(); // single whitespace byte after the scale
    PfmData pfm;
    pfm.width = width;
    pfm.height = height;
    pfm.channels = magic == "PF" ? 3 : 1;
    pfm.values.resize(size_t(width) * height * pfm.channels);
    std::vector<float> row(size_t(width) * pfm.channels);
    for (int y = height - 1; y >= 0; --y) {
        in.read(reinterpret_cast<char*>(row.data()), std::streamsize(sizeof(float)) * row.size());
        if (!in) throw ParseError(path + ": truncated PFM data");
        if (scale > 0) {
            // Big-endian file; swap bytes.
            for (float& f : row) {
                uint32_t u;
                std::memcpy(&u, &f, 4);
                u = __builtin_bswap32(u);
                std::memcpy(&f, &u, 4);
            }
        }
        std::memcpy(pfm.values.data() + size_t(y) * row.size(), row.data(),
                    row.size() * sizeof(float));
    }
    return pfm;
}

} // namespace

void write_pfm(const std::string& path, const ImageRgb& image) {
    std::vector<float> buf(size_t(image.width) * image.height * 3);
    for (size_t i = 0; i < image.data.size(); ++i) {
        buf[i * 3 + 0] = float(image.data[i].x);
        buf[i * 3 + 1] = float(image.data[i].y);
        buf[i * 3 + 2] = float(image.data[i].z);
    }
    write_pfm_impl(path, image.width, image.height, 3, buf.data());
}

void write_pfm_gray(const std::string& path, const ImageF& image) {
    std::vector<float> buf(image.data.begin(), image.data.end());
    write_pfm_impl(path, image.width, image.height, 1, buf.data());
}

ImageRgb read_pfm(const std::string& path) {
    PfmData pfm = read_pfm_impl(path);
    if (pfm.channels != 3) throw MismatchError(path + ": expected a color PFM");
    ImageRgb image(pfm.width, pfm.height);
    for (size_t i = 0; i < image.data.size(); ++i)
        image.data[i] = {pfm.values[i * 3], pfm.values[i * 3 + 1], pfm.values[i * 3 + 2]};
    return image;
}

ImageF read_pfm_gray(const std::string& path) {
    PfmData pfm = read_pfm_impl(path);
    if (pfm.channels != 1) throw MismatchError(path + ": expected a grayscale PFM");
    ImageF image(pfm.width, pfm.height);
    for (size_t i = 0; i < image.data.size(); ++i) image.data[i] = pfm.values[i];
    return image;
}

void write_floats(const std::string& path, const std::vector<float>& v) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open " + path + " for writing");
    out.write(reinterpret_cast<const char*>(v.data()), std::streamsize(sizeof(float)) * v.size());
    if (!out) throw DataError("write failed: " + path);
}

std::vector<float> read_floats(const std::string& path) {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in) throw FileNotFoundError("cannot open " + path);
    std::streamsize bytes = in.tellg();
    if (bytes % 4 != 0) throw ParseError(path + ": size is not a multiple of 4");
    std::vector<float> v(size_t(bytes) / 4);
    in.seekg(0);
    in.read(reinterpret_cast<char*>(v.data()), bytes);
    if (!in) throw ParseError(path + ": read failed");
    return v;
}

void write_u32(const std::string& path, const std::vector<uint32_t>& v) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open " + path + " for writing");
    out.write(reinterpret_cast<const char*>(v.data()),
              std::streamsize(sizeof(uint32_t)) * v.size());
    if (!out) throw DataError("write failed: " + path);
}

std::vector<uint32_t> read_u32(const std::string& path) {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in) throw FileNotFoundError("cannot open " + path);
    std::streamsize bytes = in.tellg();
    if (bytes % 4 != 0) throw ParseError(path + ": size is not a multiple of 4");
    std::vector<uint32_t> v(size_t(bytes) / 4);
    in.seekg(0);
    in.read(reinterpret_cast<char*>(v.data()), bytes);
    if (!in) throw ParseError(path + ": read failed");
    return v;
}

} // namespace slf
