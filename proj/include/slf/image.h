#pragma once

#include <cassert>
#include <cstddef>
#include <vector>

#include "slf/vec.h"

namespace slf {

// Row-major 2D grid, origin at the top-left, y growing downward.
template <typename T>
struct Image {
    int width = 0;
    int height = 0;
    std::vector<T> data;

    Image() = default;
    Image(int w, int h, T fill = T{}) : width(w), height(h), data(size_t(w) * h, fill) {}

    T& at(int x, int y) {
        assert(x >= 0 && x < width && y >= 0 && y < height);
        return data[size_t(y) * width + x];
    }
    const T& at(int x, int y) const {
        assert(x >= 0 && x < width && y >= 0 && y < height);
        return data[size_t(y) * width + x];
    }
    size_t pixel_count() const { return data.size(); }
};

using ImageRgb = Image<Rgb>;
using ImageF = Image<double>;
using ImageMask = Image<unsigned char>;

} // namespace slf
