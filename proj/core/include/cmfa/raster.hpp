#pragma once

#include <cstdint>
#include <cstddef>
#include <vector>

#include "cmfa/errors.hpp"

namespace cmfa {

/// 8-bit single-channel raster, row-major. (x, y) = (column, row), origin
/// top-left. All texture analysis in this library runs on GrayImage.
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data;

    GrayImage() = default;
    GrayImage(int w, int h)
        : width(w), height(h), data(checked_size(w, h), 0) {}
    GrayImage(int w, int h, std::vector<std::uint8_t> pixels)
        : width(w), height(h), data(std::move(pixels)) {
        if (data.size() != checked_size(w, h))
            throw DimensionMismatch("GrayImage: data length does not match width*height");
    }

    std::uint8_t at(int x, int y) const { return data[index(x, y)]; }
    void set(int x, int y, std::uint8_t v) { data[index(x, y)] = v; }
    std::size_t index(int x, int y) const {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
               static_cast<std::size_t>(x);
    }
    std::size_t size() const { return data.size(); }
    bool in_bounds(int x, int y) const {
        return x >= 0 && x < width && y >= 0 && y < height;
    }

    bool operator==(const GrayImage&) const = default;

  private:
    static std::size_t checked_size(int w, int h) {
        if (w < 1 || h < 1)
            throw DimensionMismatch("raster dimensions must be >= 1");
        return static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
    }
};

/// 8-bit RGB raster, row-major interleaved triples.
struct RgbImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data; // length = 3 * width * height

    RgbImage() = default;
    RgbImage(int w, int h, std::vector<std::uint8_t> pixels)
        : width(w), height(h), data(std::move(pixels)) {
        if (w < 1 || h < 1)
            throw DimensionMismatch("raster dimensions must be >= 1");
        if (data.size() != 3u * static_cast<std::size_t>(w) * static_cast<std::size_t>(h))
            throw DimensionMismatch("RgbImage: data length does not match 3*width*height");
    }

    bool operator==(const RgbImage&) const = default;
};

/// Binary raster; true marks a pixel as part of a copy-move region.
/// Stored as one byte per pixel (0 or 1) for cheap indexed access.
struct BinaryMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> bits;

    BinaryMask() = default;
    BinaryMask(int w, int h)
        : width(w), height(h) {
        if (w < 1 || h < 1)
            throw DimensionMismatch("raster dimensions must be >= 1");
        bits.assign(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), 0);
    }

    bool at(int x, int y) const { return bits[index(x, y)] != 0; }
    void set(int x, int y, bool v) { bits[index(x, y)] = v ? 1 : 0; }
    std::size_t index(int x, int y) const {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
               static_cast<std::size_t>(x);
    }
    bool in_bounds(int x, int y) const {
        return x >= 0 && x < width && y >= 0 && y < height;
    }
    std::size_t count() const {
        std::size_t n = 0;
        for (std::uint8_t b : bits) n += b != 0;
        return n;
    }

    bool operator==(const BinaryMask&) const = default;
};

/// ITU-R BT.601 luma with round-half-up; the fixed convention for every
/// color input so results are reproducible bit for bit.
GrayImage to_grayscale(const RgbImage& img);

} // namespace cmfa
