#include "cmfa/raster.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "cmfa/parallel.hpp"

namespace cmfa {

namespace {

std::atomic<int> g_max_threads{0};

int hardware_threads() {
    const unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : static_cast<int>(n);
}

} // namespace

void set_max_threads(int n) { g_max_threads.store(n, std::memory_order_relaxed); }

int max_threads() {
    const int n = g_max_threads.load(std::memory_order_relaxed);
    return n > 0 ? n : hardware_threads();
}

GrayImage to_grayscale(const RgbImage& img) {
    GrayImage out(img.width, img.height);
    const std::size_t n = out.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double r = img.data[3 * i];
        const double g = img.data[3 * i + 1];
        const double b = img.data[3 * i + 2];
        const double y = std::floor(0.299 * r + 0.587 * g + 0.114 * b + 0.5);
        out.data[i] = static_cast<std::uint8_t>(std::clamp(y, 0.0, 255.0));
    }
    return out;
}

} // namespace cmfa
