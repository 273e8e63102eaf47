#include "cmfa/region.hpp"

#include <algorithm>

#include "cmfa/errors.hpp"

namespace cmfa {

namespace {

Region trace_component(const BinaryMask& mask, std::vector<std::uint8_t>& visited,
                       std::uint32_t seed) {
    const int w = mask.width;
    const int h = mask.height;
    Region region;
    std::vector<std::uint32_t> stack{seed};
    visited[seed] = 1;
    region.min_x = w;
    region.min_y = h;
    region.max_x = -1;
    region.max_y = -1;
    while (!stack.empty()) {
        const std::uint32_t idx = stack.back();
        stack.pop_back();
        region.pixels.push_back(idx);
        const int x = static_cast<int>(idx % static_cast<std::uint32_t>(w));
        const int y = static_cast<int>(idx / static_cast<std::uint32_t>(w));
        region.min_x = std::min(region.min_x, x);
        region.min_y = std::min(region.min_y, y);
        region.max_x = std::max(region.max_x, x);
        region.max_y = std::max(region.max_y, y);
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
                if (dx == 0 && dy == 0) continue;
                const int nx = x + dx;
                const int ny = y + dy;
                if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
                const std::uint32_t n = static_cast<std::uint32_t>(ny) *
                                            static_cast<std::uint32_t>(w) +
                                        static_cast<std::uint32_t>(nx);
                if (!visited[n] && mask.bits[n]) {
                    visited[n] = 1;
                    stack.push_back(n);
                }
            }
        }
    }
    std::sort(region.pixels.begin(), region.pixels.end());
    return region;
}

} // namespace

std::vector<Region> connected_components(const BinaryMask& mask, std::size_t min_area) {
    std::vector<std::uint8_t> visited(mask.bits.size(), 0);
    std::vector<Region> regions;
    for (std::uint32_t i = 0; i < mask.bits.size(); ++i) {
        if (mask.bits[i] && !visited[i]) {
            Region r = trace_component(mask, visited, i);
            if (r.area() >= min_area)
                regions.push_back(std::move(r));
        }
    }
    // Largest first; ties by raster order of the first pixel. Components are
    // discovered in raster order, and pixels[0] is each component's first
    // raster pixel, so the tie rule is a plain comparison.
    std::stable_sort(regions.begin(), regions.end(), [](const Region& l, const Region& r) {
        if (l.area() != r.area()) return l.area() > r.area();
        return l.pixels[0] < r.pixels[0];
    });
    for (std::size_t i = 0; i < regions.size(); ++i)
        regions[i].label = static_cast<int>(i) + 1;
    return regions;
}

RegionPair select_pair(const std::vector<Region>& regions) {
    if (regions.size() < 2)
        throw NotEnoughRegions("mask does not contain two usable regions");
    return RegionPair{regions[0], regions[1]};
}

namespace {

// One 3x3 pass; out-of-image reads are false for both operations.
BinaryMask morph_pass(const BinaryMask& src, bool dilating) {
    const int w = src.width;
    const int h = src.height;
    BinaryMask out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            bool hit = false;
            bool all = true;
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    const int nx = x + dx;
                    const int ny = y + dy;
                    const bool v =
                        nx >= 0 && nx < w && ny >= 0 && ny < h && src.at(nx, ny);
                    hit = hit || v;
                    all = all && v;
                }
            }
            out.set(x, y, dilating ? hit : all);
        }
    }
    return out;
}

} // namespace

BinaryMask dilate(const BinaryMask& mask, int iterations) {
    if (iterations < 1) throw Error("morphology: iterations must be >= 1");
    BinaryMask out = morph_pass(mask, true);
    for (int i = 1; i < iterations; ++i)
        out = morph_pass(out, true);
    return out;
}

BinaryMask erode(const BinaryMask& mask, int iterations) {
    if (iterations < 1) throw Error("morphology: iterations must be >= 1");
    BinaryMask out = morph_pass(mask, false);
    for (int i = 1; i < iterations; ++i)
        out = morph_pass(out, false);
    return out;
}

BinaryMask region_to_mask(const Region& region, int width, int height) {
    BinaryMask out(width, height);
    for (std::uint32_t p : region.pixels)
        out.bits[p] = 1;
    return out;
}

BoundaryBand boundary_band(const Region& region, const BinaryMask& mask, int w,
                           int clip_margin, const Region* exclude) {
    if (w < 1) throw Error("boundary_band: width must be >= 1");
    if (clip_margin < 0) throw Error("boundary_band: clip_margin must be >= 0");

    const BinaryMask own = region_to_mask(region, mask.width, mask.height);
    const BinaryMask grown = dilate(own, w);
    const BinaryMask shrunk = erode(own, w);

    BinaryMask band(mask.width, mask.height);
    for (std::size_t i = 0; i < band.bits.size(); ++i)
        band.bits[i] = grown.bits[i] && !shrunk.bits[i];
    if (exclude) {
        for (std::uint32_t p : exclude->pixels)
            band.bits[p] = 0;
    }

    BoundaryBand result;
    result.owner = region.label;
    result.width = w;
    const int xmin = clip_margin;
    const int ymin = clip_margin;
    const int xmax = mask.width - clip_margin;
    const int ymax = mask.height - clip_margin;
    for (int y = ymin; y < ymax; ++y) {
        for (int x = xmin; x < xmax; ++x) {
            const std::uint32_t idx = static_cast<std::uint32_t>(y) *
                                          static_cast<std::uint32_t>(mask.width) +
                                      static_cast<std::uint32_t>(x);
            if (band.bits[idx])
                result.pixels.push_back(idx);
        }
    }
    if (result.pixels.empty())
        throw EmptyBand("boundary band is empty after clipping");
    return result;
}

} // namespace cmfa
