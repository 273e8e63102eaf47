#pragma once

#include <cstdint>
#include <vector>

#include "cmfa/raster.hpp"

namespace cmfa {

/// One 8-connected component of a binary mask. Pixels are row-major linear
/// indices, sorted ascending (raster order), so the vector doubles as a set.
struct Region {
    int label = 0; // 1-based rank: 1 = largest surviving component
    std::vector<std::uint32_t> pixels;
    int min_x = 0, min_y = 0, max_x = 0, max_y = 0;

    std::size_t area() const { return pixels.size(); }
};

/// The two matched components of a copy-move mask; `a` is the larger
/// (ties broken by raster order of the first pixel).
struct RegionPair {
    Region a;
    Region b;
};

/// Pixels within Chebyshev distance `width` of a region's contour, the
/// strip whose texture the discriminator analyzes. Sorted linear indices.
struct BoundaryBand {
    int owner = 0; // region label
    int width = 0;
    std::vector<std::uint32_t> pixels;
};

inline constexpr std::size_t kDefaultMinRegionArea = 64;

/// 8-connected components of the true pixels, largest first; components
/// smaller than min_area are dropped. Area ties are broken by the raster
/// order of each component's first pixel. Labels are 1-based ranks.
std::vector<Region> connected_components(const BinaryMask& mask,
                                         std::size_t min_area = kDefaultMinRegionArea);

/// The two largest regions as (a, b). Throws NotEnoughRegions when fewer
/// than two components survive filtering.
RegionPair select_pair(const std::vector<Region>& regions);

/// Binary dilation with the 3x3 square element, iterated. Out-of-image
/// reads count as false.
BinaryMask dilate(const BinaryMask& mask, int iterations);

/// Binary erosion with the 3x3 square element, iterated. Out-of-image
/// reads count as false, so regions erode at the borders too.
BinaryMask erode(const BinaryMask& mask, int iterations);

/// Boundary band of `region`: dilate(region, w) \ erode(region, w), minus
/// the pixels of `exclude` (the opposite region of the pair, may be null)
/// and minus anything within clip_margin of the image border. Straddles
/// the contour symmetrically, w pixels inside + w outside.
///
/// Throws EmptyBand when nothing survives; callers treat that as
/// "abstain for this radius", not as a failure.
BoundaryBand boundary_band(const Region& region, const BinaryMask& mask, int w,
                           int clip_margin, const Region* exclude = nullptr);

/// Region pixels as a standalone mask of the given dimensions.
BinaryMask region_to_mask(const Region& region, int width, int height);

} // namespace cmfa
