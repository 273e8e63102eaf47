#pragma once

// Straight-line reference implementations used as test oracles. Each one is
// written for obviousness, not speed: nested loops, no shared state with the
// production code, and the documented definitions transcribed literally.

#include <cstdint>
#include <random>
#include <vector>

#include <cmfa/detect.hpp>
#include <cmfa/raster.hpp>

namespace ref {

/// Per-pixel circular LBP, recomputing the sampling geometry from scratch
/// for every pixel: angle 2*pi*p/P, offset (R*cos a, -R*sin a), snap to the
/// integer grid within 1e-9, bilinear interpolation in lerp form, bit set
/// iff g_p - g_center >= 0. Margin pixels (within ceil(R) of a border) are 0.
std::vector<std::uint16_t> lbp_codes(const cmfa::GrayImage& img, int neighbors,
                                     double radius);

/// 8-connected components by breadth-first flood fill. Components smaller
/// than min_area are dropped. Each component's pixels are sorted ascending;
/// the list is ordered by area descending, ties by first pixel.
std::vector<std::vector<std::uint32_t>> flood_components(const cmfa::BinaryMask& mask,
                                                         std::size_t min_area);

/// 3x3 binary dilation/erosion by literal window scan, iterated.
/// Out-of-image neighbors read as false.
cmfa::BinaryMask window_dilate(const cmfa::BinaryMask& mask, int iterations);
cmfa::BinaryMask window_erode(const cmfa::BinaryMask& mask, int iterations);

/// Boundary band by set arithmetic on the masks above:
/// (dilate(region, w) minus erode(region, w)) minus exclude pixels minus
/// anything within clip_margin of the border. Sorted linear indices.
std::vector<std::uint32_t> band_pixels(const cmfa::BinaryMask& region_mask, int w,
                                       int clip_margin,
                                       const cmfa::BinaryMask* exclude = nullptr);

/// Orthonormal 2-D DCT-II of a B x B block by the quadruple loop:
/// F(f,g) = a(f) a(g) sum_x sum_y px(x,y) cos((2x+1) f pi / 2B)
///                                cos((2y+1) g pi / 2B),
/// a(0) = sqrt(1/B), a(f>0) = sqrt(2/B). Row-major output.
std::vector<double> dct2(const std::vector<double>& block, int block_size);

/// All-pairs block matching: every (i, j), i < j, with identical descriptors
/// and origins at least params.min_offset() apart, canonicalized like the
/// production matcher. Quadratic, for small images only.
std::vector<cmfa::BlockMatch> all_pair_matches(const cmfa::BlockFeatures& features,
                                               const cmfa::DetectorParams& params);

/// Direct 2-D Gaussian convolution with the separable product kernel of
/// radius ceil(3 sigma), renormalized over the in-image window.
std::vector<double> gaussian_blur_2d(const std::vector<double>& src, int width,
                                     int height, double sigma);

/// Pixel F1 between two masks: 2|A and B| / (|A| + |B|), 0 when both empty.
double pixel_f1(const cmfa::BinaryMask& a, const cmfa::BinaryMask& b);

/// Uniformly random test rasters from a seeded engine.
cmfa::GrayImage random_image(int width, int height, std::mt19937_64& rng);
cmfa::BinaryMask random_blob_mask(int width, int height, std::mt19937_64& rng);

} // namespace ref
