#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "cmfa/raster.hpp"

namespace cmfa {

using ImageBytes = std::vector<std::uint8_t>;
using DecodedImage = std::variant<GrayImage, RgbImage>;

/// Overlay label intensities written by encode_overlay. Two fixed values
/// so a rendered result names the regions without a legend.
inline constexpr std::uint8_t kOverlayOriginal = 200;
inline constexpr std::uint8_t kOverlayDuplicated = 60;

/// Decodes a PNG (8-bit gray or RGB) or binary PGM/PPM stream.
/// 16-bit payloads are rejected, never truncated.
DecodedImage decode_image(const ImageBytes& bytes);

/// Decodes a single-channel image and binarizes it: value > 127 -> true.
BinaryMask decode_mask(const ImageBytes& bytes);

/// 8-bit grayscale PNG. Byte-deterministic for identical inputs.
ImageBytes encode_gray_png(const GrayImage& img);

/// Mask as 8-bit grayscale PNG with values exactly 0 and 255.
ImageBytes encode_mask(const BinaryMask& mask);

/// Renders a verdict panel: pixels of the original region are written as
/// kOverlayOriginal, pixels of the duplicated region as kOverlayDuplicated,
/// everything else is the input image. Pixel coordinates are row-major
/// linear indices into img.
ImageBytes encode_overlay(const GrayImage& img,
                          const std::vector<std::uint32_t>& original_pixels,
                          const std::vector<std::uint32_t>& duplicated_pixels);

/// Convenience: decode_image + to_grayscale when the payload is RGB.
GrayImage load_gray(const std::filesystem::path& path);
BinaryMask load_mask(const std::filesystem::path& path);

ImageBytes read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const ImageBytes& bytes);

} // namespace cmfa
