#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cmfa/raster.hpp"

namespace cmfa {

enum class ShapeKind { rect, ellipse };

std::string to_string(ShapeKind k);

/// How the pasted contour is treated. `none` leaves the paste bit-exact;
/// `gaussian_feather` alpha-ramps and blurs the pasted region's boundary
/// band (width `band`, blur std `sigma`) while leaving everything else,
/// in particular the source region and its surroundings, untouched.
struct BlendSpec {
    enum class Mode { none, gaussian_feather };

    Mode mode = Mode::none;
    double sigma = 2.0;
    int band = 4;
};

std::string to_string(BlendSpec::Mode m);

/// A single copy-move edit: an axis-aligned rect or ellipse footprint whose
/// bounding box is `width` x `height` at (src_x, src_y), duplicated at
/// offset (dx, dy).
struct ForgerySpec {
    ShapeKind shape = ShapeKind::rect;
    uint32_t width = 0;
    uint32_t height = 0;
    uint32_t src_x = 0;
    uint32_t src_y = 0;
    int32_t dx = 0;
    int32_t dy = 0;
    BlendSpec blend;
};

struct GroundTruth {
    BinaryMask mask; // exactly the two footprints
    int source_label = 0;
    int pasted_label = 0;
    ForgerySpec spec;
};

struct ForgeryResult {
    GrayImage image;
    GroundTruth truth;
};

/// Linear pixel indices (sorted) of the source footprint. For ellipses a
/// pixel (x, y) belongs to the footprint when, with c = ((w-1)/2, (h-1)/2)
/// and semi-axes (w/2, h/2) relative to the bounding box,
/// ((x-cx)/(w/2))^2 + ((y-cy)/(h/2))^2 <= 1.
/// Throws GeometryViolation when the bounding box leaves the image.
std::vector<uint32_t> shape_footprint(const ForgerySpec& spec, uint32_t img_width,
                                      uint32_t img_height);

/// Apply the edit. The pasted footprint must stay inside the image and keep
/// a Chebyshev gap from the source footprint: at least 2 (not 8-adjacent,
/// so the truth mask has two components) for blend none, and more than
/// 2 * band for feathering so the blur cannot reach the source side.
///
/// Feathering: with d(p) the Chebyshev depth of p inside the pasted
/// footprint (0 outside), alpha(p) = min(1, d(p) / (band + 1)). Band pixels
/// of the naively pasted image are replaced by a Gaussian blur (kernel
/// radius ceil(3 * sigma), renormalized where it overhangs the image) of
/// the alpha-blend alpha * pasted + (1 - alpha) * original. Only boundary
/// band pixels are rewritten.
ForgeryResult synthesize(const GrayImage& base, const ForgerySpec& spec);

struct TextureParams {
    int shapes = -1;     // < 0 picks a density proportional to the tile area
    int period = 64;     // > 0 tiles the texture with this period; 0 = aperiodic
    int noise = 1;       // per-pixel uniform noise amplitude, 0 = none
    int max_radius = 0;  // shape radius cap; 0 = min(48, tile / 4)
};

/// Deterministic piecewise-flat test texture: random filled ellipses and
/// rectangles over a mid-gray canvas. Same arguments, same pixels.
///
/// period > 0 draws the shapes on a toroidal period x period tile and
/// repeats it across the image, so contents at offsets that are multiples
/// of the period are identical; noise > 0 then adds independent per-pixel
/// uniform noise from [-noise, noise]. A copy pasted at a lattice offset of
/// such a texture continues its new surroundings seamlessly, which makes
/// unblended pastes statistically invisible, while the noise keeps the two
/// boundary bands from being bit-identical. Pass period = 0, noise = 0 for
/// a plain aperiodic texture (block-matching demos need one: a periodic
/// image is wall-to-wall self-matches).
GrayImage generate_base_texture(uint32_t width, uint32_t height, uint64_t seed,
                                const TextureParams& params = {});

struct CorpusParams {
    enum class Shapes { mixed, rect_only, ellipse_only };

    int count = 50;
    uint64_t seed = 1;
    BlendSpec blend;             // applied to every sample
    Shapes shapes = Shapes::mixed;
    uint32_t min_area = 2000;    // accepted footprint area range, pixels
    uint32_t max_area = 6000;
    int offset_step = 64;        // paste offsets snap to this lattice; 0 = free
    double min_ring_variance = 0.0; // reject placements whose surroundings are this flat
    int max_retries = 100;       // geometry rejections per sample before giving up
};

struct CorpusSample {
    uint32_t base_index = 0;
    ForgeryResult forgery;
};

/// `count` forgeries over the base images (round-robin), sampled shape,
/// size, position and offset; with offset_step > 0 the offset is drawn
/// from the in-bounds lattice multiples (pair it with base textures of the
/// same period). Each sample draws from its own RNG stream derived from
/// (seed, index), so results do not depend on the worker count. Throws
/// SampleExhausted when a sample exceeds max_retries.
std::vector<CorpusSample> make_corpus(const std::vector<GrayImage>& bases,
                                      const CorpusParams& params = {});

/// Ground truth as JSON with fixed field order:
/// {source_label, pasted_label, spec: {shape, width, height, src_x, src_y,
///  dx, dy, blend: {mode, sigma, band}}}.
std::string truth_to_json(const GroundTruth& truth, int indent = -1);

/// Write images/NNN.png, masks/NNN.png and truth/NNN.json under root.
/// Existing files with the same names are overwritten.
void write_corpus(const std::string& root, const std::vector<CorpusSample>& samples);

} // namespace cmfa
