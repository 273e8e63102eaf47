#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "cmfa/raster.hpp"

namespace cmfa {

/// Circular LBP configuration.
///
/// Sampling convention, fixed for reproducibility:
///   - neighbor p sits at angle 2*pi*p/P, p = 0 on the +x axis, angles
///     counter-clockwise with y pointing up (so the offset is
///     (R*cos a, -R*sin a) in row/column coordinates);
///   - offsets within 1e-9 of an integer grid point are snapped to it,
///     so axis-aligned neighbors at integer radius read the pixel exactly;
///   - everything else is sampled with bilinear interpolation in double
///     precision, lerp form: top = a + tx*(b-a), etc.;
///   - bit p = 1 iff g_p - g_center >= 0, compared without rounding.
struct LbpConfig {
    int neighbors = 8;   // P, in [1, 16]
    double radius = 1.0; // R, real-valued, >= 1
};

/// Per-pixel LBP codes for one (P, R) configuration. Codes closer than
/// `margin` pixels to any border are invalid (stored as 0).
struct LbpMap {
    int width = 0;
    int height = 0;
    int margin = 0;    // = ceil(R)
    int neighbors = 0; // P
    std::vector<std::uint16_t> codes; // row-major, [0, 2^P - 1]

    std::uint16_t at(int x, int y) const {
        return codes[static_cast<std::size_t>(y) * width + x];
    }
    bool valid(int x, int y) const {
        return x >= margin && x < width - margin && y >= margin && y < height - margin;
    }
};

/// Offsets and interpolation weights for one neighbor, shared between the
/// production kernel and any straight-line reimplementation so the two are
/// comparable bit for bit.
struct NeighborSample {
    int ix = 0, iy = 0;       // floor of the offset
    double tx = 0.0, ty = 0.0; // fractional parts; both zero on an exact hit
    bool exact = false;
};

/// The sampling definition above, evaluated for neighbor p of P at radius R.
NeighborSample neighbor_sample(int p, int neighbors, double radius);

/// Computes the circular LBP code map. Rows are processed concurrently;
/// the result is bitwise independent of the worker count.
///
/// Throws ImageTooSmall unless both image dimensions exceed 2*ceil(R).
LbpMap compute_lbp(const GrayImage& img, const LbpConfig& cfg);

/// True iff adding the constant offset c to every pixel leaves the code
/// map identical. Throws OffsetWouldClip when img + c leaves [0, 255].
bool lbp_shift_check(const GrayImage& img, int c, const LbpConfig& cfg = {});

/// Code map rendered as 8-bit intensities (invalid margin = 0). Requires
/// P <= 8 so codes fit one byte.
GrayImage lbp_debug_image(const LbpMap& map);

} // namespace cmfa
