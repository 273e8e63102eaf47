#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cmfa/raster.hpp"

namespace cmfa {

// Block-matching detector: slides a B x B window over the image at stride 1,
// describes each block by its quantized low-frequency DCT coefficients, and
// looks for pairs of far-apart blocks with identical descriptors. Pairs are
// grouped by their displacement vector; displacements with enough support are
// reported and their block footprints form the output mask.
struct DetectorParams {
    int block_size = 16;
    int zigzag = 16;            // number of retained coefficients per block
    double quant = 16.0;        // coefficient quantization step
    int neighbor_window = 4;    // forward probes in the sorted descriptor list
    uint32_t min_support = 50;  // matches required to keep a displacement
    double min_variance = 5.0;  // population variance gate for flat blocks

    // Minimum Euclidean distance between matched block origins.
    double min_offset() const { return block_size + 1.0; }
};

// Zigzag scan order over a B x B coefficient matrix as (row, col) pairs.
// Antidiagonals are visited in ascending order of row+col; even diagonals run
// bottom-left to top-right, odd ones top-right to bottom-left.
std::vector<std::pair<int, int>> zigzag_order(int block_size, int count);

// Descriptors of all kept blocks, stored flat: coeffs[i * zigzag + k] is the
// k-th quantized coefficient of block i whose origin is (px[i], py[i]).
// Blocks whose pixel variance falls below the gate are absent.
struct BlockFeatures {
    int block_size = 0;
    int zigzag = 0;
    std::vector<uint32_t> px;
    std::vector<uint32_t> py;
    std::vector<int32_t> coeffs;

    size_t count() const { return px.size(); }
};

BlockFeatures extract_block_features(const GrayImage& img, const DetectorParams& params = {});

// A pair of blocks with identical descriptors. Oriented so that
// (bx - ax, by - ay) is the canonical displacement: dy > 0, or dy == 0 and
// dx > 0.
struct BlockMatch {
    uint32_t ax = 0, ay = 0;
    uint32_t bx = 0, by = 0;

    int dx() const { return static_cast<int>(bx) - static_cast<int>(ax); }
    int dy() const { return static_cast<int>(by) - static_cast<int>(ay); }
};

// Sorts descriptors lexicographically and pairs each entry with the next
// `neighbor_window` entries that compare equal and lie at least min_offset()
// away in the image plane.
std::vector<BlockMatch> match_blocks(const BlockFeatures& features, const DetectorParams& params = {});

struct ShiftCluster {
    int dx = 0;
    int dy = 0;
    uint32_t support = 0;
};

// Matches grouped by displacement, after dropping displacements with fewer
// than min_support matches. Clusters are ordered by support descending, then
// (dy, dx) ascending; matches follow cluster order, then (ay, ax) ascending.
struct FilteredMatches {
    std::vector<ShiftCluster> clusters;
    std::vector<BlockMatch> matches;
};

FilteredMatches filter_by_shift(const std::vector<BlockMatch>& matches, const DetectorParams& params = {});

// Union of the block footprints of every surviving match, smoothed by one
// 3 x 3 morphological closing.
BinaryMask matches_to_mask(const FilteredMatches& filtered, uint32_t width, uint32_t height,
                           int block_size);

struct DetectionResult {
    BinaryMask mask;
    std::vector<ShiftCluster> clusters;
};

DetectionResult detect(const GrayImage& img, const DetectorParams& params = {});

std::string detection_to_json(const DetectionResult& result, int indent = -1);

}  // namespace cmfa
