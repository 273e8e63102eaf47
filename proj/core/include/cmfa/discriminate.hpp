#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cmfa/lbp.hpp"
#include "cmfa/region.hpp"

namespace cmfa {

/// Occurrence histogram of LBP codes over a boundary band. 2^P bins.
struct LbpHistogram {
    std::vector<std::uint64_t> bins;
    std::uint64_t total = 0;

    double normalized(std::size_t k) const {
        return static_cast<double>(bins[k]) / static_cast<double>(total);
    }
};

enum class Vote { A_forged, B_forged, abstain };
enum class Final { A_forged, B_forged, undecided };

std::string to_string(Vote v);
std::string to_string(Final f);

/// Outcome of the std-dev comparison at one radius. The stds are absent
/// when a band could not be formed at this radius.
struct RadiusDecision {
    double radius = 0.0;
    std::optional<double> std_a;
    std::optional<double> std_b;
    Vote vote = Vote::abstain;
    std::string reason; // set when vote == abstain ("tie", "empty_band", ...)
};

/// Full multi-radius verdict over a region pair.
struct Verdict {
    std::vector<RadiusDecision> decisions;
    Final final = Final::undecided;
    double margin = 0.0; // summed std gap over the radii that voted; diagnostic only
    int band_width = 0;
    int neighbors = 0;
};

struct DiscriminatorConfig {
    std::vector<double> radii = {2.0, 3.0, 4.0};
    int neighbors = 8;  // P
    int band_width = 4; // w, the band half-width
    double tie_tolerance = 1e-9;
};

/// Histogram of the band's codes: bins[k] = #{pixels in band with code k}.
/// Every band pixel must be valid in the map (clip the band at ceil(R)).
LbpHistogram band_histogram(const LbpMap& lbp, const BoundaryBand& band);

/// Sample standard deviation of the normalized bin frequencies:
/// s = sqrt( (1/(n-1)) * sum_i (q_i - mean(q))^2 ), n = bin count.
/// Normalizing first makes bands of different sizes comparable.
double hist_std(const LbpHistogram& h);

/// One radius of the pipeline: LBP map, per-region boundary bands clipped
/// at ceil(R), histogram stds, and a vote for the region with the smaller
/// std. A band failure is recorded as an abstention, not an error.
RadiusDecision decide_radius(const GrayImage& img, const RegionPair& pair,
                             const BinaryMask& mask, double radius, int neighbors,
                             int band_width, double tie_tolerance = 1e-9);

/// The vote-combination rule: a region is named forged when at least two
/// radii vote for it (and more than for the other region, which is the
/// same condition for the default three radii).
Final combine_votes(std::span<const Vote> votes);

/// Full discrimination: decide_radius per configured radius, then the
/// 2-of-3 style combination. Deterministic regardless of worker count.
///
/// Throws NotEnoughRegions / ImageTooSmall for unusable inputs.
Verdict discriminate(const GrayImage& img, const BinaryMask& mask,
                     const DiscriminatorConfig& cfg = {});

/// As above but with a pre-selected pair (used when callers already ran
/// connected_components, e.g. on a detector output).
Verdict discriminate_pair(const GrayImage& img, const RegionPair& pair,
                          const BinaryMask& mask, const DiscriminatorConfig& cfg = {});

/// Verdict as a JSON object with fixed field names and ordering:
/// {final, per_radius: [{R, std_a, std_b, vote, reason?}], margin,
///  band_width, P}. Byte-stable for identical inputs.
std::string verdict_to_json(const Verdict& verdict, int indent = -1);

} // namespace cmfa
