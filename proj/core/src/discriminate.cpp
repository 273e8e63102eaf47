#include "cmfa/discriminate.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "cmfa/errors.hpp"

namespace cmfa {

std::string to_string(Vote v) {
    switch (v) {
        case Vote::A_forged: return "A_forged";
        case Vote::B_forged: return "B_forged";
        case Vote::abstain: return "abstain";
    }
    return "abstain";
}

std::string to_string(Final f) {
    switch (f) {
        case Final::A_forged: return "A_forged";
        case Final::B_forged: return "B_forged";
        case Final::undecided: return "undecided";
    }
    return "undecided";
}

LbpHistogram band_histogram(const LbpMap& lbp, const BoundaryBand& band) {
    if (band.pixels.empty())
        throw EmptyBand("band_histogram: empty band");
    LbpHistogram h;
    h.bins.assign(std::size_t{1} << lbp.neighbors, 0);
    for (std::uint32_t p : band.pixels)
        ++h.bins[lbp.codes[p]];
    h.total = band.pixels.size();
    return h;
}

double hist_std(const LbpHistogram& h) {
    const std::size_t n = h.bins.size();
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        mean += h.normalized(i);
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = h.normalized(i) - mean;
        ss += d * d;
    }
    return std::sqrt(ss / static_cast<double>(n - 1));
}

RadiusDecision decide_radius(const GrayImage& img, const RegionPair& pair,
                             const BinaryMask& mask, double radius, int neighbors,
                             int band_width, double tie_tolerance) {
    RadiusDecision d;
    d.radius = radius;
    const int clip = static_cast<int>(std::ceil(radius));
    try {
        const LbpMap lbp = compute_lbp(img, LbpConfig{neighbors, radius});
        const BoundaryBand band_a = boundary_band(pair.a, mask, band_width, clip, &pair.b);
        const BoundaryBand band_b = boundary_band(pair.b, mask, band_width, clip, &pair.a);
        d.std_a = hist_std(band_histogram(lbp, band_a));
        d.std_b = hist_std(band_histogram(lbp, band_b));
    } catch (const EmptyBand&) {
        d.vote = Vote::abstain;
        d.reason = "empty_band";
        return d;
    }
    // Smoother histogram (smaller std) marks the duplicated region.
    if (*d.std_a < *d.std_b - tie_tolerance) {
        d.vote = Vote::A_forged;
    } else if (*d.std_b < *d.std_a - tie_tolerance) {
        d.vote = Vote::B_forged;
    } else {
        d.vote = Vote::abstain;
        d.reason = "tie";
    }
    return d;
}

Final combine_votes(std::span<const Vote> votes) {
    int a = 0;
    int b = 0;
    for (Vote v : votes) {
        if (v == Vote::A_forged) ++a;
        if (v == Vote::B_forged) ++b;
    }
    if (a >= 2 && a > b) return Final::A_forged;
    if (b >= 2 && b > a) return Final::B_forged;
    return Final::undecided;
}

Verdict discriminate_pair(const GrayImage& img, const RegionPair& pair,
                          const BinaryMask& mask, const DiscriminatorConfig& cfg) {
    if (img.width != mask.width || img.height != mask.height)
        throw DimensionMismatch("discriminate: image and mask dimensions differ");
    double max_radius = 1.0;
    for (double r : cfg.radii)
        max_radius = std::max(max_radius, r);
    const int margin = static_cast<int>(std::ceil(max_radius));
    if (img.width <= 2 * margin || img.height <= 2 * margin)
        throw ImageTooSmall("discriminate: image too small for the largest radius");

    Verdict v;
    v.band_width = cfg.band_width;
    v.neighbors = cfg.neighbors;
    v.decisions.reserve(cfg.radii.size());
    for (double r : cfg.radii)
        v.decisions.push_back(decide_radius(img, pair, mask, r, cfg.neighbors,
                                            cfg.band_width, cfg.tie_tolerance));

    std::vector<Vote> votes;
    votes.reserve(v.decisions.size());
    for (const RadiusDecision& d : v.decisions) {
        votes.push_back(d.vote);
        if (d.vote == Vote::A_forged)
            v.margin += *d.std_b - *d.std_a;
        else if (d.vote == Vote::B_forged)
            v.margin += *d.std_a - *d.std_b;
    }
    v.final = combine_votes(votes);
    return v;
}

Verdict discriminate(const GrayImage& img, const BinaryMask& mask,
                     const DiscriminatorConfig& cfg) {
    const RegionPair pair = select_pair(connected_components(mask));
    return discriminate_pair(img, pair, mask, cfg);
}

std::string verdict_to_json(const Verdict& verdict, int indent) {
    nlohmann::ordered_json j;
    j["final"] = to_string(verdict.final);
    j["per_radius"] = nlohmann::ordered_json::array();
    for (const RadiusDecision& d : verdict.decisions) {
        nlohmann::ordered_json r;
        r["R"] = d.radius;
        if (d.std_a) r["std_a"] = *d.std_a; else r["std_a"] = nullptr;
        if (d.std_b) r["std_b"] = *d.std_b; else r["std_b"] = nullptr;
        r["vote"] = to_string(d.vote);
        if (!d.reason.empty()) r["reason"] = d.reason;
        j["per_radius"].push_back(std::move(r));
    }
    j["margin"] = verdict.margin;
    j["band_width"] = verdict.band_width;
    j["P"] = verdict.neighbors;
    return j.dump(indent);
}

} // namespace cmfa
