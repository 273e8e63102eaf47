#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <random>

#include <cmfa/discriminate.hpp>
#include <cmfa/errors.hpp>
#include <cmfa/lbp.hpp>
#include <cmfa/region.hpp>
#include <cmfa/synth.hpp>

#include "support/reference.hpp"

using cmfa::BinaryMask;
using cmfa::Final;
using cmfa::GrayImage;
using cmfa::LbpHistogram;
using cmfa::Vote;

namespace {

BinaryMask two_square_mask(int width, int height, int ax, int ay, int bx, int by,
                           int side) {
    BinaryMask mask(width, height);
    for (int y = 0; y < side; ++y) {
        for (int x = 0; x < side; ++x) {
            mask.set(ax + x, ay + y, true);
            mask.set(bx + x, by + y, true);
        }
    }
    return mask;
}

} // namespace

TEST_CASE("band histogram counts every band pixel exactly once") {
    std::mt19937_64 rng(301);
    for (int i = 0; i < 20; ++i) {
        const GrayImage img = ref::random_image(40, 40, rng);
        const BinaryMask mask = two_square_mask(40, 40, 6, 6, 24, 24, 10);
        const auto pair = cmfa::select_pair(cmfa::connected_components(mask, 1));
        const auto lbp = cmfa::compute_lbp(img, {.neighbors = 8, .radius = 2.0});
        const auto band = cmfa::boundary_band(pair.a, mask, 2, lbp.margin, &pair.b);
        const LbpHistogram hist = cmfa::band_histogram(lbp, band);

        REQUIRE(hist.bins.size() == 256);
        CHECK(hist.total == band.pixels.size());
        std::uint64_t sum = 0;
        for (const auto b : hist.bins) sum += b;
        CHECK(sum == band.pixels.size());

        // direct counting over the band's code list
        std::array<std::uint64_t, 256> expected{};
        for (const auto p : band.pixels) ++expected[lbp.codes[p]];
        for (std::size_t k = 0; k < 256; ++k) CHECK(hist.bins[k] == expected[k]);
    }
}

TEST_CASE("a constant image fills the all-ones bin only") {
    GrayImage img(32, 32);
    std::fill(img.data.begin(), img.data.end(), 77);
    const BinaryMask mask = two_square_mask(32, 32, 6, 6, 20, 20, 8);
    const auto pair = cmfa::select_pair(cmfa::connected_components(mask, 1));
    const auto lbp = cmfa::compute_lbp(img, {.neighbors = 8, .radius = 2.0});
    const auto band = cmfa::boundary_band(pair.a, mask, 2, lbp.margin, &pair.b);
    const LbpHistogram hist = cmfa::band_histogram(lbp, band);
    CHECK(hist.bins[255] == band.pixels.size());
    CHECK(hist.total == band.pixels.size());
    for (std::size_t k = 0; k < 255; ++k) CHECK(hist.bins[k] == 0);
}

TEST_CASE("histogram std dev follows the sample formula over frequencies") {
    SUBCASE("uniform histogram has zero spread") {
        LbpHistogram h;
        h.bins.assign(256, 4);
        h.total = 256 * 4;
        CHECK(cmfa::hist_std(h) == 0.0);
    }

    SUBCASE("one-hot 256-bin histogram matches the direct summation") {
        LbpHistogram h;
        h.bins.assign(256, 0);
        h.bins[31] = 1000;
        h.total = 1000;
        // n frequencies: one at 1, 255 at 0; mean 1/256; sample variance
        // over n-1 = 255 terms
        const double mean = 1.0 / 256.0;
        double acc = (1.0 - mean) * (1.0 - mean) + 255.0 * mean * mean;
        const double expected = std::sqrt(acc / 255.0);
        CHECK(cmfa::hist_std(h) == doctest::Approx(expected).epsilon(1e-12));
        CHECK(cmfa::hist_std(h) == doctest::Approx(0.0625).epsilon(1e-3));
    }

    SUBCASE("scaling every count leaves the spread unchanged") {
        std::mt19937_64 rng(302);
        LbpHistogram h;
        h.bins.assign(256, 0);
        h.total = 0;
        for (auto& b : h.bins) {
            b = rng() % 50;
            h.total += b;
        }
        LbpHistogram scaled = h;
        for (auto& b : scaled.bins) b *= 10;
        scaled.total *= 10;
        CHECK(cmfa::hist_std(h) == doctest::Approx(cmfa::hist_std(scaled)).epsilon(1e-12));
    }
}

TEST_CASE("vote combination implements the two-vote majority exactly") {
    const std::array<Vote, 3> options{Vote::A_forged, Vote::B_forged, Vote::abstain};
    for (const Vote v0 : options) {
        for (const Vote v1 : options) {
            for (const Vote v2 : options) {
                const std::array<Vote, 3> votes{v0, v1, v2};
                int a = 0, b = 0;
                for (const Vote v : votes) {
                    a += v == Vote::A_forged;
                    b += v == Vote::B_forged;
                }
                Final expected = Final::undecided;
                if (a >= 2 && a > b) expected = Final::A_forged;
                else if (b >= 2 && b > a) expected = Final::B_forged;
                CHECK(cmfa::combine_votes(votes) == expected);
            }
        }
    }
    // spot checks of the rule's shape
    CHECK(cmfa::combine_votes(std::array{Vote::B_forged, Vote::B_forged, Vote::A_forged}) ==
          Final::B_forged);
    CHECK(cmfa::combine_votes(std::array{Vote::A_forged, Vote::abstain, Vote::abstain}) ==
          Final::undecided);
}

TEST_CASE("mirror-symmetric regions produce a tie at every radius") {
    // both regions see bit-identical band content: votes must abstain
    GrayImage img(48, 24);
    std::mt19937_64 rng(303);
    for (int y = 0; y < 24; ++y)
        for (int x = 0; x < 24; ++x) {
            const auto v = static_cast<std::uint8_t>(rng() % 256);
            img.set(x, y, v);
            img.set(47 - x, y, v); // mirrored right half
        }
    BinaryMask mask(48, 24);
    for (int y = 8; y < 16; ++y)
        for (int x = 8; x < 16; ++x) {
            mask.set(x, y, true);
            mask.set(47 - x, y, true);
        }
    const auto verdict = cmfa::discriminate(img, mask);
    CHECK(verdict.final == Final::undecided);
    for (const auto& d : verdict.decisions) {
        CHECK(d.vote == Vote::abstain);
        CHECK(d.reason == "tie");
    }
}

TEST_CASE("feathered pastes are named at single radii and in the final verdict") {
    // synthesizer forgeries with a feathered boundary: the pasted region's
    // band histogram flattens, so its std drops below the source's
    std::vector<cmfa::GrayImage> bases;
    for (int b = 0; b < 2; ++b)
        bases.push_back(cmfa::generate_base_texture(256, 256, 900 + b));
    cmfa::CorpusParams params;
    params.count = 8;
    params.seed = 31;
    params.blend.mode = cmfa::BlendSpec::Mode::gaussian_feather;
    const auto samples = cmfa::make_corpus(bases, params);

    int final_right = 0, radius_right = 0, radius_votes = 0;
    for (const auto& sample : samples) {
        const auto& truth = sample.forgery.truth;
        const auto pair = cmfa::select_pair(cmfa::connected_components(truth.mask, 1));
        const auto verdict =
            cmfa::discriminate_pair(sample.forgery.image, pair, truth.mask);
        const Final pasted_final = truth.pasted_label == pair.a.label ? Final::A_forged
                                                                      : Final::B_forged;
        final_right += verdict.final == pasted_final;
        const Vote pasted_vote = truth.pasted_label == pair.a.label ? Vote::A_forged
                                                                    : Vote::B_forged;
        for (const auto& d : verdict.decisions) {
            if (d.vote == Vote::abstain) continue;
            ++radius_votes;
            radius_right += d.vote == pasted_vote;
        }
    }
    CHECK(final_right >= 6);                 // 8 samples, allow one miss
    CHECK(radius_right * 2 > radius_votes);  // votes must beat coin flipping
}

TEST_CASE("a region hugging the border abstains with an empty-band reason") {
    // With radius 8 the LBP margin (8 rows) is wider than the band (4 px), so a
    // strip at rows 2..3 dilates to rows 0..7 and the clip removes all of it.
    GrayImage img(80, 80);
    std::mt19937_64 rng(304);
    for (auto& px : img.data) px = static_cast<std::uint8_t>(rng() % 256);
    BinaryMask mask(80, 80);
    for (int y = 2; y <= 3; ++y)
        for (int x = 2; x <= 65; ++x) mask.set(x, y, true);  // 128-px strip
    for (int y = 30; y < 50; ++y)
        for (int x = 30; x < 50; ++x) mask.set(x, y, true);  // 400-px square
    const auto verdict = cmfa::discriminate(img, mask, {.radii = {8.0}});
    REQUIRE(verdict.decisions.size() == 1);
    CHECK(verdict.decisions[0].vote == Vote::abstain);
    CHECK(verdict.decisions[0].reason == "empty_band");
    CHECK(verdict.final == Final::undecided);
}

TEST_CASE("swapping the region pair mirrors the verdict") {
    std::vector<cmfa::GrayImage> bases;
    bases.push_back(cmfa::generate_base_texture(192, 192, 77));
    cmfa::CorpusParams params;
    params.count = 6;
    params.seed = 5;
    params.blend.mode = cmfa::BlendSpec::Mode::gaussian_feather;
    for (const auto& sample : cmfa::make_corpus(bases, params)) {
        const auto& truth = sample.forgery.truth;
        const auto pair = cmfa::select_pair(cmfa::connected_components(truth.mask, 1));
        const cmfa::RegionPair swapped{pair.b, pair.a};
        const auto forward = cmfa::discriminate_pair(sample.forgery.image, pair, truth.mask);
        const auto reverse =
            cmfa::discriminate_pair(sample.forgery.image, swapped, truth.mask);
        const auto mirrored = [](Final f) {
            if (f == Final::A_forged) return Final::B_forged;
            if (f == Final::B_forged) return Final::A_forged;
            return Final::undecided;
        };
        CHECK(reverse.final == mirrored(forward.final));
        CHECK(reverse.margin == doctest::Approx(forward.margin).epsilon(1e-12));
        REQUIRE(reverse.decisions.size() == forward.decisions.size());
        for (std::size_t i = 0; i < forward.decisions.size(); ++i) {
            CHECK(forward.decisions[i].std_a == reverse.decisions[i].std_b);
            CHECK(forward.decisions[i].std_b == reverse.decisions[i].std_a);
        }
    }
}

TEST_CASE("fewer than two usable regions is an error") {
    GrayImage img(32, 32);
    BinaryMask mask(32, 32);
    for (int y = 4; y < 20; ++y)
        for (int x = 4; x < 20; ++x) mask.set(x, y, true);
    CHECK_THROWS_AS(cmfa::discriminate(img, mask), cmfa::NotEnoughRegions);
}

TEST_CASE("verdict JSON is byte-stable and names every radius") {
    std::vector<cmfa::GrayImage> bases;
    bases.push_back(cmfa::generate_base_texture(192, 192, 55));
    cmfa::CorpusParams params;
    params.count = 1;
    params.seed = 9;
    params.blend.mode = cmfa::BlendSpec::Mode::gaussian_feather;
    const auto samples = cmfa::make_corpus(bases, params);
    const auto& forgery = samples[0].forgery;
    const auto verdict = cmfa::discriminate(forgery.image, forgery.truth.mask);
    const std::string json = cmfa::verdict_to_json(verdict, 2);
    CHECK(json == cmfa::verdict_to_json(verdict, 2));
    CHECK(json.find("\"final\"") != std::string::npos);
    CHECK(json.find("\"per_radius\"") != std::string::npos);
    CHECK(json.find("\"margin\"") != std::string::npos);
    CHECK(json.find("\"band_width\"") != std::string::npos);
    CHECK(json.find("\"P\"") != std::string::npos);
}
