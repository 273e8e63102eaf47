#include "cmfa/lbp.hpp"

#include <algorithm>
#include <numbers>

#include "cmfa/errors.hpp"
#include "cmfa/parallel.hpp"

namespace cmfa {

namespace {

constexpr double kSnapEps = 1e-9;

void validate(const LbpConfig& cfg) {
    if (cfg.neighbors < 1 || cfg.neighbors > 16)
        throw Error("lbp: neighbors must be in [1, 16]");
    if (!(cfg.radius >= 1.0))
        throw Error("lbp: radius must be >= 1");
}

} // namespace

NeighborSample neighbor_sample(int p, int neighbors, double radius) {
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(p) /
                         static_cast<double>(neighbors);
    double dx = radius * std::cos(angle);
    double dy = -radius * std::sin(angle);
    if (std::abs(dx - std::round(dx)) < kSnapEps) dx = std::round(dx);
    if (std::abs(dy - std::round(dy)) < kSnapEps) dy = std::round(dy);

    NeighborSample s;
    s.ix = static_cast<int>(std::floor(dx));
    s.iy = static_cast<int>(std::floor(dy));
    s.tx = dx - std::floor(dx);
    s.ty = dy - std::floor(dy);
    s.exact = s.tx == 0.0 && s.ty == 0.0;
    return s;
}

LbpMap compute_lbp(const GrayImage& img, const LbpConfig& cfg) {
    validate(cfg);
    const int margin = static_cast<int>(std::ceil(cfg.radius));
    if (img.width <= 2 * margin || img.height <= 2 * margin)
        throw ImageTooSmall("lbp: image dimensions must exceed 2*ceil(R)");

    const int P = cfg.neighbors;
    std::vector<NeighborSample> samples(static_cast<std::size_t>(P));
    for (int p = 0; p < P; ++p)
        samples[static_cast<std::size_t>(p)] = neighbor_sample(p, P, cfg.radius);

    LbpMap map;
    map.width = img.width;
    map.height = img.height;
    map.margin = margin;
    map.neighbors = P;
    map.codes.assign(img.size(), 0);

    const int w = img.width;
    const std::uint8_t* src = img.data.data();
    std::uint16_t* dst = map.codes.data();

    detail::parallel_chunks(margin, img.height - margin, [&](std::int64_t y0, std::int64_t y1) {
        for (int y = static_cast<int>(y0); y < static_cast<int>(y1); ++y) {
            const std::size_t row = static_cast<std::size_t>(y) * w;
            for (int x = margin; x < w - margin; ++x) {
                const double center = src[row + x];
                std::uint16_t code = 0;
                for (int p = 0; p < P; ++p) {
                    const NeighborSample& s = samples[static_cast<std::size_t>(p)];
                    const std::size_t base =
                        static_cast<std::size_t>(y + s.iy) * w + static_cast<std::size_t>(x + s.ix);
                    double gp;
                    if (s.exact) {
                        gp = src[base];
                    } else {
                        const double a = src[base];
                        const double b = src[base + 1];
                        const double c = src[base + w];
                        const double d = src[base + w + 1];
                        const double top = a + s.tx * (b - a);
                        const double bottom = c + s.tx * (d - c);
                        gp = top + s.ty * (bottom - top);
                    }
                    if (gp - center >= 0.0)
                        code |= static_cast<std::uint16_t>(1u << p);
                }
                dst[row + x] = code;
            }
        }
    });
    return map;
}

bool lbp_shift_check(const GrayImage& img, int c, const LbpConfig& cfg) {
    const auto [lo, hi] = std::minmax_element(img.data.begin(), img.data.end());
    if (static_cast<int>(*hi) + c > 255 || static_cast<int>(*lo) + c < 0)
        throw OffsetWouldClip("lbp_shift_check: offset would clip intensities");

    GrayImage shifted(img.width, img.height);
    for (std::size_t i = 0; i < img.data.size(); ++i)
        shifted.data[i] = static_cast<std::uint8_t>(static_cast<int>(img.data[i]) + c);

    const LbpMap base = compute_lbp(img, cfg);
    const LbpMap moved = compute_lbp(shifted, cfg);
    return base.codes == moved.codes;
}

GrayImage lbp_debug_image(const LbpMap& map) {
    if (map.neighbors > 8)
        throw Error("lbp: debug image requires P <= 8");
    GrayImage out(map.width, map.height);
    for (std::size_t i = 0; i < map.codes.size(); ++i)
        out.data[i] = static_cast<std::uint8_t>(map.codes[i]);
    return out;
}

} // namespace cmfa
