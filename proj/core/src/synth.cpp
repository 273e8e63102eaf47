#include "cmfa/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <random>
#include <utility>

#include <json.hpp>

#include "cmfa/errors.hpp"
#include "cmfa/image_io.hpp"
#include "cmfa/parallel.hpp"
#include "cmfa/region.hpp"

namespace cmfa {

namespace {

// Deterministic draws on top of mt19937_64. The standard distributions are
// implementation-defined, so bounded ints and unit reals are derived from
// raw engine output directly.
struct Rng {
    std::mt19937_64 eng;

    explicit Rng(uint64_t seed) : eng(seed) {}

    uint64_t next() { return eng(); }

    // inclusive range; modulo bias is irrelevant at these range sizes
    int range(int lo, int hi) {
        return lo + static_cast<int>(next() % static_cast<uint64_t>(hi - lo + 1));
    }

    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

uint64_t stream_seed(uint64_t seed, uint64_t index) {
    return seed + 0x9E3779B97F4A7C15ull * (index + 1);
}

void validate_blend(const BlendSpec& blend) {
    if (blend.mode == BlendSpec::Mode::gaussian_feather) {
        if (!(blend.sigma > 0.0)) throw Error("blend: sigma must be positive");
        if (blend.band < 1) throw Error("blend: band must be >= 1");
    }
}

// Chebyshev depth inside `mask`, capped at `limit`; 0 outside.
std::vector<int> chebyshev_depth(const BinaryMask& mask, int limit) {
    std::vector<int> depth(mask.bits.size(), 0);
    BinaryMask cur = mask;
    for (int d = 1; d <= limit; ++d) {
        bool any = false;
        for (size_t i = 0; i < cur.bits.size(); ++i) {
            if (cur.bits[i]) {
                depth[i] = d;
                any = true;
            }
        }
        if (!any) break;
        if (d < limit) cur = erode(cur, 1);
    }
    return depth;
}

// Separable Gaussian blur, kernel radius ceil(3*sigma), renormalized where
// the kernel overhangs the image.
std::vector<double> gaussian_blur(const std::vector<double>& src, int width, int height,
                                  double sigma) {
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> weights(static_cast<size_t>(radius) + 1);
    for (int k = 0; k <= radius; ++k)
        weights[static_cast<size_t>(k)] = std::exp(-(static_cast<double>(k) * k) /
                                                   (2.0 * sigma * sigma));

    std::vector<double> tmp(src.size());
    for (int y = 0; y < height; ++y) {
        const double* row = src.data() + static_cast<size_t>(y) * width;
        double* out = tmp.data() + static_cast<size_t>(y) * width;
        for (int x = 0; x < width; ++x) {
            double acc = 0.0;
            double norm = 0.0;
            const int lo = std::max(-radius, -x);
            const int hi = std::min(radius, width - 1 - x);
            for (int k = lo; k <= hi; ++k) {
                const double w = weights[static_cast<size_t>(std::abs(k))];
                acc += w * row[x + k];
                norm += w;
            }
            out[x] = acc / norm;
        }
    }
    std::vector<double> dst(src.size());
    for (int y = 0; y < height; ++y) {
        const int lo = std::max(-radius, -y);
        const int hi = std::min(radius, height - 1 - y);
        for (int x = 0; x < width; ++x) {
            double acc = 0.0;
            double norm = 0.0;
            for (int k = lo; k <= hi; ++k) {
                const double w = weights[static_cast<size_t>(std::abs(k))];
                acc += w * tmp[static_cast<size_t>(y + k) * width + x];
                norm += w;
            }
            dst[static_cast<size_t>(y) * width + x] = acc / norm;
        }
    }
    return dst;
}

}  // namespace

std::string to_string(ShapeKind k) {
    return k == ShapeKind::rect ? "rect" : "ellipse";
}

std::string to_string(BlendSpec::Mode m) {
    return m == BlendSpec::Mode::none ? "none" : "gaussian_feather";
}

std::vector<uint32_t> shape_footprint(const ForgerySpec& spec, uint32_t img_width,
                                      uint32_t img_height) {
    if (spec.width < 1 || spec.height < 1)
        throw GeometryViolation("footprint: width and height must be >= 1");
    if (static_cast<uint64_t>(spec.src_x) + spec.width > img_width ||
        static_cast<uint64_t>(spec.src_y) + spec.height > img_height)
        throw GeometryViolation("footprint: source box leaves the image");

    std::vector<uint32_t> pixels;
    if (spec.shape == ShapeKind::rect) {
        pixels.reserve(static_cast<size_t>(spec.width) * spec.height);
        for (uint32_t y = spec.src_y; y < spec.src_y + spec.height; ++y)
            for (uint32_t x = spec.src_x; x < spec.src_x + spec.width; ++x)
                pixels.push_back(y * img_width + x);
        return pixels;
    }

    const double cx = (spec.width - 1) / 2.0;
    const double cy = (spec.height - 1) / 2.0;
    const double rx = spec.width / 2.0;
    const double ry = spec.height / 2.0;
    for (uint32_t y = 0; y < spec.height; ++y) {
        const double ny = (y - cy) / ry;
        for (uint32_t x = 0; x < spec.width; ++x) {
            const double nx = (x - cx) / rx;
            if (nx * nx + ny * ny <= 1.0)
                pixels.push_back((spec.src_y + y) * img_width + (spec.src_x + x));
        }
    }
    if (pixels.empty()) throw GeometryViolation("footprint: ellipse contains no pixels");
    return pixels;
}

ForgeryResult synthesize(const GrayImage& base, const ForgerySpec& spec) {
    validate_blend(spec.blend);
    const uint32_t W = static_cast<uint32_t>(base.width);
    const uint32_t H = static_cast<uint32_t>(base.height);
    const std::vector<uint32_t> src = shape_footprint(spec, W, H);

    const int64_t px = static_cast<int64_t>(spec.src_x) + spec.dx;
    const int64_t py = static_cast<int64_t>(spec.src_y) + spec.dy;
    if (px < 0 || py < 0 || px + spec.width > W || py + spec.height > H)
        throw GeometryViolation("paste: target box leaves the image");

    // Offset applied to linear indices; bounds were checked box-wise above.
    const int64_t shift = static_cast<int64_t>(spec.dy) * W + spec.dx;

    const bool feather = spec.blend.mode == BlendSpec::Mode::gaussian_feather;
    const int gap = feather ? 2 * spec.blend.band : 1;
    BinaryMask src_mask(base.width, base.height);
    for (uint32_t p : src) src_mask.bits[p] = 1;
    const BinaryMask crowded = dilate(src_mask, gap);
    for (uint32_t p : src) {
        const uint32_t q = static_cast<uint32_t>(p + shift);
        if (crowded.bits[q])
            throw GeometryViolation(feather
                                        ? "paste: footprints closer than the feather band allows"
                                        : "paste: footprints overlap or touch");
    }

    ForgeryResult result;
    result.image = base;
    result.truth.spec = spec;
    result.truth.mask = BinaryMask(base.width, base.height);
    BinaryMask pasted_mask(base.width, base.height);
    for (uint32_t p : src) {
        const uint32_t q = static_cast<uint32_t>(p + shift);
        result.image.data[q] = base.data[p];
        result.truth.mask.bits[p] = 1;
        result.truth.mask.bits[q] = 1;
        pasted_mask.bits[q] = 1;
    }

    const std::vector<Region> components = connected_components(result.truth.mask, 1);
    if (components.size() != 2)
        throw Error("synthesize: truth mask does not split into two components");
    const bool first_is_source =
        std::binary_search(components[0].pixels.begin(), components[0].pixels.end(), src[0]);
    result.truth.source_label = first_is_source ? components[0].label : components[1].label;
    result.truth.pasted_label = first_is_source ? components[1].label : components[0].label;

    if (!feather) return result;

    const int band_w = spec.blend.band;
    Region pasted;
    pasted.label = result.truth.pasted_label;
    pasted.pixels.reserve(src.size());
    for (uint32_t i = 0; i < pasted_mask.bits.size(); ++i)
        if (pasted_mask.bits[i]) pasted.pixels.push_back(i);
    const BoundaryBand band = boundary_band(pasted, pasted_mask, band_w, 0);

    // alpha * pasted + (1 - alpha) * original, alpha ramping with depth
    const std::vector<int> depth = chebyshev_depth(pasted_mask, band_w + 1);
    std::vector<double> blended(result.image.data.begin(), result.image.data.end());
    for (uint32_t p : pasted.pixels) {
        const double alpha = depth[p] / (band_w + 1.0);
        if (alpha < 1.0)
            blended[p] = alpha * result.image.data[p] + (1.0 - alpha) * base.data[p];
    }

    const std::vector<double> smoothed =
        gaussian_blur(blended, base.width, base.height, spec.blend.sigma);
    for (uint32_t p : band.pixels) {
        const double v = std::clamp(smoothed[p], 0.0, 255.0);
        result.image.data[p] = static_cast<uint8_t>(std::lround(v));
    }
    return result;
}

GrayImage generate_base_texture(uint32_t width, uint32_t height, uint64_t seed,
                                const TextureParams& params) {
    const int period = params.period;
    const int noise = params.noise;
    if (period < 0 || noise < 0 || params.max_radius < 0)
        throw Error("texture: period, noise and max_radius must be >= 0");
    const int T = period > 0 ? period
                             : static_cast<int>(std::max(width, height));
    GrayImage tile(T, T);
    std::fill(tile.data.begin(), tile.data.end(), 128);
    int shapes = params.shapes;
    if (shapes < 0)
        shapes = std::max<int>(24, static_cast<int>(static_cast<uint64_t>(T) * T / 400));

    Rng rng(stream_seed(seed, 0));
    // log-uniform radii: structure at every scale, like the flat patches and
    // fine clutter of a natural scene; capped so no single shape can blank out
    // the whole tile
    const double radius_cap =
        params.max_radius > 0 ? params.max_radius : std::min(48.0, T / 4.0);
    const double log_lo = std::log(3.0);
    const double log_hi = std::log(std::max(4.0, radius_cap));
    for (int i = 0; i < shapes; ++i) {
        const int cx = rng.range(0, T - 1);
        const int cy = rng.range(0, T - 1);
        const int rx =
            static_cast<int>(std::lround(std::exp(log_lo + rng.unit() * (log_hi - log_lo))));
        const int ry =
            static_cast<int>(std::lround(std::exp(log_lo + rng.unit() * (log_hi - log_lo))));
        const uint8_t gray = static_cast<uint8_t>(rng.range(20, 235));
        const bool ellipse = (rng.next() & 1) != 0;
        for (int y = cy - ry; y <= cy + ry; ++y) {
            for (int x = cx - rx; x <= cx + rx; ++x) {
                if (ellipse) {
                    const double nx = static_cast<double>(x - cx) / rx;
                    const double ny = static_cast<double>(y - cy) / ry;
                    if (nx * nx + ny * ny > 1.0) continue;
                }
                if (period > 0) {
                    tile.set(((x % T) + T) % T, ((y % T) + T) % T, gray);
                } else if (x >= 0 && x < T && y >= 0 && y < T) {
                    tile.set(x, y, gray);
                }
            }
        }
    }

    GrayImage img(static_cast<int>(width), static_cast<int>(height));
    for (uint32_t y = 0; y < height; ++y)
        for (uint32_t x = 0; x < width; ++x)
            img.data[static_cast<size_t>(y) * width + x] =
                tile.at(static_cast<int>(x % static_cast<uint32_t>(T)),
                        static_cast<int>(y % static_cast<uint32_t>(T)));
    if (noise > 0) {
        for (auto& px : img.data) {
            const int v = px + rng.range(-noise, noise);
            px = static_cast<uint8_t>(std::clamp(v, 0, 255));
        }
    }
    return img;
}

namespace {

// Population variance of the base pixels in a rectangular ring straddling the
// box [x0, x0+bw) x [y0, y0+bh): everything within `margin` of the box border,
// inside or outside, clipped to the image.  Used to reject placements whose
// surroundings are so flat that a boundary band carries no texture evidence.
double ring_variance(const GrayImage& base, int x0, int y0, int bw, int bh, int margin) {
    const int ox0 = std::max(0, x0 - margin);
    const int oy0 = std::max(0, y0 - margin);
    const int ox1 = std::min(base.width, x0 + bw + margin);
    const int oy1 = std::min(base.height, y0 + bh + margin);
    const int ix0 = x0 + margin;
    const int iy0 = y0 + margin;
    const int ix1 = x0 + bw - margin;
    const int iy1 = y0 + bh - margin;
    double sum = 0.0;
    double sum2 = 0.0;
    int64_t n = 0;
    for (int y = oy0; y < oy1; ++y) {
        for (int x = ox0; x < ox1; ++x) {
            if (x >= ix0 && x < ix1 && y >= iy0 && y < iy1) continue;
            const double v = base.data[static_cast<size_t>(y) * base.width + x];
            sum += v;
            sum2 += v * v;
            ++n;
        }
    }
    if (n == 0) return 0.0;
    const double mean = sum / static_cast<double>(n);
    return sum2 / static_cast<double>(n) - mean * mean;
}

ForgeryResult sample_forgery(const GrayImage& base, const CorpusParams& params, Rng& rng) {
    const int W = base.width;
    const int H = base.height;
    const int separation =
        params.blend.mode == BlendSpec::Mode::none ? 1 : 2 * params.blend.band;
    for (int attempt = 0; attempt < params.max_retries; ++attempt) {
        ForgerySpec spec;
        spec.blend = params.blend;
        switch (params.shapes) {
            case CorpusParams::Shapes::rect_only: spec.shape = ShapeKind::rect; break;
            case CorpusParams::Shapes::ellipse_only: spec.shape = ShapeKind::ellipse; break;
            case CorpusParams::Shapes::mixed:
                spec.shape = (rng.next() & 1) ? ShapeKind::ellipse : ShapeKind::rect;
                break;
        }
        const int area = rng.range(static_cast<int>(params.min_area),
                                   static_cast<int>(params.max_area));
        const double aspect = 0.7 + rng.unit() * 0.7;
        double w = std::sqrt(area * aspect);
        double h = area / w;
        if (spec.shape == ShapeKind::ellipse) {
            // pixel count of an ellipse is ~ pi/4 of its bounding box
            const double scale = 2.0 / std::sqrt(std::numbers::pi);
            w *= scale;
            h *= scale;
        }
        spec.width = static_cast<uint32_t>(std::lround(w));
        spec.height = static_cast<uint32_t>(std::lround(h));
        const int bw = static_cast<int>(spec.width);
        const int bh = static_cast<int>(spec.height);
        if (bw < 8 || bh < 8) continue;
        if (bw + 2 > W || bh + 2 > H) continue;

        spec.src_x = static_cast<uint32_t>(rng.range(1, W - bw - 1));
        spec.src_y = static_cast<uint32_t>(rng.range(1, H - bh - 1));
        if (ring_variance(base, static_cast<int>(spec.src_x), static_cast<int>(spec.src_y),
                          bw, bh, 4) < params.min_ring_variance)
            continue;

        if (params.offset_step > 0) {
            // offsets restricted to the lattice; box prefilter, the exact
            // footprint check still happens in synthesize()
            const int step = params.offset_step;
            const int reach = std::max(W, H) / step + 1;
            std::vector<std::pair<int, int>> candidates;
            for (int j = -reach; j <= reach; ++j) {
                for (int i = -reach; i <= reach; ++i) {
                    if (i == 0 && j == 0) continue;
                    const int dx = i * step;
                    const int dy = j * step;
                    const int px = static_cast<int>(spec.src_x) + dx;
                    const int py = static_cast<int>(spec.src_y) + dy;
                    if (px < 1 || py < 1 || px + bw > W - 1 || py + bh > H - 1) continue;
                    const int gap_x = std::abs(dx) - bw;
                    const int gap_y = std::abs(dy) - bh;
                    if (std::max(gap_x, gap_y) <= separation) continue;
                    candidates.emplace_back(dx, dy);
                }
            }
            if (candidates.empty()) continue;
            const auto [dx, dy] = candidates[rng.next() % candidates.size()];
            spec.dx = dx;
            spec.dy = dy;
        } else {
            const int paste_x = rng.range(1, W - bw - 1);
            const int paste_y = rng.range(1, H - bh - 1);
            spec.dx = paste_x - static_cast<int>(spec.src_x);
            spec.dy = paste_y - static_cast<int>(spec.src_y);
        }
        if (ring_variance(base, static_cast<int>(spec.src_x) + spec.dx,
                          static_cast<int>(spec.src_y) + spec.dy, bw, bh, 4) <
            params.min_ring_variance)
            continue;

        try {
            const size_t area_px =
                shape_footprint(spec, static_cast<uint32_t>(W), static_cast<uint32_t>(H)).size();
            if (area_px < params.min_area || area_px > params.max_area) continue;
            return synthesize(base, spec);
        } catch (const GeometryViolation&) {
            continue;
        }
    }
    throw SampleExhausted("corpus: no valid geometry found within retry budget");
}

}  // namespace

std::vector<CorpusSample> make_corpus(const std::vector<GrayImage>& bases,
                                      const CorpusParams& params) {
    if (params.count < 1) throw Error("corpus: count must be >= 1");
    if (bases.empty()) throw Error("corpus: need at least one base image");
    validate_blend(params.blend);
    if (params.offset_step < 0) throw Error("corpus: offset_step must be >= 0");
    if (params.min_ring_variance < 0) throw Error("corpus: min_ring_variance must be >= 0");
    if (params.max_retries < 1) throw Error("corpus: max_retries must be >= 1");

    std::vector<CorpusSample> samples(static_cast<size_t>(params.count));
    detail::parallel_chunks(0, params.count, [&](int64_t lo, int64_t hi) {
        for (int64_t i = lo; i < hi; ++i) {
            const uint32_t base_index = static_cast<uint32_t>(i % bases.size());
            Rng rng(stream_seed(params.seed, static_cast<uint64_t>(i)));
            samples[static_cast<size_t>(i)].base_index = base_index;
            samples[static_cast<size_t>(i)].forgery =
                sample_forgery(bases[base_index], params, rng);
        }
    });
    return samples;
}

std::string truth_to_json(const GroundTruth& truth, int indent) {
    nlohmann::ordered_json spec;
    spec["shape"] = to_string(truth.spec.shape);
    spec["width"] = truth.spec.width;
    spec["height"] = truth.spec.height;
    spec["src_x"] = truth.spec.src_x;
    spec["src_y"] = truth.spec.src_y;
    spec["dx"] = truth.spec.dx;
    spec["dy"] = truth.spec.dy;
    nlohmann::ordered_json blend;
    blend["mode"] = to_string(truth.spec.blend.mode);
    blend["sigma"] = truth.spec.blend.sigma;
    blend["band"] = truth.spec.blend.band;
    spec["blend"] = std::move(blend);

    nlohmann::ordered_json doc;
    doc["source_label"] = truth.source_label;
    doc["pasted_label"] = truth.pasted_label;
    doc["spec"] = std::move(spec);
    return doc.dump(indent);
}

void write_corpus(const std::string& root, const std::vector<CorpusSample>& samples) {
    namespace fs = std::filesystem;
    const fs::path base(root);
    fs::create_directories(base / "images");
    fs::create_directories(base / "masks");
    fs::create_directories(base / "truth");
    for (size_t i = 0; i < samples.size(); ++i) {
        char name[16];
        std::snprintf(name, sizeof(name), "%03zu", i);
        const std::string stem(name);
        const GroundTruth& truth = samples[i].forgery.truth;
        write_file(base / "images" / (stem + ".png"),
                   encode_gray_png(samples[i].forgery.image));
        write_file(base / "masks" / (stem + ".png"), encode_mask(truth.mask));
        const std::string json = truth_to_json(truth, 2) + "\n";
        write_file(base / "truth" / (stem + ".json"), ImageBytes(json.begin(), json.end()));
    }
}

}  // namespace cmfa
