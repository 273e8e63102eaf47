#include "cmfa/detect.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numbers>
#include <numeric>
#include <utility>

#include <json.hpp>

#include "cmfa/errors.hpp"
#include "cmfa/parallel.hpp"
#include "cmfa/region.hpp"

namespace cmfa {

namespace {

void validate(const DetectorParams& p) {
    if (p.block_size < 2) throw Error("detector: block_size must be at least 2");
    const int64_t max_coeffs = static_cast<int64_t>(p.block_size) * p.block_size;
    if (p.zigzag < 1 || p.zigzag > max_coeffs)
        throw Error("detector: zigzag count out of range for block size");
    if (!(p.quant > 0.0)) throw Error("detector: quant must be positive");
    if (p.neighbor_window < 1) throw Error("detector: neighbor_window must be at least 1");
    if (p.min_support < 1) throw Error("detector: min_support must be at least 1");
    if (p.min_variance < 0.0) throw Error("detector: min_variance must not be negative");
}

// Orthonormal DCT-II basis row: basis[x] = a(f) * cos(pi * (2x + 1) * f / (2B))
// with a(0) = sqrt(1/B) and a(f>0) = sqrt(2/B).
std::vector<double> dct_basis_row(int block_size, int freq) {
    std::vector<double> row(block_size);
    const double scale =
        freq == 0 ? std::sqrt(1.0 / block_size) : std::sqrt(2.0 / block_size);
    for (int x = 0; x < block_size; ++x) {
        row[x] = scale * std::cos(std::numbers::pi * (2.0 * x + 1.0) * freq /
                                  (2.0 * block_size));
    }
    return row;
}

bool descriptors_equal(const int32_t* a, const int32_t* b, int len) {
    return std::equal(a, a + len, b);
}

}  // namespace

std::vector<std::pair<int, int>> zigzag_order(int block_size, int count) {
    if (block_size < 1) throw Error("zigzag: block size must be positive");
    const int64_t total = static_cast<int64_t>(block_size) * block_size;
    if (count < 0 || count > total) throw Error("zigzag: count out of range");
    std::vector<std::pair<int, int>> order;
    order.reserve(static_cast<size_t>(count));
    for (int s = 0; s <= 2 * (block_size - 1) && static_cast<int>(order.size()) < count; ++s) {
        if (s % 2 == 0) {
            // bottom-left to top-right: row decreasing
            int row = std::min(s, block_size - 1);
            int col = s - row;
            for (; row >= 0 && col < block_size && static_cast<int>(order.size()) < count;
                 --row, ++col)
                order.emplace_back(row, col);
        } else {
            // top-right to bottom-left: row increasing
            int col = std::min(s, block_size - 1);
            int row = s - col;
            for (; col >= 0 && row < block_size && static_cast<int>(order.size()) < count;
                 --col, ++row)
                order.emplace_back(row, col);
        }
    }
    return order;
}

BlockFeatures extract_block_features(const GrayImage& img, const DetectorParams& params) {
    validate(params);
    const int B = params.block_size;
    if (img.width < static_cast<uint32_t>(B) || img.height < static_cast<uint32_t>(B))
        throw ImageTooSmall("detector: image smaller than one block");

    const uint32_t W = img.width;
    const uint32_t H = img.height;
    const uint32_t wb = W - static_cast<uint32_t>(B) + 1;
    const uint32_t hb = H - static_cast<uint32_t>(B) + 1;
    const int Z = params.zigzag;
    const auto order = zigzag_order(B, Z);

    // Integral images of pixel values and squares, for the variance gate.
    std::vector<uint64_t> sat((W + 1) * (H + 1), 0);
    std::vector<uint64_t> sat2((W + 1) * (H + 1), 0);
    for (uint32_t y = 0; y < H; ++y) {
        uint64_t row_s = 0;
        uint64_t row_s2 = 0;
        const size_t up = static_cast<size_t>(y) * (W + 1);
        const size_t cur = static_cast<size_t>(y + 1) * (W + 1);
        for (uint32_t x = 0; x < W; ++x) {
            const uint64_t v = img.data[img.index(x, y)];
            row_s += v;
            row_s2 += v * v;
            sat[cur + x + 1] = sat[up + x + 1] + row_s;
            sat2[cur + x + 1] = sat2[up + x + 1] + row_s2;
        }
    }

    // Column frequencies needed by the retained coefficients, and a dense
    // remap from frequency to partial-row slot.
    std::vector<int> col_freqs;
    for (const auto& [p, q] : order)
        if (std::find(col_freqs.begin(), col_freqs.end(), q) == col_freqs.end())
            col_freqs.push_back(q);
    std::sort(col_freqs.begin(), col_freqs.end());
    std::vector<int> col_slot(B, -1);
    for (size_t i = 0; i < col_freqs.size(); ++i) col_slot[col_freqs[i]] = static_cast<int>(i);
    const size_t nq = col_freqs.size();

    std::vector<std::vector<double>> col_basis;
    col_basis.reserve(nq);
    for (int q : col_freqs) col_basis.push_back(dct_basis_row(B, q));
    std::vector<std::vector<double>> row_basis;
    row_basis.reserve(static_cast<size_t>(B));
    for (int p = 0; p < B; ++p) row_basis.push_back(dct_basis_row(B, p));

    // Horizontal pass: partial[(y * wb + x0) * nq + s] holds the dot product
    // of image row y, window starting at x0, with column basis slot s.
    std::vector<double> partial(static_cast<size_t>(H) * wb * nq);
    detail::parallel_chunks(0u, H, [&](uint32_t y0, uint32_t y1) {
        for (uint32_t y = y0; y < y1; ++y) {
            const uint8_t* row = img.data.data() + static_cast<size_t>(y) * W;
            double* out = partial.data() + static_cast<size_t>(y) * wb * nq;
            for (uint32_t x0 = 0; x0 < wb; ++x0, out += nq) {
                for (size_t s = 0; s < nq; ++s) {
                    const double* basis = col_basis[s].data();
                    double acc = 0.0;
                    for (int x = 0; x < B; ++x) acc += basis[x] * row[x0 + x];
                    out[s] = acc;
                }
            }
        }
    });

    // Vertical pass: finish each retained coefficient and quantize.
    const size_t positions = static_cast<size_t>(wb) * hb;
    std::vector<int32_t> raw(positions * static_cast<size_t>(Z));
    std::vector<uint8_t> keep(positions, 0);
    const double n_pixels = static_cast<double>(B) * B;
    detail::parallel_chunks(0u, hb, [&](uint32_t ys, uint32_t ye) {
        for (uint32_t y0 = ys; y0 < ye; ++y0) {
            for (uint32_t x0 = 0; x0 < wb; ++x0) {
                const size_t pos = static_cast<size_t>(y0) * wb + x0;
                const size_t a = static_cast<size_t>(y0) * (W + 1) + x0;
                const size_t b = a + static_cast<size_t>(B);
                const size_t c = static_cast<size_t>(y0 + B) * (W + 1) + x0;
                const size_t d = c + static_cast<size_t>(B);
                const double s1 = static_cast<double>(sat[d] - sat[c] - sat[b] + sat[a]);
                const double s2 = static_cast<double>(sat2[d] - sat2[c] - sat2[b] + sat2[a]);
                const double var = (s2 - s1 * s1 / n_pixels) / n_pixels;
                if (var < params.min_variance) continue;
                keep[pos] = 1;
                int32_t* out = raw.data() + pos * static_cast<size_t>(Z);
                for (int k = 0; k < Z; ++k) {
                    const auto [p, q] = order[static_cast<size_t>(k)];
                    const double* pb = row_basis[static_cast<size_t>(p)].data();
                    const double* col = partial.data() +
                                        (static_cast<size_t>(y0) * wb + x0) * nq +
                                        static_cast<size_t>(col_slot[q]);
                    double acc = 0.0;
                    for (int y = 0; y < B; ++y)
                        acc += pb[y] * col[static_cast<size_t>(y) * wb * nq];
                    out[k] = static_cast<int32_t>(std::lround(acc / params.quant));
                }
            }
        }
    });

    BlockFeatures features;
    features.block_size = B;
    features.zigzag = Z;
    size_t kept = 0;
    for (size_t pos = 0; pos < positions; ++pos) kept += keep[pos];
    features.px.reserve(kept);
    features.py.reserve(kept);
    features.coeffs.reserve(kept * static_cast<size_t>(Z));
    for (uint32_t y0 = 0; y0 < hb; ++y0) {
        for (uint32_t x0 = 0; x0 < wb; ++x0) {
            const size_t pos = static_cast<size_t>(y0) * wb + x0;
            if (!keep[pos]) continue;
            features.px.push_back(x0);
            features.py.push_back(y0);
            const int32_t* src = raw.data() + pos * static_cast<size_t>(Z);
            features.coeffs.insert(features.coeffs.end(), src, src + Z);
        }
    }
    return features;
}

std::vector<BlockMatch> match_blocks(const BlockFeatures& features, const DetectorParams& params) {
    validate(params);
    if (features.zigzag != params.zigzag || features.block_size != params.block_size)
        throw Error("detector: features were extracted with different parameters");
    const size_t n = features.count();
    const int Z = features.zigzag;

    std::vector<uint32_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0u);
    std::sort(idx.begin(), idx.end(), [&](uint32_t a, uint32_t b) {
        const int32_t* ca = features.coeffs.data() + static_cast<size_t>(a) * Z;
        const int32_t* cb = features.coeffs.data() + static_cast<size_t>(b) * Z;
        const auto cmp = std::lexicographical_compare_three_way(ca, ca + Z, cb, cb + Z);
        if (cmp != 0) return cmp < 0;
        if (features.py[a] != features.py[b]) return features.py[a] < features.py[b];
        return features.px[a] < features.px[b];
    });

    const double min_off2 = params.min_offset() * params.min_offset();
    std::vector<BlockMatch> matches;
    for (size_t i = 0; i + 1 < n; ++i) {
        const uint32_t a = idx[i];
        const int32_t* ca = features.coeffs.data() + static_cast<size_t>(a) * Z;
        const size_t last = std::min(n - 1, i + static_cast<size_t>(params.neighbor_window));
        for (size_t j = i + 1; j <= last; ++j) {
            const uint32_t b = idx[j];
            const int32_t* cb = features.coeffs.data() + static_cast<size_t>(b) * Z;
            if (!descriptors_equal(ca, cb, Z)) break;  // equal runs are contiguous
            const double dx = static_cast<double>(features.px[b]) - features.px[a];
            const double dy = static_cast<double>(features.py[b]) - features.py[a];
            if (dx * dx + dy * dy < min_off2) continue;
            BlockMatch m{features.px[a], features.py[a], features.px[b], features.py[b]};
            if (m.dy() < 0 || (m.dy() == 0 && m.dx() < 0)) {
                std::swap(m.ax, m.bx);
                std::swap(m.ay, m.by);
            }
            matches.push_back(m);
        }
    }
    return matches;
}

FilteredMatches filter_by_shift(const std::vector<BlockMatch>& matches, const DetectorParams& params) {
    validate(params);
    std::map<std::pair<int, int>, std::vector<size_t>> buckets;  // key (dy, dx)
    for (size_t i = 0; i < matches.size(); ++i)
        buckets[{matches[i].dy(), matches[i].dx()}].push_back(i);

    struct Entry {
        int dx, dy;
        std::vector<size_t> members;
    };
    std::vector<Entry> entries;
    for (auto& [key, members] : buckets) {
        if (members.size() < params.min_support) continue;
        entries.push_back({key.second, key.first, std::move(members)});
    }
    std::stable_sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        return a.members.size() > b.members.size();
    });

    FilteredMatches out;
    for (auto& e : entries) {
        out.clusters.push_back({e.dx, e.dy, static_cast<uint32_t>(e.members.size())});
        std::sort(e.members.begin(), e.members.end(), [&](size_t a, size_t b) {
            if (matches[a].ay != matches[b].ay) return matches[a].ay < matches[b].ay;
            return matches[a].ax < matches[b].ax;
        });
        for (size_t m : e.members) out.matches.push_back(matches[m]);
    }
    return out;
}

BinaryMask matches_to_mask(const FilteredMatches& filtered, uint32_t width, uint32_t height,
                           int block_size) {
    if (block_size < 1) throw Error("detector: block_size must be positive");
    BinaryMask mask(width, height);
    const uint32_t B = static_cast<uint32_t>(block_size);
    auto paint = [&](uint32_t x0, uint32_t y0) {
        for (uint32_t y = y0; y < y0 + B && y < height; ++y)
            for (uint32_t x = x0; x < x0 + B && x < width; ++x) mask.set(x, y, true);
    };
    for (const BlockMatch& m : filtered.matches) {
        paint(m.ax, m.ay);
        paint(m.bx, m.by);
    }
    if (filtered.matches.empty()) return mask;
    return erode(dilate(mask, 1), 1);
}

DetectionResult detect(const GrayImage& img, const DetectorParams& params) {
    const BlockFeatures features = extract_block_features(img, params);
    const std::vector<BlockMatch> matches = match_blocks(features, params);
    FilteredMatches filtered = filter_by_shift(matches, params);
    DetectionResult result;
    result.mask = matches_to_mask(filtered, img.width, img.height, params.block_size);
    result.clusters = std::move(filtered.clusters);
    return result;
}

std::string detection_to_json(const DetectionResult& result, int indent) {
    nlohmann::ordered_json doc;
    doc["width"] = result.mask.width;
    doc["height"] = result.mask.height;
    doc["detected"] = !result.clusters.empty();
    nlohmann::ordered_json shifts = nlohmann::ordered_json::array();
    for (const ShiftCluster& c : result.clusters) {
        nlohmann::ordered_json s;
        s["dx"] = c.dx;
        s["dy"] = c.dy;
        s["support"] = c.support;
        shifts.push_back(std::move(s));
    }
    doc["shifts"] = std::move(shifts);
    doc["mask_pixels"] = result.mask.count();
    return doc.dump(indent);
}

}  // namespace cmfa
