#include "cmfa/image_io.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>

#include <png.h>

namespace cmfa {

namespace {

// ---------------------------------------------------------------------
// PNG, via libpng with in-memory read/write callbacks.
// ---------------------------------------------------------------------

struct MemReader {
    const std::uint8_t* data;
    std::size_t size;
    std::size_t pos;
};

extern "C" void mem_read_fn(png_structp png, png_bytep out, png_size_t n) {
    auto* r = static_cast<MemReader*>(png_get_io_ptr(png));
    if (r->pos + n > r->size)
        png_error(png, "unexpected end of stream");
    std::memcpy(out, r->data + r->pos, n);
    r->pos += n;
}

extern "C" void mem_write_fn(png_structp png, png_bytep in, png_size_t n) {
    auto* out = static_cast<ImageBytes*>(png_get_io_ptr(png));
    out->insert(out->end(), in, in + n);
}

extern "C" void mem_flush_fn(png_structp) {}

bool is_png(const ImageBytes& bytes) {
    return bytes.size() >= 8 && png_sig_cmp(bytes.data(), 0, 8) == 0;
}

struct PngRead {
    png_structp png = nullptr;
    png_infop info = nullptr;
    ~PngRead() { png_destroy_read_struct(&png, &info, nullptr); }
};

DecodedImage decode_png(const ImageBytes& bytes) {
    PngRead ctx;
    ctx.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!ctx.png) throw MalformedImage("png: allocation failure");
    ctx.info = png_create_info_struct(ctx.png);
    if (!ctx.info) throw MalformedImage("png: allocation failure");

    char errbuf[192];
    errbuf[0] = '\0';
    // libpng reports failure via longjmp; stash the message and rethrow.
    png_set_error_fn(
        ctx.png, errbuf,
        [](png_structp png, png_const_charp msg) {
            auto* buf = static_cast<char*>(png_get_error_ptr(png));
            std::snprintf(buf, 192, "%s", msg);
            png_longjmp(png, 1);
        },
        [](png_structp, png_const_charp) {});

    std::vector<png_bytep> rows;
    std::vector<std::uint8_t> pixels;
    MemReader reader{bytes.data(), bytes.size(), 0};

    if (setjmp(png_jmpbuf(ctx.png)))
        throw MalformedImage(std::string("png: ") + errbuf);

    png_set_read_fn(ctx.png, &reader, mem_read_fn);
    png_read_info(ctx.png, ctx.info);

    const png_uint_32 w = png_get_image_width(ctx.png, ctx.info);
    const png_uint_32 h = png_get_image_height(ctx.png, ctx.info);
    const int depth = png_get_bit_depth(ctx.png, ctx.info);
    const int color = png_get_color_type(ctx.png, ctx.info);

    if (depth == 16)
        throw UnsupportedFormat("png: 16-bit rasters are not supported");
    if (color != PNG_COLOR_TYPE_GRAY && color != PNG_COLOR_TYPE_RGB)
        throw UnsupportedFormat("png: only 8-bit grayscale and RGB are supported");
    if (depth < 8)
        png_set_expand_gray_1_2_4_to_8(ctx.png);
    if (w < 1 || h < 1 || w > 1u << 20 || h > 1u << 20)
        throw MalformedImage("png: implausible dimensions");

    png_read_update_info(ctx.png, ctx.info);
    const std::size_t stride = png_get_rowbytes(ctx.png, ctx.info);
    const int channels = color == PNG_COLOR_TYPE_GRAY ? 1 : 3;
    if (stride != static_cast<std::size_t>(w) * channels)
        throw MalformedImage("png: unexpected row stride");

    pixels.resize(stride * h);
    rows.resize(h);
    for (png_uint_32 y = 0; y < h; ++y)
        rows[y] = pixels.data() + y * stride;
    png_read_image(ctx.png, rows.data());
    png_read_end(ctx.png, nullptr);

    const int iw = static_cast<int>(w);
    const int ih = static_cast<int>(h);
    if (channels == 1)
        return GrayImage(iw, ih, std::move(pixels));
    return RgbImage(iw, ih, std::move(pixels));
}

struct PngWrite {
    png_structp png = nullptr;
    png_infop info = nullptr;
    ~PngWrite() { png_destroy_write_struct(&png, &info); }
};

ImageBytes encode_png_gray(const std::uint8_t* data, int width, int height) {
    PngWrite ctx;
    ctx.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!ctx.png) throw Error("png: allocation failure");
    ctx.info = png_create_info_struct(ctx.png);
    if (!ctx.info) throw Error("png: allocation failure");

    ImageBytes out;
    if (setjmp(png_jmpbuf(ctx.png)))
        throw Error("png: encode failure");

    png_set_write_fn(ctx.png, &out, mem_write_fn, mem_flush_fn);
    // Fixed settings and no ancillary chunks keep the byte stream a pure
    // function of the pixels.
    png_set_compression_level(ctx.png, 6);
    png_set_IHDR(ctx.png, ctx.info, static_cast<png_uint_32>(width),
                 static_cast<png_uint_32>(height), 8, PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(ctx.png, ctx.info);
    for (int y = 0; y < height; ++y)
        png_write_row(ctx.png, const_cast<png_bytep>(data + static_cast<std::size_t>(y) * width));
    png_write_end(ctx.png, nullptr);
    return out;
}

// ---------------------------------------------------------------------
// Binary PGM (P5) / PPM (P6)
// ---------------------------------------------------------------------

struct PnmParser {
    const ImageBytes& bytes;
    std::size_t pos = 0;

    int get() { return pos < bytes.size() ? bytes[pos++] : -1; }
    int peek() const { return pos < bytes.size() ? bytes[pos] : -1; }

    void skip_space_and_comments() {
        for (;;) {
            int c = peek();
            if (c == '#') {
                while (c != -1 && c != '\n') c = get();
            } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                get();
            } else {
                return;
            }
        }
    }

    long read_int(const char* what) {
        skip_space_and_comments();
        if (peek() < '0' || peek() > '9')
            throw MalformedImage(std::string("pnm: expected integer for ") + what);
        long v = 0;
        while (peek() >= '0' && peek() <= '9') {
            v = v * 10 + (get() - '0');
            if (v > 1 << 20) throw MalformedImage("pnm: implausible header value");
        }
        return v;
    }
};

DecodedImage decode_pnm(const ImageBytes& bytes) {
    const bool gray = bytes[1] == '5';
    PnmParser p{bytes, 2};
    const long w = p.read_int("width");
    const long h = p.read_int("height");
    const long maxval = p.read_int("maxval");
    if (w < 1 || h < 1) throw MalformedImage("pnm: bad dimensions");
    if (maxval > 255) throw UnsupportedFormat("pnm: 16-bit rasters are not supported");
    if (maxval < 1) throw MalformedImage("pnm: bad maxval");
    // exactly one whitespace byte separates the header from the raster
    const int sep = p.get();
    if (sep != ' ' && sep != '\t' && sep != '\r' && sep != '\n')
        throw MalformedImage("pnm: missing raster separator");

    const std::size_t channels = gray ? 1 : 3;
    const std::size_t need = static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * channels;
    if (bytes.size() - p.pos < need)
        throw MalformedImage("pnm: truncated raster payload");
    std::vector<std::uint8_t> pixels(bytes.begin() + static_cast<std::ptrdiff_t>(p.pos),
                                     bytes.begin() + static_cast<std::ptrdiff_t>(p.pos + need));
    if (gray)
        return GrayImage(static_cast<int>(w), static_cast<int>(h), std::move(pixels));
    return RgbImage(static_cast<int>(w), static_cast<int>(h), std::move(pixels));
}

} // namespace

DecodedImage decode_image(const ImageBytes& bytes) {
    if (is_png(bytes))
        return decode_png(bytes);
    if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '5' || bytes[1] == '6'))
        return decode_pnm(bytes);
    if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] >= '1' && bytes[1] <= '7')
        throw UnsupportedFormat("pnm: only binary P5/P6 are supported");
    throw UnsupportedFormat("unrecognized image format (want PNG, PGM, or PPM)");
}

BinaryMask decode_mask(const ImageBytes& bytes) {
    DecodedImage decoded = decode_image(bytes);
    const auto* gray = std::get_if<GrayImage>(&decoded);
    if (!gray)
        throw UnsupportedFormat("mask must be single-channel");
    BinaryMask mask(gray->width, gray->height);
    for (std::size_t i = 0; i < gray->data.size(); ++i)
        mask.bits[i] = gray->data[i] > 127 ? 1 : 0;
    return mask;
}

ImageBytes encode_gray_png(const GrayImage& img) {
    return encode_png_gray(img.data.data(), img.width, img.height);
}

ImageBytes encode_mask(const BinaryMask& mask) {
    std::vector<std::uint8_t> pixels(mask.bits.size());
    for (std::size_t i = 0; i < pixels.size(); ++i)
        pixels[i] = mask.bits[i] ? 255 : 0;
    return encode_png_gray(pixels.data(), mask.width, mask.height);
}

ImageBytes encode_overlay(const GrayImage& img,
                          const std::vector<std::uint32_t>& original_pixels,
                          const std::vector<std::uint32_t>& duplicated_pixels) {
    GrayImage out = img;
    const auto paint = [&out](const std::vector<std::uint32_t>& pixels, std::uint8_t value) {
        for (std::uint32_t p : pixels) {
            if (p >= out.data.size())
                throw DimensionMismatch("overlay region outside image bounds");
            out.data[p] = value;
        }
    };
    paint(original_pixels, kOverlayOriginal);
    paint(duplicated_pixels, kOverlayDuplicated);
    return encode_gray_png(out);
}

GrayImage load_gray(const std::filesystem::path& path) {
    DecodedImage decoded = decode_image(read_file(path));
    if (auto* gray = std::get_if<GrayImage>(&decoded))
        return std::move(*gray);
    return to_grayscale(std::get<RgbImage>(decoded));
}

BinaryMask load_mask(const std::filesystem::path& path) {
    return decode_mask(read_file(path));
}

ImageBytes read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path.string());
    ImageBytes bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad())
        throw IoError("read failed for " + path.string());
    return bytes;
}

void write_file(const std::filesystem::path& path, const ImageBytes& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw IoError("write failed for " + path.string());
}

} // namespace cmfa
