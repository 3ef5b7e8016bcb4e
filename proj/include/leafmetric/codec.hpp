#pragma once

// Lossless raster ingestion: PNG (8-bit gray, RGB, RGBA) and binary PGM/PPM
// with maxval 255. Requires linking libpng.

#include <png.h>

#include <algorithm>
#include <array>
#include <csetjmp>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <vector>

#include "leafmetric/error.hpp"
#include "leafmetric/image.hpp"

namespace leafmetric {

using Bytes = std::vector<std::uint8_t>;

namespace detail {

inline constexpr std::array<std::uint8_t, 8> png_signature = {0x89, 'P', 'N', 'G',
                                                              '\r', '\n', 0x1a, '\n'};

inline std::uint32_t read_be32(std::span<const std::uint8_t> b) {
    return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) |
           (std::uint32_t{b[2]} << 8) | std::uint32_t{b[3]};
}

struct PngHeader {
    std::uint32_t width;
    std::uint32_t height;
    int bit_depth;
    int color_type;
};

inline PngHeader parse_png_header(std::span<const std::uint8_t> data) {
    if (data.size() < 33)
        throw Error(ErrorCode::CorruptFile, "PNG stream too short for an IHDR chunk");
    auto chunk = data.subspan(8);
    if (read_be32(chunk) != 13 || std::memcmp(chunk.data() + 4, "IHDR", 4) != 0)
        throw Error(ErrorCode::CorruptFile, "PNG stream does not start with IHDR");
    PngHeader h{read_be32(chunk.subspan(8)), read_be32(chunk.subspan(12)), chunk[16], chunk[17]};
    if (h.width == 0 || h.height == 0)
        throw Error(ErrorCode::ZeroDimension, "PNG declares a zero dimension");
    const bool supported_type = h.color_type == PNG_COLOR_TYPE_GRAY ||
                                h.color_type == PNG_COLOR_TYPE_RGB ||
                                h.color_type == PNG_COLOR_TYPE_RGB_ALPHA;
    if (h.bit_depth != 8 || !supported_type)
        throw Error(ErrorCode::UnsupportedFormat,
                    "PNG color type " + std::to_string(h.color_type) + " at bit depth " +
                        std::to_string(h.bit_depth) +
                        " is not supported (8-bit gray, RGB or RGBA only)");
    return h;
}

struct PngMemoryReader {
    std::span<const std::uint8_t> data;
    std::size_t offset = 0;
};

struct PngErrorState {
    char message[256] = {};
};

inline void png_error_handler(png_structp png, png_const_charp msg) {
    auto* state = static_cast<PngErrorState*>(png_get_error_ptr(png));
    std::snprintf(state->message, sizeof(state->message), "%s", msg);
    png_longjmp(png, 1);
}

inline void png_warning_handler(png_structp, png_const_charp) {}

inline void png_read_from_memory(png_structp png, png_bytep out, png_size_t count) {
    auto* src = static_cast<PngMemoryReader*>(png_get_io_ptr(png));
    if (src->data.size() - src->offset < count)
        png_error(png, "unexpected end of stream");
    std::memcpy(out, src->data.data() + src->offset, count);
    src->offset += count;
}

// Only trivially destructible state lives between setjmp and the decode calls;
// the caller owns the buffers.
inline bool png_decode_rows(std::span<const std::uint8_t> data, std::span<png_bytep> rows,
                            PngErrorState& err) {
    PngMemoryReader reader{data, 0};
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &err, png_error_handler,
                                             png_warning_handler);
    if (png == nullptr) {
        std::snprintf(err.message, sizeof(err.message), "png_create_read_struct failed");
        return false;
    }
    png_infop info = png_create_info_struct(png);
    if (info == nullptr) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        std::snprintf(err.message, sizeof(err.message), "png_create_info_struct failed");
        return false;
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        return false;
    }
    png_set_read_fn(png, &reader, png_read_from_memory);
    png_read_info(png, info);
    png_set_interlace_handling(png);
    png_read_update_info(png, info);
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return true;
}

/// Straight alpha over white, rounded to nearest.
constexpr std::uint8_t over_white(std::uint8_t c, std::uint8_t a) noexcept {
    return static_cast<std::uint8_t>((unsigned{c} * a + 255u * (255u - a) + 127u) / 255u);
}

inline RgbImage decode_png(std::span<const std::uint8_t> data) {
    const PngHeader h = parse_png_header(data);
    const std::size_t channels = h.color_type == PNG_COLOR_TYPE_GRAY  ? 1
                                 : h.color_type == PNG_COLOR_TYPE_RGB ? 3
                                                                      : 4;
    const std::size_t stride = std::size_t{h.width} * channels;
    std::vector<std::uint8_t> raw(stride * h.height);
    std::vector<png_bytep> rows(h.height);
    for (std::size_t y = 0; y < h.height; ++y)
        rows[y] = raw.data() + y * stride;

    PngErrorState err;
    if (!png_decode_rows(data, rows, err))
        throw Error(ErrorCode::CorruptFile, std::string("invalid PNG stream: ") + err.message);

    std::vector<Rgb> out(std::size_t{h.width} * h.height);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const std::uint8_t* p = raw.data() + i * channels;
        switch (channels) {
        case 1: out[i] = {p[0], p[0], p[0]}; break;
        case 3: out[i] = {p[0], p[1], p[2]}; break;
        default:
            out[i] = {over_white(p[0], p[3]), over_white(p[1], p[3]), over_white(p[2], p[3])};
        }
    }
    return RgbImage(h.width, h.height, std::move(out));
}

class PnmCursor {
public:
    explicit PnmCursor(std::span<const std::uint8_t> data) : data_(data), pos_(2) {}

    std::size_t next_number() {
        skip_space_and_comments();
        if (pos_ >= data_.size() || !is_digit(data_[pos_]))
            throw Error(ErrorCode::CorruptFile, "malformed PNM header");
        std::size_t value = 0;
        while (pos_ < data_.size() && is_digit(data_[pos_])) {
            value = value * 10 + (data_[pos_++] - '0');
            if (value > (std::size_t{1} << 31))
                throw Error(ErrorCode::CorruptFile, "PNM header value out of range");
        }
        return value;
    }

    // Exactly one whitespace byte separates maxval from the raster.
    std::span<const std::uint8_t> raster() {
        if (pos_ >= data_.size() || !is_space(data_[pos_]))
            throw Error(ErrorCode::CorruptFile, "malformed PNM header");
        return data_.subspan(pos_ + 1);
    }

private:
    static bool is_digit(std::uint8_t c) { return c >= '0' && c <= '9'; }
    static bool is_space(std::uint8_t c) {
        return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
    }

    void skip_space_and_comments() {
        while (pos_ < data_.size()) {
            if (is_space(data_[pos_])) {
                ++pos_;
            } else if (data_[pos_] == '#') {
                while (pos_ < data_.size() && data_[pos_] != '\n')
                    ++pos_;
            } else {
                break;
            }
        }
    }

    std::span<const std::uint8_t> data_;
    std::size_t pos_;
};

inline RgbImage decode_pnm(std::span<const std::uint8_t> data) {
    const bool gray = data[1] == '5';
    PnmCursor cursor(data);
    const std::size_t width = cursor.next_number();
    const std::size_t height = cursor.next_number();
    const std::size_t maxval = cursor.next_number();
    if (width == 0 || height == 0)
        throw Error(ErrorCode::ZeroDimension, "PNM declares a zero dimension");
    if (maxval != 255)
        throw Error(ErrorCode::UnsupportedFormat,
                    "PNM maxval " + std::to_string(maxval) + " is not supported (255 only)");
    const auto raster = cursor.raster();
    const std::size_t channels = gray ? 1 : 3;
    if (raster.size() / channels / width < height)
        throw Error(ErrorCode::CorruptFile, "PNM raster is truncated");

    std::vector<Rgb> out(width * height);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const std::uint8_t* p = raster.data() + i * channels;
        out[i] = gray ? Rgb{p[0], p[0], p[0]} : Rgb{p[0], p[1], p[2]};
    }
    return RgbImage(width, height, std::move(out));
}

struct PngMemoryWriter {
    Bytes* out;
};

inline void png_write_to_memory(png_structp png, png_bytep data, png_size_t count) {
    auto* dst = static_cast<PngMemoryWriter*>(png_get_io_ptr(png));
    dst->out->insert(dst->out->end(), data, data + count);
}

inline void png_flush_noop(png_structp) {}

inline bool png_encode_rows(std::size_t width, std::span<png_bytep> rows, Bytes& out,
                            PngErrorState& err) {
    PngMemoryWriter writer{&out};
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &err, png_error_handler,
                                              png_warning_handler);
    if (png == nullptr)
        return false;
    png_infop info = png_create_info_struct(png);
    if (info == nullptr) {
        png_destroy_write_struct(&png, nullptr);
        return false;
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        return false;
    }
    png_set_write_fn(png, &writer, png_write_to_memory, png_flush_noop);
    png_set_IHDR(png, info, static_cast<png_uint_32>(width),
                 static_cast<png_uint_32>(rows.size()), 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    return true;
}

} // namespace detail

/// Decodes an in-memory image file. Grayscale input is expanded to r=g=b and
/// alpha is composited over white.
inline RgbImage decode_image(std::span<const std::uint8_t> data) {
    const auto& sig = detail::png_signature;
    const std::size_t probe = std::min(data.size(), sig.size());
    if (probe > 0 && std::equal(data.begin(), data.begin() + probe, sig.begin())) {
        if (data.size() < sig.size())
            throw Error(ErrorCode::CorruptFile, "truncated PNG signature");
        return detail::decode_png(data);
    }
    if (data.size() >= 2 && data[0] == 'P' && (data[1] == '5' || data[1] == '6'))
        return detail::decode_pnm(data);
    throw Error(ErrorCode::UnsupportedFormat,
                "unrecognised image encoding (expected PNG, binary PGM or binary PPM)");
}

inline Bytes encode_png(const RgbImage& img) {
    std::vector<std::uint8_t> raw;
    raw.reserve(img.size() * 3);
    for (const Rgb& p : img.pixels()) {
        raw.push_back(p.r);
        raw.push_back(p.g);
        raw.push_back(p.b);
    }
    std::vector<png_bytep> rows(img.height());
    for (std::size_t y = 0; y < img.height(); ++y)
        rows[y] = raw.data() + y * img.width() * 3;

    Bytes out;
    detail::PngErrorState err;
    if (!detail::png_encode_rows(img.width(), rows, out, err))
        throw Error(ErrorCode::IoError, std::string("PNG encoding failed: ") + err.message);
    return out;
}

/// Binary PPM (P6).
inline Bytes encode_ppm(const RgbImage& img) {
    const std::string header = "P6\n" + std::to_string(img.width()) + " " +
                               std::to_string(img.height()) + "\n255\n";
    Bytes out(header.begin(), header.end());
    out.reserve(out.size() + img.size() * 3);
    for (const Rgb& p : img.pixels()) {
        out.push_back(p.r);
        out.push_back(p.g);
        out.push_back(p.b);
    }
    return out;
}

inline Bytes read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::IoError, "cannot open " + path.string());
    return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(ErrorCode::IoError, "cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw Error(ErrorCode::IoError, "short write to " + path.string());
}

inline RgbImage load_image(const std::filesystem::path& path) { return decode_image(read_file(path)); }

} // namespace leafmetric
