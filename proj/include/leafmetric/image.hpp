#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "leafmetric/error.hpp"

namespace leafmetric {

struct Rgb {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;

    friend constexpr bool operator==(const Rgb&, const Rgb&) = default;
};

/// Row-major raster. Dimensions are fixed at construction and always >= 1.
template <typename Pixel>
class Image {
public:
    using pixel_type = Pixel;

    Image(std::size_t width, std::size_t height, Pixel fill = Pixel{})
        : width_(width), height_(height), pixels_(checked_area(width, height), fill) {}

    Image(std::size_t width, std::size_t height, std::vector<Pixel> pixels)
        : width_(width), height_(height), pixels_(std::move(pixels)) {
        if (pixels_.size() != checked_area(width, height))
            throw Error(ErrorCode::DimensionMismatch,
                        "pixel buffer holds " + std::to_string(pixels_.size()) +
                            " values, expected " + std::to_string(width * height));
    }

    std::size_t width() const noexcept { return width_; }
    std::size_t height() const noexcept { return height_; }
    std::size_t size() const noexcept { return pixels_.size(); }

    Pixel& operator()(std::size_t x, std::size_t y) noexcept { return pixels_[y * width_ + x]; }
    const Pixel& operator()(std::size_t x, std::size_t y) const noexcept {
        return pixels_[y * width_ + x];
    }

    std::span<Pixel> pixels() noexcept { return pixels_; }
    std::span<const Pixel> pixels() const noexcept { return pixels_; }

    std::span<const Pixel> row(std::size_t y) const noexcept {
        return std::span<const Pixel>(pixels_).subspan(y * width_, width_);
    }

    friend bool operator==(const Image&, const Image&) = default;

private:
    static std::size_t checked_area(std::size_t width, std::size_t height) {
        if (width == 0 || height == 0)
            throw Error(ErrorCode::ZeroDimension,
                        "image dimensions must be positive, got " + std::to_string(width) +
                            "x" + std::to_string(height));
        return width * height;
    }

    std::size_t width_;
    std::size_t height_;
    std::vector<Pixel> pixels_;
};

using RgbImage = Image<Rgb>;
using GrayImage = Image<std::uint8_t>;

struct CropRect {
    std::size_t x = 0;
    std::size_t y = 0;
    std::size_t w = 0;
    std::size_t h = 0;

    friend constexpr bool operator==(const CropRect&, const CropRect&) = default;
};

inline bool fits(const CropRect& rect, std::size_t width, std::size_t height) noexcept {
    // Written to avoid overflow for huge x/w values.
    return rect.w >= 1 && rect.h >= 1 && rect.x < width && rect.y < height &&
           rect.w <= width - rect.x && rect.h <= height - rect.y;
}

template <typename Pixel>
Image<Pixel> crop(const Image<Pixel>& img, const CropRect& rect) {
    if (!fits(rect, img.width(), img.height()))
        throw Error(ErrorCode::RectOutOfBounds,
                    "crop rect " + std::to_string(rect.x) + "," + std::to_string(rect.y) + "," +
                        std::to_string(rect.w) + "," + std::to_string(rect.h) +
                        " does not fit a " + std::to_string(img.width()) + "x" +
                        std::to_string(img.height()) + " image");
    std::vector<Pixel> out;
    out.reserve(rect.w * rect.h);
    for (std::size_t j = 0; j < rect.h; ++j) {
        auto src = img.row(rect.y + j).subspan(rect.x, rect.w);
        out.insert(out.end(), src.begin(), src.end());
    }
    return Image<Pixel>(rect.w, rect.h, std::move(out));
}

/// BT.601 luma, rounded half-up. Integer weights keep the result exact:
/// (299 r + 587 g + 114 b + 500) / 1000 never exceeds 255.
constexpr std::uint8_t luma(Rgb p) noexcept {
    const unsigned sum = 299u * p.r + 587u * p.g + 114u * p.b + 500u;
    return static_cast<std::uint8_t>(sum / 1000u);
}

inline GrayImage to_grayscale(const RgbImage& img) {
    std::vector<std::uint8_t> out;
    out.reserve(img.size());
    for (const Rgb& p : img.pixels())
        out.push_back(luma(p));
    return GrayImage(img.width(), img.height(), std::move(out));
}

inline RgbImage to_rgb(const GrayImage& img) {
    std::vector<Rgb> out;
    out.reserve(img.size());
    for (std::uint8_t v : img.pixels())
        out.push_back({v, v, v});
    return RgbImage(img.width(), img.height(), std::move(out));
}

} // namespace leafmetric
